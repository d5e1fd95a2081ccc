//! Maps each researcher's event log to one mobility class and to per-country
//! roles.
//!
//! The four classes partition all researchers:
//!
//! - **Migrant** — at least one rupture transition;
//! - **Traveler (directional)** — no rupture, but some transition adds a
//!   first-ever-seen country;
//! - **Traveler (non-directional)** — no rupture, no directionality, but some
//!   tracked year links the researcher to two or more countries;
//! - **Not mobile** — one country throughout.
//!
//! Country roles follow from the class. Migrants immigrate into every country
//! they gain and emigrate from every country they permanently lose (even when
//! the loss happens without a rupture). Directional travelers go out from
//! their origin countries and come into each newly added country. The other
//! classes carry no roles. Roles are monotone: once gained, never revoked.

use crate::events::{detect_transitions_with_max_gap, EventLog};
use crate::trajectory::Trajectory;
use crate::types::{split_countries, Country, CountrySet};
use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("empty event log (no tracked years)")]
    EmptyEventLog,
    #[error("malformed researcher table: {0}")]
    MalformedTable(String),
}

/// Researcher-level mobility class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MobilityClass {
    NotMobile,
    Migrant,
    TravelerDirectional,
    TravelerNonDirectional,
}

impl MobilityClass {
    pub const ALL: [MobilityClass; 4] = [
        MobilityClass::NotMobile,
        MobilityClass::Migrant,
        MobilityClass::TravelerDirectional,
        MobilityClass::TravelerNonDirectional,
    ];

    pub fn is_mobile(self) -> bool {
        self != MobilityClass::NotMobile
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MobilityClass::NotMobile => "not_mobile",
            MobilityClass::Migrant => "migrant",
            MobilityClass::TravelerDirectional => "traveler_directional",
            MobilityClass::TravelerNonDirectional => "traveler_non_directional",
        }
    }
}

impl fmt::Display for MobilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MobilityClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MobilityClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown mobility class `{s}`"))
    }
}

/// Role a researcher plays from a single country's perspective.
///
/// Declared in lexicographic token order so the derived ordering matches the
/// sorted CSV rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleKind {
    EmigrantFrom,
    ImmigrantTo,
    IncomingTo,
    OutgoingFrom,
}

impl RoleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RoleKind::EmigrantFrom => "emigrant_from",
            RoleKind::ImmigrantTo => "immigrant_to",
            RoleKind::IncomingTo => "incoming_to",
            RoleKind::OutgoingFrom => "outgoing_from",
        }
    }
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "emigrant_from" => Ok(RoleKind::EmigrantFrom),
            "immigrant_to" => Ok(RoleKind::ImmigrantTo),
            "incoming_to" => Ok(RoleKind::IncomingTo),
            "outgoing_from" => Ok(RoleKind::OutgoingFrom),
            _ => Err(format!("unknown role `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryRole {
    pub role: RoleKind,
    pub country: Country,
}

impl CountryRole {
    pub fn new(role: RoleKind, country: impl Into<Country>) -> Self {
        CountryRole {
            role,
            country: country.into(),
        }
    }
}

impl fmt::Display for CountryRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.role, self.country)
    }
}

/// Classified researcher with production counts and country roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResearcherProfile {
    pub author_id: String,
    pub class: MobilityClass,
    pub origin_countries: CountrySet,
    pub first_year: i32,
    pub roles: BTreeSet<CountryRole>,
    pub pub_count_citable: u32,
    pub pub_count_all_docs: u32,
    pub linked_countries: CountrySet,
}

/// Applies the class rules, in precedence order, to a complete event log.
pub fn classify_researcher(log: &EventLog) -> Result<MobilityClass, ClassifyError> {
    if log.tracked_years == 0 {
        return Err(ClassifyError::EmptyEventLog);
    }
    if log.transitions.iter().any(|t| t.rupture) {
        return Ok(MobilityClass::Migrant);
    }
    if log.transitions.iter().any(|t| !t.new_countries.is_empty()) {
        return Ok(MobilityClass::TravelerDirectional);
    }
    if log.any_multi_country_year {
        return Ok(MobilityClass::TravelerNonDirectional);
    }
    Ok(MobilityClass::NotMobile)
}

/// Derives country roles from the event log given the already-computed class.
pub fn assign_country_roles(
    log: &EventLog,
    origin_countries: &CountrySet,
    class: MobilityClass,
) -> BTreeSet<CountryRole> {
    let mut roles = BTreeSet::new();
    match class {
        MobilityClass::Migrant => {
            // Immigrates into every country gained: first-ever additions plus
            // the full destination set of a rupture (covers returns).
            for t in &log.transitions {
                for c in &t.new_countries {
                    roles.insert(CountryRole::new(RoleKind::ImmigrantTo, c.clone()));
                }
                if t.rupture {
                    for c in &t.s_to {
                        roles.insert(CountryRole::new(RoleKind::ImmigrantTo, c.clone()));
                    }
                }
            }
            // Emigrates from every country that never reappears: exactly the
            // linked countries absent from the final tracked year.
            for c in log.linked_countries.difference(&log.final_countries) {
                roles.insert(CountryRole::new(RoleKind::EmigrantFrom, c.clone()));
            }
        }
        MobilityClass::TravelerDirectional => {
            for c in origin_countries {
                roles.insert(CountryRole::new(RoleKind::OutgoingFrom, c.clone()));
            }
            for t in &log.transitions {
                for c in &t.new_countries {
                    roles.insert(CountryRole::new(RoleKind::IncomingTo, c.clone()));
                }
            }
        }
        MobilityClass::TravelerNonDirectional | MobilityClass::NotMobile => {}
    }
    roles
}

/// Full per-researcher pipeline: events, class, roles, counts.
pub fn build_profile(trajectory: &Trajectory) -> Result<ResearcherProfile, ClassifyError> {
    build_profile_with_max_gap(trajectory, None)
}

pub fn build_profile_with_max_gap(
    trajectory: &Trajectory,
    max_gap: Option<u32>,
) -> Result<ResearcherProfile, ClassifyError> {
    let log = detect_transitions_with_max_gap(trajectory, max_gap);
    let class = classify_researcher(&log)?;
    let roles = assign_country_roles(&log, &trajectory.origin_countries, class);
    Ok(ResearcherProfile {
        author_id: trajectory.author_id.clone(),
        class,
        origin_countries: trajectory.origin_countries.clone(),
        first_year: trajectory.first_year,
        roles,
        pub_count_citable: trajectory.pub_count_citable(),
        pub_count_all_docs: trajectory.pub_count_all_docs(),
        linked_countries: log.linked_countries,
    })
}

fn join_roles(roles: &BTreeSet<CountryRole>) -> String {
    let mut out = String::new();
    for (i, r) in roles.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(&r.to_string());
    }
    out
}

/// Writes the researcher table CSV:
/// `author_id,class,origin,first_year,pubs_citable,pubs_all,roles`.
/// Rows are expected sorted by author id; the caller controls iteration
/// order.
pub fn write_researcher_csv<W: Write>(
    writer: W,
    profiles: impl Iterator<Item = ResearcherProfile>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "author_id",
        "class",
        "origin",
        "first_year",
        "pubs_citable",
        "pubs_all",
        "roles",
    ])?;
    for p in profiles {
        write_researcher_row(&mut w, &p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_researcher_row<W: Write>(
    w: &mut csv::Writer<W>,
    p: &ResearcherProfile,
) -> csv::Result<()> {
    w.write_record([
        p.author_id.as_str(),
        p.class.as_str(),
        &crate::types::join_countries(&p.origin_countries),
        &p.first_year.to_string(),
        &p.pub_count_citable.to_string(),
        &p.pub_count_all_docs.to_string(),
        &join_roles(&p.roles),
    ])
}

/// Reads a researcher table back into profiles. Linked countries are
/// reconstructed as origin plus every role country; with the class rules this
/// is exactly the set of countries the researcher ever linked to.
pub fn read_researcher_csv<R: Read>(reader: R) -> Result<Vec<ResearcherProfile>, ClassifyError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut profiles = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| ClassifyError::MalformedTable(e.to_string()))?;
        if row.len() != 7 {
            return Err(ClassifyError::MalformedTable(format!(
                "expected 7 columns, got {}",
                row.len()
            )));
        }
        let class: MobilityClass = row[1].parse().map_err(ClassifyError::MalformedTable)?;
        let origin_countries = split_countries(&row[2]);
        let first_year: i32 = row[3]
            .parse()
            .map_err(|_| ClassifyError::MalformedTable(format!("bad first_year `{}`", &row[3])))?;
        let pub_count_citable: u32 = row[4]
            .parse()
            .map_err(|_| ClassifyError::MalformedTable(format!("bad pubs_citable `{}`", &row[4])))?;
        let pub_count_all_docs: u32 = row[5]
            .parse()
            .map_err(|_| ClassifyError::MalformedTable(format!("bad pubs_all `{}`", &row[5])))?;
        let mut roles = BTreeSet::new();
        for token in row[6].split(';').filter(|t| !t.is_empty()) {
            let (role, country) = token
                .split_once(':')
                .ok_or_else(|| ClassifyError::MalformedTable(format!("bad role `{token}`")))?;
            roles.insert(CountryRole::new(
                role.parse::<RoleKind>().map_err(ClassifyError::MalformedTable)?,
                country,
            ));
        }
        let mut linked_countries = origin_countries.clone();
        linked_countries.extend(roles.iter().map(|r| r.country.clone()));
        profiles.push(ResearcherProfile {
            author_id: row[0].to_string(),
            class,
            origin_countries,
            first_year,
            roles,
            pub_count_citable,
            pub_count_all_docs,
            linked_countries,
        });
    }
    Ok(profiles)
}
