//! Converts trajectories into mobility-event logs.
//!
//! A mobility event describes the pair of affiliation instances a researcher
//! presents at two consecutive tracked years (`t_n`, `t_{n+1}`). Fifteen
//! event codes cover every one- and two-country shape:
//!
//! ```text
//! code  t_n         t_n+1       directional  rupture
//! E1    C1          —           no           no
//! E2    C1          C1          no           no
//! E3    C1          C2          yes          yes
//! E4    C1          C1;C2       yes          no
//! E5    C1          C1*;C2*     yes          no
//! E6    C1;C2       —           no           no
//! E7    C1*;C2*     —           no           no
//! E8    C1*;C2*     C1          no           no
//! E9    C1*;C2*     C2          no           no
//! E10   C1;C2       C1;C2       no           no
//! E11   C1;C2       C1*;C2*     no           no
//! E12   C1;C2       C1          no           no
//! E13   C1;C2       C2          no           no
//! E14   C1*;C2*     C1;C2       no           no
//! E15   C1*;C2*     C1*;C2*     no           no
//! ```
//!
//! `C1;C2` is a multiple-affiliation instance (different papers, different
//! countries), `C1*;C2*` a co-affiliation instance (both countries on one
//! paper). `C1` labels the country established first in the researcher's
//! history; ties are broken lexicographically. Transitions touching three or
//! more distinct countries carry no code — the predicates below still hold
//! and are what classification consumes.
//!
//! Two predicates are computed for every transition, irrespective of codes:
//!
//! - *rupture*: no country of `t_n` survives into `t_{n+1}`;
//! - *directional*: the transition reliably orders two countries in time,
//!   i.e. it is a rupture or it adds a country never seen before in the
//!   trajectory. Re-adding a previously seen country is non-directional.

use crate::trajectory::{Trajectory, YearProfile};
use crate::types::{Country, CountrySet};
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Mobility event code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ECode {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
    E9,
    E10,
    E11,
    E12,
    E13,
    E14,
    E15,
}

impl ECode {
    pub const ALL: [ECode; 15] = [
        ECode::E1,
        ECode::E2,
        ECode::E3,
        ECode::E4,
        ECode::E5,
        ECode::E6,
        ECode::E7,
        ECode::E8,
        ECode::E9,
        ECode::E10,
        ECode::E11,
        ECode::E12,
        ECode::E13,
        ECode::E14,
        ECode::E15,
    ];

    /// Directionality column of the taxonomy table.
    pub fn directionality(self) -> bool {
        matches!(self, ECode::E3 | ECode::E4 | ECode::E5)
    }

    /// Country-rupture column of the taxonomy table.
    pub fn rupture(self) -> bool {
        self == ECode::E3
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ECode::E1 => "E1",
            ECode::E2 => "E2",
            ECode::E3 => "E3",
            ECode::E4 => "E4",
            ECode::E5 => "E5",
            ECode::E6 => "E6",
            ECode::E7 => "E7",
            ECode::E8 => "E8",
            ECode::E9 => "E9",
            ECode::E10 => "E10",
            ECode::E11 => "E11",
            ECode::E12 => "E12",
            ECode::E13 => "E13",
            ECode::E14 => "E14",
            ECode::E15 => "E15",
        }
    }
}

impl fmt::Display for ECode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ECode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ECode::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown event code `{s}`"))
    }
}

/// How a researcher-year presents for event matching. Co-affiliation takes
/// precedence when a year shows both co and multiple affiliation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Single,
    Co,
    Multi,
}

pub fn instance_kind(profile: &YearProfile) -> InstanceKind {
    if profile.s_year.len() == 1 {
        InstanceKind::Single
    } else if profile.has_co {
        InstanceKind::Co
    } else {
        InstanceKind::Multi
    }
}

/// Chronologically accumulated affiliation history: for each country, the
/// first tracked year it appeared in.
#[derive(Debug, Clone, Default)]
pub struct History {
    first_seen: BTreeMap<Country, i32>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, year: i32, countries: &CountrySet) {
        for c in countries {
            self.first_seen.entry(c.clone()).or_insert(year);
        }
    }

    pub fn contains(&self, country: &Country) -> bool {
        self.first_seen.contains_key(country)
    }

    pub fn first_seen_year(&self, country: &Country) -> Option<i32> {
        self.first_seen.get(country).copied()
    }

    pub fn union(&self) -> CountrySet {
        self.first_seen.keys().cloned().collect()
    }

    /// The country of a pair established first: earlier first-seen year wins,
    /// lexicographic order breaks ties (including countries that appeared
    /// together in one year).
    fn established_first<'a>(&self, set: &'a CountrySet) -> &'a Country {
        set.iter()
            .min_by_key(|c| (self.first_seen_year(c).unwrap_or(i32::MAX), (*c).clone()))
            .expect("non-empty set")
    }
}

/// One transition between consecutive tracked years.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionEvent {
    pub author_id: String,
    pub year_from: i32,
    pub year_to: i32,
    pub s_from: CountrySet,
    pub s_to: CountrySet,
    /// Countries never seen in any tracked year up to and including
    /// `year_from`.
    pub new_countries: CountrySet,
    /// Countries gained relative to `s_from` that were already in history.
    pub reappeared_countries: CountrySet,
    pub lost_countries: CountrySet,
    pub rupture: bool,
    pub directional: bool,
    pub e_codes: BTreeSet<ECode>,
    pub from_has_co: bool,
    pub from_has_multi: bool,
    pub to_has_co: bool,
    pub to_has_multi: bool,
}

/// Event describing a trajectory with a single tracked year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingletonEvent {
    pub author_id: String,
    pub year: i32,
    pub e_code: ECode,
}

/// Complete event log of one researcher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub author_id: String,
    pub first_year: i32,
    pub origin_countries: CountrySet,
    pub transitions: Vec<TransitionEvent>,
    /// Present iff the trajectory has exactly one tracked year.
    pub singleton: Option<SingletonEvent>,
    /// Some tracked year links the researcher to two or more countries.
    pub any_multi_country_year: bool,
    pub linked_countries: CountrySet,
    /// Country set of the last tracked year.
    pub final_countries: CountrySet,
    pub tracked_years: u32,
}

/// Matches a pair of consecutive tracked-year profiles (or a lone profile,
/// `to = None`) against the event taxonomy.
///
/// `history` must reflect every tracked year up to and including `from`.
/// Codes are returned only when the table row's directionality and rupture
/// columns agree with the computed predicates, so E4/E5 require the added
/// country to be genuinely new to the trajectory.
pub fn e_code_match(
    from: &YearProfile,
    to: Option<&YearProfile>,
    history: &History,
) -> BTreeSet<ECode> {
    let mut codes = BTreeSet::new();
    let to = match to {
        None => {
            codes.insert(match instance_kind(from) {
                InstanceKind::Single => ECode::E1,
                InstanceKind::Multi => ECode::E6,
                InstanceKind::Co => ECode::E7,
            });
            return codes;
        }
        Some(to) => to,
    };

    let s_from = &from.s_year;
    let s_to = &to.s_year;
    let involved: CountrySet = s_from.union(s_to).cloned().collect();
    if involved.len() > 2 {
        return codes;
    }

    match (instance_kind(from), instance_kind(to)) {
        (InstanceKind::Single, InstanceKind::Single) => {
            codes.insert(if s_from == s_to { ECode::E2 } else { ECode::E3 });
        }
        (InstanceKind::Single, to_kind) => {
            // Two countries total implies s_to = {old, added}.
            let added_is_new = s_to.difference(s_from).all(|c| !history.contains(c));
            if added_is_new {
                codes.insert(match to_kind {
                    InstanceKind::Multi => ECode::E4,
                    _ => ECode::E5,
                });
            }
        }
        (from_kind, InstanceKind::Single) => {
            let kept = s_to.iter().next().expect("single instance");
            let keeps_first = kept == history.established_first(s_from);
            codes.insert(match (from_kind, keeps_first) {
                (InstanceKind::Co, true) => ECode::E8,
                (InstanceKind::Co, false) => ECode::E9,
                (_, true) => ECode::E12,
                (_, false) => ECode::E13,
            });
        }
        (from_kind, to_kind) => {
            // Both years span the same two countries.
            debug_assert_eq!(s_from, s_to);
            codes.insert(match (from_kind, to_kind) {
                (InstanceKind::Multi, InstanceKind::Multi) => ECode::E10,
                (InstanceKind::Multi, InstanceKind::Co) => ECode::E11,
                (InstanceKind::Co, InstanceKind::Multi) => ECode::E14,
                _ => ECode::E15,
            });
        }
    }
    codes
}

/// Scans a trajectory into its event log with default (unlimited) gap
/// semantics: the next point in time is the next tracked year.
pub fn detect_transitions(trajectory: &Trajectory) -> EventLog {
    detect_transitions_with_max_gap(trajectory, None)
}

/// As [`detect_transitions`], but pairs of tracked years further apart than
/// `max_gap` calendar years produce no transition event (history still
/// accumulates across the gap).
pub fn detect_transitions_with_max_gap(trajectory: &Trajectory, max_gap: Option<u32>) -> EventLog {
    let profiles = &trajectory.profiles;
    let mut history = History::new();
    history.observe(profiles[0].year, &profiles[0].s_year);

    let mut any_multi = profiles[0].s_year.len() >= 2;
    let mut transitions = Vec::with_capacity(profiles.len().saturating_sub(1));
    for pair in profiles.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        any_multi |= to.s_year.len() >= 2;
        let within_gap = match max_gap {
            None => true,
            Some(gap) => (to.year - from.year) as u32 <= gap,
        };
        if within_gap {
            let new_countries: CountrySet = to
                .s_year
                .iter()
                .filter(|c| !history.contains(c))
                .cloned()
                .collect();
            let gained: CountrySet = to.s_year.difference(&from.s_year).cloned().collect();
            let reappeared_countries: CountrySet =
                gained.difference(&new_countries).cloned().collect();
            let lost_countries: CountrySet =
                from.s_year.difference(&to.s_year).cloned().collect();
            let rupture = from.s_year.is_disjoint(&to.s_year);
            let directional = rupture || !new_countries.is_empty();
            let e_codes = e_code_match(from, Some(to), &history);
            transitions.push(TransitionEvent {
                author_id: trajectory.author_id.clone(),
                year_from: from.year,
                year_to: to.year,
                s_from: from.s_year.clone(),
                s_to: to.s_year.clone(),
                new_countries,
                reappeared_countries,
                lost_countries,
                rupture,
                directional,
                e_codes,
                from_has_co: from.has_co,
                from_has_multi: from.has_multi,
                to_has_co: to.has_co,
                to_has_multi: to.has_multi,
            });
        }
        history.observe(to.year, &to.s_year);
    }

    let singleton = (profiles.len() == 1).then(|| SingletonEvent {
        author_id: trajectory.author_id.clone(),
        year: profiles[0].year,
        e_code: *e_code_match(&profiles[0], None, &history)
            .iter()
            .next()
            .expect("singleton match always yields one code"),
    });

    EventLog {
        author_id: trajectory.author_id.clone(),
        first_year: trajectory.first_year,
        origin_countries: trajectory.origin_countries.clone(),
        transitions,
        singleton,
        any_multi_country_year: any_multi,
        linked_countries: history.union(),
        final_countries: profiles.last().expect("non-empty trajectory").s_year.clone(),
        tracked_years: profiles.len() as u32,
    }
}

fn join_codes(codes: &BTreeSet<ECode>) -> String {
    let mut out = String::new();
    for (i, c) in codes.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(c.as_str());
    }
    out
}

/// Writes the events log CSV:
/// `author_id,year_from,year_to,s_from,s_to,new,lost,reappeared,rupture,directional,e_codes`.
/// Single-tracked-year researchers appear as one row with equal years.
pub fn write_events_csv<W: Write>(
    writer: W,
    logs: impl Iterator<Item = EventLog>,
) -> csv::Result<()> {
    use crate::types::join_countries;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "author_id",
        "year_from",
        "year_to",
        "s_from",
        "s_to",
        "new",
        "lost",
        "reappeared",
        "rupture",
        "directional",
        "e_codes",
    ])?;
    for log in logs {
        if let Some(single) = &log.singleton {
            let s = join_countries(&log.origin_countries);
            let mut codes = BTreeSet::new();
            codes.insert(single.e_code);
            w.write_record([
                single.author_id.as_str(),
                &single.year.to_string(),
                &single.year.to_string(),
                &s,
                &s,
                "",
                "",
                "",
                "false",
                "false",
                &join_codes(&codes),
            ])?;
        }
        for t in &log.transitions {
            w.write_record([
                t.author_id.as_str(),
                &t.year_from.to_string(),
                &t.year_to.to_string(),
                &join_countries(&t.s_from),
                &join_countries(&t.s_to),
                &join_countries(&t.new_countries),
                &join_countries(&t.lost_countries),
                &join_countries(&t.reappeared_countries),
                if t.rupture { "true" } else { "false" },
                if t.directional { "true" } else { "false" },
                &join_codes(&t.e_codes),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
