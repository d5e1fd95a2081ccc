//! Country-level aggregation of classified researchers.
//!
//! Two counting rules coexist:
//!
//! - *linkage counting* — a researcher counts once toward every country they
//!   ever linked to, per class (so a migrant contributes to both the country
//!   they left and the one they arrived in);
//! - *role counting* — distinct researchers per (country, role) for the four
//!   directional roles; non-directional travelers contribute nothing.
//!
//! Balance rates are normalized differences in [-1, 1]:
//! `(immigrants - emigrants) / (immigrants + emigrants)` for migrants and
//! `(incoming - outgoing) / (incoming + outgoing)` for directional travelers,
//! undefined when the denominator is zero.

use crate::classify::{MobilityClass, ResearcherProfile, RoleKind};
use crate::types::Country;
use std::collections::BTreeMap;
use std::io::Write;

/// Per-class researcher counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub not_mobile: u64,
    pub migrant: u64,
    pub traveler_directional: u64,
    pub traveler_non_directional: u64,
}

impl ClassCounts {
    pub fn bump(&mut self, class: MobilityClass) {
        match class {
            MobilityClass::NotMobile => self.not_mobile += 1,
            MobilityClass::Migrant => self.migrant += 1,
            MobilityClass::TravelerDirectional => self.traveler_directional += 1,
            MobilityClass::TravelerNonDirectional => self.traveler_non_directional += 1,
        }
    }

    pub fn get(&self, class: MobilityClass) -> u64 {
        match class {
            MobilityClass::NotMobile => self.not_mobile,
            MobilityClass::Migrant => self.migrant,
            MobilityClass::TravelerDirectional => self.traveler_directional,
            MobilityClass::TravelerNonDirectional => self.traveler_non_directional,
        }
    }

    pub fn mobile(&self) -> u64 {
        self.migrant + self.traveler_directional + self.traveler_non_directional
    }

    pub fn total(&self) -> u64 {
        self.not_mobile + self.mobile()
    }
}

/// All counts and rates for one country.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountryAggregate {
    pub country: Country,
    pub by_class: ClassCounts,
    pub emigrants: u64,
    pub immigrants: u64,
    pub outgoing: u64,
    pub incoming: u64,
    pub migrant_balance: Option<f64>,
    pub traveler_balance: Option<f64>,
}

impl CountryAggregate {
    pub fn total_directional_roles(&self) -> u64 {
        self.emigrants + self.immigrants + self.outgoing + self.incoming
    }
}

/// Normalized difference `(inflow - outflow) / (inflow + outflow)`;
/// `None` when both are zero.
pub fn balance_rate(inflow: u64, outflow: u64) -> Option<f64> {
    let total = inflow + outflow;
    (total > 0).then(|| (inflow as f64 - outflow as f64) / total as f64)
}

/// Both balance rates of an aggregate.
pub fn balance_rates(agg: &CountryAggregate) -> (Option<f64>, Option<f64>) {
    (
        balance_rate(agg.immigrants, agg.emigrants),
        balance_rate(agg.incoming, agg.outgoing),
    )
}

/// Linkage counting: each researcher counts once per linked country, under
/// their class.
pub fn country_class_counts<'a>(
    profiles: impl IntoIterator<Item = &'a ResearcherProfile>,
) -> BTreeMap<Country, ClassCounts> {
    let mut map: BTreeMap<Country, ClassCounts> = BTreeMap::new();
    for profile in profiles {
        for country in &profile.linked_countries {
            map.entry(country.clone()).or_default().bump(profile.class);
        }
    }
    map
}

/// Per-country role counts; one researcher counts at most once per
/// (country, role).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoleCounts {
    pub emigrants: u64,
    pub immigrants: u64,
    pub outgoing: u64,
    pub incoming: u64,
}

pub fn country_role_counts<'a>(
    profiles: impl IntoIterator<Item = &'a ResearcherProfile>,
) -> BTreeMap<Country, RoleCounts> {
    let mut map: BTreeMap<Country, RoleCounts> = BTreeMap::new();
    for profile in profiles {
        for role in &profile.roles {
            let counts = map.entry(role.country.clone()).or_default();
            match role.role {
                RoleKind::EmigrantFrom => counts.emigrants += 1,
                RoleKind::ImmigrantTo => counts.immigrants += 1,
                RoleKind::OutgoingFrom => counts.outgoing += 1,
                RoleKind::IncomingTo => counts.incoming += 1,
            }
        }
    }
    map
}

/// Builds complete per-country aggregates (class counts, role counts,
/// balances) in one pass.
pub fn aggregate_countries<'a>(
    profiles: impl IntoIterator<Item = &'a ResearcherProfile> + Copy,
) -> BTreeMap<Country, CountryAggregate> {
    let class_counts = country_class_counts(profiles);
    let role_counts = country_role_counts(profiles);
    let mut map: BTreeMap<Country, CountryAggregate> = BTreeMap::new();
    for (country, by_class) in class_counts {
        map.entry(country.clone()).or_insert_with(|| CountryAggregate {
            country,
            ..Default::default()
        }).by_class = by_class;
    }
    for (country, roles) in role_counts {
        let agg = map.entry(country.clone()).or_insert_with(|| CountryAggregate {
            country,
            ..Default::default()
        });
        agg.emigrants = roles.emigrants;
        agg.immigrants = roles.immigrants;
        agg.outgoing = roles.outgoing;
        agg.incoming = roles.incoming;
    }
    for agg in map.values_mut() {
        let (m, t) = balance_rates(agg);
        agg.migrant_balance = m;
        agg.traveler_balance = t;
    }
    map
}

/// Keeps researchers with at least `min_pubs` citable publications.
pub fn apply_min_pub_threshold(
    profiles: &[ResearcherProfile],
    min_pubs: u32,
) -> impl Iterator<Item = &ResearcherProfile> {
    profiles.iter().filter(move |p| p.pub_count_citable >= min_pubs)
}

/// Counting rule selector exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingMode {
    Linkage,
    Roles,
}

impl std::str::FromStr for CountingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linkage" => Ok(CountingMode::Linkage),
            "roles" => Ok(CountingMode::Roles),
            _ => Err(format!("unknown counting mode `{s}` (expected linkage|roles)")),
        }
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Long-format country CSV: `country,class_or_role,count`.
pub fn write_country_csv<W: Write>(
    writer: W,
    aggregates: &BTreeMap<Country, CountryAggregate>,
    mode: CountingMode,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["country", "class_or_role", "count"])?;
    for (country, agg) in aggregates {
        match mode {
            CountingMode::Linkage => {
                for class in MobilityClass::ALL {
                    w.write_record([
                        country.as_str(),
                        class.as_str(),
                        &agg.by_class.get(class).to_string(),
                    ])?;
                }
            }
            CountingMode::Roles => {
                for (name, count) in [
                    ("emigrants", agg.emigrants),
                    ("immigrants", agg.immigrants),
                    ("outgoing", agg.outgoing),
                    ("incoming", agg.incoming),
                ] {
                    w.write_record([country.as_str(), name, &count.to_string()])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Wide-format country CSV with every class and role column.
pub fn write_country_wide_csv<W: Write>(
    writer: W,
    aggregates: &BTreeMap<Country, CountryAggregate>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "country",
        "not_mobile",
        "migrant",
        "traveler_directional",
        "traveler_non_directional",
        "emigrants",
        "immigrants",
        "outgoing",
        "incoming",
    ])?;
    for (country, agg) in aggregates {
        w.write_record([
            country.as_str(),
            &agg.by_class.not_mobile.to_string(),
            &agg.by_class.migrant.to_string(),
            &agg.by_class.traveler_directional.to_string(),
            &agg.by_class.traveler_non_directional.to_string(),
            &agg.emigrants.to_string(),
            &agg.immigrants.to_string(),
            &agg.outgoing.to_string(),
            &agg.incoming.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Balance CSV: `country,migrant_balance,traveler_balance`, empty fields for
/// undefined rates.
pub fn write_balance_csv<W: Write>(
    writer: W,
    aggregates: &BTreeMap<Country, CountryAggregate>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["country", "migrant_balance", "traveler_balance"])?;
    for (country, agg) in aggregates {
        w.write_record([
            country.as_str(),
            &fmt_opt(agg.migrant_balance),
            &fmt_opt(agg.traveler_balance),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn top_countries<'a>(
    aggregates: &'a BTreeMap<Country, CountryAggregate>,
    key: impl Fn(&CountryAggregate) -> u64,
    top: Option<usize>,
) -> Vec<&'a CountryAggregate> {
    let mut rows: Vec<&CountryAggregate> = aggregates.values().collect();
    rows.sort_by(|a, b| key(b).cmp(&key(a)).then_with(|| a.country.cmp(&b.country)));
    if let Some(n) = rows.iter().position(|r| key(r) == 0) {
        rows.truncate(n);
    }
    if let Some(top) = top {
        rows.truncate(top);
    }
    rows
}

/// Mobile-researcher counts per country, broken down by mobility class
/// (linkage counting), sorted by total mobile descending.
pub fn write_mobile_classes_csv<W: Write>(
    writer: W,
    aggregates: &BTreeMap<Country, CountryAggregate>,
    top: Option<usize>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "country",
        "migrant",
        "traveler_directional",
        "traveler_non_directional",
        "total_mobile",
    ])?;
    for agg in top_countries(aggregates, |a| a.by_class.mobile(), top) {
        w.write_record([
            agg.country.as_str(),
            &agg.by_class.migrant.to_string(),
            &agg.by_class.traveler_directional.to_string(),
            &agg.by_class.traveler_non_directional.to_string(),
            &agg.by_class.mobile().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Directional-role counts per country, sorted by total roles descending.
pub fn write_directional_roles_csv<W: Write>(
    writer: W,
    aggregates: &BTreeMap<Country, CountryAggregate>,
    top: Option<usize>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "country",
        "emigrants",
        "immigrants",
        "outgoing",
        "incoming",
        "total_directional",
    ])?;
    for agg in top_countries(aggregates, CountryAggregate::total_directional_roles, top) {
        w.write_record([
            agg.country.as_str(),
            &agg.emigrants.to_string(),
            &agg.immigrants.to_string(),
            &agg.outgoing.to_string(),
            &agg.incoming.to_string(),
            &agg.total_directional_roles().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mobility composition shares per country (fractions of its mobile
/// researchers under linkage counting).
pub fn write_composition_csv<W: Write>(
    writer: W,
    aggregates: &BTreeMap<Country, CountryAggregate>,
    top: Option<usize>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "country",
        "share_migrant",
        "share_traveler_directional",
        "share_traveler_non_directional",
    ])?;
    for agg in top_countries(aggregates, |a| a.by_class.mobile(), top) {
        let mobile = agg.by_class.mobile() as f64;
        w.write_record([
            agg.country.as_str(),
            &format!("{:.6}", agg.by_class.migrant as f64 / mobile),
            &format!("{:.6}", agg.by_class.traveler_directional as f64 / mobile),
            &format!("{:.6}", agg.by_class.traveler_non_directional as f64 / mobile),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::build_profile;
    use crate::test_util::{researcher_b, set, traj};
    use crate::trajectory::Trajectory;

    fn profile(t: &Trajectory) -> ResearcherProfile {
        build_profile(t).unwrap()
    }

    #[test]
    fn linkage_counts_every_linked_country() {
        let profiles = vec![profile(&researcher_b())];
        let counts = country_class_counts(&profiles);
        for code in ["ES", "GB", "IT"] {
            assert_eq!(counts[&Country::new(code)].migrant, 1, "{code}");
        }
    }

    #[test]
    fn not_mobile_counts_origin_only() {
        let profiles = vec![profile(&traj(&[(0, vec![vec!["ES"]]), (1, vec![vec!["ES"]])]))];
        let counts = country_class_counts(&profiles);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&Country::new("ES")].not_mobile, 1);
    }

    #[test]
    fn non_directional_traveler_counts_both_origins() {
        let profiles = vec![profile(&traj(&[(0, vec![vec!["C1", "C2"]])]))];
        let counts = country_class_counts(&profiles);
        assert_eq!(counts[&Country::new("C1")].traveler_non_directional, 1);
        assert_eq!(counts[&Country::new("C2")].traveler_non_directional, 1);
    }

    #[test]
    fn role_counts_allow_both_sides_for_one_country() {
        // A migrant who both arrived in and later left a country counts in
        // both columns there.
        let profiles = vec![profile(&researcher_b())];
        let counts = country_role_counts(&profiles);
        let gb = counts[&Country::new("GB")];
        assert_eq!(gb.emigrants, 1);
        assert_eq!(gb.immigrants, 1);
        assert_eq!(counts[&Country::new("ES")].emigrants, 1);
        assert_eq!(counts[&Country::new("IT")].immigrants, 1);
    }

    #[test]
    fn non_directional_travelers_contribute_no_roles() {
        let profiles = vec![profile(&traj(&[(0, vec![vec!["C1", "C2"]])]))];
        assert!(country_role_counts(&profiles).is_empty());
    }

    #[test]
    fn balance_examples() {
        assert_eq!(balance_rate(5, 5), Some(0.0));
        assert_eq!(balance_rate(84, 16), Some(0.68));
        assert_eq!(balance_rate(0, 0), None);
        assert_eq!(balance_rate(3, 0), Some(1.0));
        // Sign flips when the two counts swap.
        assert_eq!(balance_rate(16, 84), Some(-0.68));
    }

    #[test]
    fn aggregates_combine_counts_and_balances() {
        let profiles = vec![profile(&researcher_b())];
        let aggs = aggregate_countries(&profiles);
        let gb = &aggs[&Country::new("GB")];
        assert_eq!(gb.by_class.migrant, 1);
        assert_eq!(gb.migrant_balance, Some(0.0));
        assert_eq!(gb.traveler_balance, None);
    }

    #[test]
    fn threshold_filters_by_citable_count() {
        let mut low = profile(&traj(&[(0, vec![vec!["ES"]])]));
        low.pub_count_citable = 3;
        let mut high = profile(&traj(&[(0, vec![vec!["GB"]])]));
        high.pub_count_citable = 7;
        let profiles = vec![low, high];
        assert_eq!(apply_min_pub_threshold(&profiles, 0).count(), 2);
        assert_eq!(apply_min_pub_threshold(&profiles, 5).count(), 1);
        assert_eq!(apply_min_pub_threshold(&profiles, 10).count(), 0);
    }

    #[test]
    fn linkage_sum_bounds_class_totals() {
        let profiles = vec![
            profile(&researcher_b()),
            profile(&traj(&[(0, vec![vec!["ES"]])])),
        ];
        let counts = country_class_counts(&profiles);
        let linkage_migrants: u64 = counts.values().map(|c| c.migrant).sum();
        let migrants = profiles.iter().filter(|p| p.class == MobilityClass::Migrant).count() as u64;
        assert!(linkage_migrants >= migrants);
        // Single-country researchers contribute exactly once.
        let linkage_not_mobile: u64 = counts.values().map(|c| c.not_mobile).sum();
        assert_eq!(linkage_not_mobile, 1);
    }

    #[test]
    fn wide_csv_row_shape() {
        let profiles = vec![profile(&researcher_b())];
        let aggs = aggregate_countries(&profiles);
        let mut out = Vec::new();
        write_country_wide_csv(&mut out, &aggs).unwrap();
        let text = String::from_utf8(out).unwrap();
        let gb = text.lines().find(|l| l.starts_with("GB,")).unwrap();
        assert_eq!(gb, "GB,0,1,0,0,1,1,0,0");
        assert_eq!(profiles[0].origin_countries, set(&["ES"]));
    }
}
