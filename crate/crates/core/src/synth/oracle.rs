//! Reference classifier used only for cross-checking.
//!
//! Re-derives the mobility class straight from the per-year country sets,
//! with none of the event-log machinery the production path uses. Intended
//! for exhaustive equivalence tests over small trajectory domains; keep this
//! implementation independent of `events` and `classify`.

use crate::classify::MobilityClass;
use crate::trajectory::Trajectory;
use crate::types::CountrySet;

/// Classifies a trajectory by direct inspection of its year country sets.
pub fn oracle_classify(trajectory: &Trajectory) -> MobilityClass {
    let years: Vec<&CountrySet> = trajectory.profiles.iter().map(|p| &p.s_year).collect();

    // Migration: some consecutive pair of tracked years shares no country.
    for pair in years.windows(2) {
        if pair[0].iter().all(|c| !pair[1].contains(c)) {
            return MobilityClass::Migrant;
        }
    }

    // Directionality without rupture: some later year links a country that
    // never appeared in any earlier year.
    let mut seen = years[0].clone();
    for year in &years[1..] {
        if year.iter().any(|c| !seen.contains(c)) {
            return MobilityClass::TravelerDirectional;
        }
        seen.extend(year.iter().cloned());
    }

    // Multi-country linkage without directionality.
    if years.iter().any(|s| s.len() >= 2) {
        return MobilityClass::TravelerNonDirectional;
    }

    MobilityClass::NotMobile
}
