//! Reconstructs researchers' international mobility from publication
//! records.
//!
//! The pipeline streams JSONL corpora of disambiguated author-publication
//! linkages, folds them into per-researcher affiliation trajectories, derives
//! per-transition mobility events (directionality, country rupture, the
//! E1-E15 event taxonomy), assigns every researcher one of four mobility
//! classes — migrant, traveler (directional), traveler (non-directional),
//! not mobile — and aggregates country-level counts, citation-impact
//! indicators, and migration balance rates.
//!
//! Module map:
//!
//! - [`ingest`] — JSONL parsing, validation reports, bounded-memory streaming
//! - [`trajectory`] — per-author-year affiliation instances and origins
//! - [`events`] — transition predicates and the event taxonomy
//! - [`classify`] — mobility classes and per-country roles
//! - [`indicators`] — citation baselines, MNCS, highly-cited shares, binning
//! - [`aggregate`] — country tables, counting modes, balance rates
//! - [`synth`] — seeded cohort generator, split perturbation, oracle
//! - [`pipeline`] — fused streaming runs used by the CLI

pub mod aggregate;
pub mod classify;
pub mod events;
pub mod indicators;
pub mod ingest;
pub mod pipeline;
pub mod synth;
pub mod trajectory;
pub mod types;

pub use classify::{MobilityClass, ResearcherProfile};
pub use types::{Authorship, Country, CountrySet, DocType, PublicationRecord, YearWindow};

#[cfg(test)]
pub(crate) mod test_util {
    use crate::trajectory::Trajectory;
    use crate::types::{Authorship, Country, CountrySet, DocType, PublicationRecord};

    pub fn set(codes: &[&str]) -> CountrySet {
        codes.iter().map(|c| Country::new(c)).collect()
    }

    pub fn record(
        pub_id: &str,
        year: i32,
        doc_type: &str,
        field: &str,
        citations: u64,
        authors: &[(&str, &[&str])],
    ) -> PublicationRecord {
        PublicationRecord {
            pub_id: pub_id.to_string(),
            year,
            doc_type: DocType::parse_lenient(doc_type),
            field_id: field.to_string(),
            citation_count: citations,
            authorships: authors
                .iter()
                .map(|(id, countries)| Authorship {
                    author_id: id.to_string(),
                    countries: set(countries),
                })
                .collect(),
        }
    }

    /// Trajectory for author "t"; year offsets are relative to 2008 and each
    /// inner slice is one paper's country set.
    pub fn traj(years: &[(i32, Vec<Vec<&str>>)]) -> Trajectory {
        Trajectory::from_year_sets(
            "t",
            years
                .iter()
                .map(|(offset, papers)| {
                    (
                        2008 + offset,
                        papers.iter().map(|p| set(p)).collect::<Vec<CountrySet>>(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    /// Migrates with two ruptures, returning home in between:
    /// GR, GR, BE, BE+GR, GR+BE, GB, GB.
    pub fn researcher_a() -> Trajectory {
        traj(&[
            (0, vec![vec!["GR"], vec!["GR"]]),
            (1, vec![vec!["GR"]]),
            (2, vec![vec!["BE"]]),
            (3, vec![vec!["BE"], vec!["GR"], vec!["GR"]]),
            (4, vec![vec!["GR"], vec!["BE"]]),
            (5, vec![vec!["GB"]]),
            (6, vec![vec!["GB"], vec!["GB"], vec!["GB"]]),
        ])
    }

    /// Migrates once with a co-affiliated bridge year:
    /// ES ×3 years, GB ×2, GB*+IT*, IT ×2.
    pub fn researcher_b() -> Trajectory {
        traj(&[
            (0, vec![vec!["ES"]]),
            (1, vec![vec!["ES"], vec!["ES"], vec!["ES"]]),
            (2, vec![vec!["ES"]]),
            (3, vec![vec!["GB"], vec!["GB"]]),
            (4, vec![vec!["GB"]]),
            (5, vec![vec!["GB", "IT"]]),
            (6, vec![vec!["IT"]]),
            (7, vec![vec!["IT"], vec!["IT"], vec!["IT"]]),
        ])
    }

    /// Gains DE and US through co-affiliations without ever leaving ES.
    pub fn researcher_c() -> Trajectory {
        traj(&[
            (0, (0..15).map(|_| vec!["ES"]).collect()),
            (1, (0..13).map(|_| vec!["ES"]).collect()),
            (2, {
                let mut papers = vec![vec!["DE", "ES"]];
                papers.extend((0..14).map(|_| vec!["ES"]));
                papers.extend((0..2).map(|_| vec!["US", "ES"]));
                papers
            }),
            (3, {
                let mut papers: Vec<Vec<&str>> = (0..7).map(|_| vec!["US", "ES"]).collect();
                papers.extend((0..5).map(|_| vec!["US"]));
                papers
            }),
            (4, {
                let mut papers: Vec<Vec<&str>> = (0..11).map(|_| vec!["US", "ES"]).collect();
                papers.extend((0..9).map(|_| vec!["US"]));
                papers
            }),
        ])
    }

    /// Always co-affiliated with the origin country, adding US, ES, FR.
    pub fn researcher_d() -> Trajectory {
        traj(&[
            (0, (0..3).map(|_| vec!["GB"]).collect()),
            (1, {
                let mut papers: Vec<Vec<&str>> = (0..2).map(|_| vec!["GB"]).collect();
                papers.push(vec!["GB", "US"]);
                papers
            }),
            (2, {
                let mut papers: Vec<Vec<&str>> = (0..3).map(|_| vec!["GB"]).collect();
                papers.push(vec!["GB", "US", "ES"]);
                papers
            }),
            (3, (0..3).map(|_| vec!["GB", "ES"]).collect()),
            (4, (0..2).map(|_| vec!["GB", "ES"]).collect()),
            (5, (0..3).map(|_| vec!["GB", "ES"]).collect()),
            (6, (0..2).map(|_| vec!["GB", "ES", "FR"]).collect()),
        ])
    }
}
