//! Folds the record stream into per-researcher, per-year affiliation
//! profiles.
//!
//! A *tracked year* is a calendar year in which a researcher has at least one
//! publication of any document type. Each tracked year is summarized by an
//! affiliation instance: the multiset of per-paper country sets, its union
//! (`s_year`), and two flags:
//!
//! - `has_co`: some single paper links the researcher to two or more
//!   countries (co-affiliation);
//! - `has_multi`: two papers in the year carry different country sets
//!   (multiple affiliation).
//!
//! The first tracked year's `s_year` is the researcher's country (or
//! countries) of origin; the year of first publication anchors academic age.
//!
//! Internally the builder interns country codes and keeps one compact
//! accumulator per author-year, so memory scales with the number of
//! author-year summaries rather than with corpus size.

use crate::types::{Country, CountrySet, PublicationRecord};
use smallvec::SmallVec;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrajectoryError {
    #[error("empty affiliation instance: no publications in year")]
    EmptyInstance,
    #[error("publication with empty country set")]
    EmptyCountrySet,
    #[error("observation year {observed} precedes first publication year {first}")]
    ObservationBeforeFirst { observed: i32, first: i32 },
}

/// One researcher-year: the per-paper country sets and derived instance
/// flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearProfile {
    pub author_id: String,
    pub year: i32,
    /// Distinct per-paper country sets with multiplicities, sorted.
    pub paper_country_sets: Vec<(CountrySet, u32)>,
    /// Union of all country sets of the year.
    pub s_year: CountrySet,
    pub has_co: bool,
    pub has_multi: bool,
    pub pub_count_all_docs: u32,
    pub pub_count_citable: u32,
}

impl YearProfile {
    /// Builds a profile from raw per-paper country sets (all doc types).
    /// `citable` is tracked separately by the builder; this constructor sets
    /// it to zero and is mainly useful for tests and enumeration harnesses.
    pub fn from_paper_sets(
        author_id: impl Into<String>,
        year: i32,
        sets: &[CountrySet],
    ) -> Result<YearProfile, TrajectoryError> {
        let mut multiset: BTreeMap<CountrySet, u32> = BTreeMap::new();
        for set in sets {
            if set.is_empty() {
                return Err(TrajectoryError::EmptyCountrySet);
            }
            *multiset.entry(set.clone()).or_insert(0) += 1;
        }
        let paper_country_sets: Vec<(CountrySet, u32)> = multiset.into_iter().collect();
        let (s_year, has_co, has_multi) = classify_affiliation_instance(&paper_country_sets)?;
        Ok(YearProfile {
            author_id: author_id.into(),
            year,
            s_year,
            has_co,
            has_multi,
            pub_count_all_docs: sets.len() as u32,
            pub_count_citable: 0,
            paper_country_sets,
        })
    }
}

/// Derives `(s_year, has_co, has_multi)` from a year's multiset of per-paper
/// country sets.
///
/// The year is a single-affiliation instance iff the union has one country;
/// a co-affiliation instance iff some paper carries two or more countries;
/// a multiple-affiliation instance iff two papers carry different sets.
pub fn classify_affiliation_instance(
    paper_country_sets: &[(CountrySet, u32)],
) -> Result<(CountrySet, bool, bool), TrajectoryError> {
    if paper_country_sets.is_empty() {
        return Err(TrajectoryError::EmptyInstance);
    }
    let mut s_year = CountrySet::new();
    let mut has_co = false;
    for (set, _) in paper_country_sets {
        if set.is_empty() {
            return Err(TrajectoryError::EmptyCountrySet);
        }
        has_co |= set.len() >= 2;
        s_year.extend(set.iter().cloned());
    }
    let has_multi = paper_country_sets.len() >= 2;
    Ok((s_year, has_co, has_multi))
}

/// A researcher's tracked years in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub author_id: String,
    pub profiles: Vec<YearProfile>,
    pub first_year: i32,
    /// `s_year` of the first tracked year; may hold two or more countries.
    pub origin_countries: CountrySet,
}

impl Trajectory {
    /// Assembles a trajectory from per-year paper sets. Years need not be
    /// sorted on input; they are sorted here. Duplicate years are rejected by
    /// debug assertion only (callers own that invariant).
    pub fn from_year_sets(
        author_id: impl Into<String>,
        years: Vec<(i32, Vec<CountrySet>)>,
    ) -> Result<Trajectory, TrajectoryError> {
        let author_id = author_id.into();
        if years.is_empty() {
            return Err(TrajectoryError::EmptyInstance);
        }
        let mut years = years;
        years.sort_by_key(|(y, _)| *y);
        let mut profiles = Vec::with_capacity(years.len());
        for (year, sets) in &years {
            debug_assert!(profiles.iter().all(|p: &YearProfile| p.year != *year));
            profiles.push(YearProfile::from_paper_sets(author_id.clone(), *year, sets)?);
        }
        let first_year = profiles[0].year;
        let origin_countries = profiles[0].s_year.clone();
        Ok(Trajectory {
            author_id,
            profiles,
            first_year,
            origin_countries,
        })
    }

    /// Union of every tracked year's country set.
    pub fn linked_countries(&self) -> CountrySet {
        let mut all = CountrySet::new();
        for p in &self.profiles {
            all.extend(p.s_year.iter().cloned());
        }
        all
    }

    pub fn pub_count_all_docs(&self) -> u32 {
        self.profiles.iter().map(|p| p.pub_count_all_docs).sum()
    }

    pub fn pub_count_citable(&self) -> u32 {
        self.profiles.iter().map(|p| p.pub_count_citable).sum()
    }
}

/// Years elapsed since first publication (zero-based).
pub fn academic_age(trajectory: &Trajectory, observation_year: i32) -> Result<u32, TrajectoryError> {
    if observation_year < trajectory.first_year {
        return Err(TrajectoryError::ObservationBeforeFirst {
            observed: observation_year,
            first: trajectory.first_year,
        });
    }
    Ok((observation_year - trajectory.first_year) as u32)
}

// ---------------------------------------------------------------------------
// Compact streaming fold
// ---------------------------------------------------------------------------

type CodeId = u32;
/// Interned country set; inline for up to three codes.
type CompactSet = SmallVec<[CodeId; 3]>;

#[derive(Default)]
struct CountryInterner {
    ids: HashMap<Country, CodeId>,
    names: Vec<Country>,
}

impl CountryInterner {
    fn intern(&mut self, country: &Country) -> CodeId {
        if let Some(id) = self.ids.get(country) {
            return *id;
        }
        let id = self.names.len() as CodeId;
        self.names.push(country.clone());
        self.ids.insert(country.clone(), id);
        id
    }

    fn resolve(&self, set: &CompactSet) -> CountrySet {
        set.iter().map(|id| self.names[*id as usize].clone()).collect()
    }
}

#[derive(Debug, Default)]
struct YearAcc {
    /// Distinct compact sets with multiplicities; inline for the common
    /// single-set case.
    sets: SmallVec<[(CompactSet, u32); 1]>,
    pubs_all: u32,
    pubs_citable: u32,
}

impl YearAcc {
    fn add(&mut self, set: CompactSet, citable: bool) {
        self.pubs_all += 1;
        if citable {
            self.pubs_citable += 1;
        }
        match self.sets.iter_mut().find(|(s, _)| *s == set) {
            Some((_, n)) => *n += 1,
            None => self.sets.push((set, 1)),
        }
    }
}

#[derive(Debug, Default)]
struct AuthorAcc {
    /// (year, accumulator); unsorted until materialization. Authors rarely
    /// exceed a handful of tracked years, so linear search beats a tree.
    /// Inline capacity of one keeps the common single-year author heap-free.
    years: SmallVec<[(i32, YearAcc); 1]>,
}

/// Streaming fold of publication records into trajectories.
///
/// Records may arrive in any order; the result is independent of input
/// permutation. Memory is proportional to distinct (author, year, country
/// set) summaries, not to the number of records.
#[derive(Default)]
pub struct TrajectoryBuilder {
    interner: CountryInterner,
    authors: HashMap<String, AuthorAcc>,
    links: u64,
}

impl TrajectoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one record: each authorship contributes one paper-country-set
    /// observation to that author's year.
    pub fn push_record(&mut self, record: &PublicationRecord) {
        let citable = record.doc_type.is_citable();
        for authorship in &record.authorships {
            let mut set: CompactSet =
                authorship.countries.iter().map(|c| self.interner.intern(c)).collect();
            set.sort_unstable();
            let acc = self.authors.entry(authorship.author_id.clone()).or_default();
            match acc.years.iter_mut().find(|(y, _)| *y == record.year) {
                Some((_, year_acc)) => year_acc.add(set, citable),
                None => {
                    let mut year_acc = YearAcc::default();
                    year_acc.add(set, citable);
                    acc.years.push((record.year, year_acc));
                }
            }
            self.links += 1;
        }
    }

    /// Number of distinct authors folded so far.
    pub fn author_count(&self) -> usize {
        self.authors.len()
    }

    /// Total (author, publication) links folded so far.
    pub fn link_count(&self) -> u64 {
        self.links
    }

    fn materialize(interner: &CountryInterner, author_id: String, acc: AuthorAcc) -> Trajectory {
        let mut years = acc.years;
        years.sort_by_key(|(y, _)| *y);
        let mut profiles = Vec::with_capacity(years.len());
        for (year, year_acc) in years {
            let mut paper_country_sets: Vec<(CountrySet, u32)> = year_acc
                .sets
                .iter()
                .map(|(set, n)| (interner.resolve(set), *n))
                .collect();
            paper_country_sets.sort();
            let (s_year, has_co, has_multi) = classify_affiliation_instance(&paper_country_sets)
                .expect("builder never stores empty instances");
            profiles.push(YearProfile {
                author_id: author_id.clone(),
                year,
                paper_country_sets,
                s_year,
                has_co,
                has_multi,
                pub_count_all_docs: year_acc.pubs_all,
                pub_count_citable: year_acc.pubs_citable,
            });
        }
        let first_year = profiles[0].year;
        let origin_countries = profiles[0].s_year.clone();
        Trajectory {
            author_id,
            profiles,
            first_year,
            origin_countries,
        }
    }

    /// Consumes the builder, yielding trajectories sorted by author id. Each
    /// trajectory is materialized lazily and can be dropped by the consumer,
    /// keeping peak memory at one materialized author above the fold state.
    pub fn into_trajectories(mut self) -> impl Iterator<Item = Trajectory> {
        let mut ids: Vec<String> = self.authors.keys().cloned().collect();
        ids.sort_unstable();
        let interner = self.interner;
        let mut authors = std::mem::take(&mut self.authors);
        ids.into_iter().map(move |id| {
            let acc = authors.remove(&id).expect("id collected from map");
            Self::materialize(&interner, id, acc)
        })
    }

    /// Convenience collector for tests and small corpora.
    pub fn into_map(self) -> BTreeMap<String, Trajectory> {
        self.into_trajectories().map(|t| (t.author_id.clone(), t)).collect()
    }
}

/// Builds all trajectories from an in-memory record slice.
pub fn build_trajectories(records: &[PublicationRecord]) -> BTreeMap<String, Trajectory> {
    let mut builder = TrajectoryBuilder::new();
    for record in records {
        builder.push_record(record);
    }
    builder.into_map()
}

/// Writes the trajectory dump CSV:
/// `author_id,year,countries,has_co,has_multi,pubs_all,pubs_citable`.
pub fn write_trajectory_csv<W: Write>(
    writer: W,
    trajectories: impl Iterator<Item = Trajectory>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["author_id", "year", "countries", "has_co", "has_multi", "pubs_all", "pubs_citable"])?;
    for trajectory in trajectories {
        for p in &trajectory.profiles {
            w.write_record([
                trajectory.author_id.as_str(),
                &p.year.to_string(),
                &crate::types::join_countries(&p.s_year),
                if p.has_co { "true" } else { "false" },
                if p.has_multi { "true" } else { "false" },
                &p.pub_count_all_docs.to_string(),
                &p.pub_count_citable.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
