//! Synthetic cohorts with planted ground truth.
//!
//! Each researcher is generated from a class-specific trajectory template
//! that guarantees the planted class is exactly what the classifier detects:
//! migrants publish in the tracked year on each side of their rupture,
//! directional travelers keep their origin while adding a second country,
//! non-directional travelers hold two countries from their first year on and
//! never add more, and not-mobile researchers stay in one country. Generation
//! is deterministic per (config, seed): every researcher draws from an
//! independent, stably derived RNG substream, so parallel and serial
//! generation agree.

mod oracle;
mod perturb;

pub use oracle::oracle_classify;
pub use perturb::{
    apply_split, collect_tracked_years, fresh_split_ids, plan_splits, split_perturbation,
    SplitPlan,
};

use crate::classify::{CountryRole, MobilityClass, RoleKind};
use crate::ingest::serialize_record;
use crate::types::{Authorship, Country, CountrySet, DocType, PublicationRecord, YearWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Class shares in generation order: not mobile, migrant, traveler
/// (directional), traveler (non-directional).
pub type ClassMix = [f64; 4];

/// Observed large-corpus class shares used as the default mix.
pub const DEFAULT_CLASS_MIX: ClassMix = [0.963, 0.010, 0.013, 0.014];

fn default_mix() -> ClassMix {
    DEFAULT_CLASS_MIX
}
fn default_window() -> YearWindow {
    YearWindow::DEFAULT
}
fn default_country_pool() -> u16 {
    30
}
fn default_field_pool() -> u16 {
    8
}
fn default_papers_p() -> f64 {
    0.6
}
fn default_active_years_p() -> f64 {
    0.45
}
fn default_co_propensity() -> f64 {
    0.6
}
fn default_citation_p() -> f64 {
    0.3
}
fn default_seed() -> u64 {
    42
}

/// Generator configuration; loadable from JSON with per-field defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_researchers: u64,
    /// Probabilities for the four classes; must sum to 1.
    #[serde(default = "default_mix")]
    pub class_mix: ClassMix,
    #[serde(default = "default_window")]
    pub window: YearWindow,
    /// Number of distinct country codes to draw from (2..=676).
    #[serde(default = "default_country_pool")]
    pub country_pool: u16,
    #[serde(default = "default_field_pool")]
    pub field_pool: u16,
    /// Geometric parameter for papers per active year (mean 1/p), matching
    /// the heavy one-to-two-paper mass of real cohorts.
    #[serde(default = "default_papers_p")]
    pub papers_per_year_p: f64,
    /// Geometric parameter for the number of active years per researcher.
    #[serde(default = "default_active_years_p")]
    pub active_years_p: f64,
    /// Probability that a two-country year presents as a co-affiliation
    /// instance rather than a multiple-affiliation instance.
    #[serde(default = "default_co_propensity")]
    pub co_affiliation_propensity: f64,
    /// Geometric parameter for citation counts.
    #[serde(default = "default_citation_p")]
    pub citation_p: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_researchers: 1000,
            class_mix: DEFAULT_CLASS_MIX,
            window: YearWindow::DEFAULT,
            country_pool: default_country_pool(),
            field_pool: default_field_pool(),
            papers_per_year_p: default_papers_p(),
            active_years_p: default_active_years_p(),
            co_affiliation_propensity: default_co_propensity(),
            citation_p: default_citation_p(),
            seed: default_seed(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_researchers == 0 {
            return Err(SynthError::InvalidConfig("n_researchers must be >= 1".into()));
        }
        if self.class_mix.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(SynthError::InvalidConfig(
                "class mix probabilities must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = self.class_mix.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SynthError::InvalidConfig(format!(
                "class mix sums to {sum}, expected 1"
            )));
        }
        if !(2..=676).contains(&self.country_pool) {
            return Err(SynthError::InvalidConfig(
                "country_pool must lie in 2..=676".into(),
            ));
        }
        if self.field_pool == 0 {
            return Err(SynthError::InvalidConfig("field_pool must be >= 1".into()));
        }
        for (name, p) in [
            ("papers_per_year_p", self.papers_per_year_p),
            ("active_years_p", self.active_years_p),
            ("citation_p", self.citation_p),
        ] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(SynthError::InvalidConfig(format!("{name} must lie in (0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.co_affiliation_propensity) {
            return Err(SynthError::InvalidConfig(
                "co_affiliation_propensity must lie in [0, 1]".into(),
            ));
        }
        let needs_two_years = self.class_mix[1] > 0.0 || self.class_mix[2] > 0.0;
        if needs_two_years && self.window.len() < 2 {
            return Err(SynthError::InvalidConfig(
                "window must span at least two years to plant migrants or directional travelers"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<SynthConfig, SynthError> {
        let cfg: SynthConfig = serde_json::from_str(text)
            .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Planted truth for one researcher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthEntry {
    pub class: MobilityClass,
    pub origin: CountrySet,
    pub roles: BTreeSet<CountryRole>,
}

/// Planted truth for a whole cohort, keyed by author id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    entries: BTreeMap<String, GroundTruthEntry>,
}

impl GroundTruth {
    pub fn insert(&mut self, author_id: String, entry: GroundTruthEntry) {
        self.entries.insert(author_id, entry);
    }

    pub fn get(&self, author_id: &str) -> Option<&GroundTruthEntry> {
        self.entries.get(author_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &GroundTruthEntry)> {
        self.entries.iter()
    }

    /// Researcher counts per class, in mix order.
    pub fn tally(&self) -> [u64; 4] {
        let mut tally = [0u64; 4];
        for entry in self.entries.values() {
            tally[class_index(entry.class)] += 1;
        }
        tally
    }
}

pub fn class_index(class: MobilityClass) -> usize {
    match class {
        MobilityClass::NotMobile => 0,
        MobilityClass::Migrant => 1,
        MobilityClass::TravelerDirectional => 2,
        MobilityClass::TravelerNonDirectional => 3,
    }
}

/// Country code for a pool index: AA, AB, ..., ZZ.
pub fn pool_country(index: u16) -> Country {
    let hi = b'A' + (index / 26) as u8;
    let lo = b'A' + (index % 26) as u8;
    Country::new(std::str::from_utf8(&[hi, lo]).expect("ascii"))
}

/// Samples the number of failures before a success (geometric, `k >= 0`).
fn geometric(rng: &mut impl Rng, p: f64) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = rng.random();
    (((1.0 - u).ln() / (1.0 - p).ln()).floor() as u64).min(1000)
}

fn sample_class(rng: &mut impl Rng, mix: &ClassMix) -> MobilityClass {
    let classes = [
        MobilityClass::NotMobile,
        MobilityClass::Migrant,
        MobilityClass::TravelerDirectional,
        MobilityClass::TravelerNonDirectional,
    ];
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (share, class) in mix.iter().zip(classes) {
        cum += share;
        if u < cum {
            return class;
        }
    }
    classes[3]
}

fn sample_doc_type(rng: &mut impl Rng) -> DocType {
    let u: f64 = rng.random();
    if u < 0.75 {
        DocType::Article
    } else if u < 0.85 {
        DocType::Review
    } else if u < 0.90 {
        DocType::Letter
    } else if u < 0.95 {
        DocType::Proceedings
    } else {
        DocType::Other
    }
}

/// Draws `m` distinct years from the window, sorted ascending.
fn sample_years(rng: &mut impl Rng, window: YearWindow, m: usize) -> Vec<i32> {
    let mut years: Vec<i32> = window.years().collect();
    let m = m.min(years.len());
    for i in 0..m {
        let j = rng.random_range(i..years.len());
        years.swap(i, j);
    }
    let mut chosen = years[..m].to_vec();
    chosen.sort_unstable();
    chosen
}

/// The per-year affiliation shape a template plants.
enum YearShape {
    Single(Country),
    /// Both countries on every paper.
    Co(Country, Country),
    /// Countries split across papers; needs at least two papers.
    Multi(Country, Country),
}

/// One generated researcher: their records and planted truth.
#[derive(Debug, Clone)]
pub struct ResearcherBundle {
    pub author_id: String,
    pub records: Vec<PublicationRecord>,
    pub truth: GroundTruthEntry,
}

impl ResearcherBundle {
    pub fn link_count(&self) -> u64 {
        self.records.len() as u64
    }
}

/// Iterator over a cohort's researchers; index `i` always yields the same
/// bundle for a given config.
pub struct CohortGenerator {
    cfg: SynthConfig,
    next_index: u64,
}

impl CohortGenerator {
    pub fn new(cfg: SynthConfig) -> Result<CohortGenerator, SynthError> {
        cfg.validate()?;
        Ok(CohortGenerator { cfg, next_index: 0 })
    }

    fn generate_researcher(&self, index: u64) -> ResearcherBundle {
        let cfg = &self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index.wrapping_add(1));

        let author_id = format!("a{index:08}");
        let class = sample_class(&mut rng, &cfg.class_mix);

        let home_idx = rng.random_range(0..cfg.country_pool);
        let away_idx = {
            let offset = rng.random_range(1..cfg.country_pool);
            (home_idx + offset) % cfg.country_pool
        };
        let home = pool_country(home_idx);
        let away = pool_country(away_idx);

        let mut n_years = 1 + geometric(&mut rng, cfg.active_years_p) as usize;
        if matches!(class, MobilityClass::Migrant | MobilityClass::TravelerDirectional) {
            n_years = n_years.max(2);
        }
        let years = sample_years(&mut rng, cfg.window, n_years);
        let n_years = years.len();

        let shapes: Vec<YearShape> = match class {
            MobilityClass::NotMobile => {
                years.iter().map(|_| YearShape::Single(home.clone())).collect()
            }
            MobilityClass::Migrant => {
                let boundary = rng.random_range(1..n_years);
                (0..n_years)
                    .map(|i| {
                        if i < boundary {
                            YearShape::Single(home.clone())
                        } else {
                            YearShape::Single(away.clone())
                        }
                    })
                    .collect()
            }
            MobilityClass::TravelerDirectional => {
                let join = rng.random_range(1..n_years);
                (0..n_years)
                    .map(|i| {
                        if i < join {
                            YearShape::Single(home.clone())
                        } else if rng.random_bool(cfg.co_affiliation_propensity) {
                            YearShape::Co(home.clone(), away.clone())
                        } else {
                            YearShape::Multi(home.clone(), away.clone())
                        }
                    })
                    .collect()
            }
            MobilityClass::TravelerNonDirectional => (0..n_years)
                .map(|_| {
                    if rng.random_bool(cfg.co_affiliation_propensity) {
                        YearShape::Co(home.clone(), away.clone())
                    } else {
                        YearShape::Multi(home.clone(), away.clone())
                    }
                })
                .collect(),
        };

        let mut records = Vec::new();
        let mut seq = 0u32;
        for (year, shape) in years.iter().zip(&shapes) {
            let mut papers = 1 + geometric(&mut rng, cfg.papers_per_year_p) as u32;
            if matches!(shape, YearShape::Multi(..)) {
                papers = papers.max(2);
            }
            for k in 0..papers {
                let countries: CountrySet = match shape {
                    YearShape::Single(c) => [c.clone()].into(),
                    YearShape::Co(a, b) => [a.clone(), b.clone()].into(),
                    YearShape::Multi(a, b) => {
                        if k % 2 == 0 {
                            [a.clone()].into()
                        } else {
                            [b.clone()].into()
                        }
                    }
                };
                let field_id = format!("F{:02}", rng.random_range(0..cfg.field_pool));
                let doc_type = sample_doc_type(&mut rng);
                let citation_count = geometric(&mut rng, cfg.citation_p);
                records.push(PublicationRecord {
                    pub_id: format!("p{index:08}x{seq:03}"),
                    year: *year,
                    doc_type,
                    field_id,
                    citation_count,
                    authorships: vec![Authorship {
                        author_id: author_id.clone(),
                        countries,
                    }],
                });
                seq += 1;
            }
        }

        let (origin, roles) = planted_truth(class, &home, &away);
        ResearcherBundle {
            author_id,
            records,
            truth: GroundTruthEntry {
                class,
                origin,
                roles,
            },
        }
    }
}

fn planted_truth(
    class: MobilityClass,
    home: &Country,
    away: &Country,
) -> (CountrySet, BTreeSet<CountryRole>) {
    match class {
        MobilityClass::NotMobile => ([home.clone()].into(), BTreeSet::new()),
        MobilityClass::Migrant => (
            [home.clone()].into(),
            [
                CountryRole::new(RoleKind::EmigrantFrom, home.clone()),
                CountryRole::new(RoleKind::ImmigrantTo, away.clone()),
            ]
            .into(),
        ),
        MobilityClass::TravelerDirectional => (
            [home.clone()].into(),
            [
                CountryRole::new(RoleKind::OutgoingFrom, home.clone()),
                CountryRole::new(RoleKind::IncomingTo, away.clone()),
            ]
            .into(),
        ),
        MobilityClass::TravelerNonDirectional => {
            ([home.clone(), away.clone()].into(), BTreeSet::new())
        }
    }
}

impl Iterator for CohortGenerator {
    type Item = ResearcherBundle;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_index >= self.cfg.n_researchers {
            return None;
        }
        let bundle = self.generate_researcher(self.next_index);
        self.next_index += 1;
        Some(bundle)
    }
}

/// Generates a whole cohort in memory.
pub fn generate_cohort(
    cfg: &SynthConfig,
) -> Result<(Vec<PublicationRecord>, GroundTruth), SynthError> {
    let mut records = Vec::new();
    let mut truth = GroundTruth::default();
    for bundle in CohortGenerator::new(cfg.clone())? {
        truth.insert(bundle.author_id.clone(), bundle.truth.clone());
        records.extend(bundle.records);
    }
    Ok((records, truth))
}

/// Summary of a streamed generation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSummary {
    pub researchers: u64,
    pub records: u64,
    pub links: u64,
    pub tally: [u64; 4],
}

/// Streams a cohort to a JSONL corpus writer and a truth CSV writer without
/// materializing it.
pub fn generate_to_writers<W1: Write, W2: Write>(
    cfg: &SynthConfig,
    corpus: &mut W1,
    truth: W2,
) -> Result<GenSummary, SynthError> {
    let mut summary = GenSummary {
        researchers: 0,
        records: 0,
        links: 0,
        tally: [0; 4],
    };
    let mut truth_writer = csv::Writer::from_writer(truth);
    truth_writer
        .write_record(["author_id", "class", "origin", "roles"])
        .map_err(io_from_csv)?;
    for bundle in CohortGenerator::new(cfg.clone())? {
        for record in &bundle.records {
            corpus.write_all(serialize_record(record).as_bytes())?;
            corpus.write_all(b"\n")?;
        }
        summary.researchers += 1;
        summary.records += bundle.records.len() as u64;
        summary.links += bundle.link_count();
        summary.tally[class_index(bundle.truth.class)] += 1;
        write_truth_row(&mut truth_writer, &bundle.author_id, &bundle.truth).map_err(io_from_csv)?;
    }
    truth_writer.flush()?;
    corpus.flush()?;
    Ok(summary)
}

fn io_from_csv(err: csv::Error) -> SynthError {
    SynthError::Io(io::Error::other(err))
}

fn write_truth_row<W: Write>(
    w: &mut csv::Writer<W>,
    author_id: &str,
    entry: &GroundTruthEntry,
) -> csv::Result<()> {
    let roles = entry
        .roles
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(";");
    w.write_record([
        author_id,
        entry.class.as_str(),
        &crate::types::join_countries(&entry.origin),
        &roles,
    ])
}

/// Writes the truth CSV: `author_id,class,origin,roles`.
pub fn write_truth_csv<W: Write>(writer: W, truth: &GroundTruth) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["author_id", "class", "origin", "roles"])?;
    for (author_id, entry) in truth.iter() {
        write_truth_row(&mut w, author_id, entry)?;
    }
    w.flush()?;
    Ok(())
}
