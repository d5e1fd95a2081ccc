//! Identity-split perturbation.
//!
//! Disambiguation pipelines that lean on affiliation stability tend to split
//! highly mobile authors into multiple identities, biasing mobility counts
//! downward. This transform reproduces that failure mode: a sampled author's
//! publications are reassigned to two fresh identities, partitioned at a
//! random tracked-year boundary. No record is lost or duplicated; only
//! author ids change.

use crate::types::PublicationRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Tracked years per author, the input to split planning.
pub fn collect_tracked_years<'a>(
    records: impl IntoIterator<Item = &'a PublicationRecord>,
) -> BTreeMap<String, BTreeSet<i32>> {
    let mut tracked: BTreeMap<String, BTreeSet<i32>> = BTreeMap::new();
    for record in records {
        for authorship in &record.authorships {
            tracked
                .entry(authorship.author_id.clone())
                .or_default()
                .insert(record.year);
        }
    }
    tracked
}

/// The fresh identities an author splits into.
pub fn fresh_split_ids(author_id: &str) -> (String, String) {
    (format!("{author_id}#1"), format!("{author_id}#2"))
}

/// Chosen split boundaries: authors map to the first tracked year of their
/// second identity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitPlan {
    boundaries: HashMap<String, i32>,
}

impl SplitPlan {
    pub fn affected_authors(&self) -> usize {
        self.boundaries.len()
    }

    /// The id this authorship should carry under the plan.
    pub fn rename(&self, author_id: &str, year: i32) -> Option<String> {
        let boundary = self.boundaries.get(author_id)?;
        let (early, late) = fresh_split_ids(author_id);
        Some(if year < *boundary { early } else { late })
    }
}

/// FNV-1a over the author id; stable across runs and platforms, unlike the
/// std hasher.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Decides, per author, whether and where to split. Decisions depend only on
/// (author id, tracked years, `split_prob`, `seed`), so they are independent
/// of record order and of how the corpus is partitioned.
///
/// Authors with a single tracked year cannot be split and are never affected.
pub fn plan_splits(
    tracked: &BTreeMap<String, BTreeSet<i32>>,
    split_prob: f64,
    seed: u64,
) -> SplitPlan {
    assert!(
        (0.0..=1.0).contains(&split_prob),
        "split_prob must lie in [0, 1]"
    );
    let mut plan = SplitPlan::default();
    if split_prob == 0.0 {
        return plan;
    }
    for (author_id, years) in tracked {
        if years.len() < 2 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(author_id.as_bytes()));
        if !rng.random_bool(split_prob) {
            continue;
        }
        let years: Vec<i32> = years.iter().copied().collect();
        let boundary = years[rng.random_range(1..years.len())];
        plan.boundaries.insert(author_id.clone(), boundary);
    }
    plan
}

/// Rewrites one record's authorships in place under the plan.
pub fn apply_split(record: &mut PublicationRecord, plan: &SplitPlan) {
    for authorship in &mut record.authorships {
        if let Some(new_id) = plan.rename(&authorship.author_id, record.year) {
            authorship.author_id = new_id;
        }
    }
}

/// Applies the split perturbation to an in-memory corpus.
pub fn split_perturbation(
    records: &[PublicationRecord],
    split_prob: f64,
    seed: u64,
) -> Vec<PublicationRecord> {
    let plan = plan_splits(&collect_tracked_years(records), split_prob, seed);
    records
        .iter()
        .map(|record| {
            let mut record = record.clone();
            apply_split(&mut record, &plan);
            record
        })
        .collect()
}
