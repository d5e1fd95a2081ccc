//! Fused end-to-end runs: stream a corpus once (or twice for indicators) and
//! produce classified researchers, event logs, or indicator tables with
//! memory bounded by per-author-year summaries.

use crate::classify::{self, MobilityClass, ResearcherProfile};
use crate::events::{detect_transitions_with_max_gap, EventLog};
use crate::indicators::{BaselineBuilder, Baselines, IndicatorAccumulator, IndicatorSet};
use crate::ingest::{stream_corpus, IngestError, StreamOptions, ValidationReport};
use crate::trajectory::{Trajectory, TrajectoryBuilder};
use std::io;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Classify(#[from] crate::classify::ClassifyError),
    #[error(transparent)]
    Indicator(#[from] crate::indicators::IndicatorError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineOptions {
    pub stream: StreamOptions,
    /// Maximum calendar-year gap between consecutive tracked years for a
    /// transition to count; `None` means the next tracked year always counts.
    pub max_gap: Option<u32>,
}

/// Per-class totals of a classification run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassTally {
    pub not_mobile: u64,
    pub migrant: u64,
    pub traveler_directional: u64,
    pub traveler_non_directional: u64,
}

impl ClassTally {
    pub fn bump(&mut self, class: MobilityClass) {
        match class {
            MobilityClass::NotMobile => self.not_mobile += 1,
            MobilityClass::Migrant => self.migrant += 1,
            MobilityClass::TravelerDirectional => self.traveler_directional += 1,
            MobilityClass::TravelerNonDirectional => self.traveler_non_directional += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.not_mobile + self.mobile()
    }

    pub fn mobile(&self) -> u64 {
        self.migrant + self.traveler_directional + self.traveler_non_directional
    }

    pub fn as_array(&self) -> [u64; 4] {
        [
            self.not_mobile,
            self.migrant,
            self.traveler_directional,
            self.traveler_non_directional,
        ]
    }
}

/// Folds a corpus file into trajectories, returning the builder plus the
/// stream's validation report.
pub fn fold_file(
    path: impl AsRef<Path>,
    opts: &PipelineOptions,
) -> Result<(TrajectoryBuilder, ValidationReport, u64), PipelineError> {
    let mut reader = stream_corpus(path, opts.stream)?;
    let mut builder = TrajectoryBuilder::new();
    for record in reader.by_ref() {
        builder.push_record(&record?);
    }
    let records = reader.records_yielded();
    Ok((builder, reader.into_report(), records))
}

/// Classifies every researcher in a corpus file, applying `consume` to each
/// profile in author-id order. Memory stays at fold-state plus one profile.
pub fn classify_file_streaming(
    path: impl AsRef<Path>,
    opts: &PipelineOptions,
    mut consume: impl FnMut(ResearcherProfile) -> Result<(), PipelineError>,
) -> Result<(ClassTally, ValidationReport), PipelineError> {
    let (builder, report, _) = fold_file(path, opts)?;
    let mut tally = ClassTally::default();
    for trajectory in builder.into_trajectories() {
        let profile = classify::build_profile_with_max_gap(&trajectory, opts.max_gap)?;
        tally.bump(profile.class);
        consume(profile)?;
    }
    Ok((tally, report))
}

/// In-memory convenience: classified profiles sorted by author id.
pub fn classify_file(
    path: impl AsRef<Path>,
    opts: &PipelineOptions,
) -> Result<(Vec<ResearcherProfile>, ClassTally, ValidationReport), PipelineError> {
    let mut profiles = Vec::new();
    let (tally, report) = classify_file_streaming(path, opts, |p| {
        profiles.push(p);
        Ok(())
    })?;
    Ok((profiles, tally, report))
}

/// Classifies an in-memory record slice (already validated).
pub fn classify_records(
    records: &[crate::types::PublicationRecord],
    max_gap: Option<u32>,
) -> Result<(Vec<ResearcherProfile>, ClassTally), PipelineError> {
    let mut builder = TrajectoryBuilder::new();
    for record in records {
        builder.push_record(record);
    }
    let mut tally = ClassTally::default();
    let mut profiles = Vec::with_capacity(builder.author_count());
    for trajectory in builder.into_trajectories() {
        let profile = classify::build_profile_with_max_gap(&trajectory, max_gap)?;
        tally.bump(profile.class);
        profiles.push(profile);
    }
    Ok((profiles, tally))
}

/// Event logs for every researcher in a file, in author-id order.
pub fn events_file_streaming(
    path: impl AsRef<Path>,
    opts: &PipelineOptions,
    mut consume: impl FnMut(&Trajectory, EventLog) -> Result<(), PipelineError>,
) -> Result<ValidationReport, PipelineError> {
    let (builder, report, _) = fold_file(path, opts)?;
    for trajectory in builder.into_trajectories() {
        let log = detect_transitions_with_max_gap(&trajectory, opts.max_gap);
        consume(&trajectory, log)?;
    }
    Ok(report)
}

/// Two-pass indicator run: builds baselines, then per-researcher indicator
/// sets joined with mobility classes, in author-id order.
pub fn indicators_file_streaming(
    path: impl AsRef<Path>,
    opts: &PipelineOptions,
    mut consume: impl FnMut(IndicatorSet, MobilityClass) -> Result<(), PipelineError>,
) -> Result<(Baselines, ValidationReport), PipelineError> {
    let path = path.as_ref();

    let mut baseline_builder = BaselineBuilder::new();
    let mut trajectory_builder = TrajectoryBuilder::new();
    let mut reader = stream_corpus(path, opts.stream)?;
    for record in reader.by_ref() {
        let record = record?;
        baseline_builder.push_record(&record);
        trajectory_builder.push_record(&record);
    }
    let report = reader.into_report();
    let baselines = baseline_builder.build();

    let mut acc = IndicatorAccumulator::new();
    let mut reader = stream_corpus(path, opts.stream)?;
    for record in reader.by_ref() {
        acc.push_record(&record?, &baselines)?;
    }

    for trajectory in trajectory_builder.into_trajectories() {
        let profile = classify::build_profile_with_max_gap(&trajectory, opts.max_gap)?;
        let set = acc.take(&profile.author_id);
        consume(set, profile.class)?;
    }
    Ok((baselines, report))
}
