//! `scimob` — streaming mobility classification over publication corpora.
//!
//! Every subcommand reads inputs, writes its declared output files, and
//! prints a one-line JSON summary to stdout. Exit codes: 0 on success, 1 on
//! data errors (including strict-mode aborts), 2 on usage errors.

use clap::{ArgGroup, Parser, Subcommand};
use scimob::aggregate::{
    aggregate_countries, apply_min_pub_threshold, write_balance_csv, write_composition_csv,
    write_country_csv, write_country_wide_csv, write_directional_roles_csv,
    write_mobile_classes_csv, CountingMode,
};
use scimob::classify::{read_researcher_csv, write_researcher_row, ResearcherProfile};
use scimob::events::write_events_csv;
use scimob::indicators::{bin_by_pubcount, write_bins_csv, write_indicator_csv, IndicatorSet};
use scimob::ingest::{serialize_record, stream_corpus, validate_corpus, Policy, StreamOptions};
use scimob::pipeline::{classify_file_streaming, PipelineError, PipelineOptions};
use scimob::synth::{apply_split, generate_to_writers, plan_splits, ClassMix, SynthConfig};
use scimob::types::YearWindow;
use scimob::MobilityClass;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const WINDOW_ENV: &str = "SCIMOB_WINDOW";

#[derive(Parser)]
#[command(name = "scimob", version, about = "Researcher mobility indicators from publication records")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus and write a violation-counter report.
    Validate(ValidateArgs),
    /// Classify researchers into mobility classes with country roles.
    Classify(ClassifyArgs),
    /// Emit the per-transition mobility event log.
    Events(EventsArgs),
    /// Compute citation indicators (MNCS, highly-cited share) per researcher.
    Indicators(IndicatorsArgs),
    /// Aggregate researcher counts per country.
    Aggregate(AggregateArgs),
    /// Emit the full set of country-level report tables.
    Report(ReportArgs),
    /// Generate a synthetic corpus with planted ground truth.
    Synth(SynthArgs),
    /// Split random author identities at a tracked-year boundary.
    Perturb(PerturbArgs),
}

#[derive(clap::Args)]
struct CommonStream {
    /// Analysis window as START-END (falls back to $SCIMOB_WINDOW, then
    /// 2008-2015).
    #[arg(long)]
    window: Option<YearWindow>,
    /// Abort on the first malformed line instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Largest calendar-year gap between consecutive tracked years that
    /// still forms a transition (default: unlimited).
    #[arg(long)]
    max_gap: Option<u32>,
}

impl CommonStream {
    fn pipeline_options(&self) -> Result<PipelineOptions, CliError> {
        Ok(PipelineOptions {
            stream: StreamOptions {
                window: resolve_window(self.window)?,
                policy: if self.strict { Policy::Strict } else { Policy::Lenient },
            },
            max_gap: self.max_gap,
        })
    }
}

#[derive(clap::Args)]
struct ValidateArgs {
    /// Input corpus (JSONL, one publication per line).
    #[arg(long)]
    input: PathBuf,
    /// Write the counter report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    window: Option<YearWindow>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(clap::Args)]
struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Researcher table destination.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[command(flatten)]
    stream: CommonStream,
}

#[derive(clap::Args)]
struct EventsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Event log destination.
    #[arg(long)]
    out: PathBuf,
    /// Also dump per-author-year trajectory profiles here.
    #[arg(long)]
    trajectories: Option<PathBuf>,
    #[command(flatten)]
    stream: CommonStream,
}

#[derive(clap::Args)]
struct IndicatorsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Per-researcher indicator table destination.
    #[arg(long)]
    out: PathBuf,
    /// Also write the publication-count x class summary table here.
    #[arg(long)]
    bins: Option<PathBuf>,
    #[command(flatten)]
    stream: CommonStream,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "researchers"])))]
struct AggregateArgs {
    /// Raw corpus input (classified on the fly).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Pre-classified researcher table (output of `classify`).
    #[arg(long)]
    researchers: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// linkage: researchers per linked country and class; roles: directional
    /// role counts.
    #[arg(long, default_value = "linkage")]
    counting: CountingMode,
    /// Wide format with one row per country and all count columns.
    #[arg(long)]
    wide: bool,
    /// Also write per-country balance rates here.
    #[arg(long)]
    balance: Option<PathBuf>,
    /// Keep only researchers with at least this many citable publications.
    #[arg(long, default_value_t = 0)]
    min_pubs: u32,
    #[command(flatten)]
    stream: CommonStream,
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    /// Directory for the report tables (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    /// Keep only the top N countries per table.
    #[arg(long)]
    top: Option<usize>,
    #[command(flatten)]
    stream: CommonStream,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Corpus destination (JSONL).
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth table destination (CSV).
    #[arg(long)]
    truth: PathBuf,
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of researchers.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Class mix as four comma-separated shares
    /// (not-mobile,migrant,traveler-directional,traveler-non-directional).
    #[arg(long, value_parser = parse_mix)]
    mix: Option<ClassMix>,
    /// Size of the synthetic country pool.
    #[arg(long)]
    countries: Option<u16>,
    #[arg(long)]
    window: Option<YearWindow>,
}

#[derive(clap::Args)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    /// Perturbed corpus destination (JSONL).
    #[arg(long)]
    out: PathBuf,
    /// Probability that an eligible author is split in two.
    #[arg(long)]
    split_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Abort on the first malformed line instead of skipping it.
    #[arg(long)]
    strict: bool,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => msg,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(err: PipelineError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<scimob::synth::SynthError> for CliError {
    fn from(err: scimob::synth::SynthError) -> Self {
        match err {
            scimob::synth::SynthError::InvalidConfig(msg) => {
                CliError::Usage(format!("invalid config: {msg}"))
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

fn parse_mix(s: &str) -> Result<ClassMix, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected 4 comma-separated shares, got {}", parts.len()));
    }
    let mut mix = [0.0; 4];
    for (slot, part) in mix.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| format!("bad share `{part}`"))?;
    }
    Ok(mix)
}

fn resolve_window(flag: Option<YearWindow>) -> Result<YearWindow, CliError> {
    if let Some(window) = flag {
        return Ok(window);
    }
    match std::env::var(WINDOW_ENV) {
        Ok(text) => text
            .parse()
            .map_err(|e| CliError::Usage(format!("bad {WINDOW_ENV}: {e}"))),
        Err(_) => Ok(YearWindow::DEFAULT),
    }
}

fn create_out(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        CliError::Data(format!("cannot create {}: {e}", path.display()))
    })?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("scimob: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<Value, CliError> {
    match command {
        Command::Validate(args) => run_validate(args),
        Command::Classify(args) => run_classify(args),
        Command::Events(args) => run_events(args),
        Command::Indicators(args) => run_indicators(args),
        Command::Aggregate(args) => run_aggregate(args),
        Command::Report(args) => run_report(args),
        Command::Synth(args) => run_synth(args),
        Command::Perturb(args) => run_perturb(args),
    }
}

fn run_validate(args: ValidateArgs) -> Result<Value, CliError> {
    let window = resolve_window(args.window)?;
    let (valid, report) = validate_corpus(&args.input, window)?;
    let counters = report.to_json();
    if let Some(path) = &args.out {
        let mut out = create_out(path)?;
        writeln!(out, "{counters}")?;
        out.flush()?;
    }
    Ok(json!({
        "command": "validate",
        "input": args.input.display().to_string(),
        "records_valid": valid,
        "violations": report.total_excluding_flags(),
        "flags": report.count(scimob::ingest::ViolationKind::NonAlpha2Country),
        "counters": counters,
    }))
}

fn tally_json(summary: &mut serde_json::Map<String, Value>, tally: scimob::pipeline::ClassTally) {
    summary.insert("researchers".into(), tally.total().into());
    summary.insert("not_mobile".into(), tally.not_mobile.into());
    summary.insert("migrant".into(), tally.migrant.into());
    summary.insert("traveler_directional".into(), tally.traveler_directional.into());
    summary.insert(
        "traveler_non_directional".into(),
        tally.traveler_non_directional.into(),
    );
}

fn run_classify(args: ClassifyArgs) -> Result<Value, CliError> {
    let opts = args.stream.pipeline_options()?;
    let out = create_out(&args.out)?;

    let (tally, report) = match args.format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            writer
                .write_record(["author_id", "class", "origin", "first_year", "pubs_citable", "pubs_all", "roles"])
                .map_err(PipelineError::from)?;
            let result = classify_file_streaming(&args.input, &opts, |profile| {
                write_researcher_row(&mut writer, &profile).map_err(PipelineError::from)
            })?;
            writer.flush().map_err(|e| CliError::Data(e.to_string()))?;
            result
        }
        OutputFormat::Jsonl => {
            let mut writer = out;
            let result = classify_file_streaming(&args.input, &opts, |profile| {
                let row = profile_json(&profile);
                writeln!(writer, "{row}").map_err(PipelineError::from)?;
                Ok(())
            })?;
            writer.flush()?;
            result
        }
    };

    let mut summary = serde_json::Map::new();
    summary.insert("command".into(), "classify".into());
    tally_json(&mut summary, tally);
    summary.insert("skipped_violations".into(), report.total_excluding_flags().into());
    Ok(Value::Object(summary))
}

fn profile_json(profile: &ResearcherProfile) -> Value {
    json!({
        "author_id": profile.author_id,
        "class": profile.class.as_str(),
        "origin": profile.origin_countries.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "first_year": profile.first_year,
        "pubs_citable": profile.pub_count_citable,
        "pubs_all": profile.pub_count_all_docs,
        "roles": profile.roles.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
    })
}

fn run_events(args: EventsArgs) -> Result<Value, CliError> {
    let opts = args.stream.pipeline_options()?;
    let mut logs = Vec::new();
    let mut trajectory_rows: Vec<scimob::trajectory::Trajectory> = Vec::new();
    let want_trajectories = args.trajectories.is_some();
    scimob::pipeline::events_file_streaming(&args.input, &opts, |trajectory, log| {
        if want_trajectories {
            trajectory_rows.push(trajectory.clone());
        }
        logs.push(log);
        Ok(())
    })?;

    let transitions: usize = logs.iter().map(|l| l.transitions.len()).sum();
    let singletons = logs.iter().filter(|l| l.singleton.is_some()).count();
    let researchers = logs.len();

    write_events_csv(create_out(&args.out)?, logs.into_iter())
        .map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(path) = &args.trajectories {
        scimob::trajectory::write_trajectory_csv(create_out(path)?, trajectory_rows.into_iter())
            .map_err(|e| CliError::Data(e.to_string()))?;
    }

    Ok(json!({
        "command": "events",
        "researchers": researchers,
        "transitions": transitions,
        "singletons": singletons,
    }))
}

fn run_indicators(args: IndicatorsArgs) -> Result<Value, CliError> {
    let opts = args.stream.pipeline_options()?;
    let mut sets: Vec<(IndicatorSet, MobilityClass)> = Vec::new();
    let (baselines, _report) =
        scimob::pipeline::indicators_file_streaming(&args.input, &opts, |set, class| {
            sets.push((set, class));
            Ok(())
        })?;

    write_indicator_csv(create_out(&args.out)?, sets.iter().map(|(s, _)| s.clone()))
        .map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(path) = &args.bins {
        let rows = bin_by_pubcount(sets.iter().map(|(s, c)| (s, *c)));
        write_bins_csv(create_out(path)?, &rows).map_err(|e| CliError::Data(e.to_string()))?;
    }

    Ok(json!({
        "command": "indicators",
        "researchers": sets.len(),
        "cells": baselines.len(),
    }))
}

fn load_profiles(args: &AggregateArgs) -> Result<(Vec<ResearcherProfile>, &'static str), CliError> {
    if let Some(path) = &args.researchers {
        let file = File::open(path)
            .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
        let profiles =
            read_researcher_csv(file).map_err(|e| CliError::Data(e.to_string()))?;
        return Ok((profiles, "researchers"));
    }
    let input = args.input.as_ref().expect("clap group guarantees a source");
    let opts = args.stream.pipeline_options()?;
    let mut profiles = Vec::new();
    classify_file_streaming(input, &opts, |profile| {
        profiles.push(profile);
        Ok(())
    })?;
    Ok((profiles, "corpus"))
}

fn run_aggregate(args: AggregateArgs) -> Result<Value, CliError> {
    let (profiles, source) = load_profiles(&args)?;
    let kept: Vec<ResearcherProfile> =
        apply_min_pub_threshold(&profiles, args.min_pubs).cloned().collect();
    let aggregates = aggregate_countries(&kept);

    let out = create_out(&args.out)?;
    if args.wide {
        write_country_wide_csv(out, &aggregates).map_err(|e| CliError::Data(e.to_string()))?;
    } else {
        write_country_csv(out, &aggregates, args.counting)
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    if let Some(path) = &args.balance {
        write_balance_csv(create_out(path)?, &aggregates)
            .map_err(|e| CliError::Data(e.to_string()))?;
    }

    Ok(json!({
        "command": "aggregate",
        "source": source,
        "researchers": kept.len(),
        "countries": aggregates.len(),
        "min_pubs": args.min_pubs,
        "counting": match args.counting {
            CountingMode::Linkage => "linkage",
            CountingMode::Roles => "roles",
        },
    }))
}

fn run_report(args: ReportArgs) -> Result<Value, CliError> {
    let opts = args.stream.pipeline_options()?;
    std::fs::create_dir_all(&args.out_dir)?;
    let mut profiles = Vec::new();
    classify_file_streaming(&args.input, &opts, |profile| {
        profiles.push(profile);
        Ok(())
    })?;

    let mut files = 0u32;
    let mut countries = 0usize;
    for (suffix, min_pubs) in [("all", 0u32), ("min5", 5), ("min10", 10)] {
        let kept: Vec<ResearcherProfile> =
            apply_min_pub_threshold(&profiles, min_pubs).cloned().collect();
        let aggregates = aggregate_countries(&kept);
        if min_pubs == 0 {
            countries = aggregates.len();
            write_balance_csv(create_out(&args.out_dir.join("balance.csv"))?, &aggregates)
                .map_err(|e| CliError::Data(e.to_string()))?;
            files += 1;
        }
        let table = |name: &str| args.out_dir.join(format!("{name}_{suffix}.csv"));
        write_mobile_classes_csv(create_out(&table("mobile_classes"))?, &aggregates, args.top)
            .map_err(|e| CliError::Data(e.to_string()))?;
        write_directional_roles_csv(create_out(&table("directional_roles"))?, &aggregates, args.top)
            .map_err(|e| CliError::Data(e.to_string()))?;
        write_composition_csv(create_out(&table("composition"))?, &aggregates, args.top)
            .map_err(|e| CliError::Data(e.to_string()))?;
        files += 3;
    }

    Ok(json!({
        "command": "report",
        "researchers": profiles.len(),
        "countries": countries,
        "files": files,
        "out_dir": args.out_dir.display().to_string(),
    }))
}

fn run_synth(args: SynthArgs) -> Result<Value, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            SynthConfig::from_json(&text)?
        }
        None => SynthConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.n_researchers = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(mix) = args.mix {
        cfg.class_mix = mix;
    }
    if let Some(countries) = args.countries {
        cfg.country_pool = countries;
    }
    if let Some(window) = args.window {
        cfg.window = window;
    }
    cfg.validate()?;

    let mut corpus = create_out(&args.out)?;
    let truth = create_out(&args.truth)?;
    let summary = generate_to_writers(&cfg, &mut corpus, truth)?;
    corpus.flush()?;

    Ok(json!({
        "command": "synth",
        "researchers": summary.researchers,
        "records": summary.records,
        "links": summary.links,
        "not_mobile": summary.tally[0],
        "migrant": summary.tally[1],
        "traveler_directional": summary.tally[2],
        "traveler_non_directional": summary.tally[3],
        "seed": cfg.seed,
    }))
}

fn run_perturb(args: PerturbArgs) -> Result<Value, CliError> {
    if !(0.0..=1.0).contains(&args.split_prob) {
        return Err(CliError::Usage(format!(
            "--split-prob must lie in [0, 1], got {}",
            args.split_prob
        )));
    }
    // The perturbation transforms identities only; records pass through
    // regardless of year, so the stream window is wide open.
    let opts = StreamOptions {
        window: YearWindow::new(i32::MIN, i32::MAX).expect("valid"),
        policy: if args.strict { Policy::Strict } else { Policy::Lenient },
    };

    let mut tracked: BTreeMap<String, std::collections::BTreeSet<i32>> = BTreeMap::new();
    let mut reader = stream_corpus(&args.input, opts)?;
    for record in reader.by_ref() {
        let record = record.map_err(PipelineError::from)?;
        for authorship in &record.authorships {
            tracked
                .entry(authorship.author_id.clone())
                .or_default()
                .insert(record.year);
        }
    }
    let plan = plan_splits(&tracked, args.split_prob, args.seed);

    let mut out = create_out(&args.out)?;
    let mut records = 0u64;
    let mut reader = stream_corpus(&args.input, opts)?;
    for record in reader.by_ref() {
        let mut record = record.map_err(PipelineError::from)?;
        apply_split(&mut record, &plan);
        writeln!(out, "{}", serialize_record(&record))?;
        records += 1;
    }
    out.flush()?;

    Ok(json!({
        "command": "perturb",
        "records": records,
        "authors": tracked.len(),
        "split_authors": plan.affected_authors(),
        "split_prob": args.split_prob,
        "seed": args.seed,
    }))
}
