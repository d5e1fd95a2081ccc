//! Parsing, validation, and streaming of JSONL publication corpora.
//!
//! One publication per line:
//!
//! ```json
//! {"pub_id":"p1","year":2010,"doc_type":"article","field":"PHYS","citations":12,
//!  "authors":[{"id":"a1","countries":["ES"]},{"id":"a2","countries":["ES","GB"]}]}
//! ```
//!
//! [`stream_corpus`] makes a single forward pass with memory independent of
//! corpus size. [`Validator`] additionally tracks duplicate `pub_id`s, which
//! requires remembering every id seen, so it is a separate layer used by the
//! `validate` command.

use crate::types::{Authorship, Country, CountrySet, DocType, PublicationRecord, YearWindow};
use serde::Deserialize;
use serde_json::Value;
use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;
use thiserror::Error;

/// Error for a single malformed input line. Every variant names the line;
/// field-level variants name the offending field.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed JSON: {message}")]
    Syntax { line: u64, message: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: u64, field: &'static str },
    #[error("line {line}: invalid value for `{field}`: {message}")]
    InvalidField {
        line: u64,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: empty country set for author `{author}`")]
    EmptyCountries { line: u64, author: String },
    #[error("line {line}: empty author list")]
    EmptyAuthors { line: u64 },
    #[error("line {line}: duplicate author `{author}` within record")]
    DuplicateAuthor { line: u64, author: String },
}

impl ParseError {
    pub fn line(&self) -> u64 {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::MissingField { line, .. }
            | ParseError::InvalidField { line, .. }
            | ParseError::EmptyCountries { line, .. }
            | ParseError::EmptyAuthors { line }
            | ParseError::DuplicateAuthor { line, .. } => *line,
        }
    }

    pub fn kind(&self) -> ViolationKind {
        match self {
            ParseError::Syntax { .. } => ViolationKind::Syntax,
            ParseError::MissingField { .. } => ViolationKind::MissingField,
            ParseError::InvalidField { .. } => ViolationKind::InvalidField,
            ParseError::EmptyCountries { .. } => ViolationKind::EmptyCountries,
            ParseError::EmptyAuthors { .. } => ViolationKind::EmptyAuthors,
            ParseError::DuplicateAuthor { .. } => ViolationKind::DuplicateAuthor,
        }
    }
}

/// I/O or parse failure while streaming a corpus.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Violation categories counted by validation reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    Syntax,
    MissingField,
    InvalidField,
    EmptyCountries,
    EmptyAuthors,
    DuplicateAuthor,
    OutOfWindow,
    DuplicatePubId,
    NonAlpha2Country,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 9] = [
        ViolationKind::Syntax,
        ViolationKind::MissingField,
        ViolationKind::InvalidField,
        ViolationKind::EmptyCountries,
        ViolationKind::EmptyAuthors,
        ViolationKind::DuplicateAuthor,
        ViolationKind::OutOfWindow,
        ViolationKind::DuplicatePubId,
        ViolationKind::NonAlpha2Country,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::Syntax => "syntax",
            ViolationKind::MissingField => "missing_field",
            ViolationKind::InvalidField => "invalid_field",
            ViolationKind::EmptyCountries => "empty_countries",
            ViolationKind::EmptyAuthors => "empty_authors",
            ViolationKind::DuplicateAuthor => "duplicate_author",
            ViolationKind::OutOfWindow => "out_of_window",
            ViolationKind::DuplicatePubId => "duplicate_pub_id",
            ViolationKind::NonAlpha2Country => "non_alpha2_country",
        }
    }
}

/// One recorded violation with its location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub line: u64,
    pub message: String,
}

const DETAIL_CAP: usize = 10_000;

/// Per-kind violation counters plus a capped list of individual violations.
///
/// Accumulation is associative and commutative, so partial reports built over
/// corpus partitions merge into the same totals regardless of merge order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    counts: BTreeMap<ViolationKind, u64>,
    details: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, kind: ViolationKind, line: u64, message: impl Into<String>) {
        *self.counts.entry(kind).or_insert(0) += 1;
        if self.details.len() < DETAIL_CAP {
            self.details.push(Violation {
                kind,
                line,
                message: message.into(),
            });
        }
    }

    pub fn record_parse_error(&mut self, err: &ParseError) {
        self.record(err.kind(), err.line(), err.to_string());
    }

    pub fn count(&self, kind: ViolationKind) -> u64 {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    /// Total violations, not counting flagged-but-accepted country codes.
    pub fn total_excluding_flags(&self) -> u64 {
        ViolationKind::ALL
            .iter()
            .filter(|k| **k != ViolationKind::NonAlpha2Country)
            .map(|k| self.count(*k))
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn details(&self) -> &[Violation] {
        &self.details
    }

    /// Merges another partial report into this one. Details are re-sorted by
    /// line so the merged report does not depend on partition order.
    pub fn merge(&mut self, other: &ValidationReport) {
        for (kind, n) in &other.counts {
            *self.counts.entry(*kind).or_insert(0) += n;
        }
        self.details.extend(other.details.iter().cloned());
        self.details.sort_by_key(|v| v.line);
        self.details.truncate(DETAIL_CAP);
    }

    /// The external report format: a JSON object with one integer counter per
    /// violation kind (zeros included).
    pub fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        for kind in ViolationKind::ALL {
            map.insert(kind.as_str().to_string(), Value::from(self.count(kind)));
        }
        Value::Object(map)
    }
}

#[derive(Deserialize)]
struct RawAuthor {
    id: Option<String>,
    countries: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct RawRecord {
    pub_id: Option<String>,
    year: Option<i64>,
    doc_type: Option<String>,
    field: Option<String>,
    citations: Option<i64>,
    authors: Option<Vec<RawAuthor>>,
}

/// Parses one JSONL line into a validated, normalized record.
///
/// Country codes are trimmed and uppercased. `line_no` is 1-based and is
/// embedded in every error.
pub fn parse_record(line: &str, line_no: u64) -> Result<PublicationRecord, ParseError> {
    let raw: RawRecord = match serde_json::from_str(line) {
        Ok(raw) => raw,
        Err(err) => return Err(diagnose(line, line_no, err)),
    };

    let pub_id = raw.pub_id.ok_or(ParseError::MissingField {
        line: line_no,
        field: "pub_id",
    })?;
    let year = raw.year.ok_or(ParseError::MissingField {
        line: line_no,
        field: "year",
    })?;
    let year = i32::try_from(year).map_err(|_| ParseError::InvalidField {
        line: line_no,
        field: "year",
        message: format!("{year} out of range"),
    })?;
    let doc_type = DocType::parse_lenient(&raw.doc_type.ok_or(ParseError::MissingField {
        line: line_no,
        field: "doc_type",
    })?);
    let field_id = raw.field.ok_or(ParseError::MissingField {
        line: line_no,
        field: "field",
    })?;
    let citations = raw.citations.ok_or(ParseError::MissingField {
        line: line_no,
        field: "citations",
    })?;
    let citation_count = u64::try_from(citations).map_err(|_| ParseError::InvalidField {
        line: line_no,
        field: "citations",
        message: format!("negative citation count {citations}"),
    })?;
    let raw_authors = raw.authors.ok_or(ParseError::MissingField {
        line: line_no,
        field: "authors",
    })?;
    if raw_authors.is_empty() {
        return Err(ParseError::EmptyAuthors { line: line_no });
    }

    let mut authorships = Vec::with_capacity(raw_authors.len());
    let mut seen_authors = HashSet::with_capacity(raw_authors.len());
    for author in raw_authors {
        let author_id = author.id.ok_or(ParseError::MissingField {
            line: line_no,
            field: "authors.id",
        })?;
        if !seen_authors.insert(author_id.clone()) {
            return Err(ParseError::DuplicateAuthor {
                line: line_no,
                author: author_id,
            });
        }
        let raw_countries = author.countries.ok_or(ParseError::MissingField {
            line: line_no,
            field: "authors.countries",
        })?;
        let mut countries = CountrySet::new();
        for token in &raw_countries {
            let code = Country::new(token);
            if code.is_empty() {
                return Err(ParseError::InvalidField {
                    line: line_no,
                    field: "authors.countries",
                    message: format!("blank country code for author `{author_id}`"),
                });
            }
            countries.insert(code);
        }
        if countries.is_empty() {
            return Err(ParseError::EmptyCountries {
                line: line_no,
                author: author_id,
            });
        }
        authorships.push(Authorship {
            author_id,
            countries,
        });
    }

    Ok(PublicationRecord {
        pub_id,
        year,
        doc_type,
        field_id,
        citation_count,
        authorships,
    })
}

/// Maps a serde failure to a field-level error where possible. Only runs on
/// already-failed lines, so the extra `Value` pass is off the hot path.
fn diagnose(line: &str, line_no: u64, err: serde_json::Error) -> ParseError {
    let value: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(_) => {
            return ParseError::Syntax {
                line: line_no,
                message: err.to_string(),
            }
        }
    };
    let obj = match value.as_object() {
        Some(obj) => obj,
        None => {
            return ParseError::Syntax {
                line: line_no,
                message: "not a JSON object".to_string(),
            }
        }
    };
    let type_of = |v: &Value| -> &'static str {
        match v {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(_) => "number",
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        }
    };
    for (field, want) in [
        ("pub_id", "string"),
        ("year", "integer"),
        ("doc_type", "string"),
        ("field", "string"),
    ] {
        if let Some(v) = obj.get(field) {
            let ok = match want {
                "integer" => v.as_i64().is_some(),
                _ => v.is_string(),
            };
            if !ok {
                return ParseError::InvalidField {
                    line: line_no,
                    field: match field {
                        "pub_id" => "pub_id",
                        "year" => "year",
                        "doc_type" => "doc_type",
                        _ => "field",
                    },
                    message: format!("expected {want}, got {}", type_of(v)),
                };
            }
        }
    }
    if let Some(v) = obj.get("citations") {
        if v.as_i64().is_none() {
            return ParseError::InvalidField {
                line: line_no,
                field: "citations",
                message: format!("expected integer, got {}", type_of(v)),
            };
        }
    }
    if let Some(v) = obj.get("authors") {
        if !v.is_array() {
            return ParseError::InvalidField {
                line: line_no,
                field: "authors",
                message: format!("expected array, got {}", type_of(v)),
            };
        }
    }
    ParseError::Syntax {
        line: line_no,
        message: err.to_string(),
    }
}

/// Serializes a record back to its JSONL form.
pub fn serialize_record(record: &PublicationRecord) -> String {
    serde_json::to_string(record).expect("record serialization cannot fail")
}

/// Records non-alpha-2 country codes into a report without rejecting them.
fn flag_country_shapes(record: &PublicationRecord, line: u64, report: &mut ValidationReport) {
    for authorship in &record.authorships {
        for country in &authorship.countries {
            if !country.is_alpha2() {
                report.record(
                    ViolationKind::NonAlpha2Country,
                    line,
                    format!("country `{country}` is not ISO alpha-2"),
                );
            }
        }
    }
}

/// Error-handling policy while streaming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Abort on the first malformed line.
    Strict,
    /// Skip malformed lines, counting them in the report.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Copy)]
pub struct StreamOptions {
    pub window: YearWindow,
    pub policy: Policy,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            window: YearWindow::DEFAULT,
            policy: Policy::Lenient,
        }
    }
}

/// Single forward pass over a JSONL corpus, yielding validated in-window
/// records in file order. Holds one line in memory at a time.
///
/// Out-of-window records are counted and skipped in both policies; they are
/// filtered data, not errors. Blank lines are ignored.
pub struct CorpusReader<R: BufRead> {
    reader: R,
    opts: StreamOptions,
    line_no: u64,
    buf: String,
    report: ValidationReport,
    records_yielded: u64,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, opts: StreamOptions) -> Self {
        CorpusReader {
            reader,
            opts,
            line_no: 0,
            buf: String::new(),
            report: ValidationReport::new(),
            records_yielded: 0,
            done: false,
        }
    }

    /// Violations observed so far (skip counts under lenient policy).
    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn into_report(self) -> ValidationReport {
        self.report
    }

    pub fn records_yielded(&self) -> u64 {
        self.records_yielded
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<PublicationRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.done {
                return None;
            }
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(err) => {
                    self.done = true;
                    return Some(Err(err.into()));
                }
            }
            self.line_no += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                continue;
            }
            match parse_record(line, self.line_no) {
                Ok(record) => {
                    if !self.opts.window.contains(record.year) {
                        self.report.record(
                            ViolationKind::OutOfWindow,
                            self.line_no,
                            format!("year {} outside {}", record.year, self.opts.window),
                        );
                        continue;
                    }
                    flag_country_shapes(&record, self.line_no, &mut self.report);
                    self.records_yielded += 1;
                    return Some(Ok(record));
                }
                Err(err) => {
                    self.report.record_parse_error(&err);
                    match self.opts.policy {
                        Policy::Strict => {
                            self.done = true;
                            return Some(Err(err.into()));
                        }
                        Policy::Lenient => continue,
                    }
                }
            }
        }
    }
}

/// Opens a corpus file for streaming.
pub fn stream_corpus(
    path: impl AsRef<Path>,
    opts: StreamOptions,
) -> io::Result<CorpusReader<BufReader<File>>> {
    let file = File::open(path)?;
    Ok(CorpusReader::new(BufReader::new(file), opts))
}

/// Full corpus validation: everything [`CorpusReader`] checks plus duplicate
/// `pub_id` detection. Feed parse results in, collect surviving records out.
pub struct Validator {
    window: YearWindow,
    seen_pub_ids: HashSet<String>,
    report: ValidationReport,
}

impl Validator {
    pub fn new(window: YearWindow) -> Self {
        Validator {
            window,
            seen_pub_ids: HashSet::new(),
            report: ValidationReport::new(),
        }
    }

    /// Returns the record if it passes all checks; violations land in the
    /// report. The first occurrence of a duplicated `pub_id` survives.
    pub fn push(
        &mut self,
        parsed: Result<PublicationRecord, ParseError>,
        line: u64,
    ) -> Option<PublicationRecord> {
        let record = match parsed {
            Ok(record) => record,
            Err(err) => {
                self.report.record_parse_error(&err);
                return None;
            }
        };
        if !self.window.contains(record.year) {
            self.report.record(
                ViolationKind::OutOfWindow,
                line,
                format!("year {} outside {}", record.year, self.window),
            );
            return None;
        }
        if !self.seen_pub_ids.insert(record.pub_id.clone()) {
            self.report.record(
                ViolationKind::DuplicatePubId,
                line,
                format!("pub_id `{}` already seen", record.pub_id),
            );
            return None;
        }
        flag_country_shapes(&record, line, &mut self.report);
        Some(record)
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn finish(self) -> ValidationReport {
        self.report
    }
}

/// Validates a whole file, returning the number of surviving records and the
/// report.
pub fn validate_corpus(
    path: impl AsRef<Path>,
    window: YearWindow,
) -> io::Result<(u64, ValidationReport)> {
    let file = File::open(path)?;
    let mut validator = Validator::new(window);
    let mut valid = 0u64;
    let mut line_no = 0u64;
    let mut buf = String::new();
    let mut reader = BufReader::new(file);
    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = buf.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        if validator.push(parse_record(line, line_no), line_no).is_some() {
            valid += 1;
        }
    }
    Ok((valid, validator.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn line(json: &str) -> PublicationRecord {
        parse_record(json, 1).unwrap()
    }

    #[test]
    fn parses_minimal_record() {
        let rec = line(
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"PHYS","citations":12,"authors":[{"id":"a1","countries":["ES"]}]}"#,
        );
        assert_eq!(rec.pub_id, "p1");
        assert_eq!(rec.authorships.len(), 1);
        assert_eq!(
            rec.authorships[0].countries,
            ["ES"].iter().map(|s| Country::new(s)).collect()
        );
    }

    #[test]
    fn normalizes_country_codes() {
        let rec = line(
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["es"," gb "]}]}"#,
        );
        let want: CountrySet = ["ES", "GB"].iter().map(|s| Country::new(s)).collect();
        assert_eq!(rec.authorships[0].countries, want);
    }

    #[test]
    fn rejects_empty_country_set() {
        let err = parse_record(
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":[]}]}"#,
            7,
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::EmptyCountries { line: 7, .. }));
        assert!(err.to_string().contains("empty country set"));
    }

    #[test]
    fn rejects_missing_field_and_bad_types() {
        let err = parse_record(r#"{"year":2010}"#, 3).unwrap_err();
        assert_eq!(
            err,
            ParseError::MissingField {
                line: 3,
                field: "pub_id"
            }
        );

        let err = parse_record(
            r#"{"pub_id":"p1","year":"twenty","doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
            4,
        )
        .unwrap_err();
        assert!(
            matches!(err, ParseError::InvalidField { line: 4, field: "year", .. }),
            "got {err:?}"
        );

        let err = parse_record("not json", 5).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 5, .. }));

        let err = parse_record(
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":-3,"authors":[{"id":"a1","countries":["ES"]}]}"#,
            6,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ParseError::InvalidField {
                field: "citations",
                ..
            }
        ));
    }

    #[test]
    fn rejects_duplicate_author_within_record() {
        let err = parse_record(
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]},{"id":"a1","countries":["GB"]}]}"#,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::DuplicateAuthor { .. }));
    }

    #[test]
    fn unknown_doc_type_maps_to_other() {
        let rec = line(
            r#"{"pub_id":"p1","year":2010,"doc_type":"editorial","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
        );
        assert_eq!(rec.doc_type, DocType::Other);
    }

    #[test]
    fn serialize_parse_round_trip() {
        let rec = line(
            r#"{"pub_id":"p9","year":2012,"doc_type":"review","field":"BIO","citations":4,"authors":[{"id":"a2","countries":["es","GB"]}]}"#,
        );
        let reparsed = parse_record(&serialize_record(&rec), 1).unwrap();
        assert_eq!(rec, reparsed);
    }

    fn corpus_reader(text: &str, policy: Policy) -> CorpusReader<Cursor<&str>> {
        CorpusReader::new(
            Cursor::new(text),
            StreamOptions {
                window: YearWindow::DEFAULT,
                policy,
            },
        )
    }

    const THREE_GOOD: &str = concat!(
        r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
        "\n",
        r#"{"pub_id":"p2","year":2011,"doc_type":"letter","field":"F","citations":1,"authors":[{"id":"a1","countries":["ES"]}]}"#,
        "\n",
        r#"{"pub_id":"p3","year":2012,"doc_type":"review","field":"F","citations":2,"authors":[{"id":"a2","countries":["GB"]}]}"#,
        "\n",
    );

    #[test]
    fn streams_in_file_order() {
        let ids: Vec<String> = corpus_reader(THREE_GOOD, Policy::Lenient)
            .map(|r| r.unwrap().pub_id)
            .collect();
        assert_eq!(ids, ["p1", "p2", "p3"]);
    }

    #[test]
    fn strict_mode_aborts_with_line_number() {
        let text = format!("{}not json\n", THREE_GOOD);
        let mut reader = corpus_reader(&text, Policy::Strict);
        let mut ok = 0;
        let mut failure = None;
        for item in reader.by_ref() {
            match item {
                Ok(_) => ok += 1,
                Err(err) => failure = Some(err),
            }
        }
        assert_eq!(ok, 3);
        match failure {
            Some(IngestError::Parse(err)) => assert_eq!(err.line(), 4),
            other => panic!("expected parse abort, got {other:?}"),
        }
    }

    #[test]
    fn lenient_mode_skips_and_counts() {
        let text = format!(
            "{}{}\n{}\n",
            "not json\n", // line 1 bad
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
            r#"{"pub_id":"p2","year":2011,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
        );
        let mut reader = corpus_reader(&text, Policy::Lenient);
        let records: Vec<_> = reader.by_ref().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 2);
        assert_eq!(reader.report().count(ViolationKind::Syntax), 1);
    }

    #[test]
    fn out_of_window_records_are_counted_and_excluded() {
        let text = format!(
            "{}\n{}\n",
            r#"{"pub_id":"p1","year":2005,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
            r#"{"pub_id":"p2","year":2011,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
        );
        let mut reader = corpus_reader(&text, Policy::Lenient);
        let records: Vec<_> = reader.by_ref().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 1);
        assert_eq!(reader.report().count(ViolationKind::OutOfWindow), 1);
    }

    #[test]
    fn validator_reports_duplicates_and_passes_valid() {
        let mut validator = Validator::new(YearWindow::DEFAULT);
        let a = parse_record(
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
            1,
        );
        let b = parse_record(
            r#"{"pub_id":"p1","year":2011,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["ES"]}]}"#,
            2,
        );
        assert!(validator.push(a, 1).is_some());
        assert!(validator.push(b, 2).is_none());
        let report = validator.finish();
        assert_eq!(report.count(ViolationKind::DuplicatePubId), 1);
        assert_eq!(report.details().len(), 1);
        assert_eq!(report.details()[0].line, 2);
    }

    #[test]
    fn fully_valid_corpus_has_zero_violations() {
        let mut validator = Validator::new(YearWindow::DEFAULT);
        for (i, l) in THREE_GOOD.lines().enumerate() {
            let n = i as u64 + 1;
            assert!(validator.push(parse_record(l, n), n).is_some());
        }
        assert_eq!(validator.finish().total(), 0);
    }

    #[test]
    fn non_alpha2_codes_are_flagged_but_kept() {
        let text = format!(
            "{}\n",
            r#"{"pub_id":"p1","year":2010,"doc_type":"article","field":"F","citations":0,"authors":[{"id":"a1","countries":["XKX9"]}]}"#
        );
        let mut reader = corpus_reader(&text, Policy::Lenient);
        let records: Vec<_> = reader.by_ref().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 1);
        assert_eq!(reader.report().count(ViolationKind::NonAlpha2Country), 1);
    }

    #[test]
    fn report_merge_is_order_independent() {
        let mut a = ValidationReport::new();
        a.record(ViolationKind::Syntax, 3, "x");
        a.record(ViolationKind::OutOfWindow, 5, "y");
        let mut b = ValidationReport::new();
        b.record(ViolationKind::Syntax, 1, "z");

        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.count(ViolationKind::Syntax), 2);
    }

    #[test]
    fn report_json_lists_every_kind() {
        let mut report = ValidationReport::new();
        report.record(ViolationKind::DuplicatePubId, 2, "dup");
        let json = report.to_json();
        let obj = json.as_object().unwrap();
        assert_eq!(obj.len(), ViolationKind::ALL.len());
        assert_eq!(obj["duplicate_pub_id"], 1);
        assert_eq!(obj["syntax"], 0);
    }
}
