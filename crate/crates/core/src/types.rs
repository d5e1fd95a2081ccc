//! Core domain types shared across the pipeline.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Country code attached to an author-publication linkage.
///
/// Well-formed corpora carry ISO 3166-1 alpha-2 codes. Other tokens are
/// accepted and carried through opaquely (the pipeline only needs set
/// identity, not geography); the validation report flags them.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Country(String);

impl Country {
    /// Normalizes a raw token: trim surrounding whitespace, uppercase.
    pub fn new(raw: &str) -> Self {
        Country(raw.trim().to_ascii_uppercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the code is exactly two ASCII uppercase letters.
    pub fn is_alpha2(&self) -> bool {
        self.0.len() == 2 && self.0.bytes().all(|b| b.is_ascii_uppercase())
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Country {
    fn from(raw: &str) -> Self {
        Country::new(raw)
    }
}

/// Set of countries an author is linked to at some point in time.
pub type CountrySet = BTreeSet<Country>;

/// Renders a country set as a `;`-joined, sorted list (the CSV convention).
pub fn join_countries(set: &CountrySet) -> String {
    let mut out = String::new();
    for (i, c) in set.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(c.as_str());
    }
    out
}

/// Parses a `;`-joined country list back into a set. Empty input yields an
/// empty set.
pub fn split_countries(s: &str) -> CountrySet {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(Country::new)
        .collect()
}

/// Document type of a publication. All types contribute to mobility
/// tracking; only articles and reviews carry citation indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Letter,
    Proceedings,
    Other,
}

impl DocType {
    /// Articles and reviews are the citable document types.
    pub fn is_citable(self) -> bool {
        matches!(self, DocType::Article | DocType::Review)
    }

    /// Parses a doc-type token; unrecognized tokens map to `Other`.
    pub fn parse_lenient(token: &str) -> DocType {
        match token.trim().to_ascii_lowercase().as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            "letter" => DocType::Letter,
            "proceedings" => DocType::Proceedings,
            _ => DocType::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Letter => "letter",
            DocType::Proceedings => "proceedings",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One author's linkage on one publication: the disambiguated identity token
/// and the set of countries of their affiliations on that paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authorship {
    #[serde(rename = "id")]
    pub author_id: String,
    pub countries: CountrySet,
}

/// One publication with its per-author country linkages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    #[serde(rename = "field")]
    pub field_id: String,
    #[serde(rename = "citations")]
    pub citation_count: u64,
    #[serde(rename = "authors")]
    pub authorships: Vec<Authorship>,
}

/// Inclusive year range under analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    /// Author-affiliation linkages are recorded from 2008 on; the default
    /// window matches the eight-year span the indicators were designed for.
    pub const DEFAULT: YearWindow = YearWindow { start: 2008, end: 2015 };

    pub fn new(start: i32, end: i32) -> Option<YearWindow> {
        (start <= end).then_some(YearWindow { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn len(&self) -> u32 {
        (self.end - self.start + 1) as u32
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl Default for YearWindow {
    fn default() -> Self {
        YearWindow::DEFAULT
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for YearWindow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| format!("expected START-END, got `{s}`"))?;
        let start: i32 = a.trim().parse().map_err(|_| format!("bad start year `{a}`"))?;
        let end: i32 = b.trim().parse().map_err(|_| format!("bad end year `{b}`"))?;
        YearWindow::new(start, end).ok_or_else(|| format!("window start {start} after end {end}"))
    }
}
