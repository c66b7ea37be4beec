use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestType {
    Chat,
    Retrieval,
    Summarization,
    Generation,
    Generic,
}

impl RequestType {
    pub const ALL: [RequestType; 5] = [
        RequestType::Chat,
        RequestType::Retrieval,
        RequestType::Summarization,
        RequestType::Generation,
        RequestType::Generic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RequestType::Chat => "chat",
            RequestType::Retrieval => "retrieval",
            RequestType::Summarization => "summarization",
            RequestType::Generation => "generation",
            RequestType::Generic => "generic",
        }
    }
}

impl fmt::Display for RequestType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RequestType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RequestType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown request type `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestTypeEntry {
    /// Lowercase words or phrases that signal this request type.
    #[serde(default)]
    pub keywords: Vec<String>,
    pub input_tokens: u64,
    pub output_tokens: u64,
    #[serde(default)]
    pub fitted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodEntry {
    pub name: String,
    /// Lowercase phrases; `/` is its own token, so "/month" is written "/ month".
    pub phrases: Vec<String>,
    /// How many of this period make a month.
    pub per_month: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountryNames {
    pub country_code: String,
    /// Matched case-insensitively.
    #[serde(default)]
    pub names: Vec<String>,
    /// Matched case-sensitively, so "US" is a country but "us" is not.
    #[serde(default)]
    pub codes: Vec<String>,
}

/// Parser vocabulary. Shipped as data so it can be audited without reading code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub request_types: BTreeMap<RequestType, RequestTypeEntry>,
    pub periods: Vec<PeriodEntry>,
    /// Nouns allowed between a quantity and its period ("4,000 uses per month").
    pub unit_nouns: Vec<String>,
    pub countries: Vec<CountryNames>,
}

impl Lexicon {
    pub fn request_type(&self, kind: RequestType) -> &RequestTypeEntry {
        self.request_types
            .get(&kind)
            .expect("validated lexicon covers every request type")
    }
}
