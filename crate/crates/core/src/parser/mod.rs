//! Rule-based extraction of a usage scenario from a one-sentence description.
//!
//! Pipeline, in order:
//!
//! 1. model mention, by strict catalog lookup over token n-grams;
//! 2. request volume, a quantity bound to a period word and normalized to a month;
//! 3. request type, the earliest keyword from the lexicon;
//! 4. token load, explicit counts if stated, else the request type's default;
//! 5. country, by name or code, else left to the engine's provider-country default.
//!
//! Every field of the result carries a provenance tag. Vocabulary lives in the
//! catalog's `lexicon.toml`.

mod numbers;
mod tokens;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{lookup_model, lookup_strict, nearest_models, normalize, Catalog, LookupError, RequestType};
use crate::inference::TokenLoad;
use crate::ledger::Provenance;

use numbers::{quantity_at, Quantity};
use tokens::{tokenize, Token};

const MAX_NAME_TOKENS: usize = 5;
const MAX_UNIT_NOUNS: usize = 3;
const MIN_PREFIX_LEN: usize = 3;

/// How a scenario field was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSource {
    /// Stated in the text.
    Explicit,
    /// Read from cues in the text (keywords, a converted period).
    Inferred,
    /// Nothing in the text; a documented default applies.
    Default,
}

impl FieldSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldSource::Explicit => "explicit",
            FieldSource::Inferred => "inferred",
            FieldSource::Default => "default",
        }
    }

    /// The ledger provenance this source becomes once the scenario is estimated.
    pub fn provenance(self) -> Provenance {
        match self {
            FieldSource::Explicit => Provenance::User,
            FieldSource::Inferred => Provenance::Derived,
            FieldSource::Default => Provenance::Default,
        }
    }
}

impl fmt::Display for FieldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioField {
    ModelId,
    RequestType,
    TokenLoad,
    RequestsPerMonth,
    CountryCode,
}

impl ScenarioField {
    pub const ALL: [ScenarioField; 5] = [
        ScenarioField::ModelId,
        ScenarioField::RequestType,
        ScenarioField::TokenLoad,
        ScenarioField::RequestsPerMonth,
        ScenarioField::CountryCode,
    ];
}

/// One provenance tag per scenario field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldProvenance {
    pub model_id: FieldSource,
    pub request_type: FieldSource,
    pub token_load: FieldSource,
    pub requests_per_month: FieldSource,
    pub country_code: FieldSource,
}

impl FieldProvenance {
    pub fn get(&self, field: ScenarioField) -> FieldSource {
        match field {
            ScenarioField::ModelId => self.model_id,
            ScenarioField::RequestType => self.request_type,
            ScenarioField::TokenLoad => self.token_load,
            ScenarioField::RequestsPerMonth => self.requests_per_month,
            ScenarioField::CountryCode => self.country_code,
        }
    }
}

/// A compact estimation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub model_id: String,
    pub request_type: RequestType,
    pub token_load: TokenLoad,
    /// At least 1 when present.
    pub requests_per_month: Option<u64>,
    /// `None` means the engine uses the model's provider country.
    pub country_code: Option<String>,
    pub provenance: FieldProvenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    NoModel,
    AmbiguousModel,
    ConflictingModels,
    ConflictingVolumes,
    NonPositiveVolume,
    AmbiguousNumeral,
    ConflictingTokens,
    InvalidTokens,
    ConflictingCountries,
}

/// Why a description could not be turned into a scenario. Always carries at
/// least one suggestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub suggestions: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        if !self.suggestions.is_empty() {
            write!(f, " (try: {})", self.suggestions.join("; "))?;
        }
        Ok(())
    }
}

struct Mention {
    model_id: String,
    start: usize,
    end: usize,
    source: FieldSource,
}

struct Reading {
    per_month: f64,
    text: String,
    period: String,
}

pub fn parse_scenario(description: &str, catalog: &Catalog) -> Result<Scenario, Vec<Diagnostic>> {
    let tokens = tokenize(description);
    let mut diagnostics = Vec::new();
    let mut used = vec![false; tokens.len()];

    // (1) model
    let mentions = find_models(&tokens, catalog, &mut diagnostics);
    for m in &mentions {
        used[m.start..m.end].iter_mut().for_each(|u| *u = true);
    }
    let mut ids: Vec<&str> = Vec::new();
    for m in &mentions {
        if !ids.contains(&m.model_id.as_str()) {
            ids.push(&m.model_id);
        }
    }
    let model_source = mentions.first().map_or(FieldSource::Explicit, |m| m.source);
    let model_id = match ids.as_slice() {
        [] => {
            if !diagnostics
                .iter()
                .any(|d: &Diagnostic| d.kind == DiagnosticKind::AmbiguousModel)
            {
                diagnostics.push(Diagnostic {
                    kind: DiagnosticKind::NoModel,
                    message: "no catalog model is mentioned".into(),
                    suggestions: suggest_models(&tokens, catalog),
                });
            }
            None
        }
        [one] => Some(one.to_string()),
        many => {
            diagnostics.push(Diagnostic {
                kind: DiagnosticKind::ConflictingModels,
                message: format!("several models are mentioned: {}", many.join(", ")),
                suggestions: many.iter().map(|s| s.to_string()).collect(),
            });
            None
        }
    };

    let model_tokens = used.clone();

    // (2) volume and explicit token counts share the quantity scan
    let scan = scan_quantities(&tokens, &used, catalog, &mut diagnostics);
    for (start, end) in &scan.spans {
        used[*start..*end].iter_mut().for_each(|u| *u = true);
    }
    let (requests_per_month, volume_source) = resolve_volume(&scan.readings, &mut diagnostics);

    // (3) request type
    let request_type = find_request_type(&tokens, &model_tokens, catalog);
    let type_source = if request_type.is_some() {
        FieldSource::Inferred
    } else {
        FieldSource::Default
    };
    let request_type = request_type.unwrap_or(RequestType::Generic);

    // (4) token load
    let defaults = catalog.lexicon.request_type(request_type);
    let input = first_consistent(&scan.input_tokens, "input", &mut diagnostics);
    let output = first_consistent(&scan.output_tokens, "output", &mut diagnostics);
    let load_source = match (input, output) {
        (Some(_), Some(_)) => FieldSource::Explicit,
        (None, None) => FieldSource::Default,
        _ => FieldSource::Inferred,
    };
    let load = TokenLoad::new(
        input.unwrap_or(defaults.input_tokens),
        output.unwrap_or(defaults.output_tokens),
    );
    if load.is_err() {
        diagnostics.push(Diagnostic {
            kind: DiagnosticKind::InvalidTokens,
            message: "a request needs at least one input or output token".into(),
            suggestions: vec![format!(
                "{} input tokens and {} output tokens",
                defaults.input_tokens, defaults.output_tokens
            )],
        });
    }

    // (5) country
    let country = find_country(&tokens, &used, catalog, &mut diagnostics);

    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }
    Ok(Scenario {
        model_id: model_id.expect("no diagnostics implies a model"),
        request_type,
        token_load: load.expect("no diagnostics implies a valid load"),
        requests_per_month,
        country_code: country.clone(),
        provenance: FieldProvenance {
            model_id: model_source,
            request_type: type_source,
            token_load: load_source,
            requests_per_month: volume_source,
            country_code: if country.is_some() {
                FieldSource::Explicit
            } else {
                FieldSource::Default
            },
        },
    })
}

/// One-line summary naming every field, its value and its provenance.
pub fn render_scenario(scenario: &Scenario) -> String {
    let p = &scenario.provenance;
    let volume = match scenario.requests_per_month {
        Some(v) => format!("{v} requests/month"),
        None => "not stated (per-request only)".to_string(),
    };
    let country = match &scenario.country_code {
        Some(c) => c.clone(),
        None => "provider country".to_string(),
    };
    format!(
        "model {} [{}]; request type {} [{}]; tokens {} in / {} out [{}]; volume {} [{}]; country {} [{}]",
        scenario.model_id,
        p.model_id,
        scenario.request_type,
        p.request_type,
        scenario.token_load.input_tokens(),
        scenario.token_load.output_tokens(),
        p.token_load,
        volume,
        p.requests_per_month,
        country,
        p.country_code,
    )
}

fn find_models(tokens: &[Token], catalog: &Catalog, diagnostics: &mut Vec<Diagnostic>) -> Vec<Mention> {
    let mut mentions = Vec::new();
    let mut i = 0;
    'outer: while i < tokens.len() {
        for len in (1..=MAX_NAME_TOKENS).rev() {
            let Some(window) = tokens.get(i..i + len) else {
                continue;
            };
            if !window.iter().all(Token::is_name_part) {
                continue;
            }
            let text = window.iter().map(|t| t.raw.as_str()).collect::<Vec<_>>().join(" ");
            match lookup_strict(catalog, &text) {
                Ok(Some(m)) => {
                    mentions.push(Mention {
                        model_id: m.id.clone(),
                        start: i,
                        end: i + len,
                        source: FieldSource::Explicit,
                    });
                    i += len;
                    continue 'outer;
                }
                Ok(None) => {}
                Err(LookupError::Ambiguous { query, candidates }) => {
                    diagnostics.push(Diagnostic {
                        kind: DiagnosticKind::AmbiguousModel,
                        message: format!("`{query}` matches several models"),
                        suggestions: candidates,
                    });
                    i += len;
                    continue 'outer;
                }
                Err(LookupError::NotFound { .. }) => {}
            }
        }
        i += 1;
    }
    if mentions.is_empty() && diagnostics.is_empty() {
        prefix_mentions(tokens, catalog, &mut mentions, diagnostics);
    }
    mentions
}

/// A lone family word such as "Llama" or "GPT": unique prefix of one model's
/// names is an inferred mention, a prefix of several is ambiguous.
fn prefix_mentions(
    tokens: &[Token],
    catalog: &Catalog,
    mentions: &mut Vec<Mention>,
    diagnostics: &mut Vec<Diagnostic>,
) {
    for (i, t) in tokens.iter().enumerate() {
        if !t.lower.chars().all(|c| c.is_ascii_alphabetic()) || t.lower.len() < MIN_PREFIX_LEN {
            continue;
        }
        match lookup_model(catalog, &t.raw) {
            Ok(m) => mentions.push(Mention {
                model_id: m.id.clone(),
                start: i,
                end: i + 1,
                source: FieldSource::Inferred,
            }),
            Err(LookupError::Ambiguous { query, candidates }) => diagnostics.push(Diagnostic {
                kind: DiagnosticKind::AmbiguousModel,
                message: format!("`{query}` matches several models"),
                suggestions: candidates,
            }),
            Err(LookupError::NotFound { .. }) => {}
        }
    }
}

fn suggest_models(tokens: &[Token], catalog: &Catalog) -> Vec<String> {
    let mut best: Vec<(usize, String)> = Vec::new();
    for len in 1..=3 {
        for window in tokens.windows(len) {
            if !window.iter().all(Token::is_name_part) {
                continue;
            }
            let joined: String = window.iter().map(|t| t.raw.as_str()).collect();
            if normalize(&joined).len() < 3 {
                continue;
            }
            for id in nearest_models(catalog, &joined, catalog.models.len()) {
                let m = catalog.model(&id).expect("nearest returns catalog ids");
                let d = [&m.id, &m.display_name]
                    .into_iter()
                    .chain(&m.aliases)
                    .map(|n| strsim::levenshtein(&normalize(&joined), &normalize(n)))
                    .min()
                    .unwrap_or(usize::MAX);
                match best.iter_mut().find(|(_, b)| *b == id) {
                    Some(entry) => entry.0 = entry.0.min(d),
                    None => best.push((d, id)),
                }
            }
        }
    }
    if best.is_empty() {
        return nearest_models(catalog, "", 3);
    }
    best.sort();
    best.into_iter().take(3).map(|(_, id)| id).collect()
}

fn phrase_at(tokens: &[Token], used: &[bool], at: usize, phrase: &str, case_sensitive: bool) -> Option<usize> {
    let words: Vec<&str> = phrase.split_whitespace().collect();
    if words.is_empty() {
        return None;
    }
    let window = tokens.get(at..at + words.len())?;
    let ok = window.iter().zip(&words).enumerate().all(|(k, (t, w))| {
        !used[at + k]
            && if case_sensitive {
                t.raw == *w
            } else {
                t.lower == *w
            }
    });
    ok.then_some(at + words.len())
}

#[derive(Default)]
struct QuantityScan {
    readings: Vec<Reading>,
    input_tokens: Vec<u64>,
    output_tokens: Vec<u64>,
    spans: Vec<(usize, usize)>,
}

const INPUT_WORDS: [&str; 4] = ["input", "prompt", "context", "in"];
const OUTPUT_WORDS: [&str; 6] = ["output", "completion", "response", "generated", "answer", "out"];
const INPUT_NOUNS: [&str; 6] = ["prompts", "prompt", "inputs", "input", "queries", "questions"];
const OUTPUT_NOUNS: [&str; 8] = [
    "responses", "response", "answers", "answer", "replies", "outputs", "output", "completions",
];

enum TokenRole {
    Input,
    Output,
}

/// "1,500 input tokens", "300 tokens out", "800-token prompts".
fn token_count_at(tokens: &[Token], at: usize) -> Option<(TokenRole, usize)> {
    let word = |k: usize| tokens.get(k).map(|t| t.lower.as_str());
    let is_tokens = |w: Option<&str>| matches!(w, Some("tokens") | Some("token"));
    if let Some(w) = word(at) {
        if is_tokens(word(at + 1)) {
            if INPUT_WORDS.contains(&w) && w != "in" {
                return Some((TokenRole::Input, at + 2));
            }
            if OUTPUT_WORDS.contains(&w) && w != "out" {
                return Some((TokenRole::Output, at + 2));
            }
        }
    }
    if is_tokens(word(at)) {
        let next = word(at + 1);
        if next.is_some_and(|n| INPUT_WORDS.contains(&n) || INPUT_NOUNS.contains(&n)) {
            return Some((TokenRole::Input, at + 2));
        }
        if next.is_some_and(|n| OUTPUT_WORDS.contains(&n) || OUTPUT_NOUNS.contains(&n)) {
            return Some((TokenRole::Output, at + 2));
        }
    }
    None
}

/// Words allowed between a quantity and its period.
fn is_filler(lex: &crate::catalog::Lexicon, word: &str) -> bool {
    word == "of"
        || lex.unit_nouns.iter().any(|n| n == word)
        || lex
            .request_types
            .values()
            .any(|e| e.keywords.iter().any(|k| k == word))
}

/// Period phrase following a quantity, possibly after a few unit nouns.
fn period_after(
    tokens: &[Token],
    used: &[bool],
    at: usize,
    catalog: &Catalog,
) -> Option<(String, f64, usize)> {
    let lex = &catalog.lexicon;
    let mut j = at;
    for _ in 0..=MAX_UNIT_NOUNS {
        for p in &lex.periods {
            for phrase in &p.phrases {
                if let Some(end) = phrase_at(tokens, used, j, phrase, false) {
                    return Some((p.name.clone(), p.per_month, end));
                }
            }
        }
        match tokens.get(j) {
            Some(t) if !used[j] && is_filler(lex, &t.lower) => j += 1,
            _ => return None,
        }
    }
    None
}

fn scan_quantities(
    tokens: &[Token],
    used: &[bool],
    catalog: &Catalog,
    diagnostics: &mut Vec<Diagnostic>,
) -> QuantityScan {
    let mut scan = QuantityScan::default();
    let mut i = 0;
    while i < tokens.len() {
        if used[i] {
            i += 1;
            continue;
        }
        let Some((quantity, end)) = quantity_at(tokens, i) else {
            i += 1;
            continue;
        };
        if used[i..end].iter().any(|u| *u) {
            i += 1;
            continue;
        }
        if let Some((role, stop)) = token_count_at(tokens, end) {
            if let Quantity::Value(v) = quantity {
                if v >= 0.0 && v.fract() == 0.0 {
                    match role {
                        TokenRole::Input => scan.input_tokens.push(v as u64),
                        TokenRole::Output => scan.output_tokens.push(v as u64),
                    }
                    scan.spans.push((i, stop));
                    i = stop;
                    continue;
                }
            }
        }
        let Some((period, per_month, stop)) = period_after(tokens, used, end, catalog) else {
            i = end;
            continue;
        };
        let text = tokens[i..stop]
            .iter()
            .map(|t| t.raw.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        match quantity {
            Quantity::Value(v) => scan.readings.push(Reading {
                per_month: v * per_month,
                text,
                period,
            }),
            Quantity::DotGrouped(raw) => {
                let as_thousands = raw.replace('.', "");
                diagnostics.push(Diagnostic {
                    kind: DiagnosticKind::AmbiguousNumeral,
                    message: format!(
                        "`{raw}` could use `.` as a thousands separator or as a decimal point"
                    ),
                    suggestions: vec![
                        text.replacen(&raw, &as_thousands, 1),
                        text.replacen(&raw, &raw.trim_end_matches('0').trim_end_matches('.').to_string(), 1),
                    ],
                });
            }
            Quantity::Malformed(raw) => {
                diagnostics.push(Diagnostic {
                    kind: DiagnosticKind::AmbiguousNumeral,
                    message: format!("`{raw}` is not a recognized number"),
                    suggestions: vec![
                        "write whole numbers with comma thousands, e.g. 4,000 or 4000".into(),
                    ],
                });
            }
        }
        scan.spans.push((i, stop));
        i = stop;
    }
    scan
}

fn resolve_volume(readings: &[Reading], diagnostics: &mut Vec<Diagnostic>) -> (Option<u64>, FieldSource) {
    let Some(first) = readings.first() else {
        return (None, FieldSource::Default);
    };
    for r in readings {
        if r.per_month.round() < 1.0 {
            diagnostics.push(Diagnostic {
                kind: DiagnosticKind::NonPositiveVolume,
                message: format!("`{}` is below one request per month", r.text),
                suggestions: vec!["state a positive volume, e.g. 4,000 requests per month".into()],
            });
            return (None, FieldSource::Default);
        }
    }
    let distinct: Vec<&Reading> = readings
        .iter()
        .filter(|r| r.per_month.round() != first.per_month.round())
        .collect();
    if !distinct.is_empty() {
        diagnostics.push(Diagnostic {
            kind: DiagnosticKind::ConflictingVolumes,
            message: "the description states more than one request volume".into(),
            suggestions: readings
                .iter()
                .map(|r| format!("{} = {} requests/month", r.text, r.per_month.round()))
                .collect(),
        });
        return (None, FieldSource::Default);
    }
    let source = if readings.iter().all(|r| r.period == "month") {
        FieldSource::Explicit
    } else {
        FieldSource::Inferred
    };
    (Some(first.per_month.round() as u64), source)
}

fn first_consistent(values: &[u64], what: &str, diagnostics: &mut Vec<Diagnostic>) -> Option<u64> {
    let first = *values.first()?;
    if values.iter().any(|v| *v != first) {
        diagnostics.push(Diagnostic {
            kind: DiagnosticKind::ConflictingTokens,
            message: format!("several {what} token counts are stated"),
            suggestions: values.iter().map(|v| format!("{v} {what} tokens")).collect(),
        });
    }
    Some(first)
}

fn find_request_type(tokens: &[Token], used: &[bool], catalog: &Catalog) -> Option<RequestType> {
    for at in 0..tokens.len() {
        // longest phrase wins at the same position
        let mut hit: Option<(usize, RequestType)> = None;
        for (kind, entry) in &catalog.lexicon.request_types {
            for kw in &entry.keywords {
                if phrase_at(tokens, used, at, kw, false).is_some() {
                    let n = kw.split_whitespace().count();
                    if hit.is_none_or(|(best, _)| n > best) {
                        hit = Some((n, *kind));
                    }
                }
            }
        }
        if let Some((_, kind)) = hit {
            return Some(kind);
        }
    }
    None
}

fn find_country(
    tokens: &[Token],
    used: &[bool],
    catalog: &Catalog,
    diagnostics: &mut Vec<Diagnostic>,
) -> Option<String> {
    let mut found: Vec<(String, String)> = Vec::new();
    for at in 0..tokens.len() {
        for c in &catalog.lexicon.countries {
            let by_name = c.names.iter().find_map(|n| phrase_at(tokens, used, at, n, false).map(|e| (n, e)));
            let by_code = c.codes.iter().find_map(|n| phrase_at(tokens, used, at, n, true).map(|e| (n, e)));
            if let Some((phrase, _)) = by_name.or(by_code) {
                if !found.iter().any(|(code, _)| code == &c.country_code) {
                    found.push((c.country_code.clone(), phrase.clone()));
                }
            }
        }
    }
    match found.len() {
        0 => None,
        1 => Some(found.remove(0).0),
        _ => {
            diagnostics.push(Diagnostic {
                kind: DiagnosticKind::ConflictingCountries,
                message: "several countries are mentioned".into(),
                suggestions: found.iter().map(|(code, phrase)| format!("{phrase} ({code})")).collect(),
            });
            None
        }
    }
}
