use std::sync::OnceLock;

use regex::Regex;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Numeral {
    Value(f64),
    /// "4.000": dot used as a thousands separator, or a decimal? Not guessed.
    DotGrouped,
    /// "4,00", "1,5", "1.2.3".
    Malformed,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Kind {
    Word,
    Number(Numeral),
    Slash,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub raw: String,
    pub lower: String,
    pub kind: Kind,
}

impl Token {
    /// Counts toward a model name n-gram.
    pub fn is_name_part(&self) -> bool {
        !matches!(self.kind, Kind::Slash)
    }
}

fn token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"-?[0-9]+(?:[.,][0-9]+)*[A-Za-z]*|[A-Za-z][A-Za-z0-9'&]*|/").unwrap()
    })
}

fn comma_grouped() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[0-9]{1,3}(?:,[0-9]{3})+(?:\.[0-9]+)?$").unwrap())
}

fn dot_grouped() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[0-9]{1,3}(?:\.[0-9]{3})+$").unwrap())
}

fn plain() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[0-9]+(?:\.[0-9]+)?$").unwrap())
}

/// Splits text into words, numerals and `/`. Hyphens and other punctuation
/// separate tokens, except a leading minus directly before digits.
pub(crate) fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for m in token_re().find_iter(text) {
        let mut raw = m.as_str();
        if raw == "/" {
            out.push(Token {
                raw: raw.into(),
                lower: raw.into(),
                kind: Kind::Slash,
            });
            continue;
        }
        // "GPT-5": the hyphen joins words, it is not a sign
        if raw.starts_with('-')
            && text[..m.start()]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_alphanumeric())
        {
            raw = &raw[1..];
        }
        let first = raw.chars().next().unwrap();
        let kind = if first.is_ascii_digit() || first == '-' {
            classify_numeral(raw)
        } else {
            Kind::Word
        };
        out.push(Token {
            raw: raw.into(),
            lower: raw.to_lowercase(),
            kind,
        });
    }
    out
}

fn classify_numeral(raw: &str) -> Kind {
    let (negative, body) = match raw.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, raw),
    };
    let digits_end = body
        .find(|c: char| c.is_ascii_alphabetic())
        .unwrap_or(body.len());
    let (digits, suffix) = body.split_at(digits_end);
    let scale = match suffix.to_ascii_lowercase().as_str() {
        "" => 1.0,
        "k" => 1e3,
        "m" => 1e6,
        // "4o", "70b", "3rd": part of a name, not a quantity
        _ => return Kind::Word,
    };
    let numeral = if plain().is_match(digits) && !(suffix.is_empty() && dot_grouped().is_match(digits)) {
        Numeral::Value(digits.parse::<f64>().unwrap() * scale)
    } else if comma_grouped().is_match(digits) {
        Numeral::Value(digits.replace(',', "").parse::<f64>().unwrap() * scale)
    } else if dot_grouped().is_match(digits) {
        Numeral::DotGrouped
    } else {
        Numeral::Malformed
    };
    Kind::Number(match numeral {
        Numeral::Value(v) if negative => Numeral::Value(-v),
        other => other,
    })
}
