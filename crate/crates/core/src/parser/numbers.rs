use super::tokens::{Kind, Numeral, Token};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Quantity {
    Value(f64),
    DotGrouped(String),
    Malformed(String),
}

fn small(word: &str) -> Option<f64> {
    const UNITS: [&str; 20] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
        "eighteen", "nineteen",
    ];
    const TENS: [&str; 8] = [
        "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    ];
    if let Some(i) = UNITS.iter().position(|u| *u == word) {
        return Some(i as f64);
    }
    TENS.iter()
        .position(|t| *t == word)
        .map(|i| (i as f64 + 2.0) * 10.0)
}

fn scale(word: &str) -> Option<f64> {
    match word {
        "thousand" => Some(1e3),
        "million" => Some(1e6),
        "billion" => Some(1e9),
        _ => None,
    }
}

/// "four thousand", "a thousand", "two hundred and fifty thousand".
fn word_number(tokens: &[Token], start: usize) -> Option<(f64, usize)> {
    let mut total = 0.0;
    let mut current = 0.0;
    let mut any = false;
    let mut i = start;
    while let Some(t) = tokens.get(i) {
        if !matches!(t.kind, Kind::Word) {
            break;
        }
        let w = t.lower.as_str();
        if let Some(v) = small(w) {
            current += v;
        } else if w == "hundred" {
            current = current.max(1.0) * 100.0;
        } else if let Some(s) = scale(w) {
            total += current.max(1.0) * s;
            current = 0.0;
        } else if (w == "a" || w == "an") && !any {
            // only as "a hundred" / "a thousand"
            let next = tokens.get(i + 1).map(|t| t.lower.as_str());
            if !next.is_some_and(|n| n == "hundred" || scale(n).is_some()) {
                break;
            }
            i += 1;
            continue;
        } else if w == "and" && any {
            let next = tokens.get(i + 1).map(|t| t.lower.as_str());
            if !next.is_some_and(|n| small(n).is_some()) {
                break;
            }
            i += 1;
            continue;
        } else {
            break;
        }
        any = true;
        i += 1;
    }
    any.then_some((total + current, i))
}

/// Reads a quantity starting at `start`: a numeral with an optional magnitude
/// word ("20 thousand", "1.5 million"), or a spelled-out number.
pub(crate) fn quantity_at(tokens: &[Token], start: usize) -> Option<(Quantity, usize)> {
    let t = tokens.get(start)?;
    match &t.kind {
        Kind::Number(Numeral::Value(v)) => {
            let mut end = start + 1;
            let mut v = *v;
            if let Some(s) = tokens.get(end).and_then(|n| scale(&n.lower)) {
                v *= s;
                end += 1;
            }
            Some((Quantity::Value(v), end))
        }
        Kind::Number(Numeral::DotGrouped) => Some((Quantity::DotGrouped(t.raw.clone()), start + 1)),
        Kind::Number(Numeral::Malformed) => Some((Quantity::Malformed(t.raw.clone()), start + 1)),
        Kind::Word => word_number(tokens, start).map(|(v, end)| (Quantity::Value(v), end)),
        Kind::Slash => None,
    }
}
