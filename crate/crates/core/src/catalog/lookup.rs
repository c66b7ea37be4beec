use thiserror::Error;

use super::{Catalog, ModelProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("no model matches `{query}`; closest: {}", suggestions.join(", "))]
    NotFound {
        query: String,
        suggestions: Vec<String>,
    },
    #[error("`{query}` matches several models: {}", candidates.join(", "))]
    Ambiguous {
        query: String,
        candidates: Vec<String>,
    },
}

impl LookupError {
    /// Ids offered to the user: nearest names, or the competing matches.
    pub fn suggestions(&self) -> &[String] {
        match self {
            LookupError::NotFound { suggestions, .. } => suggestions,
            LookupError::Ambiguous { candidates, .. } => candidates,
        }
    }
}

/// Lowercase ASCII alphanumerics only; "GPT-4o mini" and "gpt4omini" agree.
pub fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn names(m: &ModelProfile) -> impl Iterator<Item = &str> {
    std::iter::once(m.id.as_str())
        .chain(std::iter::once(m.display_name.as_str()))
        .chain(m.aliases.iter().map(String::as_str))
}

fn unique<'a>(
    query: &str,
    hits: Vec<&'a ModelProfile>,
) -> Result<Option<&'a ModelProfile>, LookupError> {
    let mut ids: Vec<&str> = hits.iter().map(|m| m.id.as_str()).collect();
    ids.dedup();
    match ids.len() {
        0 => Ok(None),
        1 => Ok(Some(hits[0])),
        _ => Err(LookupError::Ambiguous {
            query: query.to_string(),
            candidates: ids.into_iter().map(String::from).collect(),
        }),
    }
}

/// Exact slug, then case-insensitive display name or alias, then normalized
/// equality. `Ok(None)` when nothing matches at any of those levels.
pub fn lookup_strict<'a>(
    catalog: &'a Catalog,
    query: &str,
) -> Result<Option<&'a ModelProfile>, LookupError> {
    let query = query.trim();
    if let Some(m) = catalog.models.iter().find(|m| m.id == query) {
        return Ok(Some(m));
    }
    let hits = catalog
        .models
        .iter()
        .filter(|m| names(m).skip(1).any(|n| n.eq_ignore_ascii_case(query)))
        .collect();
    if let Some(m) = unique(query, hits)? {
        return Ok(Some(m));
    }
    let key = normalize(query);
    if key.is_empty() {
        return Ok(None);
    }
    let hits = catalog
        .models
        .iter()
        .filter(|m| names(m).any(|n| normalize(n) == key))
        .collect();
    unique(query, hits)
}

/// Resolves a user-supplied model reference.
///
/// Falls back from [`lookup_strict`] to a unique normalized prefix, so "llama"
/// finds the one Llama profile while "gpt" is ambiguous. On failure the error
/// carries the three nearest ids by edit distance.
pub fn lookup_model<'a>(catalog: &'a Catalog, query: &str) -> Result<&'a ModelProfile, LookupError> {
    if let Some(m) = lookup_strict(catalog, query)? {
        return Ok(m);
    }
    let key = normalize(query);
    if !key.is_empty() {
        let hits = catalog
            .models
            .iter()
            .filter(|m| names(m).any(|n| normalize(n).starts_with(&key)))
            .collect();
        if let Some(m) = unique(query.trim(), hits)? {
            return Ok(m);
        }
    }
    Err(LookupError::NotFound {
        query: query.trim().to_string(),
        suggestions: nearest_models(catalog, query, 3),
    })
}

/// Ids of the `n` models whose names are closest to `query`, ties by id.
pub fn nearest_models(catalog: &Catalog, query: &str, n: usize) -> Vec<String> {
    let key = normalize(query);
    let mut scored: Vec<(usize, &str)> = catalog
        .models
        .iter()
        .map(|m| {
            let d = names(m)
                .map(|name| strsim::levenshtein(&key, &normalize(name)))
                .min()
                .unwrap_or(usize::MAX);
            (d, m.id.as_str())
        })
        .collect();
    scored.sort();
    scored.into_iter().take(n).map(|(_, id)| id.to_string()).collect()
}
