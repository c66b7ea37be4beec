use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    AnchorConstants, Catalog, CountryMix, FactorKind, FactorTable, Lexicon, ModelProfile,
    RequestType, TrainingAnchor,
};

pub const FORMAT_VERSION: u32 = 1;

const ANCHORS: &str = "anchors.toml";
const MODELS: &str = "models.toml";
const FACTORS: &str = "factors.toml";
const COUNTRIES: &str = "countries.toml";
const LEXICON: &str = "lexicon.toml";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}: {message}")]
    Schema { file: &'static str, message: String },
    #[error("{ANCHORS}: unsupported format_version {found} (this build reads {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("{MODELS}: duplicate model id `{0}`")]
    DuplicateModel(String),
    #[error("{COUNTRIES}: duplicate country `{0}`")]
    DuplicateCountry(String),
    #[error("model `{model}`: provider_country `{country}` has no entry in {COUNTRIES}")]
    UnresolvedCountry { model: String, country: String },
    #[error("{FACTORS}: no `{kind}` entry for `{category}` (used by {record})")]
    MissingFactor {
        kind: FactorKind,
        category: String,
        record: String,
    },
    #[error("{record}: `{field}` must be positive, got {value}")]
    NonPositive {
        record: String,
        field: String,
        value: f64,
    },
    #[error("{record}: {message}")]
    Invalid { record: String, message: String },
}

impl CatalogError {
    /// True when the bundle could not be read at all, as opposed to being
    /// read and found invalid.
    pub fn is_io(&self) -> bool {
        matches!(self, CatalogError::Io { .. })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorsFile {
    format_version: u32,
    inference: AnchorConstants,
    training: TrainingAnchor,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelsFile {
    #[serde(default)]
    model: Vec<ModelProfile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountriesFile {
    #[serde(default)]
    country: Vec<CountryMix>,
}

struct Sources<'a> {
    anchors: &'a str,
    models: &'a str,
    factors: &'a str,
    countries: &'a str,
    lexicon: &'a str,
}

/// Loads and validates the bundle in `dir`.
pub fn load_catalog(dir: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let dir = dir.as_ref();
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path).map_err(|source| CatalogError::Io { path, source })
    };
    let anchors = read(ANCHORS)?;
    let models = read(MODELS)?;
    let factors = read(FACTORS)?;
    let countries = read(COUNTRIES)?;
    let lexicon = read(LEXICON)?;
    Catalog::from_sources(Sources {
        anchors: &anchors,
        models: &models,
        factors: &factors,
        countries: &countries,
        lexicon: &lexicon,
    })
}

fn parse<T: DeserializeOwned>(file: &'static str, text: &str) -> Result<T, CatalogError> {
    toml::from_str(text).map_err(|e| {
        let mut message = e.to_string().trim_end().to_string();
        if let Some(record) = e.span().and_then(|span| enclosing_record(text, span.start)) {
            message = format!("in {record}: {message}");
        }
        CatalogError::Schema { file, message }
    })
}

/// Names the `[[model]]` / `[[country]]` entry containing byte `offset`, by its key field.
fn enclosing_record(text: &str, offset: usize) -> Option<String> {
    let start = text[..offset.min(text.len())].rfind("[[")?;
    let header_end = start + text[start..].find("]]")?;
    let table = &text[start + 2..header_end];
    let body_end = text[header_end..]
        .find("\n[[")
        .map_or(text.len(), |i| header_end + i);
    let key = match table {
        "model" => "id",
        "country" | "countries" => "country_code",
        "periods" => "name",
        _ => return None,
    };
    text[header_end..body_end].lines().find_map(|line| {
        let (k, v) = line.split_once('=')?;
        (k.trim() == key).then(|| format!("{table} `{}`", v.trim().trim_matches('"')))
    })
}

fn to_toml<T: Serialize>(file: &'static str, value: &T) -> Result<String, CatalogError> {
    toml::to_string(value).map_err(|e| CatalogError::Schema {
        file,
        message: e.to_string(),
    })
}

pub(crate) fn anchors_toml(catalog: &Catalog) -> Result<String, CatalogError> {
    to_toml(
        ANCHORS,
        &AnchorsFile {
            format_version: catalog.format_version,
            inference: catalog.anchors.clone(),
            training: catalog.training_anchor.clone(),
        },
    )
}

impl Catalog {
    /// The bundle compiled into this binary (the `catalog/` directory of the crate).
    pub fn shipped() -> Catalog {
        Catalog::from_sources(Sources {
            anchors: include_str!("../../catalog/anchors.toml"),
            models: include_str!("../../catalog/models.toml"),
            factors: include_str!("../../catalog/factors.toml"),
            countries: include_str!("../../catalog/countries.toml"),
            lexicon: include_str!("../../catalog/lexicon.toml"),
        })
        .expect("shipped catalog is valid")
    }

    fn from_sources(src: Sources<'_>) -> Result<Catalog, CatalogError> {
        // version first, so a future layout reports the version rather than a schema error
        #[derive(Deserialize)]
        struct VersionOnly {
            format_version: u32,
        }
        let version: VersionOnly = parse(ANCHORS, src.anchors)?;
        if version.format_version != FORMAT_VERSION {
            return Err(CatalogError::UnsupportedVersion {
                found: version.format_version,
            });
        }
        let anchors: AnchorsFile = parse(ANCHORS, src.anchors)?;
        let models: ModelsFile = parse(MODELS, src.models)?;
        let factors: FactorTable = parse(FACTORS, src.factors)?;
        let countries: CountriesFile = parse(COUNTRIES, src.countries)?;
        let lexicon: Lexicon = parse(LEXICON, src.lexicon)?;
        let catalog = Catalog {
            format_version: anchors.format_version,
            anchors: anchors.inference,
            training_anchor: anchors.training,
            models: models.model,
            factors,
            countries: countries.country,
            lexicon,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    /// Writes the catalog as a bundle directory. Comments in the source files
    /// are not preserved.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<(), CatalogError> {
        let dir = dir.as_ref();
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|source| CatalogError::Io { path, source })
        };
        fs::create_dir_all(dir).map_err(|source| CatalogError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write(ANCHORS, anchors_toml(self)?)?;
        write(
            MODELS,
            to_toml(
                MODELS,
                &ModelsFile {
                    model: self.models.clone(),
                },
            )?,
        )?;
        write(FACTORS, to_toml(FACTORS, &self.factors)?)?;
        write(
            COUNTRIES,
            to_toml(
                COUNTRIES,
                &CountriesFile {
                    country: self.countries.clone(),
                },
            )?,
        )?;
        write(LEXICON, to_toml(LEXICON, &self.lexicon)?)?;
        Ok(())
    }

    /// Checks every invariant and cross-reference of the bundle.
    pub fn validate(&self) -> Result<(), CatalogError> {
        self.validate_anchors()?;
        self.validate_factors()?;

        let mut codes = HashSet::new();
        for c in &self.countries {
            let record = format!("country `{}`", c.country_code);
            if !is_alpha2(&c.country_code) {
                return Err(CatalogError::Invalid {
                    record,
                    message: "country_code must be an uppercase ISO 3166-1 alpha-2 code".into(),
                });
            }
            positive(&record, "carbon_intensity_g_per_kwh", c.carbon_intensity_g_per_kwh)?;
            if !codes.insert(c.country_code.as_str()) {
                return Err(CatalogError::DuplicateCountry(c.country_code.clone()));
            }
        }

        let mut ids = HashSet::new();
        for m in &self.models {
            let record = format!("model `{}`", m.id);
            if m.id.is_empty()
                || !m
                    .id
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
            {
                return Err(CatalogError::Invalid {
                    record,
                    message: "id must be a lowercase slug of [a-z0-9-]".into(),
                });
            }
            if !ids.insert(m.id.as_str()) {
                return Err(CatalogError::DuplicateModel(m.id.clone()));
            }
            positive(&record, "raw_active_params_b", m.raw_active_params_b)?;
            if let Some(tokens) = m.training_tokens_b {
                positive(&record, "training_tokens_b", tokens)?;
            }
            if !codes.contains(m.provider_country.as_str()) {
                return Err(CatalogError::UnresolvedCountry {
                    model: m.id.clone(),
                    country: m.provider_country.clone(),
                });
            }
            let coverage = |e: super::MissingFactor| CatalogError::MissingFactor {
                kind: e.kind,
                category: e.category.to_string(),
                record: record.clone(),
            };
            self.factors.inference_factors(m).map_err(coverage)?;
            self.factors.training_factors(m).map_err(coverage)?;
            if let Some(o) = &m.factor_overrides {
                for (field, t) in [("inference", o.inference), ("training", o.training)] {
                    if let Some(t) = t {
                        for v in t.values() {
                            positive(&record, &format!("factor_overrides.{field}"), v)?;
                        }
                    }
                }
            }
        }

        self.validate_lexicon(&codes)
    }

    fn validate_anchors(&self) -> Result<(), CatalogError> {
        let a = &self.anchors;
        let rec = "anchors.inference";
        positive(rec, "anchor_energy_wh", a.anchor_energy_wh)?;
        positive(rec, "anchor_active_params_b", a.anchor_active_params_b)?;
        positive(rec, "output_token_weight", a.output_token_weight)?;
        positive(rec, "ref_input_tokens", a.ref_input_tokens as f64)?;
        positive(rec, "ref_output_tokens", a.ref_output_tokens as f64)?;
        positive(rec, "ref_volume", a.ref_volume)?;
        let computed = a.computed_ref_volume();
        if ((computed - a.ref_volume) / a.ref_volume).abs() > 1e-12 {
            return Err(CatalogError::Invalid {
                record: rec.into(),
                message: format!(
                    "ref_volume {} does not equal ref_input_tokens + output_token_weight x ref_output_tokens = {computed}",
                    a.ref_volume
                ),
            });
        }
        exponents(rec, "alpha", a.alpha)?;
        exponents(rec, "beta", a.beta)?;

        let t = &self.training_anchor;
        let rec = "anchors.training";
        positive(rec, "anchor_energy_gwh", t.anchor_energy_gwh)?;
        positive(rec, "anchor_params_b", t.anchor_params_b)?;
        positive(rec, "anchor_tokens_b", t.anchor_tokens_b)?;
        positive(rec, "tokens_per_param_prior", t.tokens_per_param_prior)?;
        if let Some(alpha) = t.alpha {
            exponents(rec, "alpha", alpha)?;
        }
        if let Some(beta) = t.beta {
            exponents(rec, "beta", beta)?;
        }
        Ok(())
    }

    fn validate_factors(&self) -> Result<(), CatalogError> {
        for (kind, category, t) in self.factors.all_triples() {
            for v in t.values() {
                positive(&format!("factor `{kind}.{category}`"), "multiplier", v)?;
            }
        }
        for (kind, category, t) in self.factors.neutral_entries() {
            match t {
                None => {
                    return Err(CatalogError::MissingFactor {
                        kind,
                        category: category.into(),
                        record: "the neutral category".into(),
                    })
                }
                Some(t) if t != super::Triple::NEUTRAL => {
                    return Err(CatalogError::Invalid {
                        record: format!("factor `{kind}.{category}`"),
                        message: "the neutral category must be [1.0, 1.0, 1.0]".into(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn validate_lexicon(&self, codes: &HashSet<&str>) -> Result<(), CatalogError> {
        let lex = &self.lexicon;
        for kind in RequestType::ALL {
            let Some(entry) = lex.request_types.get(&kind) else {
                return Err(CatalogError::Invalid {
                    record: LEXICON.into(),
                    message: format!("request type `{kind}` has no entry"),
                });
            };
            if entry.input_tokens == 0 && entry.output_tokens == 0 {
                return Err(CatalogError::Invalid {
                    record: format!("request type `{kind}`"),
                    message: "default token load cannot be (0, 0)".into(),
                });
            }
        }
        for p in &lex.periods {
            positive(&format!("period `{}`", p.name), "per_month", p.per_month)?;
        }
        for c in &lex.countries {
            if !codes.contains(c.country_code.as_str()) {
                return Err(CatalogError::Invalid {
                    record: format!("{LEXICON} country `{}`", c.country_code),
                    message: format!("no entry in {COUNTRIES}"),
                });
            }
        }
        Ok(())
    }
}

fn is_alpha2(code: &str) -> bool {
    code.len() == 2 && code.chars().all(|c| c.is_ascii_uppercase())
}

fn positive(record: &str, field: &str, value: f64) -> Result<(), CatalogError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CatalogError::NonPositive {
            record: record.into(),
            field: field.into(),
            value,
        })
    }
}

fn exponents(record: &str, field: &str, t: super::Triple) -> Result<(), CatalogError> {
    for v in t.values() {
        positive(record, field, v)?;
    }
    if !t.is_strictly_increasing() {
        return Err(CatalogError::Invalid {
            record: record.into(),
            message: format!("`{field}` must increase strictly from low to high"),
        });
    }
    Ok(())
}
