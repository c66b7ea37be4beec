//! Model profiles, factor tables, country mixes and anchor constants.
//!
//! A catalog bundle is a directory of TOML files:
//!
//! | file             | contents                                        |
//! |------------------|-------------------------------------------------|
//! | `anchors.toml`   | `format_version`, inference and training anchors |
//! | `models.toml`    | one `[[model]]` table per profile                |
//! | `factors.toml`   | multiplier triples per factor kind and category  |
//! | `countries.toml` | one `[[country]]` table per electricity mix      |
//! | `lexicon.toml`   | parser vocabulary and per-request-type loads     |
//!
//! The catalog is immutable once loaded. Reloading builds a new value.

mod lexicon;
mod load;
mod lookup;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::band::Triple;

pub use lexicon::{CountryNames, Lexicon, PeriodEntry, RequestType, RequestTypeEntry};
pub use load::{load_catalog, CatalogError, FORMAT_VERSION};
pub use lookup::{lookup_model, lookup_strict, nearest_models, normalize, LookupError};

macro_rules! category_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? } neutral = $neutral:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const NEUTRAL: $name = $name::$neutral;

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

category_enum!(
    /// Context-window class of the served model.
    ContextClass { Short => "short", Standard => "standard", Long => "long", VeryLong => "very_long" }
    neutral = Standard
);
category_enum!(
    ServingMode { Dedicated => "dedicated", SharedHosted => "shared_hosted", Edge => "edge" }
    neutral = Dedicated
);
category_enum!(
    Modality { TextOnly => "text_only", Multimodal => "multimodal" }
    neutral = TextOnly
);
category_enum!(
    ArchNote { Dense => "dense", MoeHybrid => "moe_hybrid", Unknown => "unknown" }
    neutral = Dense
);
category_enum!(
    TrainingRegime {
        FoundationPretraining => "foundation_pretraining",
        ContinuedPretraining => "continued_pretraining",
        Distilled => "distilled",
    }
    neutral = FoundationPretraining
);
category_enum!(
    HardwareClass {
        FrontierAccelerator => "frontier_accelerator",
        StandardAccelerator => "standard_accelerator",
        Unknown => "unknown",
    }
    neutral = StandardAccelerator
);

impl Default for TrainingRegime {
    fn default() -> Self {
        TrainingRegime::FoundationPretraining
    }
}

/// Project-wide constants for the per-request inference proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConstants {
    /// Observed median prompt energy of the anchor service, Wh.
    pub anchor_energy_wh: f64,
    /// Active-parameter proxy of the anchor model, billions.
    pub anchor_active_params_b: f64,
    /// Weight of one output token relative to one input token.
    pub output_token_weight: f64,
    pub ref_input_tokens: u64,
    pub ref_output_tokens: u64,
    /// Weighted volume of the standardized request.
    pub ref_volume: f64,
    pub alpha: Triple,
    pub beta: Triple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_note: Option<String>,
}

impl AnchorConstants {
    pub fn computed_ref_volume(&self) -> f64 {
        self.ref_input_tokens as f64 + self.output_token_weight * self.ref_output_tokens as f64
    }
}

/// Literature anchor and exponents for the training proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingAnchor {
    pub anchor_energy_gwh: f64,
    pub anchor_params_b: f64,
    pub anchor_tokens_b: f64,
    /// Falls back to the inference exponents when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Triple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Triple>,
    /// Training tokens per parameter assumed when a profile has no count.
    pub tokens_per_param_prior: f64,
    #[serde(default)]
    pub fitted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_note: Option<String>,
}

impl TrainingAnchor {
    pub fn alpha_or(&self, anchors: &AnchorConstants) -> Triple {
        self.alpha.unwrap_or(anchors.alpha)
    }

    pub fn beta_or(&self, anchors: &AnchorConstants) -> Triple {
        self.beta.unwrap_or(anchors.beta)
    }
}

/// Per-scenario multipliers that replace the factor-table products for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorOverrides {
    /// Replaces F_ctx x F_srv x F_mod x F_arch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inference: Option<Triple>,
    /// Replaces F_reg x F_arch_tr x F_hw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<Triple>,
    /// Solved from published outputs rather than set from a source.
    #[serde(default)]
    pub fitted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelProfile {
    pub id: String,
    pub display_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub raw_active_params_b: f64,
    /// Parameter count is a screening placeholder, not a published figure.
    #[serde(default)]
    pub assumed: bool,
    pub context_class: ContextClass,
    pub serving_mode: ServingMode,
    pub modality: Modality,
    pub arch_note: ArchNote,
    pub provider_country: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_tokens_b: Option<f64>,
    #[serde(default)]
    pub training_regime: TrainingRegime,
    pub hardware_class: HardwareClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor_overrides: Option<FactorOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_note: Option<String>,
}

impl ModelProfile {
    pub fn inference_fitted(&self) -> bool {
        self.factor_overrides
            .as_ref()
            .is_some_and(|o| o.fitted && o.inference.is_some())
    }

    pub fn training_fitted(&self) -> bool {
        self.factor_overrides
            .as_ref()
            .is_some_and(|o| o.fitted && o.training.is_some())
    }

    pub fn inference_override(&self) -> Option<Triple> {
        self.factor_overrides.as_ref().and_then(|o| o.inference)
    }

    pub fn training_override(&self) -> Option<Triple> {
        self.factor_overrides.as_ref().and_then(|o| o.training)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Ctx,
    Srv,
    Mod,
    Arch,
    Reg,
    ArchTr,
    Hw,
}

impl FactorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorKind::Ctx => "ctx",
            FactorKind::Srv => "srv",
            FactorKind::Mod => "mod",
            FactorKind::Arch => "arch",
            FactorKind::Reg => "reg",
            FactorKind::ArchTr => "arch_tr",
            FactorKind::Hw => "hw",
        }
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("factor table has no `{kind}` entry for category `{category}`")]
pub struct MissingFactor {
    pub kind: FactorKind,
    pub category: &'static str,
}

/// Multiplier triples keyed by factor kind and profile category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorTable {
    pub ctx: BTreeMap<ContextClass, Triple>,
    pub srv: BTreeMap<ServingMode, Triple>,
    #[serde(rename = "mod")]
    pub modality: BTreeMap<Modality, Triple>,
    pub arch: BTreeMap<ArchNote, Triple>,
    pub reg: BTreeMap<TrainingRegime, Triple>,
    pub arch_tr: BTreeMap<ArchNote, Triple>,
    pub hw: BTreeMap<HardwareClass, Triple>,
}

fn entry<K: Ord + Copy>(
    map: &BTreeMap<K, Triple>,
    kind: FactorKind,
    key: K,
    name: &'static str,
) -> Result<Triple, MissingFactor> {
    map.get(&key).copied().ok_or(MissingFactor {
        kind,
        category: name,
    })
}

impl FactorTable {
    /// A table where every category of every kind is (1, 1, 1).
    pub fn neutral() -> Self {
        fn all<K: Ord + Copy>(keys: &[K]) -> BTreeMap<K, Triple> {
            keys.iter().map(|k| (*k, Triple::NEUTRAL)).collect()
        }
        FactorTable {
            ctx: all(ContextClass::ALL),
            srv: all(ServingMode::ALL),
            modality: all(Modality::ALL),
            arch: all(ArchNote::ALL),
            reg: all(TrainingRegime::ALL),
            arch_tr: all(ArchNote::ALL),
            hw: all(HardwareClass::ALL),
        }
    }

    /// The four inference multipliers for `profile`, in ctx/srv/mod/arch order.
    pub fn inference_factors(
        &self,
        profile: &ModelProfile,
    ) -> Result<[(FactorKind, Triple); 4], MissingFactor> {
        Ok([
            (
                FactorKind::Ctx,
                entry(&self.ctx, FactorKind::Ctx, profile.context_class, profile.context_class.as_str())?,
            ),
            (
                FactorKind::Srv,
                entry(&self.srv, FactorKind::Srv, profile.serving_mode, profile.serving_mode.as_str())?,
            ),
            (
                FactorKind::Mod,
                entry(&self.modality, FactorKind::Mod, profile.modality, profile.modality.as_str())?,
            ),
            (
                FactorKind::Arch,
                entry(&self.arch, FactorKind::Arch, profile.arch_note, profile.arch_note.as_str())?,
            ),
        ])
    }

    /// The three training multipliers for `profile`, in reg/arch_tr/hw order.
    pub fn training_factors(
        &self,
        profile: &ModelProfile,
    ) -> Result<[(FactorKind, Triple); 3], MissingFactor> {
        Ok([
            (
                FactorKind::Reg,
                entry(&self.reg, FactorKind::Reg, profile.training_regime, profile.training_regime.as_str())?,
            ),
            (
                FactorKind::ArchTr,
                entry(&self.arch_tr, FactorKind::ArchTr, profile.arch_note, profile.arch_note.as_str())?,
            ),
            (
                FactorKind::Hw,
                entry(&self.hw, FactorKind::Hw, profile.hardware_class, profile.hardware_class.as_str())?,
            ),
        ])
    }

    pub(crate) fn all_triples(&self) -> Vec<(FactorKind, String, Triple)> {
        fn push<K: fmt::Display>(
            out: &mut Vec<(FactorKind, String, Triple)>,
            kind: FactorKind,
            map: &BTreeMap<K, Triple>,
        ) {
            out.extend(map.iter().map(|(k, t)| (kind, k.to_string(), *t)));
        }
        let mut out = Vec::new();
        push(&mut out, FactorKind::Ctx, &self.ctx);
        push(&mut out, FactorKind::Srv, &self.srv);
        push(&mut out, FactorKind::Mod, &self.modality);
        push(&mut out, FactorKind::Arch, &self.arch);
        push(&mut out, FactorKind::Reg, &self.reg);
        push(&mut out, FactorKind::ArchTr, &self.arch_tr);
        push(&mut out, FactorKind::Hw, &self.hw);
        out
    }

    pub(crate) fn neutral_entries(&self) -> [(FactorKind, &'static str, Option<Triple>); 7] {
        [
            (FactorKind::Ctx, ContextClass::NEUTRAL.as_str(), self.ctx.get(&ContextClass::NEUTRAL).copied()),
            (FactorKind::Srv, ServingMode::NEUTRAL.as_str(), self.srv.get(&ServingMode::NEUTRAL).copied()),
            (FactorKind::Mod, Modality::NEUTRAL.as_str(), self.modality.get(&Modality::NEUTRAL).copied()),
            (FactorKind::Arch, ArchNote::NEUTRAL.as_str(), self.arch.get(&ArchNote::NEUTRAL).copied()),
            (FactorKind::Reg, TrainingRegime::NEUTRAL.as_str(), self.reg.get(&TrainingRegime::NEUTRAL).copied()),
            (FactorKind::ArchTr, ArchNote::NEUTRAL.as_str(), self.arch_tr.get(&ArchNote::NEUTRAL).copied()),
            (FactorKind::Hw, HardwareClass::NEUTRAL.as_str(), self.hw.get(&HardwareClass::NEUTRAL).copied()),
        ]
    }
}

/// Carbon intensity of one country's electricity mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountryMix {
    pub country_code: String,
    pub carbon_intensity_g_per_kwh: f64,
    pub source_note: String,
}

/// A fully validated catalog bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub format_version: u32,
    pub anchors: AnchorConstants,
    pub training_anchor: TrainingAnchor,
    pub models: Vec<ModelProfile>,
    pub factors: FactorTable,
    pub countries: Vec<CountryMix>,
    pub lexicon: Lexicon,
}

impl Catalog {
    pub fn model(&self, id: &str) -> Option<&ModelProfile> {
        self.models.iter().find(|m| m.id == id)
    }

    pub fn country(&self, code: &str) -> Option<&CountryMix> {
        self.countries
            .iter()
            .find(|c| c.country_code.eq_ignore_ascii_case(code))
    }

    /// `v<format>+<12 hex digits of the anchor hash>`; identifies the data
    /// snapshot that produced a number.
    pub fn methodology_version(&self) -> String {
        let canonical = load::anchors_toml(self).expect("anchors serialize");
        let digest = Sha256::digest(canonical.as_bytes());
        format!("v{}+{}", self.format_version, &hex::encode(digest)[..12])
    }

    /// Same catalog with an empty model list. Handy for tests and for
    /// serving an empty observatory.
    pub fn without_models(&self) -> Self {
        Catalog {
            models: Vec::new(),
            ..self.clone()
        }
    }
}
