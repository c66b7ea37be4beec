//! Per-request inference energy and carbon.
//!
//! Energy for scenario `s` scales the anchor prompt energy by two power laws:
//!
//! ```text
//! E_s = E_a * (P_eff,s / P_a)^alpha_s * (V / V_ref)^beta_s
//! V   = T_in + w * T_out
//! P_eff,s = P_t * F_ctx,s * F_srv,s * F_mod,s * F_arch,s
//! C_s = E_s / 1000 * CI
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::band::{Scenario, ScreeningBand, Triple, Unit};
use crate::catalog::{AnchorConstants, CountryMix, FactorTable, MissingFactor, ModelProfile};
use crate::ledger::{Assumption, Provenance, Sourced};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("token load (0, 0) is not a request")]
    ZeroTokens,
    #[error("request volume must be at least 1 per month")]
    ZeroVolume,
}

/// Input and output tokens of one request. Never both zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTokenLoad")]
pub struct TokenLoad {
    input_tokens: u64,
    output_tokens: u64,
}

#[derive(Deserialize)]
struct RawTokenLoad {
    input_tokens: u64,
    output_tokens: u64,
}

impl TryFrom<RawTokenLoad> for TokenLoad {
    type Error = InputError;

    fn try_from(raw: RawTokenLoad) -> Result<Self, Self::Error> {
        TokenLoad::new(raw.input_tokens, raw.output_tokens)
    }
}

impl TokenLoad {
    pub fn new(input_tokens: u64, output_tokens: u64) -> Result<Self, InputError> {
        if input_tokens == 0 && output_tokens == 0 {
            return Err(InputError::ZeroTokens);
        }
        Ok(TokenLoad {
            input_tokens,
            output_tokens,
        })
    }

    /// The reference request of the anchor constants (1000 in, 550 out when shipped).
    pub fn standard(anchors: &AnchorConstants) -> Self {
        TokenLoad::new(anchors.ref_input_tokens, anchors.ref_output_tokens)
            .expect("validated anchors have a non-zero reference load")
    }

    pub fn input_tokens(&self) -> u64 {
        self.input_tokens
    }

    pub fn output_tokens(&self) -> u64 {
        self.output_tokens
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    MissingFactor(#[from] MissingFactor),
    #[error("no carbon intensity for country `{0}`")]
    UnknownCountry(String),
    #[error(transparent)]
    Input(#[from] InputError),
}

/// Weighted prompt-compute volume, `T_in + w * T_out`.
pub fn weighted_volume(load: TokenLoad, anchors: &AnchorConstants) -> f64 {
    load.input_tokens as f64 + anchors.output_token_weight * load.output_tokens as f64
}

/// Per-scenario multiplier applied to the raw parameter count.
pub fn parameter_multipliers(
    profile: &ModelProfile,
    factors: &FactorTable,
) -> Result<Triple, MissingFactor> {
    if let Some(t) = profile.inference_override() {
        return Ok(t);
    }
    let f = factors.inference_factors(profile)?;
    Ok(Triple::from_fn(|s| {
        f.iter().fold(1.0, |acc, (_, t)| acc * t.get(s))
    }))
}

/// Effective active parameters (billions) for one scenario.
pub fn effective_params(
    profile: &ModelProfile,
    factors: &FactorTable,
    scenario: Scenario,
) -> Result<f64, MissingFactor> {
    Ok(effective_params_all(profile, factors)?.get(scenario))
}

pub fn effective_params_all(
    profile: &ModelProfile,
    factors: &FactorTable,
) -> Result<Triple, MissingFactor> {
    if let Some(t) = profile.inference_override() {
        return Ok(t.map(|m| profile.raw_active_params_b * m));
    }
    let f = factors.inference_factors(profile)?;
    Ok(Triple::from_fn(|s| {
        f.iter()
            .fold(profile.raw_active_params_b, |acc, (_, t)| acc * t.get(s))
    }))
}

/// Energy in Wh for given effective parameters and weighted volume.
pub fn scenario_energy(
    effective_params_b: f64,
    volume: f64,
    anchors: &AnchorConstants,
    scenario: Scenario,
) -> f64 {
    anchors.anchor_energy_wh
        * (effective_params_b / anchors.anchor_active_params_b).powf(anchors.alpha.get(scenario))
        * (volume / anchors.ref_volume).powf(anchors.beta.get(scenario))
}

/// Raw per-scenario energy triple, Wh per request, before band reordering.
pub fn estimate_energy(
    profile: &ModelProfile,
    load: TokenLoad,
    anchors: &AnchorConstants,
    factors: &FactorTable,
) -> Result<Triple, MissingFactor> {
    let peff = effective_params_all(profile, factors)?;
    let volume = weighted_volume(load, anchors);
    Ok(Triple::from_fn(|s| {
        scenario_energy(peff.get(s), volume, anchors, s)
    }))
}

/// `energy_wh / 1000 * CI`, the one conversion used for every carbon figure.
pub fn carbon_grams(energy_wh: f64, carbon_intensity_g_per_kwh: f64) -> f64 {
    energy_wh / 1000.0 * carbon_intensity_g_per_kwh
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceEstimate {
    pub model_id: String,
    pub energy_wh: ScreeningBand,
    pub carbon_g: ScreeningBand,
    pub effective_params_b: Triple,
    pub load: TokenLoad,
    pub volume: f64,
    pub country_code: String,
    pub carbon_intensity_g_per_kwh: f64,
    pub assumptions: Vec<Assumption>,
}

/// Full per-request estimate with its assumptions ledger.
pub fn estimate_inference(
    profile: &ModelProfile,
    load: Sourced<TokenLoad>,
    country: Sourced<&CountryMix>,
    anchors: &AnchorConstants,
    factors: &FactorTable,
) -> Result<InferenceEstimate, MissingFactor> {
    let peff = effective_params_all(profile, factors)?;
    let volume = weighted_volume(load.value, anchors);
    let energy = Triple::from_fn(|s| scenario_energy(peff.get(s), volume, anchors, s));
    let ci = country.value.carbon_intensity_g_per_kwh;
    let energy_wh = ScreeningBand::from_scenarios(Unit::WhPerRequest, energy);
    let carbon_g = energy_wh.map(Unit::GramsPerRequest, |e| carbon_grams(e, ci));

    let mut assumptions = vec![Assumption::new(
        "raw_active_params",
        format!("{} B", profile.raw_active_params_b),
        Provenance::Catalog,
    )
    .assumed(profile.assumed)];
    assumptions.push(multiplier_assumption(profile, factors)?);
    let mut load_entry = Assumption::new(
        "token_load",
        format!(
            "{} input / {} output tokens",
            load.value.input_tokens, load.value.output_tokens
        ),
        load.provenance,
    );
    if load.provenance == Provenance::Default {
        load_entry = load_entry.note("request-type default");
    }
    assumptions.push(load_entry);
    assumptions.push(Assumption::new(
        "weighted_volume",
        format!("{volume} weighted tokens"),
        Provenance::Derived,
    ));
    let mut country_entry = Assumption::new(
        "country",
        country.value.country_code.clone(),
        country.provenance,
    );
    if country.provenance == Provenance::Default {
        country_entry = country_entry.note("provider country");
    }
    assumptions.push(country_entry);
    assumptions.push(
        Assumption::new(
            "carbon_intensity",
            format!("{ci} gCO2e/kWh"),
            Provenance::Catalog,
        )
        .note(country.value.source_note.clone()),
    );
    assumptions.push(Assumption::new(
        "inference_anchor",
        format!(
            "{} Wh/prompt at {} B active params, reference volume {}",
            anchors.anchor_energy_wh, anchors.anchor_active_params_b, anchors.ref_volume
        ),
        Provenance::Catalog,
    ));
    assumptions.push(Assumption::new(
        "exponents",
        format!(
            "alpha {}/{}/{}, beta {}/{}/{}",
            anchors.alpha.low,
            anchors.alpha.central,
            anchors.alpha.high,
            anchors.beta.low,
            anchors.beta.central,
            anchors.beta.high
        ),
        Provenance::Catalog,
    ));

    Ok(InferenceEstimate {
        model_id: profile.id.clone(),
        energy_wh,
        carbon_g,
        effective_params_b: peff,
        load: load.value,
        volume,
        country_code: country.value.country_code.clone(),
        carbon_intensity_g_per_kwh: ci,
        assumptions,
    })
}

fn multiplier_assumption(
    profile: &ModelProfile,
    factors: &FactorTable,
) -> Result<Assumption, MissingFactor> {
    let m = parameter_multipliers(profile, factors)?;
    let value = format!("{:.3}/{:.3}/{:.3}", m.low, m.central, m.high);
    Ok(match profile.inference_override() {
        Some(_) => Assumption::new("parameter_multipliers", value, Provenance::Catalog)
            .fitted(profile.inference_fitted())
            .note("model-specific override"),
        None => Assumption::new("parameter_multipliers", value, Provenance::Catalog).note(format!(
            "ctx={}, srv={}, mod={}, arch={}",
            profile.context_class, profile.serving_mode, profile.modality, profile.arch_note
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ArchNote, Catalog, ContextClass, HardwareClass, Modality, ServingMode};

    pub(crate) fn neutral_profile(params: f64) -> ModelProfile {
        ModelProfile {
            id: "anchor-like".into(),
            display_name: "Anchor-like".into(),
            aliases: vec![],
            raw_active_params_b: params,
            assumed: false,
            context_class: ContextClass::Standard,
            serving_mode: ServingMode::Dedicated,
            modality: Modality::TextOnly,
            arch_note: ArchNote::Dense,
            provider_country: "US".into(),
            training_tokens_b: None,
            training_regime: Default::default(),
            hardware_class: HardwareClass::StandardAccelerator,
            factor_overrides: None,
            source_note: None,
        }
    }

    #[test]
    fn weighted_volume_examples() {
        let a = Catalog::shipped().anchors;
        assert_eq!(weighted_volume(TokenLoad::new(1000, 550).unwrap(), &a), 1990.0);
        assert_eq!(weighted_volume(TokenLoad::new(0, 100).unwrap(), &a), 180.0);
        assert_eq!(weighted_volume(TokenLoad::new(500, 250).unwrap(), &a), 950.0);
    }

    #[test]
    fn zero_load_is_rejected() {
        assert_eq!(TokenLoad::new(0, 0), Err(InputError::ZeroTokens));
        assert!(serde_json::from_str::<TokenLoad>(r#"{"input_tokens":0,"output_tokens":0}"#).is_err());
        assert!(TokenLoad::new(1, 0).is_ok());
    }

    #[test]
    fn neutral_profile_keeps_raw_params() {
        let c = Catalog::shipped();
        let p = neutral_profile(180.0);
        for s in Scenario::ALL {
            assert_eq!(effective_params(&p, &c.factors, s).unwrap(), 180.0);
        }
    }

    #[test]
    fn single_factor_scales_params() {
        let mut factors = FactorTable::neutral();
        factors.ctx.insert(ContextClass::Long, Triple::new(0.8, 1.0, 1.2));
        let mut p = neutral_profile(100.0);
        p.context_class = ContextClass::Long;
        let t = effective_params_all(&p, &factors).unwrap();
        assert_eq!(t, Triple::new(80.0, 100.0, 120.0));
    }

    #[test]
    fn override_replaces_table_product() {
        let c = Catalog::shipped();
        let p = c.model("gpt-5-mini").unwrap();
        let o = p.inference_override().unwrap();
        let t = effective_params_all(p, &c.factors).unwrap();
        assert_eq!(t.central, 150.0 * o.central);
    }

    #[test]
    fn missing_factor_is_reported() {
        let mut factors = FactorTable::neutral();
        factors.srv.remove(&ServingMode::Edge);
        let mut p = neutral_profile(10.0);
        p.serving_mode = ServingMode::Edge;
        let err = effective_params(&p, &factors, Scenario::Central).unwrap_err();
        assert_eq!(err.category, "edge");
    }

    #[test]
    fn anchor_identity() {
        let c = Catalog::shipped();
        let e = estimate_energy(
            &neutral_profile(180.0),
            TokenLoad::standard(&c.anchors),
            &c.anchors,
            &c.factors,
        )
        .unwrap();
        assert_eq!(e, Triple::splat(0.24));
    }

    #[test]
    fn doubling_volume_scales_by_two_to_the_beta() {
        let c = Catalog::shipped();
        let p = c.model("gpt-5-mini").unwrap();
        let base = estimate_energy(p, TokenLoad::new(1000, 550).unwrap(), &c.anchors, &c.factors).unwrap();
        // 2000 + 1.8 * 1100 = 3980 = 2 * V_ref
        let doubled = estimate_energy(p, TokenLoad::new(2000, 1100).unwrap(), &c.anchors, &c.factors).unwrap();
        for s in Scenario::ALL {
            let expected = base.get(s) * 2f64.powf(c.anchors.beta.get(s));
            assert!((doubled.get(s) / expected - 1.0).abs() < 1e-12);
        }
        assert!((doubled.central - 0.1706 * 2f64.powf(0.92)).abs() < 1e-9);
    }

    #[test]
    fn default_country_is_recorded() {
        let c = Catalog::shipped();
        let p = c.model("gpt-5-mini").unwrap();
        let us = c.country("US").unwrap();
        let est = estimate_inference(
            p,
            Sourced::new(TokenLoad::standard(&c.anchors), Provenance::Default),
            Sourced::new(us, Provenance::Default),
            &c.anchors,
            &c.factors,
        )
        .unwrap();
        let country = est.assumptions.iter().find(|a| a.name == "country").unwrap();
        assert_eq!(country.provenance, Provenance::Default);
        assert_eq!(country.value, "US");
        assert!(est.assumptions.iter().any(|a| a.fitted));
        assert!(est.assumptions.iter().any(|a| a.assumed));
    }

    #[test]
    fn carbon_follows_energy_exactly() {
        let c = Catalog::shipped();
        let p = c.model("llama-3-1-70b").unwrap();
        let us = c.country("US").unwrap();
        let mut doubled = us.clone();
        doubled.carbon_intensity_g_per_kwh *= 2.0;
        let load = Sourced::user(TokenLoad::new(700, 300).unwrap());
        let a = estimate_inference(p, load, Sourced::user(us), &c.anchors, &c.factors).unwrap();
        let b = estimate_inference(p, load, Sourced::user(&doubled), &c.anchors, &c.factors).unwrap();
        assert_eq!(a.energy_wh, b.energy_wh);
        for (x, y) in a.carbon_g.values().iter().zip(b.carbon_g.values()) {
            assert_eq!(2.0 * x, y);
        }
        for (e, g) in a.energy_wh.values().iter().zip(a.carbon_g.values()) {
            assert_eq!(g, e / 1000.0 * 385.0);
        }
    }
}
