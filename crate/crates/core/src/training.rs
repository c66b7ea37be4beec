//! Training-energy orders of magnitude.
//!
//! ```text
//! G_s = G_a * (P_t / P_a)^alpha_s * (Tok_t / Tok_a)^beta_s * F_reg,s * F_arch_tr,s * F_hw,s
//! ```
//!
//! Observatory output only; the per-application estimate stays inference-only.

use serde::{Deserialize, Serialize};

use crate::band::{Scenario, ScreeningBand, Triple, Unit};
use crate::catalog::{AnchorConstants, CountryMix, FactorTable, MissingFactor, ModelProfile, TrainingAnchor};
use crate::ledger::{Assumption, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenSource {
    #[serde(rename = "catalog")]
    Catalog,
    /// Tokens-per-parameter prior applied to the raw parameter count.
    #[serde(rename = "prior_20x")]
    Prior,
}

/// Training tokens in billions: the catalog count, else the prior times parameters.
pub fn training_tokens(profile: &ModelProfile, anchor: &TrainingAnchor) -> (f64, TokenSource) {
    match profile.training_tokens_b {
        Some(t) => (t, TokenSource::Catalog),
        None => (
            anchor.tokens_per_param_prior * profile.raw_active_params_b,
            TokenSource::Prior,
        ),
    }
}

/// Product of the regime, architecture and hardware multipliers per scenario.
pub fn training_multipliers(
    profile: &ModelProfile,
    factors: &FactorTable,
) -> Result<Triple, MissingFactor> {
    if let Some(t) = profile.training_override() {
        return Ok(t);
    }
    let f = factors.training_factors(profile)?;
    Ok(Triple::from_fn(|s| {
        f.iter().fold(1.0, |acc, (_, t)| acc * t.get(s))
    }))
}

/// The two-ratio power law without any multiplier, GWh.
pub fn scaled_training_energy(
    params_b: f64,
    tokens_b: f64,
    anchor: &TrainingAnchor,
    alpha: Triple,
    beta: Triple,
    scenario: Scenario,
) -> f64 {
    anchor.anchor_energy_gwh
        * (params_b / anchor.anchor_params_b).powf(alpha.get(scenario))
        * (tokens_b / anchor.anchor_tokens_b).powf(beta.get(scenario))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingEstimate {
    pub model_id: String,
    pub energy_gwh: ScreeningBand,
    /// Present only when a country mix was supplied.
    pub carbon_t: Option<ScreeningBand>,
    pub tokens_used_b: f64,
    pub tokens_source: TokenSource,
    pub assumptions: Vec<Assumption>,
}

pub fn estimate_training(
    profile: &ModelProfile,
    anchor: &TrainingAnchor,
    anchors: &AnchorConstants,
    factors: &FactorTable,
    country: Option<&CountryMix>,
) -> Result<TrainingEstimate, MissingFactor> {
    let (tokens, source) = training_tokens(profile, anchor);
    let alpha = anchor.alpha_or(anchors);
    let beta = anchor.beta_or(anchors);
    let multipliers = training_multipliers(profile, factors)?;
    let raw = Triple::from_fn(|s| {
        scaled_training_energy(profile.raw_active_params_b, tokens, anchor, alpha, beta, s)
            * multipliers.get(s)
    });
    let energy_gwh = ScreeningBand::from_scenarios(Unit::Gwh, raw);
    // GWh * 1e6 kWh/GWh * CI g/kWh / 1e6 g/t
    let carbon_t = country.map(|c| energy_gwh.map(Unit::TonnesCo2e, |g| g * c.carbon_intensity_g_per_kwh));

    let mut assumptions = vec![
        Assumption::new(
            "raw_params",
            format!("{} B", profile.raw_active_params_b),
            Provenance::Catalog,
        )
        .assumed(profile.assumed),
        match source {
            TokenSource::Catalog => Assumption::new(
                "training_tokens",
                format!("{tokens} B"),
                Provenance::Catalog,
            ),
            TokenSource::Prior => Assumption::new(
                "training_tokens",
                format!("{tokens} B"),
                Provenance::Default,
            )
            .note(format!(
                "{} tokens per parameter prior",
                anchor.tokens_per_param_prior
            )),
        },
        Assumption::new(
            "training_regime",
            profile.training_regime.as_str(),
            Provenance::Catalog,
        ),
    ];
    let value = format!(
        "{:.4}/{:.4}/{:.4}",
        multipliers.low, multipliers.central, multipliers.high
    );
    assumptions.push(match profile.training_override() {
        Some(_) => Assumption::new("training_multipliers", value, Provenance::Catalog)
            .fitted(profile.training_fitted())
            .note("model-specific override"),
        None => Assumption::new("training_multipliers", value, Provenance::Catalog).note(format!(
            "reg={}, arch_tr={}, hw={}",
            profile.training_regime, profile.arch_note, profile.hardware_class
        )),
    });
    assumptions.push(
        Assumption::new(
            "training_anchor",
            format!(
                "{} GWh at {} B params, {} B tokens",
                anchor.anchor_energy_gwh, anchor.anchor_params_b, anchor.anchor_tokens_b
            ),
            Provenance::Catalog,
        )
        .fitted(anchor.fitted),
    );
    if let Some(c) = country {
        assumptions.push(Assumption::new(
            "country",
            c.country_code.clone(),
            Provenance::User,
        ));
    }

    Ok(TrainingEstimate {
        model_id: profile.id.clone(),
        energy_gwh,
        carbon_t,
        tokens_used_b: tokens,
        tokens_source: source,
        assumptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ArchNote, Catalog, ContextClass, HardwareClass, Modality, ServingMode};

    fn profile(params: f64, tokens: Option<f64>) -> ModelProfile {
        ModelProfile {
            id: "t".into(),
            display_name: "T".into(),
            aliases: vec![],
            raw_active_params_b: params,
            assumed: false,
            context_class: ContextClass::Standard,
            serving_mode: ServingMode::Dedicated,
            modality: Modality::TextOnly,
            arch_note: ArchNote::Dense,
            provider_country: "US".into(),
            training_tokens_b: tokens,
            training_regime: Default::default(),
            hardware_class: HardwareClass::StandardAccelerator,
            factor_overrides: None,
            source_note: None,
        }
    }

    #[test]
    fn token_counts() {
        let a = Catalog::shipped().training_anchor;
        assert_eq!(training_tokens(&profile(70.0, Some(1400.0)), &a), (1400.0, TokenSource::Catalog));
        assert_eq!(training_tokens(&profile(8.0, None), &a), (160.0, TokenSource::Prior));
        assert_eq!(training_tokens(&profile(180.0, None), &a), (3600.0, TokenSource::Prior));
    }

    #[test]
    fn anchor_equal_profile_returns_anchor_energy() {
        let c = Catalog::shipped();
        let a = &c.training_anchor;
        let p = profile(a.anchor_params_b, Some(a.anchor_tokens_b));
        let est = estimate_training(&p, a, &c.anchors, &c.factors, None).unwrap();
        assert_eq!(est.energy_gwh.scenario_values, Triple::splat(a.anchor_energy_gwh));
        assert!(est.carbon_t.is_none());
    }

    #[test]
    fn doubling_params_scales_by_two_to_the_alpha() {
        let c = Catalog::shipped();
        let a = &c.training_anchor;
        let one = estimate_training(&profile(50.0, Some(1000.0)), a, &c.anchors, &c.factors, None).unwrap();
        let two = estimate_training(&profile(100.0, Some(1000.0)), a, &c.anchors, &c.factors, None).unwrap();
        for s in Scenario::ALL {
            let expected = one.energy_gwh.scenario_values.get(s) * 2f64.powf(a.alpha_or(&c.anchors).get(s));
            let got = two.energy_gwh.scenario_values.get(s);
            assert!((got / expected - 1.0).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn carbon_is_gwh_times_intensity() {
        let c = Catalog::shipped();
        let p = c.model("claude-opus-4-1").unwrap();
        let us = c.country("US").unwrap();
        let est = estimate_training(p, &c.training_anchor, &c.anchors, &c.factors, Some(us)).unwrap();
        let carbon = est.carbon_t.unwrap();
        assert_eq!(carbon.unit, Unit::TonnesCo2e);
        assert_eq!(carbon.central, est.energy_gwh.central * 385.0);
    }

    #[test]
    fn prior_tokens_are_flagged_default() {
        let c = Catalog::shipped();
        let p = c.model("ministral-8b").unwrap();
        let est = estimate_training(p, &c.training_anchor, &c.anchors, &c.factors, None).unwrap();
        assert_eq!(est.tokens_source, TokenSource::Prior);
        assert_eq!(est.tokens_used_b, 160.0);
        let tokens = est.assumptions.iter().find(|a| a.name == "training_tokens").unwrap();
        assert_eq!(tokens.provenance, Provenance::Default);
    }

    #[test]
    fn missing_training_factor_is_reported() {
        let c = Catalog::shipped();
        let mut factors = c.factors.clone();
        factors.hw.remove(&HardwareClass::Unknown);
        let mut p = profile(10.0, None);
        p.hardware_class = HardwareClass::Unknown;
        assert!(estimate_training(&p, &c.training_anchor, &c.anchors, &factors, None).is_err());
    }
}
