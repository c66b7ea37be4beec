//! Strategies and property checks shared by the property suite and the
//! acceptance run. Each check returns `Err` with a reason on violation.

#![allow(dead_code)]

pub mod corpus;

use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::TestCaseError;

use impact_screen::band::{Scenario, Triple};
use impact_screen::catalog::{
    ArchNote, Catalog, ContextClass, CountryMix, FactorOverrides, HardwareClass, Modality, ModelProfile,
    ServingMode, TrainingRegime,
};
use impact_screen::inference::{
    carbon_grams, effective_params_all, estimate_inference, scenario_energy, weighted_volume, TokenLoad,
};
use impact_screen::ledger::Sourced;
use impact_screen::report::annualize;
use impact_screen::training::{estimate_training, scaled_training_energy, training_multipliers};

pub type Check = Result<(), TestCaseError>;

pub fn shipped() -> &'static Catalog {
    use std::sync::OnceLock;
    static C: OnceLock<Catalog> = OnceLock::new();
    C.get_or_init(Catalog::shipped)
}

pub fn relative_error(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

pub fn scenario() -> impl Strategy<Value = Scenario> {
    select(Scenario::ALL.to_vec())
}

fn overrides() -> impl Strategy<Value = Option<FactorOverrides>> {
    let triple = (0.2f64..5.0, 0.2f64..5.0, 0.2f64..5.0).prop_map(|(a, b, c)| Triple::new(a, b, c));
    prop_oneof![
        3 => Just(None),
        1 => (proptest::option::of(triple.clone()), proptest::option::of(triple)).prop_map(|(inference, training)| {
            Some(FactorOverrides {
                inference,
                training,
                fitted: true,
                note: None,
            })
        }),
    ]
}

/// Random profile over every category of the shipped factor table.
pub fn profile() -> impl Strategy<Value = ModelProfile> {
    (
        0.05f64..5000.0,
        select(ContextClass::ALL.to_vec()),
        select(ServingMode::ALL.to_vec()),
        select(Modality::ALL.to_vec()),
        select(ArchNote::ALL.to_vec()),
        select(TrainingRegime::ALL.to_vec()),
        select(HardwareClass::ALL.to_vec()),
        proptest::option::of(1.0f64..50_000.0),
        overrides(),
        select(vec!["US", "FR"]),
    )
        .prop_map(|(p, ctx, srv, modality, arch, reg, hw, tokens, overrides, country)| ModelProfile {
            id: "prop-model".into(),
            display_name: "Prop model".into(),
            aliases: vec![],
            raw_active_params_b: p,
            assumed: true,
            context_class: ctx,
            serving_mode: srv,
            modality,
            arch_note: arch,
            provider_country: country.into(),
            training_tokens_b: tokens,
            training_regime: reg,
            hardware_class: hw,
            factor_overrides: overrides,
            source_note: None,
        })
}

pub fn load() -> impl Strategy<Value = TokenLoad> {
    (0u64..200_000, 0u64..200_000)
        .prop_filter("non-empty request", |(i, o)| i + o > 0)
        .prop_map(|(i, o)| TokenLoad::new(i, o).unwrap())
}

pub fn country() -> impl Strategy<Value = CountryMix> {
    (1.0f64..1500.0).prop_map(|ci| CountryMix {
        country_code: "ZZ".into(),
        carbon_intensity_g_per_kwh: ci,
        source_note: "property".into(),
    })
}

fn inference(p: &ModelProfile, load: TokenLoad, mix: &CountryMix) -> impact_screen::InferenceEstimate {
    let c = shipped();
    estimate_inference(p, Sourced::user(load), Sourced::user(mix), &c.anchors, &c.factors).unwrap()
}

/// low <= central <= high for inference energy, carbon, annual bands and training.
pub fn band_ordering(p: &ModelProfile, load: TokenLoad, mix: &CountryMix, per_month: u64) -> Check {
    let c = shipped();
    let est = inference(p, load, mix);
    prop_assert!(est.energy_wh.is_ordered(), "{:?}", est.energy_wh);
    prop_assert!(est.carbon_g.is_ordered(), "{:?}", est.carbon_g);
    let a = annualize(est, per_month).unwrap();
    prop_assert!(a.annual_energy_kwh.is_ordered());
    prop_assert!(a.annual_carbon.is_ordered());
    let t = estimate_training(p, &c.training_anchor, &c.anchors, &c.factors, Some(mix)).unwrap();
    prop_assert!(t.energy_gwh.is_ordered());
    prop_assert!(t.carbon_t.unwrap().is_ordered());
    Ok(())
}

/// Energy is non-decreasing in effective parameters and in weighted volume.
pub fn inference_monotone(p1: f64, p2: f64, v1: f64, v2: f64, s: Scenario) -> Check {
    let a = &shipped().anchors;
    let (plo, phi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
    let (vlo, vhi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
    prop_assert!(scenario_energy(plo, vlo, a, s) <= scenario_energy(phi, vlo, a, s));
    prop_assert!(scenario_energy(plo, vlo, a, s) <= scenario_energy(plo, vhi, a, s));
    Ok(())
}

/// Training energy is non-decreasing in raw parameters and in tokens.
pub fn training_monotone(p1: f64, p2: f64, t1: f64, t2: f64, s: Scenario) -> Check {
    let c = shipped();
    let ta = &c.training_anchor;
    let (alpha, beta) = (ta.alpha_or(&c.anchors), ta.beta_or(&c.anchors));
    let (plo, phi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
    let (tlo, thi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let g = |p, t| scaled_training_energy(p, t, ta, alpha, beta, s);
    prop_assert!(g(plo, tlo) <= g(phi, tlo));
    prop_assert!(g(plo, tlo) <= g(plo, thi));
    Ok(())
}

pub const SCALE_TOLERANCE: f64 = 1e-12;

/// Scaling P_eff by k scales energy by k^alpha_s; scaling V by k scales it by k^beta_s.
pub fn inference_scale_laws(p: f64, v: f64, k: f64, s: Scenario) -> Check {
    let a = &shipped().anchors;
    let base = scenario_energy(p, v, a, s);
    let by_p = scenario_energy(k * p, v, a, s) / base;
    let by_v = scenario_energy(p, k * v, a, s) / base;
    let want_p = k.powf(a.alpha.get(s));
    let want_v = k.powf(a.beta.get(s));
    prop_assert!(relative_error(by_p, want_p) <= SCALE_TOLERANCE, "P: {by_p} vs {want_p}");
    prop_assert!(relative_error(by_v, want_v) <= SCALE_TOLERANCE, "V: {by_v} vs {want_v}");
    Ok(())
}

/// Training: k^alpha_s in parameters, k^beta_s in tokens.
pub fn training_scale_laws(p: f64, t: f64, k: f64, s: Scenario) -> Check {
    let c = shipped();
    let ta = &c.training_anchor;
    let (alpha, beta) = (ta.alpha_or(&c.anchors), ta.beta_or(&c.anchors));
    let g = |p, t| scaled_training_energy(p, t, ta, alpha, beta, s);
    let base = g(p, t);
    let by_p = g(k * p, t) / base;
    let by_t = g(p, k * t) / base;
    prop_assert!(relative_error(by_p, k.powf(alpha.get(s))) <= SCALE_TOLERANCE);
    prop_assert!(relative_error(by_t, k.powf(beta.get(s))) <= SCALE_TOLERANCE);
    Ok(())
}

/// Carbon is exactly `E / 1000 * CI`, and doubling CI doubles carbon bit for bit.
pub fn carbon_linearity(p: &ModelProfile, load: TokenLoad, mix: &CountryMix, doublings: i32) -> Check {
    let est = inference(p, load, mix);
    let ci = mix.carbon_intensity_g_per_kwh;
    for s in Scenario::ALL {
        let e = est.energy_wh.scenario_values.get(s);
        prop_assert_eq!(est.carbon_g.scenario_values.get(s).to_bits(), (e / 1000.0 * ci).to_bits());
    }
    let k = 2f64.powi(doublings);
    let scaled = CountryMix {
        carbon_intensity_g_per_kwh: ci * k,
        ..mix.clone()
    };
    let est2 = inference(p, load, &scaled);
    prop_assert_eq!(est2.energy_wh, est.energy_wh);
    for s in Scenario::ALL {
        let (one, two) = (est.carbon_g.scenario_values.get(s), est2.carbon_g.scenario_values.get(s));
        prop_assert_eq!(two.to_bits(), (one * k).to_bits());
        prop_assert_eq!(carbon_grams(est.energy_wh.scenario_values.get(s), ci * k).to_bits(), two.to_bits());
    }
    Ok(())
}

/// A profile whose every category is the neutral one.
pub fn neutral_profile(params: f64, tokens: Option<f64>) -> ModelProfile {
    ModelProfile {
        id: "neutral".into(),
        display_name: "Neutral".into(),
        aliases: vec![],
        raw_active_params_b: params,
        assumed: false,
        context_class: ContextClass::NEUTRAL,
        serving_mode: ServingMode::NEUTRAL,
        modality: Modality::NEUTRAL,
        arch_note: ArchNote::NEUTRAL,
        provider_country: "US".into(),
        training_tokens_b: tokens,
        training_regime: TrainingRegime::NEUTRAL,
        hardware_class: HardwareClass::NEUTRAL,
        factor_overrides: None,
        source_note: None,
    }
}

/// Neutral categories leave P_eff equal to the raw count, and the training
/// estimate reduces to the two-ratio power law, both exactly.
pub fn factor_neutrality(params: f64, tokens: f64, s: Scenario) -> Check {
    let c = shipped();
    let profile = neutral_profile(params, Some(tokens));
    let peff = effective_params_all(&profile, &c.factors).unwrap();
    prop_assert_eq!(peff.get(s).to_bits(), params.to_bits());
    prop_assert_eq!(training_multipliers(&profile, &c.factors).unwrap(), Triple::splat(1.0));
    let t = estimate_training(&profile, &c.training_anchor, &c.anchors, &c.factors, None).unwrap();
    let ta = &c.training_anchor;
    let direct = scaled_training_energy(params, tokens, ta, ta.alpha_or(&c.anchors), ta.beta_or(&c.anchors), s);
    prop_assert_eq!(t.energy_gwh.scenario_values.get(s).to_bits(), direct.to_bits());
    Ok(())
}

fn bits<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap()
}

/// Two invocations on equal input agree bit for bit.
pub fn determinism(p: &ModelProfile, load: TokenLoad, mix: &CountryMix) -> Check {
    let c = shipped();
    let one = inference(p, load, mix);
    let two = inference(p, load, mix);
    prop_assert_eq!(bits(&one), bits(&two));
    for s in Scenario::ALL {
        prop_assert_eq!(
            one.energy_wh.scenario_values.get(s).to_bits(),
            two.energy_wh.scenario_values.get(s).to_bits()
        );
    }
    let t1 = estimate_training(p, &c.training_anchor, &c.anchors, &c.factors, Some(mix)).unwrap();
    let t2 = estimate_training(p, &c.training_anchor, &c.anchors, &c.factors, Some(mix)).unwrap();
    prop_assert_eq!(bits(&t1), bits(&t2));
    prop_assert_eq!(weighted_volume(load, &c.anchors).to_bits(), weighted_volume(load, &c.anchors).to_bits());
    Ok(())
}

/// annualize(e, 2m) is exactly twice annualize(e, m).
pub fn annualization_linearity(p: &ModelProfile, load: TokenLoad, mix: &CountryMix, per_month: u64) -> Check {
    let est = inference(p, load, mix);
    let one = annualize(est.clone(), per_month).unwrap();
    let two = annualize(est, 2 * per_month).unwrap();
    for s in Scenario::ALL {
        prop_assert_eq!(
            two.annual_energy_kwh.scenario_values.get(s).to_bits(),
            (2.0 * one.annual_energy_kwh.scenario_values.get(s)).to_bits()
        );
        prop_assert_eq!(
            two.annual_carbon_g.scenario_values.get(s).to_bits(),
            (2.0 * one.annual_carbon_g.scenario_values.get(s)).to_bits()
        );
    }
    Ok(())
}
