//! Annualized bands, scenario estimates and the observatory comparison table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::band::{format_decimals, ScreeningBand, Unit};
use crate::catalog::{lookup_model, Catalog, CountryMix, LookupError, MissingFactor, ModelProfile};
use crate::inference::{estimate_inference, InferenceEstimate, TokenLoad};
use crate::ledger::{Assumption, Provenance, Sourced};
use crate::parser::{FieldSource, Scenario};
use crate::training::{estimate_training, TrainingEstimate};

pub const MONTHS_PER_YEAR: u64 = 12;

/// Attached to every report and API response.
pub const DISCLAIMER: &str = "Screening estimate: a bounded order-of-magnitude proxy for comparison, not an audited measurement or declaration.";

/// Annual carbon is shown in grams below this many grams, kilograms below
/// this many kilograms, tonnes above.
pub const AUTOSCALE_STEP: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AnnualizeError {
    #[error("requests per month must be at least 1")]
    ZeroVolume,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnualizedEstimate {
    #[serde(skip)]
    pub base: InferenceEstimate,
    pub requests_per_month: u64,
    pub requests_per_year: u64,
    pub annual_energy_kwh: ScreeningBand,
    /// Autoscaled to g, kg or t by the central value.
    pub annual_carbon: ScreeningBand,
    /// The same carbon band in grams, before autoscaling.
    pub annual_carbon_g: ScreeningBand,
}

/// Linear scaling by `12 * requests_per_month`; no re-estimation.
pub fn annualize(
    estimate: InferenceEstimate,
    requests_per_month: u64,
) -> Result<AnnualizedEstimate, AnnualizeError> {
    if requests_per_month == 0 {
        return Err(AnnualizeError::ZeroVolume);
    }
    let requests_per_year = MONTHS_PER_YEAR * requests_per_month;
    let n = requests_per_year as f64;
    let annual_energy_kwh = estimate.energy_wh.map(Unit::KwhPerYear, |wh| wh * n / 1000.0);
    let annual_carbon_g = estimate.carbon_g.map(Unit::GramsPerYear, |g| g * n);
    let annual_carbon = autoscale_carbon(&annual_carbon_g);
    Ok(AnnualizedEstimate {
        base: estimate,
        requests_per_month,
        requests_per_year,
        annual_energy_kwh,
        annual_carbon,
        annual_carbon_g,
    })
}

/// Picks g, kg or t from the central value of a grams-per-year band.
pub fn autoscale_carbon(grams: &ScreeningBand) -> ScreeningBand {
    let central = grams.central.abs();
    if central < AUTOSCALE_STEP {
        *grams
    } else if central < AUTOSCALE_STEP * AUTOSCALE_STEP {
        grams.map(Unit::KilogramsPerYear, |g| g / AUTOSCALE_STEP)
    } else {
        grams.map(Unit::TonnesPerYear, |g| g / (AUTOSCALE_STEP * AUTOSCALE_STEP))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error(transparent)]
    UnknownModel(#[from] LookupError),
    #[error("no carbon intensity for country `{code}`; known: {}", known.join(", "))]
    UnknownCountry { code: String, known: Vec<String> },
    #[error(transparent)]
    MissingFactor(#[from] MissingFactor),
    #[error(transparent)]
    Volume(#[from] AnnualizeError),
}

/// Per-request estimate for a scenario, plus annual bands when a volume is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub scenario: Scenario,
    pub inference: InferenceEstimate,
    pub annualized: Option<AnnualizedEstimate>,
}

pub fn resolve_country<'a>(catalog: &'a Catalog, code: &str) -> Result<&'a CountryMix, EstimateError> {
    catalog.country(code).ok_or_else(|| EstimateError::UnknownCountry {
        code: code.to_string(),
        known: catalog.countries.iter().map(|c| c.country_code.clone()).collect(),
    })
}

/// Runs the inference engine on a scenario and extends the ledger with the
/// scenario's own fields.
pub fn estimate_scenario(catalog: &Catalog, scenario: &Scenario) -> Result<EstimateResult, EstimateError> {
    let profile = lookup_model(catalog, &scenario.model_id)?;
    let p = &scenario.provenance;
    let country = match &scenario.country_code {
        Some(code) => Sourced::new(resolve_country(catalog, code)?, p.country_code.provenance()),
        None => Sourced::new(
            resolve_country(catalog, &profile.provider_country)?,
            Provenance::Default,
        ),
    };
    let load = Sourced::new(scenario.token_load, p.token_load.provenance());
    let mut inference = estimate_inference(profile, load, country, &catalog.anchors, &catalog.factors)?;

    let type_entry = catalog.lexicon.request_type(scenario.request_type);
    if let Some(entry) = inference.assumptions.iter_mut().find(|a| a.name == "token_load") {
        if p.token_load != FieldSource::Explicit {
            entry.fitted = type_entry.fitted;
            entry.note = Some(format!("{} request-type default", scenario.request_type));
        }
    }
    let mut ledger = vec![
        Assumption::new("model", profile.id.clone(), p.model_id.provenance()),
        Assumption::new(
            "request_type",
            scenario.request_type.as_str(),
            p.request_type.provenance(),
        ),
    ];
    ledger.append(&mut inference.assumptions);
    ledger.push(match scenario.requests_per_month {
        Some(n) => Assumption::new("requests_per_month", n.to_string(), p.requests_per_month.provenance()),
        None => Assumption::new("requests_per_month", "none", Provenance::Default)
            .note("per-request figures only"),
    });
    inference.assumptions = ledger;

    let annualized = match scenario.requests_per_month {
        Some(n) => Some(annualize(inference.clone(), n)?),
        None => None,
    };
    Ok(EstimateResult {
        scenario: scenario.clone(),
        inference,
        annualized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed,
}

/// One model in the observatory, at the standardized request and provider country.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservatoryRow {
    pub model_id: String,
    pub display_name: String,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub country_code: String,
    pub inference_wh: Option<ScreeningBand>,
    pub inference_g: Option<ScreeningBand>,
    pub training_gwh: Option<ScreeningBand>,
    pub training_t: Option<ScreeningBand>,
    pub assumed_params: bool,
    pub fitted_factors: bool,
    #[serde(skip)]
    pub inference: Option<InferenceEstimate>,
    #[serde(skip)]
    pub training: Option<TrainingEstimate>,
}

impl ObservatoryRow {
    pub fn inference_wh_central(&self) -> Option<f64> {
        self.inference_wh.map(|b| b.central)
    }

    pub fn inference_g_central(&self) -> Option<f64> {
        self.inference_g.map(|b| b.central)
    }

    pub fn training_gwh_central(&self) -> Option<f64> {
        self.training_gwh.map(|b| b.central)
    }
}

fn observatory_row(catalog: &Catalog, profile: &ModelProfile) -> ObservatoryRow {
    let mut row = ObservatoryRow {
        model_id: profile.id.clone(),
        display_name: profile.display_name.clone(),
        status: RowStatus::Ok,
        error: None,
        country_code: profile.provider_country.clone(),
        inference_wh: None,
        inference_g: None,
        training_gwh: None,
        training_t: None,
        assumed_params: profile.assumed,
        fitted_factors: profile.inference_fitted() || profile.training_fitted(),
        inference: None,
        training: None,
    };
    let run = || -> Result<(InferenceEstimate, TrainingEstimate), EstimateError> {
        let country = resolve_country(catalog, &profile.provider_country)?;
        let load = TokenLoad::standard(&catalog.anchors);
        let inference = estimate_inference(
            profile,
            Sourced::new(load, Provenance::Default),
            Sourced::new(country, Provenance::Default),
            &catalog.anchors,
            &catalog.factors,
        )?;
        let training = estimate_training(
            profile,
            &catalog.training_anchor,
            &catalog.anchors,
            &catalog.factors,
            Some(country),
        )?;
        Ok((inference, training))
    };
    match run() {
        Ok((inference, training)) => {
            row.inference_wh = Some(inference.energy_wh);
            row.inference_g = Some(inference.carbon_g);
            row.training_gwh = Some(training.energy_gwh);
            row.training_t = training.carbon_t;
            row.inference = Some(inference);
            row.training = Some(training);
        }
        Err(e) => {
            row.status = RowStatus::Failed;
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Every catalog model at the standardized request, sorted by descending
/// central inference energy with ties broken by id. Failed rows sort last.
pub fn build_observatory(catalog: &Catalog) -> Vec<ObservatoryRow> {
    let mut rows: Vec<ObservatoryRow> = catalog
        .models
        .iter()
        .map(|m| observatory_row(catalog, m))
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &ObservatoryRow| r.inference_wh_central().unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a)).then_with(|| a.model_id.cmp(&b.model_id))
    });
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
    /// Aligned plain-text table for terminals.
    Table,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "table" => Ok(ExportFormat::Table),
            other => Err(format!("unknown format `{other}`; expected csv, json or table")),
        }
    }
}

pub const CSV_HEADER: [&str; 20] = [
    "model_id",
    "display_name",
    "status",
    "country_code",
    "inference_wh_low",
    "inference_wh_central",
    "inference_wh_high",
    "inference_g_low",
    "inference_g_central",
    "inference_g_high",
    "training_gwh_low",
    "training_gwh_central",
    "training_gwh_high",
    "training_t_low",
    "training_t_central",
    "training_t_high",
    "assumed_params",
    "fitted_factors",
    "methodology_version",
    "error",
];

fn band_cells(band: Option<ScreeningBand>) -> [String; 3] {
    match band {
        Some(b) => b.display(),
        None => Default::default(),
    }
}

fn csv_record(row: &ObservatoryRow, methodology_version: &str) -> Vec<String> {
    let mut rec = vec![
        row.model_id.clone(),
        row.display_name.clone(),
        match row.status {
            RowStatus::Ok => "ok".to_string(),
            RowStatus::Failed => "failed".to_string(),
        },
        row.country_code.clone(),
    ];
    for band in [row.inference_wh, row.inference_g, row.training_gwh, row.training_t] {
        rec.extend(band_cells(band));
    }
    rec.push(row.assumed_params.to_string());
    rec.push(row.fitted_factors.to_string());
    rec.push(methodology_version.to_string());
    rec.push(row.error.clone().unwrap_or_default());
    rec
}

/// JSON body of an observatory export, identical to the API response.
#[derive(Serialize)]
pub struct ObservatoryDocument<'a> {
    pub methodology_version: &'a str,
    pub disclaimer: &'a str,
    pub rows: &'a [ObservatoryRow],
}

/// Serializes rows. Numbers in CSV and table output are at display precision;
/// JSON keeps full precision with units. Output is byte-stable for equal input.
pub fn export_table(rows: &[ObservatoryRow], format: ExportFormat, methodology_version: &str) -> Vec<u8> {
    match format {
        ExportFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("write to memory");
            for row in rows {
                w.write_record(csv_record(row, methodology_version))
                    .expect("write to memory");
            }
            w.into_inner().expect("flush to memory")
        }
        ExportFormat::Json => {
            let doc = ObservatoryDocument {
                methodology_version,
                disclaimer: DISCLAIMER,
                rows,
            };
            let mut out = serde_json::to_vec_pretty(&doc).expect("rows serialize");
            out.push(b'\n');
            out
        }
        ExportFormat::Table => render_table(rows, methodology_version).into_bytes(),
    }
}

fn render_table(rows: &[ObservatoryRow], methodology_version: &str) -> String {
    let header = [
        "Model",
        "Wh/request",
        "gCO2e/request",
        "Training GWh",
        "Country",
        "Flags",
    ];
    let mut lines: Vec<[String; 6]> = vec![header.map(String::from)];
    for row in rows {
        let central = |b: Option<ScreeningBand>| match b {
            Some(b) => b.unit.format(b.central),
            None => "-".to_string(),
        };
        let mut flags = Vec::new();
        if row.assumed_params {
            flags.push("assumed");
        }
        if row.fitted_factors {
            flags.push("fitted");
        }
        if row.status == RowStatus::Failed {
            flags.push("failed");
        }
        lines.push([
            row.display_name.clone(),
            central(row.inference_wh),
            central(row.inference_g),
            central(row.training_gwh),
            row.country_code.clone(),
            flags.join(","),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                // name and flags left-aligned, numbers right-aligned
                if c == 0 || c >= 4 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).expect("write to string");
    }
    writeln!(
        out,
        "Central values at the standardized request, provider country. Screening estimates, not audited measurements. Methodology {methodology_version}."
    )
    .expect("write to string");
    for row in rows.iter().filter(|r| r.status == RowStatus::Failed) {
        writeln!(
            out,
            "{}: {}",
            row.model_id,
            row.error.as_deref().unwrap_or("failed")
        )
        .expect("write to string");
    }
    out
}

/// Display string for a whole band: `central unit [low, high]`.
pub fn band_summary(band: &ScreeningBand) -> String {
    let d = band.unit.display_decimals(band.central);
    format!(
        "{} {} [{} .. {}]",
        format_decimals(band.central, d),
        band.unit,
        band.unit.format(band.low),
        band.unit.format(band.high)
    )
}
