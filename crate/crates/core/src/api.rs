//! Request and response shapes of the `/v1` JSON API.
//!
//! Transport-free: the HTTP server and the CLI's `--json` output both call
//! these functions, so their payloads are identical. Every number in a
//! response carries a unit, either as a `{value, unit}` quantity or inside a
//! band.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::band::{ScreeningBand, Unit};
use crate::catalog::{lookup_model, Catalog, LookupError, ModelProfile, RequestType};
use crate::inference::TokenLoad;
use crate::ledger::Assumption;
use crate::parser::{parse_scenario, render_scenario, FieldProvenance, FieldSource, Scenario};
use crate::report::{
    build_observatory, export_table, resolve_country, EstimateError, EstimateResult, ExportFormat,
    DISCLAIMER,
};
use crate::training::{estimate_training, TokenSource};

/// Closed set of machine-readable error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    ParseFailed,
    UnknownModel,
    AmbiguousModel,
    InvalidTokens,
    InvalidVolume,
    UnknownCountry,
    BadFormat,
    UnknownVersion,
    NotFound,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 11] = [
        ErrorCode::BadRequest,
        ErrorCode::ParseFailed,
        ErrorCode::UnknownModel,
        ErrorCode::AmbiguousModel,
        ErrorCode::InvalidTokens,
        ErrorCode::InvalidVolume,
        ErrorCode::UnknownCountry,
        ErrorCode::BadFormat,
        ErrorCode::UnknownVersion,
        ErrorCode::NotFound,
        ErrorCode::Internal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::BadRequest => "bad_request",
            ErrorCode::ParseFailed => "parse_failed",
            ErrorCode::UnknownModel => "unknown_model",
            ErrorCode::AmbiguousModel => "ambiguous_model",
            ErrorCode::InvalidTokens => "invalid_tokens",
            ErrorCode::InvalidVolume => "invalid_volume",
            ErrorCode::UnknownCountry => "unknown_country",
            ErrorCode::BadFormat => "bad_format",
            ErrorCode::UnknownVersion => "unknown_version",
            ErrorCode::NotFound => "not_found",
            ErrorCode::Internal => "internal",
        }
    }

    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::BadRequest | ErrorCode::BadFormat => 400,
            ErrorCode::UnknownModel | ErrorCode::UnknownVersion | ErrorCode::NotFound => 404,
            ErrorCode::ParseFailed
            | ErrorCode::AmbiguousModel
            | ErrorCode::InvalidTokens
            | ErrorCode::InvalidVolume
            | ErrorCode::UnknownCountry => 422,
            ErrorCode::Internal => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<LookupError> for ApiError {
    fn from(e: LookupError) -> Self {
        let code = match e {
            LookupError::NotFound { .. } => ErrorCode::UnknownModel,
            LookupError::Ambiguous { .. } => ErrorCode::AmbiguousModel,
        };
        ApiError::new(code, e.to_string()).with_details(json!({ "suggestions": e.suggestions() }))
    }
}

impl From<EstimateError> for ApiError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::UnknownModel(l) => l.into(),
            EstimateError::UnknownCountry { ref known, .. } => {
                ApiError::new(ErrorCode::UnknownCountry, e.to_string())
                    .with_details(json!({ "suggestions": known }))
            }
            EstimateError::Volume(_) => ApiError::new(ErrorCode::InvalidVolume, e.to_string()),
            // a validated catalog covers every category
            EstimateError::MissingFactor(_) => ApiError::new(ErrorCode::Internal, e.to_string()),
        }
    }
}

/// Top-level wrapper carried by every response body, errors included.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T> {
    pub methodology_version: String,
    pub disclaimer: &'static str,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Envelope<T> {
    pub fn new(catalog: &Catalog, body: T) -> Self {
        Envelope {
            methodology_version: catalog.methodology_version(),
            disclaimer: DISCLAIMER,
            body,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub error: ApiError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: &'static str,
}

impl Quantity {
    pub fn new(value: f64, unit: &'static str) -> Self {
        Quantity { value, unit }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelView {
    pub id: String,
    pub display_name: String,
    pub aliases: Vec<String>,
    pub raw_active_params: Quantity,
    pub assumed: bool,
    pub context_class: String,
    pub serving_mode: String,
    pub modality: String,
    pub arch_note: String,
    pub provider_country: String,
    pub training_tokens: Option<Quantity>,
    pub training_regime: String,
    pub hardware_class: String,
    pub inference_fitted: bool,
    pub training_fitted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_note: Option<String>,
}

impl From<&ModelProfile> for ModelView {
    fn from(m: &ModelProfile) -> Self {
        ModelView {
            id: m.id.clone(),
            display_name: m.display_name.clone(),
            aliases: m.aliases.clone(),
            raw_active_params: Quantity::new(m.raw_active_params_b, Unit::BillionParams.label()),
            assumed: m.assumed,
            context_class: m.context_class.to_string(),
            serving_mode: m.serving_mode.to_string(),
            modality: m.modality.to_string(),
            arch_note: m.arch_note.to_string(),
            provider_country: m.provider_country.clone(),
            training_tokens: m.training_tokens_b.map(|t| Quantity::new(t, "B tokens")),
            training_regime: m.training_regime.to_string(),
            hardware_class: m.hardware_class.to_string(),
            inference_fitted: m.inference_fitted(),
            training_fitted: m.training_fitted(),
            source_note: m.source_note.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelsResponse {
    pub models: Vec<ModelView>,
}

pub fn list_models(catalog: &Catalog) -> ModelsResponse {
    ModelsResponse {
        models: catalog.models.iter().map(ModelView::from).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioView {
    pub model_id: String,
    pub request_type: RequestType,
    pub input_tokens: Quantity,
    pub output_tokens: Quantity,
    pub requests_per_month: Option<Quantity>,
    /// `null` means the model's provider country applies.
    pub country_code: Option<String>,
    pub provenance: FieldProvenance,
}

impl From<&Scenario> for ScenarioView {
    fn from(s: &Scenario) -> Self {
        ScenarioView {
            model_id: s.model_id.clone(),
            request_type: s.request_type,
            input_tokens: Quantity::new(s.token_load.input_tokens() as f64, "tokens"),
            output_tokens: Quantity::new(s.token_load.output_tokens() as f64, "tokens"),
            requests_per_month: s
                .requests_per_month
                .map(|n| Quantity::new(n as f64, "requests/month")),
            country_code: s.country_code.clone(),
            provenance: s.provenance,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParseRequest {
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParseResponse {
    pub scenario: ScenarioView,
    pub summary: String,
}

pub fn parse(catalog: &Catalog, req: &ParseRequest) -> Result<ParseResponse, ApiError> {
    if req.description.trim().is_empty() {
        return Err(ApiError::new(ErrorCode::BadRequest, "`description` is empty"));
    }
    let scenario = parse_description(catalog, &req.description)?;
    Ok(ParseResponse {
        scenario: ScenarioView::from(&scenario),
        summary: render_scenario(&scenario),
    })
}

fn parse_description(catalog: &Catalog, text: &str) -> Result<Scenario, ApiError> {
    parse_scenario(text, catalog).map_err(|diagnostics| {
        let message = diagnostics
            .iter()
            .map(|d| d.message.as_str())
            .collect::<Vec<_>>()
            .join("; ");
        ApiError::new(ErrorCode::ParseFailed, message)
            .with_details(json!({ "diagnostics": diagnostics }))
    })
}

/// Estimate input. A base scenario comes from `scenario` or `description`;
/// every other field set here overrides it and is tagged explicit.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateRequest {
    #[serde(default)]
    pub scenario: Option<ScenarioInput>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub request_type: Option<RequestType>,
    #[serde(default)]
    pub input_tokens: Option<u64>,
    #[serde(default)]
    pub output_tokens: Option<u64>,
    #[serde(default)]
    pub requests_per_month: Option<u64>,
    #[serde(default)]
    pub country: Option<String>,
}

/// A scenario as edited by a client, with plain numbers.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInput {
    pub model_id: String,
    #[serde(default)]
    pub request_type: Option<RequestType>,
    pub input_tokens: u64,
    pub output_tokens: u64,
    #[serde(default)]
    pub requests_per_month: Option<u64>,
    #[serde(default)]
    pub country_code: Option<String>,
    #[serde(default)]
    pub provenance: Option<FieldProvenance>,
}

struct Draft {
    model_id: Option<String>,
    request_type: RequestType,
    input_tokens: u64,
    output_tokens: u64,
    requests_per_month: Option<u64>,
    country_code: Option<String>,
    provenance: FieldProvenance,
}

fn invalid_tokens(catalog: &Catalog, kind: RequestType) -> ApiError {
    let d = catalog.lexicon.request_type(kind);
    ApiError::new(
        ErrorCode::InvalidTokens,
        "a request needs at least one input or output token",
    )
    .with_details(json!({
        "suggestions": [format!("{} input tokens and {} output tokens", d.input_tokens, d.output_tokens)]
    }))
}

pub fn resolve_estimate_request(catalog: &Catalog, req: &EstimateRequest) -> Result<Scenario, ApiError> {
    let defaults = FieldProvenance {
        model_id: FieldSource::Explicit,
        request_type: FieldSource::Default,
        token_load: FieldSource::Default,
        requests_per_month: FieldSource::Default,
        country_code: FieldSource::Default,
    };
    let mut d = if let Some(s) = &req.scenario {
        if req.description.is_some() {
            return Err(ApiError::new(
                ErrorCode::BadRequest,
                "give either `scenario` or `description`, not both",
            ));
        }
        let mut p = s.provenance.unwrap_or(FieldProvenance {
            request_type: if s.request_type.is_some() {
                FieldSource::Explicit
            } else {
                FieldSource::Default
            },
            token_load: FieldSource::Explicit,
            requests_per_month: if s.requests_per_month.is_some() {
                FieldSource::Explicit
            } else {
                FieldSource::Default
            },
            country_code: if s.country_code.is_some() {
                FieldSource::Explicit
            } else {
                FieldSource::Default
            },
            ..defaults
        });
        if s.request_type.is_none() {
            p.request_type = FieldSource::Default;
        }
        Draft {
            model_id: Some(s.model_id.clone()),
            request_type: s.request_type.unwrap_or(RequestType::Generic),
            input_tokens: s.input_tokens,
            output_tokens: s.output_tokens,
            requests_per_month: s.requests_per_month,
            country_code: s.country_code.clone(),
            provenance: p,
        }
    } else if let Some(text) = &req.description {
        let s = parse_description(catalog, text)?;
        Draft {
            model_id: Some(s.model_id),
            request_type: s.request_type,
            input_tokens: s.token_load.input_tokens(),
            output_tokens: s.token_load.output_tokens(),
            requests_per_month: s.requests_per_month,
            country_code: s.country_code,
            provenance: s.provenance,
        }
    } else {
        let kind = req.request_type.unwrap_or(RequestType::Generic);
        let entry = catalog.lexicon.request_type(kind);
        Draft {
            model_id: None,
            request_type: kind,
            input_tokens: entry.input_tokens,
            output_tokens: entry.output_tokens,
            requests_per_month: None,
            country_code: None,
            provenance: defaults,
        }
    };

    if let Some(m) = &req.model {
        d.model_id = Some(m.clone());
        d.provenance.model_id = FieldSource::Explicit;
    }
    if let Some(kind) = req.request_type {
        if kind != d.request_type && d.provenance.token_load != FieldSource::Explicit {
            let entry = catalog.lexicon.request_type(kind);
            d.input_tokens = entry.input_tokens;
            d.output_tokens = entry.output_tokens;
            d.provenance.token_load = FieldSource::Default;
        }
        d.request_type = kind;
        d.provenance.request_type = FieldSource::Explicit;
    }
    match (req.input_tokens, req.output_tokens) {
        (None, None) => {}
        (i, o) => {
            let both = i.is_some() && o.is_some();
            d.input_tokens = i.unwrap_or(d.input_tokens);
            d.output_tokens = o.unwrap_or(d.output_tokens);
            d.provenance.token_load = if both || d.provenance.token_load == FieldSource::Explicit {
                FieldSource::Explicit
            } else {
                FieldSource::Inferred
            };
        }
    }
    if let Some(n) = req.requests_per_month {
        d.requests_per_month = Some(n);
        d.provenance.requests_per_month = FieldSource::Explicit;
    }
    if let Some(c) = &req.country {
        d.country_code = Some(c.clone());
        d.provenance.country_code = FieldSource::Explicit;
    }

    let Some(model_id) = d.model_id else {
        return Err(ApiError::new(
            ErrorCode::BadRequest,
            "one of `model`, `scenario` or `description` is required",
        ));
    };
    if d.requests_per_month == Some(0) {
        return Err(ApiError::new(ErrorCode::InvalidVolume, "requests per month must be at least 1")
            .with_details(json!({ "suggestions": ["omit the volume for per-request figures only"] })));
    }
    let token_load = TokenLoad::new(d.input_tokens, d.output_tokens)
        .map_err(|_| invalid_tokens(catalog, d.request_type))?;
    let profile = lookup_model(catalog, &model_id)?;
    Ok(Scenario {
        model_id: profile.id.clone(),
        request_type: d.request_type,
        token_load,
        requests_per_month: d.requests_per_month,
        country_code: d.country_code.map(|c| c.to_ascii_uppercase()),
        provenance: d.provenance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InferenceView {
    pub model_id: String,
    pub energy_wh: ScreeningBand,
    pub carbon_g: ScreeningBand,
    pub effective_active_params: ScreeningBand,
    pub weighted_volume: Quantity,
    pub country_code: String,
    pub carbon_intensity: Quantity,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnualView {
    pub requests_per_year: Quantity,
    pub energy_kwh: ScreeningBand,
    pub carbon: ScreeningBand,
    pub carbon_g: ScreeningBand,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateResponse {
    pub scenario: ScenarioView,
    pub summary: String,
    pub inference: InferenceView,
    pub annualized: Option<AnnualView>,
    pub assumptions: Vec<Assumption>,
}

impl From<&EstimateResult> for EstimateResponse {
    fn from(r: &EstimateResult) -> Self {
        let i = &r.inference;
        EstimateResponse {
            scenario: ScenarioView::from(&r.scenario),
            summary: render_scenario(&r.scenario),
            inference: InferenceView {
                model_id: i.model_id.clone(),
                energy_wh: i.energy_wh,
                carbon_g: i.carbon_g,
                effective_active_params: ScreeningBand::from_scenarios(
                    Unit::BillionParams,
                    i.effective_params_b,
                ),
                weighted_volume: Quantity::new(i.volume, "weighted tokens"),
                country_code: i.country_code.clone(),
                carbon_intensity: Quantity::new(i.carbon_intensity_g_per_kwh, "gCO2e/kWh"),
            },
            annualized: r.annualized.as_ref().map(|a| AnnualView {
                requests_per_year: Quantity::new(a.requests_per_year as f64, "requests/year"),
                energy_kwh: a.annual_energy_kwh,
                carbon: a.annual_carbon,
                carbon_g: a.annual_carbon_g,
            }),
            assumptions: i.assumptions.clone(),
        }
    }
}

pub fn estimate(catalog: &Catalog, req: &EstimateRequest) -> Result<(EstimateResult, EstimateResponse), ApiError> {
    let scenario = resolve_estimate_request(catalog, req)?;
    let result = crate::report::estimate_scenario(catalog, &scenario)?;
    let response = EstimateResponse::from(&result);
    Ok((result, response))
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainingResponse {
    pub model_id: String,
    pub energy_gwh: ScreeningBand,
    pub carbon_t: Option<ScreeningBand>,
    pub country_code: String,
    pub tokens_used: Quantity,
    pub tokens_source: TokenSource,
    pub assumptions: Vec<Assumption>,
}

/// Training band for one model; carbon uses `country` or the provider country.
pub fn training(catalog: &Catalog, model: &str, country: Option<&str>) -> Result<TrainingResponse, ApiError> {
    let profile = lookup_model(catalog, model)?;
    let code = country.unwrap_or(&profile.provider_country);
    let mix = resolve_country(catalog, code).map_err(ApiError::from)?;
    let est = estimate_training(
        profile,
        &catalog.training_anchor,
        &catalog.anchors,
        &catalog.factors,
        Some(mix),
    )
    .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?;
    Ok(TrainingResponse {
        model_id: est.model_id,
        energy_gwh: est.energy_gwh,
        carbon_t: est.carbon_t,
        country_code: mix.country_code.clone(),
        tokens_used: Quantity::new(est.tokens_used_b, "B tokens"),
        tokens_source: est.tokens_source,
        assumptions: est.assumptions,
    })
}

/// Observatory body and its media type. `format` accepts `csv` or `json`.
pub fn observatory(catalog: &Catalog, format: Option<&str>) -> Result<(Vec<u8>, &'static str), ApiError> {
    let format = match format.unwrap_or("json") {
        "json" => ExportFormat::Json,
        "csv" => ExportFormat::Csv,
        other => {
            return Err(ApiError::new(
                ErrorCode::BadFormat,
                format!("unknown format `{other}`"),
            )
            .with_details(json!({ "suggestions": ["json", "csv"] })))
        }
    };
    let rows = build_observatory(catalog);
    let body = export_table(&rows, format, &catalog.methodology_version());
    let media = match format {
        ExportFormat::Csv => "text/csv; charset=utf-8",
        _ => "application/json",
    };
    Ok((body, media))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(catalog: &Catalog, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope::new(catalog, body)).expect("response serializes");
    s.push('\n');
    s
}

pub fn error_json(catalog: &Catalog, error: ApiError) -> String {
    to_json(catalog, ErrorBody { error })
}
