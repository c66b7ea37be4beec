//! Screening estimates of LLM inference and training energy and carbon.
//!
//! Every figure is a bounded low/central/high screening proxy scaled from
//! literature anchors, not a measurement. Inputs that were defaulted,
//! inferred or fitted are listed in an assumptions ledger next to the result.

pub mod api;
pub mod band;
pub mod catalog;
pub mod inference;
pub mod ledger;
pub mod parser;
pub mod report;
pub mod server;
pub mod training;

pub use band::{Scenario, ScreeningBand, Triple, Unit};
pub use catalog::{load_catalog, lookup_model, Catalog, CatalogError, LookupError, ModelProfile};
pub use inference::{estimate_inference, InferenceEstimate, TokenLoad};
pub use ledger::{Assumption, Provenance, Sourced};
pub use parser::{parse_scenario, render_scenario, Diagnostic, DiagnosticKind, FieldSource, Scenario as UsageScenario};
pub use training::{estimate_training, TrainingEstimate};
pub use report::{annualize, build_observatory, estimate_scenario, export_table, AnnualizedEstimate, EstimateResult, ExportFormat, ObservatoryRow};
