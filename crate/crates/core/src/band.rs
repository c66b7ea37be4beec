//! Three-point screening values and their display rules.

use std::fmt;

use serde::{Deserialize, Serialize};

/// One of the three parameterizations whose outputs form a screening band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Low,
    Central,
    High,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Low, Scenario::Central, Scenario::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Low => "low",
            Scenario::Central => "central",
            Scenario::High => "high",
        }
    }
}

/// A value per scenario. Stored in files as `[low, central, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Triple {
    pub low: f64,
    pub central: f64,
    pub high: f64,
}

impl From<[f64; 3]> for Triple {
    fn from(v: [f64; 3]) -> Self {
        Triple::new(v[0], v[1], v[2])
    }
}

impl From<Triple> for [f64; 3] {
    fn from(t: Triple) -> Self {
        [t.low, t.central, t.high]
    }
}

impl Triple {
    pub const NEUTRAL: Triple = Triple {
        low: 1.0,
        central: 1.0,
        high: 1.0,
    };

    pub const fn new(low: f64, central: f64, high: f64) -> Self {
        Triple { low, central, high }
    }

    pub fn splat(v: f64) -> Self {
        Triple::new(v, v, v)
    }

    pub fn from_fn(mut f: impl FnMut(Scenario) -> f64) -> Self {
        Triple::new(f(Scenario::Low), f(Scenario::Central), f(Scenario::High))
    }

    pub fn get(&self, s: Scenario) -> f64 {
        match s {
            Scenario::Low => self.low,
            Scenario::Central => self.central,
            Scenario::High => self.high,
        }
    }

    pub fn map(self, mut f: impl FnMut(f64) -> f64) -> Self {
        Triple::new(f(self.low), f(self.central), f(self.high))
    }

    pub fn zip_with(self, other: Triple, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        Triple::new(
            f(self.low, other.low),
            f(self.central, other.central),
            f(self.high, other.high),
        )
    }

    pub fn values(&self) -> [f64; 3] {
        [self.low, self.central, self.high]
    }

    pub fn all(&self, mut pred: impl FnMut(f64) -> bool) -> bool {
        self.values().into_iter().all(&mut pred)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.low < self.central && self.central < self.high
    }

    pub fn min(&self) -> f64 {
        self.low.min(self.central).min(self.high)
    }

    pub fn max(&self) -> f64 {
        self.low.max(self.central).max(self.high)
    }
}

/// Units carried by every band and quantity that leaves the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "Wh/request")]
    WhPerRequest,
    #[serde(rename = "gCO2e/request")]
    GramsPerRequest,
    #[serde(rename = "kWh/year")]
    KwhPerYear,
    #[serde(rename = "gCO2e/year")]
    GramsPerYear,
    #[serde(rename = "kgCO2e/year")]
    KilogramsPerYear,
    #[serde(rename = "tCO2e/year")]
    TonnesPerYear,
    #[serde(rename = "GWh")]
    Gwh,
    #[serde(rename = "tCO2e")]
    TonnesCo2e,
    #[serde(rename = "B params")]
    BillionParams,
}

impl Unit {
    pub fn label(self) -> &'static str {
        match self {
            Unit::WhPerRequest => "Wh/request",
            Unit::GramsPerRequest => "gCO2e/request",
            Unit::KwhPerYear => "kWh/year",
            Unit::GramsPerYear => "gCO2e/year",
            Unit::KilogramsPerYear => "kgCO2e/year",
            Unit::TonnesPerYear => "tCO2e/year",
            Unit::Gwh => "GWh",
            Unit::TonnesCo2e => "tCO2e",
            Unit::BillionParams => "B params",
        }
    }

    /// Decimal places used when a value in this unit is displayed.
    pub fn display_decimals(self, value: f64) -> usize {
        match self {
            Unit::WhPerRequest | Unit::GramsPerRequest => 4,
            Unit::GramsPerYear => 0,
            Unit::KwhPerYear | Unit::KilogramsPerYear | Unit::TonnesPerYear => 2,
            Unit::TonnesCo2e => 2,
            // small training values keep extra decimals so they do not print as zero
            Unit::Gwh => {
                if value.abs() < 0.01 {
                    4
                } else {
                    2
                }
            }
            Unit::BillionParams => 2,
        }
    }

    pub fn format(self, value: f64) -> String {
        format_decimals(value, self.display_decimals(value))
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Formats with round-half-even on the exact binary value.
pub fn format_decimals(value: f64, decimals: usize) -> String {
    format!("{value:.decimals$}")
}

/// The number a reader sees at display precision.
pub fn round_display(value: f64, decimals: usize) -> f64 {
    format_decimals(value, decimals)
        .parse()
        .expect("formatted float parses")
}

/// Reported (min, central-scenario, max) interval over three scenario outputs.
///
/// The labels of the raw scenarios can invert (for a target smaller than the
/// anchor, the high exponent gives the smallest value), so `low` and `high`
/// are taken as the extremes rather than the like-named scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningBand {
    pub unit: Unit,
    pub low: f64,
    pub central: f64,
    pub high: f64,
    pub scenario_values: Triple,
}

impl ScreeningBand {
    pub fn from_scenarios(unit: Unit, scenario_values: Triple) -> Self {
        ScreeningBand {
            unit,
            low: scenario_values.min(),
            central: scenario_values.central,
            high: scenario_values.max(),
            scenario_values,
        }
    }

    /// Applies `f` to each scenario value and re-derives the band.
    /// `f` must be monotone non-decreasing for the result to mirror `self`.
    pub fn map(&self, unit: Unit, f: impl FnMut(f64) -> f64) -> Self {
        ScreeningBand::from_scenarios(unit, self.scenario_values.map(f))
    }

    pub fn values(&self) -> [f64; 3] {
        [self.low, self.central, self.high]
    }

    pub fn is_ordered(&self) -> bool {
        self.low <= self.central && self.central <= self.high
    }

    pub fn display(&self) -> [String; 3] {
        self.values().map(|v| self.unit.format(v))
    }
}

impl fmt::Display for ScreeningBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [low, central, high] = self.display();
        write!(f, "{central} {} (low {low}, high {high})", self.unit)
    }
}
