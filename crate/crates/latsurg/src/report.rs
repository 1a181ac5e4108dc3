//! Report envelopes the CLI emits.
//!
//! Every machine-readable document carries `schema` as its first field
//! (same discriminator as schedule records), a fixed field order, and only
//! deterministic container types, so identical inputs serialize to
//! identical bytes.

use serde::{Deserialize, Serialize};

use crate::distill::DistillationStats;
use crate::estimate::{BaselineComparison, EstimatorConfig, ResourceEstimate, SensitivityPoint};
use crate::factory::{FactoryError, FactoryModel};
use crate::rates::CascadeLevel;
use crate::surgery::SCHEMA;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema: String,
    pub estimate: ResourceEstimate<f64>,
    pub baseline: BaselineComparison,
    /// Absent for T-free workloads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factory: Option<FactorySummary>,
}

/// Factory figures that come from the explicit window schedule rather than
/// the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorySummary {
    pub grid_cols: u32,
    pub grid_rows: u32,
    pub cells: u64,
    pub physical_qubits: u64,
    pub window_rounds: u32,
    pub window_spacetime_volume: u64,
    pub window_ops: usize,
    pub level1_latency_rounds: f64,
    pub output_latency_rounds: f64,
    pub output_latency_adjusted_rounds: f64,
}

impl FactorySummary {
    pub fn of(factory: &FactoryModel<f64>) -> Result<Self, FactoryError> {
        let window = factory
            .window_schedule()
            .expect("factory window layout is static and always placeable");
        let g = factory.grid();
        Ok(FactorySummary {
            grid_cols: g.cols,
            grid_rows: g.rows,
            cells: factory.cells(),
            physical_qubits: factory.physical_qubits(),
            window_rounds: window.total_rounds(),
            window_spacetime_volume: window.spacetime_volume(),
            window_ops: window.ops.len(),
            level1_latency_rounds: factory.level1_latency_rounds(),
            output_latency_rounds: factory.output_latency_rounds(false)?,
            output_latency_adjusted_rounds: factory.output_latency_rounds(true)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillReport {
    pub schema: String,
    pub p_in: f64,
    pub levels: u8,
    /// Closed-form chain, zero circuit noise between levels.
    pub chain: Vec<CascadeLevel<f64>>,
    pub undetected_codewords: u64,
    /// (weight, count) of the lightest undetected error: (3, 35).
    pub leading_error: (u32, u64),
    pub exact_bad_rate: f64,
    pub first_order_bad_rate: f64,
    /// `first_order / exact - 1`.
    pub bad_rate_gap: f64,
    pub exact_reject_rate: f64,
    pub first_order_reject_rate: f64,
    /// `first_order / exact - 1`; positive when the provisioning figure
    /// overestimates.
    pub reject_gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRow {
    pub trials: u64,
    pub seed: u64,
    pub rejected: u64,
    pub accepted_ok: u64,
    pub accepted_bad: u64,
    pub reject_rate: f64,
    pub bad_rate_among_accepted: f64,
}

impl MonteCarloRow {
    pub fn of(stats: &DistillationStats, seed: u64) -> Self {
        MonteCarloRow {
            trials: stats.trials,
            seed,
            rejected: stats.rejected,
            accepted_ok: stats.accepted_ok,
            accepted_bad: stats.accepted_bad,
            reject_rate: stats.reject_rate(),
            bad_rate_among_accepted: stats.bad_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    /// Distance the gadget schedules were built at (the algebra the checks
    /// replay is distance-independent).
    pub distance: u32,
    pub all_passed: bool,
    pub checks: Vec<CheckRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub gadget: String,
    pub passed: bool,
    pub branches: usize,
    pub max_deviation: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub schema: String,
    pub base: EstimatorConfig<f64>,
    pub points: Vec<SensitivityPoint<f64>>,
}

pub fn schema() -> String {
    SCHEMA.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::estimate;
    use crate::model::{CodeDistance, PhysicalAssumptions};

    #[test]
    fn estimate_report_schema_leads_and_round_trips() {
        let e = estimate(&EstimatorConfig::reference_workload()).unwrap();
        let factory =
            FactoryModel::new(e.config.assumptions, e.d_factory).unwrap();
        let report = EstimateReport {
            schema: schema(),
            baseline: e.baseline(),
            factory: Some(FactorySummary::of(&factory).unwrap()),
            estimate: e,
        };
        let text = serde_json::to_string_pretty(&report).unwrap();
        let first_key = text.lines().nth(1).unwrap();
        assert!(first_key.contains("\"schema\""), "{first_key}");
        assert!(text.contains("latsurg/1"));
        let back: EstimateReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    }

    #[test]
    fn factory_summary_window_figures() {
        let a = PhysicalAssumptions::new(1e-3, 1e-6).unwrap();
        let f = FactoryModel::new(a, CodeDistance::new(15).unwrap()).unwrap();
        let s = FactorySummary::of(&f).unwrap();
        assert_eq!(s.window_rounds, 225);
        assert_eq!(s.cells, 297);
        assert_eq!(s.physical_qubits, 133_353);
        assert_eq!(s.level1_latency_rounds, 115.5);
    }
}
