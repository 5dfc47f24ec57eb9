//! Serialized run summaries. Reports carry no wall-clock data so that
//! repeated runs produce identical bytes.

use serde::Serialize;
use tripod_core::analytic::{Family, PulseLabel};
use tripod_core::units::UnitsEstimate;

use crate::scenario::Scenario;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub grid: GridStats,
    pub invariants: Invariants,
    pub pulses: Vec<PulseReport>,
    pub transport: Vec<Transport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<UnitsEstimate>,
    pub manifest: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GridStats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleStats>,
}

/// Absolute (G = Ω₀ = 1) step sizes and sample counts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReducedStats {
    pub dw: f64,
    pub dzeta: f64,
    pub n_w: usize,
    pub n_steps: usize,
    pub stored_slices: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleStats {
    pub dtau: f64,
    pub dzeta: f64,
    pub n_tau: usize,
    pub n_zeta: usize,
    pub stored_slices: usize,
    pub stored_samples: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Invariants {
    /// Max solvability-condition residual of the reduced field.
    pub sc0_residual: f64,
    /// Max |(sinθcosφ)² + (cosθcosφ)² + sin²φ − 1|.
    pub storage_identity: f64,
    /// Max |ν(ζ, 0)|; absent when ν is undefined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_at_origin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exchange_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_excited: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_theta_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_phi_rate: Option<f64>,
}

/// One disturbed window of the final slice. Positions in multiples of w0.
#[derive(Debug, Clone, Serialize)]
pub struct PulseReport {
    pub source: String,
    pub zeta: f64,
    pub w_lo: f64,
    pub w_hi: f64,
    pub label: PulseLabel,
    pub slow_spread: f64,
    pub fast_spread: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitReport {
    pub family: Family,
    pub c_amp: f64,
    pub c_shift: f64,
    pub rms: f64,
}

/// How far each angle's perturbation moved in w between the entrance and the
/// last slice, in multiples of w0.
#[derive(Debug, Clone, Serialize)]
pub struct Transport {
    pub source: String,
    pub angle: String,
    pub zeta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// fast (no shift), slow (shift ζ), mixed or unperturbed.
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub theta_max: f64,
    pub phi_max: f64,
    pub theta_rms: f64,
    pub phi_rms: f64,
    /// (ζ, w) of the worst discrepancy, multiples of w0.
    pub worst_at: (f64, f64),
    pub tolerance: f64,
    pub pass: bool,
    /// One line per angle stating which propagation class each solver shows.
    pub findings: Vec<String>,
}
