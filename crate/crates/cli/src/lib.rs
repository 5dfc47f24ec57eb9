//! Scenario-driven front end for the tripod solvers: scenario parsing, run
//! execution, fits on written tables, unit estimates and parameter sweeps.

pub mod error;
pub mod fit;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;

use std::path::Path;

pub use error::{CliError, Violation};
pub use run::{execute, write_outcome, Artifact, Outcome};
pub use scenario::{parse_scenario, Mode, Scenario};

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    parse_scenario(&text)
}

/// Human-readable summary of a run.
pub fn summary_lines(out: &Outcome) -> Vec<String> {
    let r = &out.report;
    let s = &r.scenario;
    let mut lines = vec![format!("scenario {} (mode {}, beta {}, w0 {})", s.name, s.mode, s.beta, s.w0)];
    if let Some(u) = &r.units {
        lines.push(format!("coupling G        {:.4e} 1/(s cm)", u.coupling));
        lines.push(format!("Rabi frequency    {:.4e} 1/s", u.rabi));
        lines.push(format!("Omega^2/G         {:.4e} cm/s", u.omega_sq_over_g));
        lines.push(format!("slow velocity     {:.4e} cm/s ({:.3e} c)", u.slow_velocity, u.slow_velocity_over_c));
        lines.push(format!("mixed velocity    {:.4e} cm/s", u.mixed_velocity));
        lines.push(format!("delay over {} cm  {:.4e} s", u.length, u.delay));
        return lines;
    }
    let inv = &r.invariants;
    lines.push(format!("sc0 residual      {:.3e}", inv.sc0_residual));
    lines.push(format!("storage identity  {:.3e}", inv.storage_identity));
    if let Some(x) = inv.exchange_residual {
        lines.push(format!("exchange residual {x:.3e}"));
    }
    if let Some(x) = inv.norm_drift {
        lines.push(format!("norm drift        {x:.3e}"));
    }
    if let Some(x) = inv.max_excited {
        lines.push(format!("max |a0|^2        {x:.3e}"));
    }
    for p in &r.pulses {
        let fit = p.fit.map_or(String::new(), |f| format!(" fit c_amp={:.4} c_shift={:.4} rms={:.2e}", f.c_amp, f.c_shift, f.rms));
        lines.push(format!(
            "{} pulse [{:.3}, {:.3}] w0 at zeta {:.3} w0: {} (spreads slow {:.2e}, fast {:.2e}){fit}",
            p.source, p.w_lo, p.w_hi, p.zeta, p.label, p.slow_spread, p.fast_spread
        ));
    }
    if let Some(c) = &r.comparison {
        lines.push(format!(
            "max angle error   theta {:.3e}, phi {:.3e} (tolerance {}) {}",
            c.theta_max,
            c.phi_max,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        ));
        lines.extend(c.findings.iter().cloned());
    }
    lines
}
