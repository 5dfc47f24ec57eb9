//! Scenario execution. Results stay in memory until [`write_outcome`], so
//! sweep workers never touch the file system.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use tripod_core::analytic::{classify, fit_constants, pulse_windows, Family, PulseLabel, Window};
use tripod_core::oracle::{compare_to_reduced, propagate_full, OracleRun};
use tripod_core::reduced::{
    mixed_state_propagate_with, propagate_with, solvability_residual, storage_identity_error, update_nu,
};
use tripod_core::units::{estimate, MediumParams, MW_PER_CM2};
use tripod_core::{ReducedField, SnapshotPlan};

use crate::error::CliError;
use crate::report::{
    ComparisonReport, FitReport, GridStats, Invariants, OracleStats, PulseReport, ReducedStats, RunReport, Transport,
};
use crate::scenario::{Mode, Scenario};

/// Column header of every profile table.
pub const CSV_HEADER: &str = "zeta,w,theta,phi,nu,sin_theta,sin_phi,sin_nu";

/// Disturbed samples are those whose local variation exceeds this fraction
/// of the slice maximum.
const PULSE_THRESHOLD: f64 = 1e-3;

/// Relative tolerance on the w-shift used to call a perturbation fast or slow.
const TRANSPORT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
    /// Set when a compare run exceeds its tolerance.
    pub failure: Option<String>,
}

impl Outcome {
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports contain only serializable data");
        s.push('\n');
        s
    }
}

/// Table rows for one field slice; positions in multiples of w0.
fn push_rows(out: &mut String, zeta: f64, w: &[f64], theta: &[f64], phi: &[f64], nu: Option<&[f64]>) {
    for i in 0..w.len() {
        let n = nu.map_or(f64::NAN, |v| v[i]);
        let (t, p) = (theta[i], phi[i]);
        writeln!(
            out,
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            zeta,
            w[i],
            t,
            p,
            n,
            t.sin(),
            p.sin(),
            n.sin()
        )
        .expect("writing to a String cannot fail");
    }
}

fn reduced_table(s: &Scenario, f: &ReducedField) -> String {
    let w: Vec<f64> = f.w_axis().iter().map(|x| x / s.w0).collect();
    let mut out = format!("{CSV_HEADER}\n");
    for k in profile_slices(s, f) {
        let nu = f.nu.as_ref().map(|n| n[k].as_slice());
        push_rows(&mut out, f.zeta(k) / s.w0, &w, &f.theta[k], &f.phi[k], nu);
    }
    out
}

fn profile_slices(s: &Scenario, f: &ReducedField) -> Vec<usize> {
    let dz = f.grid.dzeta;
    s.profile_zetas()
        .iter()
        .filter_map(|z| f.slice_of_step((z * s.w0 / dz).round() as usize))
        .collect()
}

/// Oracle angles on slice `k`, θ made continuous along w, with ν accumulated
/// from the entrance.
fn oracle_angles(o: &OracleRun, k: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut theta, phi) = o.fields.angles(k);
    for i in 1..theta.len() {
        let d = theta[i] - theta[i - 1];
        theta[i] -= (d / TAU).round() * TAU;
    }
    let nu = update_nu(&theta, &phi);
    (theta, phi, nu)
}

fn oracle_table(s: &Scenario, o: &OracleRun) -> String {
    let w: Vec<f64> = o.fields.w.iter().map(|x| x / s.w0).collect();
    let mut out = format!("{CSV_HEADER}\n");
    for z in s.profile_zetas() {
        let target = z * s.w0;
        if let Some(k) = o.fields.zeta.iter().position(|x| (x - target).abs() <= 1e-9 * target.max(1.0)) {
            let (theta, phi, nu) = oracle_angles(o, k);
            push_rows(&mut out, o.fields.zeta[k] / s.w0, &w, &theta, &phi, Some(&nu));
        }
    }
    out
}

fn pulses(s: &Scenario, source: &str, zeta: f64, window: &Window) -> Vec<PulseReport> {
    let g = s.grid.expect("physical scenarios have a grid");
    let min_gap = (0.5 / g.dw).round() as usize;
    let mut out = Vec::new();
    for (lo, hi) in pulse_windows(&window.theta, &window.phi, PULSE_THRESHOLD, min_gap) {
        let sub = window.slice(lo, hi + 1);
        let c = classify(&sub);
        let family = match c.label {
            PulseLabel::Slow => Some(Family::Slow),
            PulseLabel::Fast => Some(Family::Fast),
            _ => None,
        };
        let fit = family.filter(|_| s.output.fit).and_then(|fam| {
            fit_constants(&sub, fam).ok().map(|r| FitReport { family: fam, c_amp: r.c_amp, c_shift: r.c_shift, rms: r.rms })
        });
        out.push(PulseReport {
            source: source.into(),
            zeta: zeta / s.w0,
            w_lo: sub.w[0] / s.w0,
            w_hi: sub.w[sub.len() - 1] / s.w0,
            label: c.label,
            slow_spread: c.slow_spread,
            fast_spread: c.fast_spread,
            fit,
        });
    }
    out
}

fn wrapped(d: f64) -> f64 {
    let y = d.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Centroid of |dA| along w, or `None` when the slice is flat.
fn centroid(w: &[f64], a: &[f64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..a.len() {
        let d = wrapped(a[i] - a[i - 1]).abs();
        num += d * 0.5 * (w[i] + w[i - 1]);
        den += d;
    }
    (den > 1e-6).then(|| num / den)
}

fn transport(source: &str, angle: &str, w: &[f64], first: &[f64], last: &[f64], zeta: f64, w0: f64) -> Transport {
    let shift = match (centroid(w, first), centroid(w, last)) {
        (Some(a), Some(b)) => Some((b - a) / w0),
        _ => None,
    };
    let z = zeta / w0;
    let verdict = match shift {
        None => "unperturbed",
        Some(_) if z == 0.0 => "unresolved",
        Some(x) if x.abs() <= TRANSPORT_TOLERANCE * z => "fast",
        Some(x) if (x - z).abs() <= TRANSPORT_TOLERANCE * z => "slow",
        Some(_) => "mixed",
    };
    Transport { source: source.into(), angle: angle.into(), zeta: z, shift, verdict: verdict.into() }
}

fn reduced_transport(s: &Scenario, f: &ReducedField) -> Vec<Transport> {
    let w = f.w_axis();
    let last = f.len() - 1;
    vec![
        transport("reduced", "theta", &w, &f.theta[0], &f.theta[last], f.zeta(last), s.w0),
        transport("reduced", "phi", &w, &f.phi[0], &f.phi[last], f.zeta(last), s.w0),
    ]
}

fn oracle_transport(s: &Scenario, o: &OracleRun) -> Vec<Transport> {
    let last = o.fields.zeta.len() - 1;
    let (t0, p0, _) = oracle_angles(o, 0);
    let (t1, p1, _) = oracle_angles(o, last);
    let z = o.fields.zeta[last];
    vec![
        transport("oracle", "theta", &o.fields.w, &t0, &t1, z, s.w0),
        transport("oracle", "phi", &o.fields.w, &p0, &p1, z, s.w0),
    ]
}

fn findings(t: &[Transport]) -> Vec<String> {
    ["theta", "phi"]
        .iter()
        .map(|angle| {
            let parts: Vec<String> = t
                .iter()
                .filter(|x| x.angle == *angle)
                .map(|x| match x.shift {
                    Some(sh) => format!("{} {} (shift {:.3} w0 over zeta {:.3} w0)", x.source, x.verdict, sh, x.zeta),
                    None => format!("{} {}", x.source, x.verdict),
                })
                .collect();
            format!("{angle}: {}", parts.join("; "))
        })
        .collect()
}

fn artifact_names(s: &Scenario) -> (String, String, String) {
    (format!("{}.profiles.csv", s.name), format!("{}.oracle.csv", s.name), format!("{}.report.json", s.name))
}

/// Runs a validated scenario.
pub fn execute(s: &Scenario) -> Result<Outcome, CliError> {
    let (profiles_name, oracle_name, report_name) = artifact_names(s);
    let mut report = RunReport {
        scenario: s.clone(),
        grid: GridStats::default(),
        invariants: Invariants::default(),
        pulses: Vec::new(),
        transport: Vec::new(),
        comparison: None,
        units: None,
        manifest: Vec::new(),
    };
    let mut artifacts = Vec::new();
    let mut failure = None;

    if s.mode == Mode::Units {
        let m = s.medium.expect("units scenarios have a medium");
        let ctx = |e| CliError::solver("units estimate", e);
        let p = MediumParams::new(m.d, m.k, m.n).map_err(ctx)?;
        report.units = Some(estimate(&p, m.intensity * MW_PER_CM2, m.length).map_err(ctx)?);
        report.manifest.push(report_name.clone());
        let mut out = Outcome { report, artifacts, failure };
        out.artifacts.push(Artifact { name: report_name, contents: out.report_json() });
        return Ok(out);
    }

    let b = s.boundary_profile().map_err(|e| CliError::solver("boundary", e))?;
    let grid = s.reduced_grid().map_err(|e| CliError::solver("grid", e))?;
    let plan = SnapshotPlan::every(s.snapshot_stride()).with_neighbors();
    let field = if s.mode == Mode::Mixed {
        mixed_state_propagate_with(&b, &grid, plan)
    } else {
        propagate_with(&b, &grid, plan)
    }
    .map_err(|e| CliError::solver(format!("{}: reduced propagation", s.name), e))?;

    report.grid.reduced = Some(ReducedStats {
        dw: grid.dw,
        dzeta: grid.dzeta,
        n_w: grid.n_w(),
        n_steps: grid.n_steps(),
        stored_slices: field.len(),
    });
    report.invariants.sc0_residual = solvability_residual(&field).max;
    report.invariants.storage_identity = storage_identity_error(&field);
    report.invariants.nu_at_origin = field.nu.as_ref().map(|n| n.iter().map(|r| r[0].abs()).fold(0.0, f64::max));
    report.transport = reduced_transport(s, &field);
    let last = field.len() - 1;
    if s.output.classify && field.nu.is_some() {
        let win = Window::from_field(&field, last, 0, grid.n_w() - 1).map_err(|e| CliError::solver("window", e))?;
        report.pulses = pulses(s, "reduced", field.zeta(last), &win);
    }
    if s.mode != Mode::Oracle {
        artifacts.push(Artifact { name: profiles_name.clone(), contents: reduced_table(s, &field) });
    }

    if matches!(s.mode, Mode::Oracle | Mode::Compare) {
        let og = s.oracle_grid().map_err(CliError::Validation)?;
        let o = propagate_full(&b, &og, 1.0).map_err(|e| CliError::solver(format!("{}: oracle propagation", s.name), e))?;
        report.grid.oracle = Some(OracleStats {
            dtau: og.dtau,
            dzeta: og.dzeta,
            n_tau: og.n_tau(),
            n_zeta: og.n_zeta(),
            stored_slices: o.fields.zeta.len(),
            stored_samples: o.fields.tau.len(),
        });
        let r = o.report;
        report.invariants.exchange_residual = Some(r.exchange_residual);
        report.invariants.norm_drift = Some(r.norm_drift);
        report.invariants.max_excited = Some(r.max_excited);
        report.invariants.max_theta_rate = Some(r.max_theta_rate);
        report.invariants.max_phi_rate = Some(r.max_phi_rate);
        report.transport.extend(oracle_transport(s, &o));
        if s.output.classify {
            let k = o.fields.zeta.len() - 1;
            let (theta, phi, nu) = oracle_angles(&o, k);
            let mu = nu.iter().map(|n| tripod_core::algebra::mixing_angle(s.beta, *n)).collect();
            let win = Window { w: o.fields.w.clone(), theta, phi, mu };
            report.pulses.extend(pulses(s, "oracle", o.fields.zeta[k], &win));
        }
        artifacts.push(Artifact { name: oracle_name, contents: oracle_table(s, &o) });

        if s.mode == Mode::Compare {
            let c = compare_to_reduced(&o, &field).map_err(|e| CliError::solver("comparison", e))?;
            let tol = s.oracle.tolerance;
            let pass = c.max() <= tol;
            if !pass {
                failure = Some(format!(
                    "{}: reduced/oracle angle discrepancy {:.4e} rad exceeds tolerance {tol}",
                    s.name,
                    c.max()
                ));
            }
            report.comparison = Some(ComparisonReport {
                theta_max: c.theta_max,
                phi_max: c.phi_max,
                theta_rms: c.theta_rms,
                phi_rms: c.phi_rms,
                worst_at: (c.worst_at.0 / s.w0, c.worst_at.1 / s.w0),
                tolerance: tol,
                pass,
                findings: findings(&report.transport),
            });
        }
    }

    report.manifest = artifacts.iter().map(|a| a.name.clone()).chain([report_name.clone()]).collect();
    let mut out = Outcome { report, artifacts, failure };
    out.artifacts.push(Artifact { name: report_name, contents: out.report_json() });
    Ok(out)
}

/// Writes every artifact into `dir` (created if needed).
pub fn write_outcome(dir: &Path, out: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    for a in &out.artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(|e| CliError::io(path.display(), e))?;
    }
    Ok(())
}
