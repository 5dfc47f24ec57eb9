//! Full Maxwell–Schrödinger integration in retarded coordinates (ζ, τ).
//!
//! Atoms obey ȧ = i h(Ω) a at every ζ; fields obey ∂Ωⱼ/∂ζ = iG a₀ aⱼ*.
//! The outer loop runs over τ. At each τ-level the fields are marched along ζ
//! by a Heun step per cell: predict Ω at the new τ from the upstream node,
//! evolve the local atom over one τ-step with the predicted field, average
//! the two sources, then evolve the atom again with the corrected field.
//! Atomic steps use a fourth-order commutator-free Magnus scheme, which is
//! unitary to round-off.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, AngleTriple, AtomState, RabiTriple, C64, ZERO_PHASES};
use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;
use crate::reduced::{NonlinearTime, ReducedField};

/// Largest admissible Δτ·Ω_max.
pub const MAX_PHASE_STEP: f64 = 0.05;
/// Upper bound on (ζ-nodes × τ-samples) of a single run.
pub const MAX_CELLS: f64 = 1.0e9;
/// Upper bound on stored snapshot entries.
pub const MAX_SNAPSHOT_ENTRIES: f64 = 5.0e7;

type Fields = [C64; 3];
const ZERO_FIELDS: Fields = [C64 { re: 0.0, im: 0.0 }; 3];

/// Integration scheme for the ζ-direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZetaScheme {
    #[default]
    Heun,
    /// Forward Euler, kept for step-order comparisons.
    Euler,
}

/// Step sizes and storage plan of an oracle run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    pub dtau: f64,
    pub tau_max: f64,
    pub dzeta: f64,
    pub zeta_max: f64,
    /// Store every `zeta_stride`-th ζ-node.
    pub zeta_stride: usize,
    /// Store every `tau_stride`-th τ-sample.
    pub tau_stride: usize,
    pub scheme: ZetaScheme,
}

impl OracleGrid {
    pub fn new(dtau: f64, tau_max: f64, dzeta: f64, zeta_max: f64) -> Self {
        Self { dtau, tau_max, dzeta, zeta_max, zeta_stride: 1, tau_stride: 1, scheme: ZetaScheme::Heun }
    }

    pub fn with_strides(self, zeta_stride: usize, tau_stride: usize) -> Self {
        Self { zeta_stride: zeta_stride.max(1), tau_stride: tau_stride.max(1), ..self }
    }

    pub fn with_scheme(self, scheme: ZetaScheme) -> Self {
        Self { scheme, ..self }
    }

    /// Number of τ-steps.
    pub fn n_tau(&self) -> usize {
        (self.tau_max / self.dtau).round() as usize
    }

    /// Number of ζ-steps.
    pub fn n_zeta(&self) -> usize {
        (self.zeta_max / self.dzeta).round() as usize
    }

    pub fn halved(&self) -> Self {
        Self {
            dtau: 0.5 * self.dtau,
            dzeta: 0.5 * self.dzeta,
            zeta_stride: 2 * self.zeta_stride,
            tau_stride: 2 * self.tau_stride,
            ..*self
        }
    }

    /// Checks step sizes against Ω_max and the resource caps.
    pub fn validate(&self, omega_max: f64) -> Result<()> {
        for (name, v) in [("dtau", self.dtau), ("tau_max", self.tau_max), ("dzeta", self.dzeta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.zeta_max.is_finite() && self.zeta_max >= 0.0) {
            return Err(Error::Config(format!("zeta_max must be >= 0, got {}", self.zeta_max)));
        }
        if self.dtau * omega_max > MAX_PHASE_STEP * (1.0 + 1e-9) {
            return Err(Error::Config(format!(
                "dtau*omega_max = {:.4} exceeds {MAX_PHASE_STEP}",
                self.dtau * omega_max
            )));
        }
        let cells = (self.n_tau() + 1) as f64 * (self.n_zeta() + 1) as f64;
        if cells > MAX_CELLS {
            return Err(Error::Config(format!("{cells:.3e} cells exceeds the cap of {MAX_CELLS:.1e}")));
        }
        let stored = (self.n_tau() / self.tau_stride + 1) as f64 * (self.n_zeta() / self.zeta_stride + 1) as f64;
        if stored > MAX_SNAPSHOT_ENTRIES {
            return Err(Error::Config(format!("{stored:.3e} snapshot entries exceeds {MAX_SNAPSHOT_ENTRIES:.1e}")));
        }
        Ok(())
    }
}

/// Sampled trajectory of one atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTrajectory {
    pub dtau: f64,
    pub states: Vec<AtomState>,
}

impl AtomTrajectory {
    /// Largest |Σ|aᵢ|² − 1| along the trajectory.
    pub fn norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// exp(i·h(f)·t)·a using h³ = Ω²h.
pub fn exp_step(f: &Fields, a: &AtomState, t: f64) -> AtomState {
    let omega2: f64 = f.iter().map(|o| o.norm_sqr()).sum();
    let half = 0.5 * omega2.sqrt() * t;
    // sin(x)/Ω = t·sinc(x) and (cos x − 1)/Ω² = −(t²/2)·sinc²(x/2), x = Ωt
    let (c1, c2) = if half < 1e-4 {
        (t * (1.0 - 2.0 * half * half / 3.0), -0.5 * t * t * (1.0 - half * half / 3.0))
    } else {
        let (s, c) = half.sin_cos();
        let sinc_half = s / half;
        (t * sinc_half * c, -0.5 * t * t * sinc_half * sinc_half)
    };
    let [a0, a1, a2, a3] = a.amps;
    let [o1, o2, o3] = *f;
    let h0 = o1 * a1 + o2 * a2 + o3 * a3;
    let (h1, h2, h3) = (o1.conj() * a0, o2.conj() * a0, o3.conj() * a0);
    let g0 = o1 * h1 + o2 * h2 + o3 * h3;
    let (g1, g2, g3) = (o1.conj() * h0, o2.conj() * h0, o3.conj() * h0);
    let i1 = C64::new(0.0, c1);
    AtomState::new(a0 + i1 * h0 + g0 * c2, a1 + i1 * h1 + g1 * c2, a2 + i1 * h2 + g2 * c2, a3 + i1 * h3 + g3 * c2)
}

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NODE1: f64 = 0.5 - SQRT3 / 6.0;
const NODE2: f64 = 0.5 + SQRT3 / 6.0;
const ALPHA1: f64 = 0.25 - SQRT3 / 6.0;
const ALPHA2: f64 = 0.25 + SQRT3 / 6.0;

fn lerp(f0: &Fields, f1: &Fields, c: f64) -> Fields {
    [0, 1, 2].map(|j| f0[j] * (1.0 - c) + f1[j] * c)
}

fn combine(p: &Fields, q: &Fields, a: f64, b: f64) -> Fields {
    [0, 1, 2].map(|j| p[j] * a + q[j] * b)
}

/// One commutator-free fourth-order Magnus step over [τ, τ+dt] with the field
/// varying linearly from `f0` to `f1`.
pub fn cf4_step(a: &AtomState, f0: &Fields, f1: &Fields, dt: f64) -> AtomState {
    let g1 = lerp(f0, f1, NODE1);
    let g2 = lerp(f0, f1, NODE2);
    let first = exp_step(&combine(&g1, &g2, ALPHA2, ALPHA1), a, dt);
    exp_step(&combine(&g1, &g2, ALPHA1, ALPHA2), &first, dt)
}

/// Evolves one atom through sampled fields on a uniform τ-grid.
pub fn atom_evolve(fields: &[RabiTriple], dtau: f64, init: AtomState) -> Result<AtomTrajectory> {
    let omega_max = fields.iter().map(RabiTriple::generalized).fold(0.0, f64::max);
    if !(dtau > 0.0) || dtau * omega_max > MAX_PHASE_STEP * (1.0 + 1e-9) {
        return Err(Error::Config(format!(
            "dtau = {dtau} violates dtau*omega_max <= {MAX_PHASE_STEP} (omega_max = {omega_max})"
        )));
    }
    let mut states = Vec::with_capacity(fields.len());
    let mut a = init;
    states.push(a);
    for w in fields.windows(2) {
        a = cf4_step(&a, &w[0].omega, &w[1].omega, dtau);
        states.push(a);
    }
    Ok(AtomTrajectory { dtau, states })
}

/// dΩⱼ/dζ = iG a₀ aⱼ*.
pub fn field_source(a: &AtomState, coupling: f64) -> Fields {
    let k = C64::new(0.0, coupling) * a.amps[0];
    [k * a.amps[1].conj(), k * a.amps[2].conj(), k * a.amps[3].conj()]
}

/// One (ζ, τ) cell: the node upstream in ζ is already at the new τ-level,
/// the node itself is still at the old one.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    /// Field at (ζ − dζ, τ + dτ).
    pub upstream_field: Fields,
    /// Source dΩ/dζ at (ζ − dζ, τ + dτ).
    pub upstream_source: Fields,
    /// Field at (ζ − dζ, τ).
    pub upstream_previous: Fields,
    /// Field at (ζ, τ).
    pub field: Fields,
    /// Atom at (ζ, τ).
    pub atom: AtomState,
}

/// Result of [`field_step`]: field, atom and source at (ζ, τ + dτ).
#[derive(Debug, Clone, Copy)]
pub struct CellUpdate {
    pub field: Fields,
    pub atom: AtomState,
    pub source: Fields,
}

/// Advances the field by dζ at the new τ-level and the local atom by dτ.
///
/// Heun: the predicted field repeats the upstream node's τ-increment, the
/// atom is evolved on it, and the field is corrected with the average of the
/// upstream and predicted sources. Euler stops after a forward ζ-step.
pub fn field_step(c: &Cell, dzeta: f64, dtau: f64, coupling: f64, scheme: ZetaScheme) -> CellUpdate {
    if scheme == ZetaScheme::Euler {
        let field = combine(&c.upstream_field, &c.upstream_source, 1.0, dzeta);
        let atom = cf4_step(&c.atom, &c.field, &field, dtau);
        return CellUpdate { field, atom, source: field_source(&atom, coupling) };
    }
    let predicted = [0, 1, 2].map(|j| c.field[j] + c.upstream_field[j] - c.upstream_previous[j]);
    let atom = cf4_step(&c.atom, &c.field, &predicted, dtau);
    let source = field_source(&atom, coupling);
    let avg = combine(&c.upstream_source, &source, 0.5 * dzeta, 0.5 * dzeta);
    let field = combine(&c.upstream_field, &avg, 1.0, 1.0);
    let atom = cf4_step(&c.atom, &c.field, &field, dtau);
    CellUpdate { field, atom, source: field_source(&atom, coupling) }
}

/// Stored fields of an oracle run.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiGrid {
    pub zeta: Vec<f64>,
    pub tau: Vec<f64>,
    /// Nonlinear time at each stored τ, from the entrance Ω₀.
    pub w: Vec<f64>,
    /// `omega[slice][sample]`.
    pub omega: Vec<Vec<RabiTriple>>,
    /// |a₀|² on the same samples.
    pub excited: Vec<Vec<f64>>,
}

impl RabiGrid {
    /// Signed (θ, φ) on a stored slice.
    pub fn angles(&self, slice: usize) -> (Vec<f64>, Vec<f64>) {
        self.omega[slice]
            .iter()
            .map(|r| {
                let (_, t, p) = algebra::rabi_to_signed_angles(r);
                (t, p)
            })
            .unzip()
    }
}

/// Monitors of an oracle run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    /// max |θ̇|/Ω over stored slices.
    pub max_theta_rate: f64,
    /// max |φ̇|/Ω over stored slices.
    pub max_phi_rate: f64,
    /// max |a₀|² over the whole grid.
    pub max_excited: f64,
    /// max |∂ζ Σ|Ωⱼ|² + G ∂τ|a₀|²| over the whole grid.
    pub exchange_residual: f64,
    /// max |Σ|aᵢ|² − 1| over the whole grid.
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub grid: OracleGrid,
    pub coupling: f64,
    pub beta: f64,
    pub fields: RabiGrid,
    pub report: AdiabaticityReport,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(std::f64::consts::TAU);
    if y > std::f64::consts::PI {
        y - std::f64::consts::TAU
    } else {
        y
    }
}

/// Integrates the full system. Atoms start at τ = 0 in
/// sin β Φ⁽¹⁾ + cos β Φ⁽²⁾ of the entrance angles at τ = 0; the boundary must
/// be quiescent there.
pub fn propagate_full(b: &BoundaryProfile, g: &OracleGrid, coupling: f64) -> Result<OracleRun> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::Config(format!("coupling must be positive, got {coupling}")));
    }
    let n_tau = g.n_tau();
    let n_z = g.n_zeta() + 1;
    let tau: Vec<f64> = (0..=n_tau).map(|n| n as f64 * g.dtau).collect();
    let omega0: Vec<f64> = tau.iter().map(|t| b.omega0.eval(*t)).collect();
    g.validate(omega0.iter().cloned().fold(0.0, f64::max))?;
    let nt = NonlinearTime::new(&tau, &omega0, coupling)?;
    let boundary = |n: usize| {
        let w = nt.w[n];
        algebra::angles_to_rabi(omega0[n], &AngleTriple::new(b.theta.eval(w), b.phi.eval(w), 0.0), &ZERO_PHASES).omega
    };

    let start = AngleTriple::new(b.theta.eval(0.0), b.phi.eval(0.0), 0.0);
    let init = algebra::state_from_mixing(&start, b.beta, &ZERO_PHASES);
    let mut atoms = vec![init; n_z];
    let mut cur: Vec<Fields> = vec![boundary(0); n_z];
    let mut next: Vec<Fields> = vec![ZERO_FIELDS; n_z];

    let snap_z: Vec<usize> = (0..n_z).filter(|k| k % g.zeta_stride == 0).collect();
    let snap_t: Vec<usize> = (0..=n_tau).filter(|n| n % g.tau_stride == 0).collect();
    let mut omega_store: Vec<Vec<RabiTriple>> = vec![Vec::with_capacity(snap_t.len()); snap_z.len()];
    let mut excited_store: Vec<Vec<f64>> = vec![Vec::with_capacity(snap_t.len()); snap_z.len()];
    let mut last_angles: Vec<(f64, f64)> = Vec::with_capacity(snap_z.len());
    for (s, _) in snap_z.iter().enumerate() {
        omega_store[s].push(RabiTriple { omega: cur[0] });
        excited_store[s].push(0.0);
        let (_, t, p) = algebra::rabi_to_signed_angles(&RabiTriple { omega: cur[0] });
        last_angles.push((t, p));
    }

    let mut report = AdiabaticityReport::default();
    let mut p_prev = vec![0.0; n_z];
    let mut p_cur = vec![0.0; n_z];
    let mut p_next = vec![0.0; n_z];

    for n in 0..n_tau {
        next[0] = boundary(n + 1);
        atoms[0] = cf4_step(&atoms[0], &cur[0], &next[0], g.dtau);
        let mut source = field_source(&atoms[0], coupling);
        p_next[0] = atoms[0].amps[0].norm_sqr();
        for k in 1..n_z {
            let cell = Cell { upstream_field: next[k - 1], upstream_source: source, upstream_previous: cur[k - 1], field: cur[k], atom: atoms[k] };
            let up = field_step(&cell, g.dzeta, g.dtau, coupling, g.scheme);
            next[k] = up.field;
            atoms[k] = up.atom;
            source = up.source;
            p_next[k] = up.atom.amps[0].norm_sqr();
        }
        for (k, a) in atoms.iter().enumerate() {
            report.norm_drift = report.norm_drift.max((a.norm_sqr() - 1.0).abs());
            report.max_excited = report.max_excited.max(p_next[k]);
        }
        if n >= 1 {
            let om2 = |f: &Fields| f.iter().map(|x| x.norm_sqr()).sum::<f64>();
            for k in 0..n_z - 1 {
                let d_zeta = (om2(&cur[k + 1]) - om2(&cur[k])) / g.dzeta;
                let dt_l = (p_next[k] - p_prev[k]) / (2.0 * g.dtau);
                let dt_r = (p_next[k + 1] - p_prev[k + 1]) / (2.0 * g.dtau);
                let r = (d_zeta + coupling * 0.5 * (dt_l + dt_r)).abs();
                report.exchange_residual = report.exchange_residual.max(r);
            }
        }
        for (s, &k) in snap_z.iter().enumerate() {
            let r = RabiTriple { omega: next[k] };
            let (om, t, p) = algebra::rabi_to_signed_angles(&r);
            if om > 0.0 {
                let (t0, p0) = last_angles[s];
                report.max_theta_rate = report.max_theta_rate.max(wrap(t - t0).abs() / g.dtau / om);
                report.max_phi_rate = report.max_phi_rate.max((p - p0).abs() / g.dtau / om);
            }
            last_angles[s] = (t, p);
            if (n + 1) % g.tau_stride == 0 {
                omega_store[s].push(r);
                excited_store[s].push(p_next[k]);
            }
        }
        std::mem::swap(&mut cur, &mut next);
        std::mem::swap(&mut p_prev, &mut p_cur);
        std::mem::swap(&mut p_cur, &mut p_next);
    }

    let fields = RabiGrid {
        zeta: snap_z.iter().map(|k| *k as f64 * g.dzeta).collect(),
        tau: snap_t.iter().map(|n| tau[*n]).collect(),
        w: snap_t.iter().map(|n| nt.w[*n]).collect(),
        omega: omega_store,
        excited: excited_store,
    };
    Ok(OracleRun { grid: *g, coupling, beta: b.beta, fields, report })
}

/// Maximum exchange-law residual of a run.
pub fn conservation_check(run: &OracleRun) -> f64 {
    run.report.exchange_residual
}

/// Angle discrepancies between an oracle run and a reduced run of the same
/// scenario, on the oracle's stored (ζ, w) samples inside the reduced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub zeta: Vec<f64>,
    pub w: Vec<f64>,
    /// `theta_error[slice][sample]`, wrapped to (−π, π].
    pub theta_error: Vec<Vec<f64>>,
    pub phi_error: Vec<Vec<f64>>,
    pub theta_max: f64,
    pub phi_max: f64,
    pub theta_rms: f64,
    pub phi_rms: f64,
    /// (ζ, w) of the largest discrepancy in either angle.
    pub worst_at: (f64, f64),
}

impl Comparison {
    pub fn max(&self) -> f64 {
        self.theta_max.max(self.phi_max)
    }
}

fn interp_uniform(values: &[f64], step: f64, x: f64) -> f64 {
    let t = x / step;
    let i = (t.floor() as usize).min(values.len() - 2);
    let f = t - i as f64;
    values[i] * (1.0 - f) + values[i + 1] * f
}

pub fn compare_to_reduced(o: &OracleRun, r: &ReducedField) -> Result<Comparison> {
    if (o.beta - r.beta).abs() > 1e-12 {
        return Err(Error::Mismatch(format!("beta differs: oracle {} vs reduced {}", o.beta, r.beta)));
    }
    let w_max = r.grid.w_max;
    let keep: Vec<usize> = (0..o.fields.w.len()).filter(|&i| o.fields.w[i] <= w_max * (1.0 + 1e-12)).collect();
    if keep.is_empty() {
        return Err(Error::Mismatch("no overlapping w samples".into()));
    }
    let mut out = Comparison {
        zeta: Vec::new(),
        w: keep.iter().map(|&i| o.fields.w[i]).collect(),
        theta_error: Vec::new(),
        phi_error: Vec::new(),
        theta_max: 0.0,
        phi_max: 0.0,
        theta_rms: 0.0,
        phi_rms: 0.0,
        worst_at: (0.0, 0.0),
    };
    let (mut st, mut sp, mut count, mut worst) = (0.0, 0.0, 0usize, -1.0);
    for (s, &zeta) in o.fields.zeta.iter().enumerate() {
        let k = r.nearest_slice(zeta);
        if (r.zeta(k) - zeta).abs() > 1e-9 * zeta.max(1.0) {
            return Err(Error::Mismatch(format!("reduced run has no slice at zeta = {zeta}")));
        }
        let (th, ph) = o.fields.angles(s);
        let mut et = Vec::with_capacity(keep.len());
        let mut ep = Vec::with_capacity(keep.len());
        for &i in &keep {
            let w = o.fields.w[i];
            let dt = wrap(th[i] - interp_uniform(&r.theta[k], r.grid.dw, w));
            let dp = ph[i] - interp_uniform(&r.phi[k], r.grid.dw, w);
            st += dt * dt;
            sp += dp * dp;
            count += 1;
            let m = dt.abs().max(dp.abs());
            if m > worst {
                worst = m;
                out.worst_at = (zeta, w);
            }
            out.theta_max = out.theta_max.max(dt.abs());
            out.phi_max = out.phi_max.max(dp.abs());
            et.push(dt);
            ep.push(dp);
        }
        out.zeta.push(zeta);
        out.theta_error.push(et);
        out.phi_error.push(ep);
    }
    out.theta_rms = (st / count as f64).sqrt();
    out.phi_rms = (sp / count as f64).sqrt();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Profile, Segment};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    proptest! {
        #[test]
        fn exp_step_is_unitary_and_composes(
            re in proptest::array::uniform3(-2.0..2.0f64),
            im in proptest::array::uniform3(-2.0..2.0f64),
            t in 0.0..3.0f64,
        ) {
            let f = [0, 1, 2].map(|j| C64::new(re[j], im[j]));
            let a = AtomState::new(c(0.3), C64::new(0.1, 0.5), c(-0.6), C64::new(0.2, -0.4));
            let a = a.scale(c(1.0 / a.norm_sqr().sqrt()));
            let once = exp_step(&f, &a, t);
            let twice = exp_step(&f, &exp_step(&f, &a, 0.5 * t), 0.5 * t);
            prop_assert!((once.norm_sqr() - 1.0).abs() < 1e-12);
            for k in 0..4 {
                prop_assert!((once.amps[k] - twice.amps[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rabi_flopping() {
        let omega = 1.3;
        let dtau = 0.02;
        let fields = vec![RabiTriple::real(omega, 0.0, 0.0); 5001];
        let tr = atom_evolve(&fields, dtau, AtomState::basis(1)).unwrap();
        for (n, s) in tr.states.iter().enumerate() {
            let expect = (omega * n as f64 * dtau).cos().powi(2);
            assert_abs_diff_eq!(s.amps[1].norm_sqr(), expect, epsilon = 1e-10);
        }
        assert!(tr.norm_drift() < 1e-12);
    }

    #[test]
    fn dark_state_is_stationary() {
        let a = AngleTriple::new(0.4, -0.3, 0.0);
        let r = algebra::angles_to_rabi(1.0, &a, &ZERO_PHASES);
        let init = algebra::state_from_mixing(&a, 0.8, &ZERO_PHASES);
        let tr = atom_evolve(&vec![r; 2001], 0.05, init).unwrap();
        for s in &tr.states {
            assert!(s.excited_population() < 1e-28);
            for k in 0..4 {
                assert!((s.amps[k] - init.amps[k]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn step_size_precondition() {
        let fields = vec![RabiTriple::real(2.0, 0.0, 0.0); 10];
        assert!(matches!(atom_evolve(&fields, 0.03, AtomState::basis(1)), Err(Error::Config(_))));
        assert!(atom_evolve(&fields, 0.025, AtomState::basis(1)).is_ok());
    }

    fn ramped_excitation(rate_scale: f64) -> f64 {
        let dtau = 0.05;
        let n = (8.0 * rate_scale / dtau) as usize;
        let theta = Profile::smooth(0.0, vec![Segment::ramp(4.0 * rate_scale, 2.0 * rate_scale, 1.0)]);
        let fields: Vec<RabiTriple> = (0..=n)
            .map(|k| {
                let t = k as f64 * dtau;
                algebra::angles_to_rabi(1.0, &AngleTriple::new(theta.eval(t), 0.0, 0.0), &ZERO_PHASES)
            })
            .collect();
        let init = algebra::state_from_mixing(&AngleTriple::new(0.0, 0.0, 0.0), std::f64::consts::FRAC_PI_2, &ZERO_PHASES);
        let tr = atom_evolve(&fields, dtau, init).unwrap();
        tr.states.iter().map(|s| s.excited_population()).fold(0.0, f64::max)
    }

    #[test]
    fn excitation_follows_adiabatic_scaling() {
        let slow = ramped_excitation(20.0);
        let slower = ramped_excitation(40.0);
        assert!(slow < 1e-2);
        let ratio = slow / slower;
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn dark_medium_leaves_fields_unchanged() {
        let a = AngleTriple::new(0.4, -0.3, 0.0);
        let f = algebra::angles_to_rabi(1.0, &a, &ZERO_PHASES).omega;
        let atom = algebra::state_from_mixing(&a, 1.0, &ZERO_PHASES);
        let cell = Cell { upstream_field: f, upstream_source: ZERO_FIELDS, upstream_previous: f, field: f, atom };
        let up = field_step(&cell, 0.5, 0.05, 1.0, ZetaScheme::Heun);
        assert_eq!(up.field, f);
        assert!(up.source.iter().all(|s| s.norm() < 1e-16));
    }

    #[test]
    fn grid_caps() {
        assert!(OracleGrid::new(0.05, 100.0, 1.0, 10.0).validate(1.0).is_ok());
        assert!(OracleGrid::new(0.06, 100.0, 1.0, 10.0).validate(1.0).is_err());
        assert!(OracleGrid::new(0.05, 1e7, 0.01, 1e3).validate(1.0).is_err());
    }

    #[test]
    fn constant_boundary_is_stationary() {
        let b = BoundaryProfile::new(Profile::constant(0.3), Profile::constant(0.2), 0.9);
        let run = propagate_full(&b, &OracleGrid::new(0.05, 20.0, 0.5, 5.0), 1.0).unwrap();
        let f0 = run.fields.omega[0][0];
        for row in &run.fields.omega {
            for r in row {
                for j in 0..3 {
                    assert!((r.omega[j] - f0.omega[j]).norm() < 1e-8);
                }
            }
        }
        assert!(run.report.exchange_residual < 1e-12);
        assert!(run.report.max_excited < 1e-20);
    }

    #[test]
    fn euler_and_heun_agree_to_first_order() {
        let b = BoundaryProfile::new(
            Profile::smooth(0.2, vec![Segment::bump(20.0, 10.0, 0.4)]),
            Profile::smooth(0.1, vec![Segment::bump(25.0, 10.0, 0.3)]),
            1.1,
        );
        let diff = |dz: f64| {
            let g = OracleGrid::new(0.05, 60.0, dz, 8.0).with_strides((2.0 / dz) as usize, 20);
            let h = propagate_full(&b, &g.with_scheme(ZetaScheme::Heun), 1.0).unwrap();
            let e = propagate_full(&b, &g.with_scheme(ZetaScheme::Euler), 1.0).unwrap();
            let mut m = 0.0f64;
            for (rh, re) in h.fields.omega.iter().zip(e.fields.omega.iter()) {
                for (x, y) in rh.iter().zip(re.iter()) {
                    for j in 0..3 {
                        m = m.max((x.omega[j] - y.omega[j]).norm());
                    }
                }
            }
            m
        };
        let (d1, d2) = (diff(1.0), diff(0.5));
        assert!(d1 > 0.0 && d2 < 0.7 * d1, "{d1} {d2}");
    }
}
