//! Adiabatic propagation in the nonlinear-time frame.
//!
//! In the dark-state manifold the generalized Rabi frequency is frozen along ζ
//! and the two field angles (θ, φ) obey a quasilinear hyperbolic system
//!
//! ```text
//!     U_ζ + M(φ, μ) U_w = 0,    U = (θ, φ),    μ = β − ν,
//!     ∂ν/∂w = sin φ · ∂θ/∂w,    ν(ζ, 0) = 0,
//! ```
//!
//! whose characteristic speeds are exactly 0 (fast pulses, functions of w)
//! and 1 (slow pulses, functions of ζ − w). The marching scheme works on the
//! characteristic form: along dw/dζ = 0 the combination
//! cos μ cos φ dθ + sin μ dφ vanishes, along dw/dζ = 1 the combination
//! sin μ cos φ dθ − cos μ dφ vanishes. Feet of characteristics are found by
//! first-order upwind interpolation in w; the coefficients are evaluated by a
//! predictor and two trapezoidal corrector passes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;

/// Floor on |cos φ| below which the reduced equations are treated as singular.
pub const COS_PHI_FLOOR: f64 = 1e-3;

/// Corrector passes per grid point.
const CORRECTOR_PASSES: usize = 2;

/// Uniform (ζ, w) grid for the reduced solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dw: f64,
    pub dzeta: f64,
    pub w_max: f64,
    pub zeta_max: f64,
}

impl Grid {
    pub fn new(dw: f64, dzeta: f64, w_max: f64, zeta_max: f64) -> Result<Self> {
        let g = Self { dw, dzeta, w_max, zeta_max };
        g.validate()?;
        Ok(g)
    }

    /// Grid with dζ = dw (unit Courant number).
    pub fn square(step: f64, w_max: f64, zeta_max: f64) -> Result<Self> {
        Self::new(step, step, w_max, zeta_max)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("dw", self.dw), ("dzeta", self.dzeta), ("w_max", self.w_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.zeta_max.is_finite() && self.zeta_max >= 0.0) {
            return Err(Error::Config(format!("zeta_max must be >= 0, got {}", self.zeta_max)));
        }
        if self.dzeta > self.dw * (1.0 + 1e-12) {
            return Err(Error::Cfl { dzeta: self.dzeta, dw: self.dw });
        }
        if self.n_w() < 3 {
            return Err(Error::Config("w grid needs at least 3 samples".into()));
        }
        Ok(())
    }

    pub fn n_w(&self) -> usize {
        (self.w_max / self.dw).round() as usize + 1
    }

    pub fn n_steps(&self) -> usize {
        (self.zeta_max / self.dzeta).round() as usize
    }

    pub fn w(&self, i: usize) -> f64 {
        i as f64 * self.dw
    }

    pub fn zeta(&self, step: usize) -> f64 {
        step as f64 * self.dzeta
    }

    /// Courant number dζ/dw.
    pub fn courant(&self) -> f64 {
        self.dzeta / self.dw
    }

    pub fn halved(&self) -> Self {
        Self { dw: 0.5 * self.dw, dzeta: 0.5 * self.dzeta, ..*self }
    }
}

/// Which ζ-slices a run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotPlan {
    /// Keep every `stride`-th step (the last step is always kept).
    pub stride: usize,
    /// Also keep the steps adjacent to each kept step, so that centered
    /// ζ-differences are available there.
    pub neighbors: bool,
}

impl SnapshotPlan {
    pub fn every(stride: usize) -> Self {
        Self { stride: stride.max(1), neighbors: false }
    }

    pub fn with_neighbors(self) -> Self {
        Self { neighbors: true, ..self }
    }

    fn keeps(&self, step: usize, last: usize) -> bool {
        let hit = |s: usize| s % self.stride == 0 || s == last;
        hit(step) || (self.neighbors && ((step > 0 && hit(step - 1)) || (step < last && hit(step + 1))))
    }
}

impl Default for SnapshotPlan {
    fn default() -> Self {
        Self::every(1)
    }
}

/// Angle fields on stored ζ-slices of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedField {
    pub grid: Grid,
    pub beta: f64,
    /// Step index of each stored slice, increasing.
    pub steps: Vec<usize>,
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    /// Mixing angle ν; absent for the mixed-state regime, where it is undefined.
    pub nu: Option<Vec<Vec<f64>>>,
}

impl ReducedField {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn zeta(&self, k: usize) -> f64 {
        self.grid.zeta(self.steps[k])
    }

    /// Index of the stored slice for a given step.
    pub fn slice_of_step(&self, step: usize) -> Option<usize> {
        self.steps.binary_search(&step).ok()
    }

    /// Index of the stored slice closest to `zeta`.
    pub fn nearest_slice(&self, zeta: f64) -> usize {
        (0..self.len())
            .min_by(|&a, &b| (self.zeta(a) - zeta).abs().total_cmp(&(self.zeta(b) - zeta).abs()))
            .expect("field has at least one slice")
    }

    /// μ = β − ν on slice `k`, or `None` in the mixed-state regime.
    pub fn mu(&self, k: usize) -> Option<Vec<f64>> {
        self.nu.as_ref().map(|nu| nu[k].iter().map(|n| crate::algebra::mixing_angle(self.beta, *n)).collect())
    }

    pub fn w_axis(&self) -> Vec<f64> {
        (0..self.grid.n_w()).map(|i| self.grid.w(i)).collect()
    }
}

/// Location attached to singularity errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub zeta: f64,
    pub w: f64,
}

/// Matrix M of U_ζ = −M U_w for U = (θ, φ).
pub fn advection_matrix(phi: f64, mu: f64) -> [[f64; 2]; 2] {
    let (s, c) = mu.sin_cos();
    let cp = phi.cos();
    [[s * s, -s * c / cp], [-s * c * cp, c * c]]
}

/// ζ-derivatives (θ_ζ, φ_ζ) from w-derivatives:
/// θ_ζ = (sin μ cos μ / cos φ) φ_w − sin²μ θ_w,
/// φ_ζ = −cos²μ φ_w + sin μ cos μ cos φ θ_w.
pub fn quasilinear_rhs(
    theta_w: f64,
    phi_w: f64,
    _theta: f64,
    phi: f64,
    mu: f64,
    at: Location,
) -> Result<(f64, f64)> {
    check_cos_phi(phi, at)?;
    let m = advection_matrix(phi, mu);
    Ok((-(m[0][0] * theta_w + m[0][1] * phi_w), -(m[1][0] * theta_w + m[1][1] * phi_w)))
}

fn check_cos_phi(phi: f64, at: Location) -> Result<()> {
    let cp = phi.cos().abs();
    if !(cp >= COS_PHI_FLOOR) {
        return Err(Error::Singularity { zeta: at.zeta, w: at.w, cos_phi: cp });
    }
    Ok(())
}

/// ν(w) = ∫₀^w sin φ ∂θ/∂w′ dw′ by the trapezoidal rule, ν(0) = 0.
pub fn update_nu(theta: &[f64], phi: &[f64]) -> Vec<f64> {
    let mut nu = Vec::with_capacity(theta.len());
    let mut acc = 0.0;
    for i in 0..theta.len() {
        if i > 0 {
            acc += 0.5 * (phi[i].sin() + phi[i - 1].sin()) * (theta[i] - theta[i - 1]);
        }
        nu.push(acc);
    }
    nu
}

/// Monotone map between retarded time τ and nonlinear time
/// w = (1/G)∫ Ω₀² dτ′, accumulated by the trapezoidal rule from the first
/// sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTime {
    pub tau: Vec<f64>,
    pub w: Vec<f64>,
}

impl NonlinearTime {
    pub fn new(tau: &[f64], omega0: &[f64], coupling: f64) -> Result<Self> {
        if tau.len() != omega0.len() || tau.len() < 2 {
            return Err(Error::Domain("tau and omega0 must have equal length >= 2".into()));
        }
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::Domain(format!("coupling must be positive, got {coupling}")));
        }
        if let Some(k) = omega0.iter().position(|o| !o.is_finite() || *o < 0.0) {
            return Err(Error::Domain(format!("omega0[{k}] = {} is not a finite non-negative value", omega0[k])));
        }
        if tau.iter().any(|t| !t.is_finite()) || tau.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Domain("tau samples must be finite and strictly increasing".into()));
        }
        let mut w = Vec::with_capacity(tau.len());
        w.push(0.0);
        for k in 1..tau.len() {
            let inc = 0.5 * (omega0[k - 1].powi(2) + omega0[k].powi(2)) * (tau[k] - tau[k - 1]) / coupling;
            w.push(w[k - 1] + inc);
        }
        Ok(Self { tau: tau.to_vec(), w })
    }

    /// Uniform τ-grid from a sampled profile.
    pub fn from_profile(omega0: &crate::profile::Profile, tau0: f64, dtau: f64, n: usize, coupling: f64) -> Result<Self> {
        let tau: Vec<f64> = (0..n).map(|k| tau0 + k as f64 * dtau).collect();
        let om: Vec<f64> = tau.iter().map(|t| omega0.eval(*t)).collect();
        Self::new(&tau, &om, coupling)
    }

    pub fn w_at(&self, tau: f64) -> f64 {
        interp_monotone(&self.tau, &self.w, tau)
    }

    /// First τ at which the accumulated w reaches `w`.
    pub fn tau_at(&self, w: f64) -> f64 {
        interp_monotone(&self.w, &self.tau, w)
    }
}

fn interp_monotone(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    if at <= x[0] {
        return y[0];
    }
    if at >= x[n - 1] {
        return y[n - 1];
    }
    let hi = x.partition_point(|v| *v < at);
    let lo = hi - 1;
    let t = (at - x[lo]) / (x[hi] - x[lo]);
    y[lo] + t * (y[hi] - y[lo])
}

#[derive(Clone, Copy)]
struct Point {
    theta: f64,
    phi: f64,
    mu: f64,
}

impl Point {
    fn mid(a: Point, b: Point) -> Point {
        Point { theta: 0.5 * (a.theta + b.theta), phi: 0.5 * (a.phi + b.phi), mu: 0.5 * (a.mu + b.mu) }
    }

    /// Left eigenvector for speed 0: (cos μ cos φ, sin μ).
    fn still(&self) -> [f64; 2] {
        let (s, c) = self.mu.sin_cos();
        [c * self.phi.cos(), s]
    }

    /// Left eigenvector for speed 1: (sin μ cos φ, −cos μ).
    fn moving(&self) -> [f64; 2] {
        let (s, c) = self.mu.sin_cos();
        [s * self.phi.cos(), -c]
    }
}

/// Solves l0·(X − a) = 0, l1·(X − b) = 0 for X = (θ, φ).
fn solve_characteristics(l0: [f64; 2], a: Point, l1: [f64; 2], b: Point) -> (f64, f64) {
    let r0 = l0[0] * a.theta + l0[1] * a.phi;
    let r1 = l1[0] * b.theta + l1[1] * b.phi;
    let det = l0[0] * l1[1] - l0[1] * l1[0];
    ((r0 * l1[1] - l0[1] * r1) / det, (l0[0] * r1 - r0 * l1[0]) / det)
}

struct Slice {
    theta: Vec<f64>,
    phi: Vec<f64>,
    nu: Vec<f64>,
}

/// Marches the reduced system from the boundary at ζ = 0, keeping every slice.
pub fn propagate(b: &BoundaryProfile, g: &Grid) -> Result<ReducedField> {
    propagate_with(b, g, SnapshotPlan::default())
}

/// Marches the reduced system, keeping the slices selected by `plan`.
pub fn propagate_with(b: &BoundaryProfile, g: &Grid, plan: SnapshotPlan) -> Result<ReducedField> {
    g.validate()?;
    let n = g.n_w();
    let last = g.n_steps();
    let beta = b.beta;
    let theta: Vec<f64> = (0..n).map(|i| b.theta.eval(g.w(i))).collect();
    let phi: Vec<f64> = (0..n).map(|i| b.phi.eval(g.w(i))).collect();
    for (i, p) in phi.iter().enumerate() {
        check_cos_phi(*p, Location { zeta: 0.0, w: g.w(i) })?;
    }
    let nu = update_nu(&theta, &phi);
    let inflow = (theta[0], phi[0]);
    let mut cur = Slice { theta, phi, nu };
    let mut next = Slice { theta: vec![0.0; n], phi: vec![0.0; n], nu: vec![0.0; n] };

    let mut out = ReducedField {
        grid: *g,
        beta,
        steps: Vec::new(),
        theta: Vec::new(),
        phi: Vec::new(),
        nu: Some(Vec::new()),
    };
    let keep = |step: usize, s: &Slice, out: &mut ReducedField| {
        if plan.keeps(step, last) {
            out.steps.push(step);
            out.theta.push(s.theta.clone());
            out.phi.push(s.phi.clone());
            out.nu.as_mut().expect("reduced runs carry nu").push(s.nu.clone());
        }
    };
    keep(0, &cur, &mut out);

    let lambda = g.courant();
    for step in 1..=last {
        advance(&cur, &mut next, lambda, beta, inflow, g, g.zeta(step))?;
        std::mem::swap(&mut cur, &mut next);
        keep(step, &cur, &mut out);
    }
    Ok(out)
}

fn advance(
    cur: &Slice,
    next: &mut Slice,
    lambda: f64,
    beta: f64,
    inflow: (f64, f64),
    g: &Grid,
    zeta: f64,
) -> Result<()> {
    let at = |s: &Slice, i: usize| Point {
        theta: s.theta[i],
        phi: s.phi[i],
        mu: crate::algebra::mixing_angle(beta, s.nu[i]),
    };
    next.theta[0] = inflow.0;
    next.phi[0] = inflow.1;
    next.nu[0] = 0.0;
    for i in 1..cur.theta.len() {
        let still = at(cur, i);
        let left = at(cur, i - 1);
        // foot of the speed-1 characteristic, linear (upwind) interpolation
        let foot = Point {
            theta: still.theta + lambda * (left.theta - still.theta),
            phi: still.phi + lambda * (left.phi - still.phi),
            mu: still.mu + lambda * (left.mu - still.mu),
        };
        let (mut th, mut ph) = solve_characteristics(still.still(), still, foot.moving(), foot);
        let prev = (next.theta[i - 1], next.phi[i - 1], next.nu[i - 1]);
        let nu_of = |th: f64, ph: f64| prev.2 + 0.5 * (ph.sin() + prev.1.sin()) * (th - prev.0);
        for _ in 0..CORRECTOR_PASSES {
            let here = Point { theta: th, phi: ph, mu: crate::algebra::mixing_angle(beta, nu_of(th, ph)) };
            let l0 = Point::mid(still, here).still();
            let l1 = Point::mid(foot, here).moving();
            (th, ph) = solve_characteristics(l0, still, l1, foot);
        }
        check_cos_phi(ph, Location { zeta, w: g.w(i) })?;
        next.theta[i] = th;
        next.phi[i] = ph;
        next.nu[i] = nu_of(th, ph);
    }
    Ok(())
}

/// Equal-mixture regime: θ and φ are advected rigidly at half the slow
/// speed, θ(ζ, w) = θ₀(w − ζ/2), φ(ζ, w) = φ₀(w − ζ/2). Evaluated directly
/// from the boundary functions; ν is not defined.
pub fn mixed_state_propagate(b: &BoundaryProfile, g: &Grid) -> Result<ReducedField> {
    mixed_state_propagate_with(b, g, SnapshotPlan::default())
}

pub fn mixed_state_propagate_with(b: &BoundaryProfile, g: &Grid, plan: SnapshotPlan) -> Result<ReducedField> {
    g.validate()?;
    let n = g.n_w();
    let last = g.n_steps();
    let mut out = ReducedField { grid: *g, beta: b.beta, steps: Vec::new(), theta: Vec::new(), phi: Vec::new(), nu: None };
    for step in (0..=last).filter(|s| plan.keeps(*s, last)) {
        let shift = 0.5 * g.zeta(step);
        out.steps.push(step);
        out.theta.push((0..n).map(|i| b.theta.eval(g.w(i) - shift)).collect());
        out.phi.push((0..n).map(|i| b.phi.eval(g.w(i) - shift)).collect());
    }
    Ok(out)
}

/// Per-cell residual of the solvability condition
/// θ_{u₁}θ_{u₂} + φ_{u₁}φ_{u₂}/cos²φ with ∂_{u₁} = ∂_ζ and ∂_{u₂} = ∂_ζ + ∂_w,
/// by centered differences.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityResidual {
    /// ζ of each slice where the residual was evaluated.
    pub zeta: Vec<f64>,
    /// Residual on interior w-samples 1..n_w−1 (index 0 corresponds to w = dw).
    pub values: Vec<Vec<f64>>,
    pub max: f64,
    pub argmax: (f64, f64),
}

/// Evaluates the solvability residual on every stored slice whose adjacent
/// steps are stored as well.
pub fn solvability_residual(f: &ReducedField) -> SolvabilityResidual {
    let g = f.grid;
    let n = g.n_w();
    let mut out = SolvabilityResidual { zeta: Vec::new(), values: Vec::new(), max: 0.0, argmax: (0.0, 0.0) };
    for k in 1..f.len().saturating_sub(1) {
        let s = f.steps[k];
        if f.steps[k - 1] + 1 != s || f.steps[k + 1] != s + 1 {
            continue;
        }
        let (th, ph) = (&f.theta, &f.phi);
        let mut row = Vec::with_capacity(n - 2);
        for i in 1..n - 1 {
            let t1 = (th[k + 1][i] - th[k - 1][i]) / (2.0 * g.dzeta);
            let p1 = (ph[k + 1][i] - ph[k - 1][i]) / (2.0 * g.dzeta);
            let t2 = t1 + (th[k][i + 1] - th[k][i - 1]) / (2.0 * g.dw);
            let p2 = p1 + (ph[k][i + 1] - ph[k][i - 1]) / (2.0 * g.dw);
            let c = ph[k][i].cos();
            let r = t1 * t2 + p1 * p2 / (c * c);
            if r.abs() > out.max {
                out.max = r.abs();
                out.argmax = (g.zeta(s), g.w(i));
            }
            row.push(r);
        }
        out.zeta.push(g.zeta(s));
        out.values.push(row);
    }
    out
}

/// Largest violation of (sin θ cos φ)² + (cos θ cos φ)² + sin²φ = 1 over a field.
pub fn storage_identity_error(f: &ReducedField) -> f64 {
    let mut worst = 0.0f64;
    for (tr, pr) in f.theta.iter().zip(f.phi.iter()) {
        for (t, p) in tr.iter().zip(pr.iter()) {
            let e = (t.sin() * p.cos()).powi(2) + (t.cos() * p.cos()).powi(2) + p.sin().powi(2) - 1.0;
            worst = worst.max(e.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Profile, Segment};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const HERE: Location = Location { zeta: 0.0, w: 0.0 };

    #[test]
    fn grid_rejects_cfl_violation() {
        assert!(matches!(Grid::new(0.1, 0.2, 10.0, 5.0), Err(Error::Cfl { .. })));
        assert!(Grid::new(0.1, 0.1, 10.0, 5.0).is_ok());
        assert!(Grid::new(0.0, 0.0, 10.0, 5.0).is_err());
        let g = Grid::new(0.1, 0.05, 10.0, 5.0).unwrap();
        assert_eq!(g.n_w(), 101);
        assert_eq!(g.n_steps(), 100);
    }

    #[test]
    fn rhs_at_mu_zero_freezes_theta() {
        let (t, p) = quasilinear_rhs(0.7, -0.3, 0.2, 0.4, 0.0, HERE).unwrap();
        assert_eq!(t, 0.0);
        assert_abs_diff_eq!(p, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn rhs_at_mu_half_pi_freezes_phi() {
        let (t, p) = quasilinear_rhs(0.7, -0.3, 0.2, 0.4, FRAC_PI_2, HERE).unwrap();
        assert_abs_diff_eq!(t, -0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_reports_singularity_location() {
        let at = Location { zeta: 2.5, w: 7.0 };
        match quasilinear_rhs(0.1, 0.1, 0.0, FRAC_PI_2, 0.3, at) {
            Err(Error::Singularity { zeta, w, .. }) => assert_eq!((zeta, w), (2.5, 7.0)),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn advection_speeds_are_zero_and_one(phi in -1.5..1.5f64, mu in -2.0 * PI..2.0 * PI) {
            let m = advection_matrix(phi, mu);
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            prop_assert!((tr - 1.0).abs() < 1e-12);
            prop_assert!(det.abs() < 1e-12);
        }
    }

    #[test]
    fn nu_examples() {
        let theta: Vec<f64> = (0..50).map(|i| 0.01 * i as f64).collect();
        assert!(update_nu(&vec![0.4; 50], &theta).iter().all(|v| *v == 0.0));
        assert!(update_nu(&theta, &vec![0.0; 50]).iter().all(|v| *v == 0.0));
        let ramp: Vec<f64> = (0..101).map(|i| 0.8 * crate::profile::smoothstep(i as f64 / 100.0)).collect();
        let nu = update_nu(&ramp, &vec![FRAC_PI_2; 101]);
        assert_eq!(nu[0], 0.0);
        assert_abs_diff_eq!(nu[100], 0.8, epsilon = 1e-14);
    }

    #[test]
    fn nonlinear_time_constant_and_switched() {
        let tau: Vec<f64> = (0..11).map(|k| k as f64 * 0.5).collect();
        let nt = NonlinearTime::new(&tau, &vec![2.0; 11], 4.0).unwrap();
        for (t, w) in nt.tau.iter().zip(nt.w.iter()) {
            assert_abs_diff_eq!(*w, t, epsilon = 1e-14);
        }
        let tau: Vec<f64> = (0..21).map(|k| -5.0 + 0.5 * k as f64).collect();
        let om: Vec<f64> = tau.iter().map(|t| if *t < 0.0 { 0.0 } else { 1.5 }).collect();
        let nt = NonlinearTime::new(&tau, &om, 1.0).unwrap();
        for (t, w) in nt.tau.iter().zip(nt.w.iter()) {
            if *t < 0.0 {
                assert_eq!(*w, 0.0);
            }
        }
        assert!(NonlinearTime::new(&tau, &vec![f64::NAN; 21], 1.0).is_err());
        assert!(NonlinearTime::new(&tau, &vec![-1.0; 21], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn nonlinear_time_round_trip(a in 0.2..2.0f64, b in -0.15..0.15f64, c in 0.1..3.0f64) {
            let tau: Vec<f64> = (0..801).map(|k| k as f64 * 0.025).collect();
            let om: Vec<f64> = tau.iter().map(|t| a * (1.0 + b * (c * t).sin())).collect();
            let nt = NonlinearTime::new(&tau, &om, 1.3).unwrap();
            prop_assert!(nt.w.windows(2).all(|p| p[1] > p[0]));
            for k in 0..200 {
                let t = 0.1 * k as f64 + 0.0123;
                prop_assert!((nt.tau_at(nt.w_at(t)) - t).abs() < 1e-9);
            }
        }
    }

    fn bumps(beta: f64) -> BoundaryProfile {
        BoundaryProfile::new(
            Profile::smooth(0.3, vec![Segment::bump(3.0, 1.0, 0.6)]),
            Profile::smooth(0.2, vec![Segment::bump(3.5, 1.0, 0.5)]),
            beta,
        )
    }

    #[test]
    fn constant_boundary_stays_constant() {
        let b = BoundaryProfile::new(Profile::constant(0.4), Profile::constant(-0.3), 1.1);
        let f = propagate(&b, &Grid::square(0.05, 5.0, 3.0).unwrap()).unwrap();
        for k in 0..f.len() {
            assert!(f.theta[k].iter().all(|t| *t == 0.4));
            assert!(f.phi[k].iter().all(|p| *p == -0.3));
            assert!(f.nu.as_ref().unwrap()[k].iter().all(|n| *n == 0.0));
        }
    }

    #[test]
    fn nu_vanishes_at_the_entrance_of_every_slice() {
        let f = propagate(&bumps(1.12), &Grid::square(0.05, 12.0, 6.0).unwrap()).unwrap();
        let nu = f.nu.as_ref().unwrap();
        assert!(nu.iter().all(|row| row[0] == 0.0));
        assert!(storage_identity_error(&f) < 1e-12);
    }

    #[test]
    fn populations_are_normalized_everywhere() {
        let f = propagate(&bumps(1.12), &Grid::square(0.05, 12.0, 6.0).unwrap()).unwrap();
        for k in 0..f.len() {
            let mu = f.mu(k).unwrap();
            for i in 0..f.grid.n_w() {
                let a = crate::algebra::AngleTriple::new(f.theta[k][i], f.phi[k][i], 0.0);
                let s = crate::algebra::state_from_mixing(&a, mu[i], &crate::algebra::ZERO_PHASES);
                assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solution_is_confined_to_its_characteristic_cone() {
        // perturbing the boundary beyond w leaves (ζ, w) untouched
        let g = Grid::square(0.05, 12.0, 4.0).unwrap();
        let base = bumps(1.12);
        let mut pert = base.clone();
        pert.theta = Profile::smooth(0.3, vec![Segment::bump(3.0, 1.0, 0.6), Segment::bump(9.0, 0.5, 0.2)]);
        let a = propagate(&base, &g).unwrap();
        let b = propagate(&pert, &g).unwrap();
        let k = a.len() - 1;
        for i in 0..g.n_w() {
            if g.w(i) < 8.5 - 1e-9 {
                assert!((a.theta[k][i] - b.theta[k][i]).abs() <= 1e-12);
                assert!((a.phi[k][i] - b.phi[k][i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn earlier_data_acts_only_through_the_mixing_memory() {
        // at β = 0 a φ-only perturbation ahead of the θ bump leaves ν untouched,
        // so nothing beyond its slow characteristic changes
        // while it has not yet reached the θ bump
        let g = Grid::square(0.05, 12.0, 0.9).unwrap();
        let base = bumps(0.0);
        let mut early = base.clone();
        early.phi = Profile::smooth(0.2, vec![Segment::bump(3.5, 1.0, 0.5), Segment::bump(0.6, 0.4, 0.1)]);
        let a = propagate(&base, &g).unwrap();
        let c = propagate(&early, &g).unwrap();
        let k = a.len() - 1;
        for i in 0..g.n_w() {
            if g.w(i) > 1.0 + 0.9 + 1e-9 {
                assert!((a.theta[k][i] - c.theta[k][i]).abs() <= 1e-12);
                assert!((a.phi[k][i] - c.phi[k][i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn snapshot_plan_keeps_neighbors() {
        let g = Grid::square(0.1, 5.0, 3.0).unwrap();
        let f = propagate_with(&bumps(0.4), &g, SnapshotPlan::every(10).with_neighbors()).unwrap();
        assert_eq!(f.steps, vec![0, 1, 9, 10, 11, 19, 20, 21, 29, 30]);
        let r = solvability_residual(&f);
        assert_eq!(r.zeta.len(), 2);
    }

    #[test]
    fn singular_boundary_is_rejected() {
        let b = BoundaryProfile::new(Profile::constant(0.1), Profile::smooth(1.0, vec![Segment::bump(2.0, 1.0, 0.5707)]), 0.3);
        let err = propagate(&b, &Grid::square(0.05, 5.0, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Singularity { zeta, .. } if zeta == 0.0));
    }

    #[test]
    fn mixed_state_shift_is_exact() {
        let b = bumps(0.0);
        let g = Grid::square(0.1, 10.0, 4.0).unwrap();
        let f = mixed_state_propagate(&b, &g).unwrap();
        assert!(f.nu.is_none());
        let k = f.slice_of_step(20).unwrap(); // ζ = 2
        for i in 10..g.n_w() {
            assert_eq!(f.theta[k][i], b.theta.eval(g.w(i) - 1.0));
        }
        let flat = BoundaryProfile::new(Profile::constant(0.2), Profile::constant(0.1), 0.0);
        let f = mixed_state_propagate(&flat, &g).unwrap();
        assert!(f.theta.iter().flatten().all(|t| *t == 0.2));
    }

    #[test]
    fn mixed_state_commutes_with_translation() {
        let b = bumps(0.0);
        let g = Grid::square(0.1, 12.0, 4.0).unwrap();
        let f = mixed_state_propagate(&b, &g).unwrap();
        let s = mixed_state_propagate(&b.shifted(1.0), &g).unwrap();
        for k in 0..f.len() {
            for i in 10..g.n_w() {
                assert!((s.theta[k][i] - f.theta[k][i - 10]).abs() < 1e-12);
                assert!((s.phi[k][i] - f.phi[k][i - 10]).abs() < 1e-12);
            }
        }
    }
}
