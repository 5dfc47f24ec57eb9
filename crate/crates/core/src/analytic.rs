//! Exact slow and fast pulse families, pulse detection, classification and
//! fitting of the family constants.
//!
//! Slow pulses depend on w − ζ only and keep cos φ · sin μ constant; fast
//! pulses depend on w only and keep cos φ · cos μ constant. Along either
//! family dθ = −dμ / sin φ.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::algebra::mixing_angle;
use crate::error::{Error, Result};
use crate::profile::{BoundaryProfile, Profile, SampledProfile};
use crate::reduced::{Grid, ReducedField};

/// Relative invariant spread separating clean pulses from mixed ones.
pub const SPREAD_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Slow,
    Fast,
}

impl Family {
    /// The quantity held fixed: cos φ·sin μ (slow) or cos φ·cos μ (fast).
    pub fn invariant(self, phi: f64, mu: f64) -> f64 {
        match self {
            Family::Slow => phi.cos() * mu.sin(),
            Family::Fast => phi.cos() * mu.cos(),
        }
    }

    /// sin μ for slow, cos μ for fast.
    fn primary(self, mu: f64) -> f64 {
        match self {
            Family::Slow => mu.sin(),
            Family::Fast => mu.cos(),
        }
    }

    /// cos μ for slow, −sin μ for fast.
    fn secondary(self, mu: f64) -> f64 {
        match self {
            Family::Slow => mu.cos(),
            Family::Fast => -mu.sin(),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Slow => "slow",
            Family::Fast => "fast",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slow" => Ok(Family::Slow),
            "fast" => Ok(Family::Fast),
            other => Err(Error::Domain(format!("unknown family '{other}' (expected slow|fast)"))),
        }
    }
}

/// Constants of one family member.
///
/// The profile argument is w − ζ for slow pulses and w for fast pulses, so
/// that at ζ = 0 both are plain functions of w.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub family: Family,
    /// C₁ (slow) or C₃ (fast), in (0, 1).
    pub c_amp: f64,
    /// C₂ (slow) or C₄ (fast), radians.
    pub c_shift: f64,
    pub mu: Profile,
    /// Sign of φ, fixed along the profile.
    pub branch: f64,
}

impl FamilyParams {
    pub fn new(family: Family, c_amp: f64, c_shift: f64, mu: Profile) -> Self {
        Self { family, c_amp, c_shift, mu, branch: 1.0 }
    }

    /// The member passing through (θ, φ) where the profile has value μ(arg₀).
    pub fn anchored(family: Family, theta: f64, phi: f64, arg0: f64, mu: Profile) -> Self {
        let m = mu.eval(arg0);
        let c_amp = family.invariant(phi, m).abs();
        let branch = if phi < 0.0 { -1.0 } else { 1.0 };
        let c_shift = theta - family.secondary(m).atan2(family.primary(m) * phi.sin());
        Self { family, c_amp, c_shift, mu, branch }
    }
}

/// A family member sampled on increasing arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyProfile {
    pub family: Family,
    pub arg: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    /// dθ/d(arg) and dφ/d(arg), analytic.
    pub theta_slope: Vec<f64>,
    pub phi_slope: Vec<f64>,
}

/// Samples the family on `args`.
pub fn generate_family(p: &FamilyParams, args: &[f64]) -> Result<FamilyProfile> {
    if !(p.c_amp > 0.0 && p.c_amp < 1.0) {
        return Err(Error::Inadmissible(format!("c_amp = {} outside (0, 1)", p.c_amp)));
    }
    let bound = match p.family {
        Family::Slow => "|sin mu| >= c_amp",
        Family::Fast => "|cos mu| >= c_amp",
    };
    let norm = (1.0 - p.c_amp * p.c_amp).sqrt();
    let mut out = FamilyProfile {
        family: p.family,
        arg: args.to_vec(),
        theta: Vec::with_capacity(args.len()),
        phi: Vec::with_capacity(args.len()),
        mu: Vec::with_capacity(args.len()),
        theta_slope: Vec::with_capacity(args.len()),
        phi_slope: Vec::with_capacity(args.len()),
    };
    let mut prev: Option<f64> = None;
    for &s in args {
        let mu = p.mu.eval(s);
        let prim = p.family.primary(mu);
        if prim.abs() < p.c_amp * (1.0 - 1e-14) {
            return Err(Error::Inadmissible(format!(
                "{bound} violated at arg = {s}: {:.6} < {}",
                prim.abs(),
                p.c_amp
            )));
        }
        let cos_phi = (p.c_amp / prim.abs()).min(1.0);
        let phi = p.branch * cos_phi.acos();
        let raw = p.c_shift + p.family.secondary(mu).atan2(prim * phi.sin());
        let theta = match prev {
            None => raw,
            Some(t) => raw + (t - raw + PI).div_euclid(2.0 * PI) * 2.0 * PI,
        };
        debug_assert!((p.family.secondary(mu).powi(2) + (prim * phi.sin()).powi(2) - norm * norm).abs() < 1e-9);
        prev = Some(theta);
        let dmu = p.mu.slope(s);
        // d(cos φ)/dμ from cos φ = c / |prim|
        let dprim = match p.family {
            Family::Slow => mu.cos(),
            Family::Fast => -mu.sin(),
        };
        let sin_phi = phi.sin();
        let phi_slope = if sin_phi == 0.0 { 0.0 } else { p.c_amp * prim.signum() * dprim / (prim * prim * sin_phi) * dmu };
        let theta_slope = if sin_phi == 0.0 { 0.0 } else { -dmu / sin_phi };
        out.theta.push(theta);
        out.phi.push(phi);
        out.mu.push(mu);
        out.theta_slope.push(theta_slope);
        out.phi_slope.push(phi_slope);
    }
    Ok(out)
}

/// Uniform arguments `start, start + step, …` up to `end`.
pub fn uniform_args(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

impl FamilyProfile {
    fn sampled(&self, values: &[f64]) -> Result<Profile> {
        let step = self.arg[1] - self.arg[0];
        Ok(Profile::Sampled(SampledProfile::new(self.arg[0], step, values.to_vec())?))
    }

    /// Entrance data for this member; β is the μ value before the pulse.
    pub fn boundary(&self) -> Result<BoundaryProfile> {
        Ok(BoundaryProfile::new(self.sampled(&self.theta)?, self.sampled(&self.phi)?, self.mu[0]))
    }

    /// Largest violation of the reduced equations, using the analytic slopes.
    pub fn pde_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.arg.len() {
            let (tw, pw) = (self.theta_slope[i], self.phi_slope[i]);
            let (tz, pz) = match self.family {
                Family::Slow => (-tw, -pw),
                Family::Fast => (0.0, 0.0),
            };
            let m = crate::reduced::advection_matrix(self.phi[i], self.mu[i]);
            let rt = tz + m[0][0] * tw + m[0][1] * pw;
            let rp = pz + m[1][0] * tw + m[1][1] * pw;
            worst = worst.max(rt.abs()).max(rp.abs());
        }
        worst
    }

    /// Largest deviation of the family invariant from its first value.
    pub fn invariant_error(&self) -> f64 {
        let c0 = self.family.invariant(self.phi[0], self.mu[0]);
        self.phi
            .iter()
            .zip(self.mu.iter())
            .map(|(p, m)| (self.family.invariant(*p, *m) - c0).abs())
            .fold(0.0, f64::max)
    }

    pub fn window(&self) -> Window {
        Window { w: self.arg.clone(), theta: self.theta.clone(), phi: self.phi.clone(), mu: self.mu.clone() }
    }

    /// The exact solution on `grid`: translated along w − ζ (slow) or
    /// ζ-independent (fast). ν is recovered as β − μ.
    pub fn field(&self, grid: &Grid) -> Result<ReducedField> {
        grid.validate()?;
        let beta = self.mu[0];
        let (th, ph, mu) = (self.sampled(&self.theta)?, self.sampled(&self.phi)?, self.sampled(&self.mu)?);
        let mut f = ReducedField {
            grid: *grid,
            beta,
            steps: Vec::new(),
            theta: Vec::new(),
            phi: Vec::new(),
            nu: Some(Vec::new()),
        };
        for step in 0..=grid.n_steps() {
            let shift = match self.family {
                Family::Slow => grid.zeta(step),
                Family::Fast => 0.0,
            };
            let args: Vec<f64> = (0..grid.n_w()).map(|i| grid.w(i) - shift).collect();
            f.steps.push(step);
            f.theta.push(args.iter().map(|a| th.eval(*a)).collect());
            f.phi.push(args.iter().map(|a| ph.eval(*a)).collect());
            f.nu.as_mut().expect("set above").push(args.iter().map(|a| beta - mu.eval(*a)).collect());
        }
        Ok(f)
    }
}

/// Chains family members: each member is anchored at the end state of the
/// previous one, and the first at (θ, φ, β). Segments are given as
/// (family, μ-profile, argument range) with non-overlapping increasing ranges.
pub fn family_chain(
    theta: f64,
    phi: f64,
    beta: f64,
    segments: &[(Family, Profile, (f64, f64))],
    step: f64,
) -> Result<(BoundaryProfile, Vec<FamilyParams>)> {
    let mut state = (theta, phi, beta);
    let mut params = Vec::new();
    let mut all_w = Vec::new();
    let mut all_theta = Vec::new();
    let mut all_phi = Vec::new();
    let mut pos = segments.first().map_or(0.0, |s| s.2 .0);
    for (family, mu, (lo, hi)) in segments {
        if *lo < pos - 1e-12 {
            return Err(Error::Config("chain segments must be ordered and disjoint".into()));
        }
        if (mu.eval(*lo) - state.2).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "mu profile starts at {} but the chain is at mu = {}",
                mu.eval(*lo),
                state.2
            )));
        }
        // constant gap up to this segment
        while pos < *lo - 1e-12 {
            all_w.push(pos);
            all_theta.push(state.0);
            all_phi.push(state.1);
            pos += step;
        }
        let p = FamilyParams::anchored(*family, state.0, state.1, *lo, mu.clone());
        let args: Vec<f64> = uniform_args(pos, *hi, step);
        let prof = generate_family(&p, &args)?;
        // the anchoring branch may differ by 2π from the running θ
        let offset = ((state.0 - prof.theta[0]) / (2.0 * PI)).round() * 2.0 * PI;
        for i in 0..args.len() {
            all_w.push(args[i]);
            all_theta.push(prof.theta[i] + offset);
            all_phi.push(prof.phi[i]);
        }
        let last = args.len() - 1;
        state = (prof.theta[last] + offset, prof.phi[last], prof.mu[last]);
        pos = args[last] + step;
        params.push(p);
    }
    let start = all_w.first().copied().unwrap_or(0.0);
    let b = BoundaryProfile::new(
        Profile::Sampled(SampledProfile::new(start, step, all_theta)?),
        Profile::Sampled(SampledProfile::new(start, step, all_phi)?),
        beta,
    );
    Ok((b, params))
}

/// A stretch of (θ, φ, μ) samples over w at fixed ζ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub w: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Window {
    /// Samples `lo..=hi` of slice `k` of a reduced run.
    pub fn from_field(f: &ReducedField, k: usize, lo: usize, hi: usize) -> Result<Self> {
        let mu = f.mu(k).ok_or_else(|| Error::Domain("mixed-state fields carry no mixing angle".into()))?;
        if lo > hi || hi >= f.grid.n_w() {
            return Err(Error::Domain(format!("window {lo}..={hi} outside the grid")));
        }
        Ok(Self {
            w: (lo..=hi).map(|i| f.grid.w(i)).collect(),
            theta: f.theta[k][lo..=hi].to_vec(),
            phi: f.phi[k][lo..=hi].to_vec(),
            mu: mu[lo..=hi].to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Keeps samples `lo..hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> Self {
        Self {
            w: self.w[lo..hi].to_vec(),
            theta: self.theta[lo..hi].to_vec(),
            phi: self.phi[lo..hi].to_vec(),
            mu: self.mu[lo..hi].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseLabel {
    Slow,
    Fast,
    Mixed,
    Indeterminate,
}

impl std::fmt::Display for PulseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PulseLabel::Slow => "slow",
            PulseLabel::Fast => "fast",
            PulseLabel::Mixed => "mixed",
            PulseLabel::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseClassification {
    pub label: PulseLabel,
    pub slow_spread: f64,
    pub fast_spread: f64,
}

/// (max − min) / mean |x|.
fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v.abs();
        n += 1;
    }
    let range = hi - lo;
    let mean = sum / n as f64;
    if mean > 0.0 {
        range / mean
    } else if range == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn classify(w: &Window) -> PulseClassification {
    let slow = spread(w.phi.iter().zip(w.mu.iter()).map(|(p, m)| Family::Slow.invariant(*p, *m)));
    let fast = spread(w.phi.iter().zip(w.mu.iter()).map(|(p, m)| Family::Fast.invariant(*p, *m)));
    let range = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    let flat = w.is_empty() || (range(&w.theta) <= 1e-12 && range(&w.phi) <= 1e-12);
    let label = if flat {
        PulseLabel::Indeterminate
    } else if slow < SPREAD_THRESHOLD && fast >= SPREAD_THRESHOLD {
        PulseLabel::Slow
    } else if fast < SPREAD_THRESHOLD && slow >= SPREAD_THRESHOLD {
        PulseLabel::Fast
    } else {
        PulseLabel::Mixed
    };
    PulseClassification { label, slow_spread: slow, fast_spread: fast }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub c_amp: f64,
    pub c_shift: f64,
    pub rms: f64,
    pub classification: PulseClassification,
}

/// Fits (c_amp, c_shift) of the requested family. The amplitude is the mean
/// invariant; the shift minimizes the second relation over [−π/2, π/2).
pub fn fit_constants(w: &Window, family: Family) -> Result<FitResult> {
    let classification = classify(w);
    let expected = match family {
        Family::Slow => PulseLabel::Slow,
        Family::Fast => PulseLabel::Fast,
    };
    if classification.label != expected {
        return Err(Error::FitRefused { label: classification.label.to_string() });
    }
    let n = w.len() as f64;
    let c_amp = w.phi.iter().zip(w.mu.iter()).map(|(p, m)| family.invariant(*p, *m).abs()).sum::<f64>() / n;
    let norm = (1.0 - c_amp * c_amp).sqrt();
    let target: Vec<f64> = w.mu.iter().map(|m| family.secondary(*m).abs() / norm).collect();
    let cost = |c: f64| -> f64 {
        w.theta.iter().zip(target.iter()).map(|(t, y)| ((t - c).sin().abs() - y).powi(2)).sum()
    };
    let c_shift = minimize_periodic(cost, -FRAC_PI_2, PI);
    let mut ss = cost(c_shift);
    for (p, m) in w.phi.iter().zip(w.mu.iter()) {
        ss += (family.invariant(*p, *m).abs() - c_amp).powi(2);
    }
    let rms = (ss / (2.0 * n)).sqrt();
    Ok(FitResult { family, c_amp, c_shift, rms, classification })
}

/// Global minimum of a periodic function over [start, start + period): grid
/// search, then golden-section refinement around the best grid point.
fn minimize_periodic(f: impl Fn(f64) -> f64, start: f64, period: f64) -> f64 {
    const N: usize = 720;
    let h = period / N as f64;
    let best = (0..N).map(|k| start + k as f64 * h).min_by(|a, b| f(*a).total_cmp(&f(*b))).expect("grid is non-empty");
    let (mut a, mut b) = (best - h, best + h);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - r * (b - a), a + r * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    let c = 0.5 * (a + b);
    (c - start).rem_euclid(period) + start
}

/// Index ranges (inclusive) of the disturbed parts of a slice: samples where
/// |θ_w| + |φ_w| exceeds `rel` times its maximum, merged across gaps shorter
/// than `min_gap` samples.
pub fn pulse_windows(theta: &[f64], phi: &[f64], rel: f64, min_gap: usize) -> Vec<(usize, usize)> {
    let n = theta.len();
    if n < 3 {
        return Vec::new();
    }
    let g: Vec<f64> = (0..n - 1).map(|i| (theta[i + 1] - theta[i]).abs() + (phi[i + 1] - phi[i]).abs()).collect();
    let peak = g.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Vec::new();
    }
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, v) in g.iter().enumerate() {
        if *v > rel * peak {
            match out.last_mut() {
                Some(last) if i <= last.1 + min_gap => last.1 = i + 1,
                _ => out.push((i, i + 1)),
            }
        }
    }
    out
}

/// Relative L² change of a pulse's excursion profile between two windows of
/// equal length: ‖e_after − e_before‖ / ‖e_before‖ with e = U − U(left edge)
/// over both angles.
pub fn shape_change(before: &Window, after: &Window) -> Result<f64> {
    if before.len() != after.len() || before.is_empty() {
        return Err(Error::Domain("shape comparison needs equal non-empty windows".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..before.len() {
        let eb = (before.theta[i] - before.theta[0], before.phi[i] - before.phi[0]);
        let ea = (after.theta[i] - after.theta[0], after.phi[i] - after.phi[0]);
        num += (ea.0 - eb.0).powi(2) + (ea.1 - eb.1).powi(2);
        den += eb.0 * eb.0 + eb.1 * eb.1;
    }
    if den == 0.0 {
        return Err(Error::Domain("reference window has no excursion".into()));
    }
    Ok((num / den).sqrt())
}

/// μ = β − ν for a slice, as a convenience for windows built by hand.
pub fn mu_from_nu(beta: f64, nu: &[f64]) -> Vec<f64> {
    nu.iter().map(|n| mixing_angle(beta, *n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Segment;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn slow_ramp() -> FamilyParams {
        FamilyParams::new(Family::Slow, 0.5, 0.3, Profile::smooth(FRAC_PI_2, vec![Segment::ramp(2.0, 1.0, 2.0 - FRAC_PI_2)]))
    }

    #[test]
    fn degenerate_members() {
        let p = FamilyParams::new(Family::Slow, 0.5, 0.3, Profile::constant(FRAC_PI_2));
        let f = generate_family(&p, &uniform_args(0.0, 1.0, 0.1)).unwrap();
        assert!(f.phi.iter().all(|v| (v - 0.5f64.acos()).abs() < 1e-15));
        assert!(f.theta.iter().all(|v| (v - 0.3).abs() < 1e-15));
        let p = FamilyParams::new(Family::Fast, 0.5, 0.0, Profile::constant(0.0));
        let f = generate_family(&p, &uniform_args(0.0, 1.0, 0.1)).unwrap();
        assert!(f.phi.iter().all(|v| (v - 0.5f64.acos()).abs() < 1e-15));
        assert!(f.theta.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn generated_members_solve_the_reduced_equations() {
        let f = generate_family(&slow_ramp(), &uniform_args(0.0, 4.0, 0.01)).unwrap();
        assert!(f.pde_residual() < 1e-10);
        assert!(f.invariant_error() < 1e-10);
        let p = FamilyParams::new(Family::Fast, 0.5, 0.0, Profile::smooth(0.2, vec![Segment::bump(2.0, 1.0, 0.6)]));
        let f = generate_family(&p, &uniform_args(0.0, 4.0, 0.01)).unwrap();
        assert!(f.pde_residual() < 1e-10);
        assert!(f.invariant_error() < 1e-10);
    }

    #[test]
    fn slopes_match_differences() {
        let f = generate_family(&slow_ramp(), &uniform_args(0.0, 4.0, 1e-4)).unwrap();
        for i in (1..f.arg.len() - 1).step_by(997) {
            let h = 2e-4;
            assert_abs_diff_eq!((f.theta[i + 1] - f.theta[i - 1]) / h, f.theta_slope[i], epsilon = 1e-5);
            assert_abs_diff_eq!((f.phi[i + 1] - f.phi[i - 1]) / h, f.phi_slope[i], epsilon = 1e-5);
        }
    }

    #[test]
    fn inadmissible_members_are_rejected() {
        let p = FamilyParams::new(Family::Slow, 0.5, 0.0, Profile::smooth(FRAC_PI_2, vec![Segment::ramp(1.0, 1.0, -1.4)]));
        match generate_family(&p, &uniform_args(0.0, 2.0, 0.1)) {
            Err(Error::Inadmissible(m)) => assert!(m.contains("|sin mu| >= c_amp")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(generate_family(&FamilyParams::new(Family::Fast, 1.2, 0.0, Profile::constant(0.0)), &[0.0]).is_err());
    }

    #[test]
    fn round_trip_fit() {
        let f = generate_family(&slow_ramp(), &uniform_args(0.0, 4.0, 0.01)).unwrap();
        let r = fit_constants(&f.window(), Family::Slow).unwrap();
        assert_abs_diff_eq!(r.c_amp, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(r.c_shift, 0.3, epsilon = 1e-6);
        assert!(r.rms < 1e-8);
        // truncation by 20% on either side
        let n = f.arg.len();
        let w = f.window().slice(n / 5, n);
        let t = fit_constants(&w, Family::Slow).unwrap();
        assert_abs_diff_eq!(t.c_shift, 0.3, epsilon = 1e-6);
        assert!(matches!(fit_constants(&f.window(), Family::Fast), Err(Error::FitRefused { .. })));
    }

    #[test]
    fn classification_labels() {
        let slow = generate_family(&slow_ramp(), &uniform_args(0.0, 4.0, 0.01)).unwrap();
        let c = classify(&slow.window());
        assert_eq!(c.label, PulseLabel::Slow);
        assert!(c.slow_spread < 1e-10);
        let p = FamilyParams::new(Family::Fast, 0.4, 0.1, Profile::smooth(0.3, vec![Segment::bump(2.0, 1.0, 0.5)]));
        let fast = generate_family(&p, &uniform_args(0.0, 4.0, 0.01)).unwrap();
        assert_eq!(classify(&fast.window()).label, PulseLabel::Fast);
        let flat = Window { w: vec![0.0, 1.0], theta: vec![0.2; 2], phi: vec![0.1; 2], mu: vec![0.3; 2] };
        assert_eq!(classify(&flat).label, PulseLabel::Indeterminate);
        let mut mixed = slow.window();
        mixed.phi.iter_mut().zip(fast.phi.iter()).for_each(|(a, b)| *a = 0.5 * (*a + b));
        assert_eq!(classify(&mixed).label, PulseLabel::Mixed);
    }

    proptest! {
        #[test]
        fn fit_recovers_random_members(
            slow in any::<bool>(),
            c_amp in 0.1..0.7f64,
            c_shift in -1.5..1.5f64,
            amp in 0.1..0.5f64,
            neg in any::<bool>(),
        ) {
            let (family, base) = if slow { (Family::Slow, FRAC_PI_2) } else { (Family::Fast, 0.0) };
            let mu = Profile::smooth(base, vec![Segment::bump(2.0, 1.0, amp)]);
            let mut p = FamilyParams::new(family, c_amp, c_shift, mu);
            if neg { p.branch = -1.0; }
            let f = generate_family(&p, &uniform_args(0.0, 4.0, 0.01)).unwrap();
            prop_assert!(f.pde_residual() < 1e-9);
            let r = fit_constants(&f.window(), family).unwrap();
            prop_assert!((r.c_amp - c_amp).abs() < 1e-6);
            let d = (r.c_shift - c_shift).rem_euclid(PI);
            prop_assert!(d.min(PI - d) < 1e-6);
        }

        #[test]
        fn classification_is_stable(noise_seed in 0u64..1000, family_slow in any::<bool>()) {
            let p = if family_slow {
                slow_ramp()
            } else {
                FamilyParams::new(Family::Fast, 0.4, 0.1, Profile::smooth(0.3, vec![Segment::bump(2.0, 1.0, 0.5)]))
            };
            let coarse = generate_family(&p, &uniform_args(0.0, 4.0, 0.02)).unwrap();
            let fine = generate_family(&p, &uniform_args(0.0, 4.0, 0.01)).unwrap();
            let mut noisy = fine.window();
            let mut x = noise_seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            for v in noisy.theta.iter_mut().chain(noisy.phi.iter_mut()) {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *v += 1e-6 * ((x >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2.0;
            }
            let a = classify(&coarse.window()).label;
            prop_assert_eq!(a, classify(&fine.window()).label);
            prop_assert_eq!(a, classify(&noisy).label);
        }
    }

    #[test]
    fn chain_is_continuous() {
        let slow_mu = Profile::smooth(1.0, vec![Segment::bump(2.0, 1.0, 0.4)]);
        let fast_mu = Profile::smooth(1.0, vec![Segment::bump(6.0, 1.0, -0.4)]);
        let (b, params) = family_chain(
            0.2,
            0.3,
            1.0,
            &[(Family::Slow, slow_mu, (1.0, 3.0)), (Family::Fast, fast_mu, (5.0, 7.0))],
            0.01,
        )
        .unwrap();
        assert_eq!(params.len(), 2);
        let mut prev = b.theta.eval(0.0);
        for k in 0..800 {
            let w = k as f64 * 0.01;
            let t = b.theta.eval(w);
            assert!((t - prev).abs() < 0.05);
            prev = t;
        }
        assert_abs_diff_eq!(b.theta.eval(0.5), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(b.phi.eval(4.0), 0.3, epsilon = 1e-9);
    }

    #[test]
    fn windows_and_shape_change() {
        let theta: Vec<f64> = (0..100).map(|i| if (20..30).contains(&i) || (60..70).contains(&i) { i as f64 * 0.01 } else { 0.0 }).collect();
        let ws = pulse_windows(&theta, &vec![0.0; 100], 0.01, 3);
        assert_eq!(ws.len(), 2);
        let a = Window { w: vec![0.0, 1.0, 2.0], theta: vec![0.0, 1.0, 0.0], phi: vec![0.0; 3], mu: vec![0.0; 3] };
        let mut b = a.clone();
        assert_eq!(shape_change(&a, &b).unwrap(), 0.0);
        b.theta[1] = 1.1;
        assert_abs_diff_eq!(shape_change(&a, &b).unwrap(), 0.1, epsilon = 1e-12);
    }
}
