//! Reduced solver against exact solution families.

use std::f64::consts::FRAC_PI_2;

use tripod_core::analytic::{
    classify, family_chain, fit_constants, generate_family, pulse_windows, uniform_args, Family, FamilyParams,
    PulseLabel, Window,
};
use tripod_core::reduced::{propagate_with, solvability_residual};
use tripod_core::{Grid, Profile, ReducedField, Segment, SnapshotPlan};

fn slow_member() -> FamilyParams {
    FamilyParams::new(Family::Slow, 0.5, 0.3, Profile::smooth(FRAC_PI_2, vec![Segment::ramp(2.0, 1.0, 2.0 - FRAC_PI_2)]))
}

fn fast_member() -> FamilyParams {
    FamilyParams::new(Family::Fast, 0.5, 0.0, Profile::smooth(0.0, vec![Segment::bump(2.0, 1.0, 0.6)]))
}

/// Max angle deviation of `f` from the exact member on the same grid.
fn deviation(f: &ReducedField, exact: &ReducedField) -> f64 {
    let mut worst = 0.0f64;
    for (k, step) in f.steps.iter().enumerate() {
        let e = exact.slice_of_step(*step).expect("exact field stores every step");
        for i in 0..f.grid.n_w() {
            worst = worst.max((f.theta[k][i] - exact.theta[e][i]).abs());
            worst = worst.max((f.phi[k][i] - exact.phi[e][i]).abs());
        }
    }
    worst
}

fn slow_error(step: f64) -> f64 {
    let member = generate_family(&slow_member(), &uniform_args(-1.0, 16.0, step / 4.0)).unwrap();
    let g = Grid::square(step, 14.0, 8.0).unwrap();
    let f = propagate_with(&member.boundary().unwrap(), &g, SnapshotPlan::every(40)).unwrap();
    deviation(&f, &member.field(&g).unwrap())
}

#[test]
fn slow_member_translates_with_grid_convergence() {
    let coarse = slow_error(1.0 / 50.0);
    let fine = slow_error(1.0 / 100.0);
    assert!(coarse < 1e-2, "coarse error {coarse}");
    assert!(coarse / fine >= 2.0, "order below one: {coarse} -> {fine}");
}

#[test]
fn fast_member_is_frozen_in_zeta() {
    let member = generate_family(&fast_member(), &uniform_args(-1.0, 8.0, 0.005)).unwrap();
    let g = Grid::square(0.02, 6.0, 5.0).unwrap();
    let f = propagate_with(&member.boundary().unwrap(), &g, SnapshotPlan::every(25)).unwrap();
    let exact = member.field(&g).unwrap();
    let d = deviation(&f, &exact);
    assert!(d < 1e-4, "{d}");
}

#[test]
fn solvability_residual_vanishes_on_pure_members() {
    for p in [slow_member(), fast_member()] {
        let member = generate_family(&p, &uniform_args(-1.0, 10.0, 0.005)).unwrap();
        let g = Grid::square(0.02, 8.0, 2.0).unwrap();
        let exact = member.field(&g).unwrap();
        let r = solvability_residual(&exact);
        assert!(r.max < 1e-10, "{:?}: {}", p.family, r.max);
    }
}

#[test]
fn chained_members_separate_and_keep_their_constants() {
    // A fast member ahead of a slow one: the slow pulse falls behind and the
    // two never meet, so each keeps its family constants.
    let beta = 1.12;
    let segments = vec![
        (Family::Fast, Profile::smooth(beta, vec![Segment::bump(3.0, 1.0, -0.3)]), (2.0, 4.0)),
        (Family::Slow, Profile::smooth(beta, vec![Segment::bump(6.0, 1.0, 0.2)]), (5.0, 7.0)),
    ];
    let (b, params) = family_chain(0.3, 0.4, beta, &segments, 0.01).unwrap();
    let g = Grid::square(0.01, 16.0, 6.0).unwrap();
    let f = propagate_with(&b, &g, SnapshotPlan::every(100)).unwrap();
    let last = f.len() - 1;
    let windows = pulse_windows(&f.theta[last], &f.phi[last], 1e-3, 50);
    assert_eq!(windows.len(), 2, "{windows:?}");
    let labels: Vec<PulseLabel> = windows
        .iter()
        .map(|(lo, hi)| classify(&Window::from_field(&f, last, *lo, *hi).unwrap()).label)
        .collect();
    assert_eq!(labels, vec![PulseLabel::Fast, PulseLabel::Slow]);
    let (lo, hi) = windows[1];
    let win = Window::from_field(&f, last, lo, hi).unwrap();
    let fit = fit_constants(&win, Family::Slow).unwrap();
    assert!((fit.c_amp - params[1].c_amp).abs() < 1e-4, "{} vs {}", fit.c_amp, params[1].c_amp);
}
