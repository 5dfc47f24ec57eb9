//! Benchmark fixtures.

use tripod_core::analytic::{generate_family, uniform_args, Family, FamilyParams, Window};
use tripod_core::oracle::OracleGrid;
use tripod_core::reduced::propagate_with;
use tripod_core::{BoundaryProfile, Grid, Profile, Segment, SnapshotPlan};

/// Two overlapping bumps that split into a fast and a slow pulse.
pub fn splitting_boundary(w0: f64) -> BoundaryProfile {
    BoundaryProfile::new(
        Profile::smooth(0.3, vec![Segment::bump(3.0 * w0, w0, 0.6)]),
        Profile::smooth(0.2, vec![Segment::bump(3.5 * w0, w0, 0.5)]),
        1.12,
    )
}

/// Reduced grid in units of w0 covering `zeta` pulse lengths.
pub fn reduced_grid(h: f64, zeta: f64) -> Grid {
    Grid::square(h, zeta + 10.0, zeta).expect("fixture grid is valid")
}

/// Small oracle run: w0 = 20 over five pulse lengths.
pub fn oracle_grid() -> OracleGrid {
    OracleGrid::new(0.05, 26.0 * 20.0, 1.0, 5.0 * 20.0).with_strides(100, 100)
}

/// A slow-family window after ten pulse lengths of propagation.
pub fn slow_window() -> Window {
    let p = FamilyParams::new(Family::Slow, 0.5, 0.3, Profile::smooth(1.5, vec![Segment::bump(2.0, 1.0, 0.4)]));
    let member = generate_family(&p, &uniform_args(-1.0, 16.0, 0.005)).expect("fixture family is admissible");
    let g = Grid::square(0.01, 14.0, 10.0).expect("fixture grid is valid");
    let f = propagate_with(&member.boundary().expect("boundary"), &g, SnapshotPlan::every(1000)).expect("propagates");
    let last = f.len() - 1;
    Window::from_field(&f, last, (10.5 / 0.01) as usize, (14.0 / 0.01) as usize).expect("window inside grid")
}
