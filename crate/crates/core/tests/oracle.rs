//! Independent oracles: finite differences of the closed-form Schwarzschild
//! metric, the Kretschmann invariant, and two Cotton constructions.

mod common;

use common::{cotton_mismatch, points, schwarzschild_fd_mismatch, MASS};
use weyl_forge::chart::MetricChart;
use weyl_forge::geometry::{curvature_at, CurvatureRequest};

#[test]
fn christoffels_and_riemann_match_finite_differences() {
    let (gam, riem) = schwarzschild_fd_mismatch(10);
    assert!(gam < 1e-6, "Christoffel mismatch {gam:e}");
    assert!(riem < 1e-6, "Riemann mismatch {riem:e}");
}

#[test]
fn kretschmann_invariant() {
    let chart = MetricChart::by_name("schwarzschild").unwrap();
    for p in points(&chart, 10) {
        let cp = curvature_at(&chart, &p, &CurvatureRequest::depth(0)).unwrap();
        let expected = 48.0 * MASS * MASS / p[1].powi(6);
        assert!((cp.riem.norm_sq() - expected).abs() < 1e-10 * expected);
        assert!((cp.weyl.norm_sq() - expected).abs() < 1e-10 * expected);
        assert!(cp.ric.norm() < 1e-12 * expected.sqrt());
    }
}

#[test]
fn cotton_two_ways_on_non_einstein_chart() {
    let (worst, smallest) = cotton_mismatch(10);
    assert!(smallest > 1e-4, "Cotton should not vanish here");
    assert!(worst < 1e-8, "Cotton mismatch {worst:e}");
}
