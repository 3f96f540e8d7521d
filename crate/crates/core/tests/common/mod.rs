//! Finite-difference oracles shared by the integration tests.
#![allow(clippy::needless_range_loop)]

use weyl_forge::algebra::{cotton_from_ricci, cotton_from_weyl_divergence};
use weyl_forge::chart::MetricChart;
use weyl_forge::geometry::{curvature_at, CurvatureRequest};

type M = [[f64; 4]; 4];
type G3 = [[[f64; 4]; 4]; 4];

pub const MASS: f64 = 1.0;

/// `diag(f, 1/f, r², r² sin²θ)` with `f = 1 − 2m/r`, coordinates `(τ, r, θ, φ)`.
pub fn metric(x: &[f64; 4]) -> M {
    let (r, th) = (x[1], x[2]);
    let f = 1.0 - 2.0 * MASS / r;
    let mut g = [[0.0; 4]; 4];
    g[0][0] = f;
    g[1][1] = 1.0 / f;
    g[2][2] = r * r;
    g[3][3] = r * r * th.sin().powi(2);
    g
}

fn shifted(x: &[f64; 4], d: usize, s: f64) -> [f64; 4] {
    let mut y = *x;
    y[d] += s;
    y
}

/// Fourth-order central difference of a vector-valued function.
fn d4<const N: usize>(f: impl Fn(&[f64; 4]) -> [f64; N], x: &[f64; 4], d: usize, h: f64) -> [f64; N] {
    let (a, b, c, e) = (f(&shifted(x, d, -2.0 * h)), f(&shifted(x, d, -h)), f(&shifted(x, d, h)), f(&shifted(x, d, 2.0 * h)));
    std::array::from_fn(|n| (a[n] - 8.0 * b[n] + 8.0 * c[n] - e[n]) / (12.0 * h))
}

fn flat_metric(x: &[f64; 4]) -> [f64; 16] {
    let g = metric(x);
    std::array::from_fn(|n| g[n / 4][n % 4])
}

/// `Γ^k_ij`, stored `[k][i][j]`.
fn christoffel_fd(x: &[f64; 4]) -> G3 {
    let g = metric(x);
    let dg: [[f64; 16]; 4] = std::array::from_fn(|d| d4(flat_metric, x, d, 1e-4));
    let dgm = |l: usize, i: usize, j: usize| dg[l][i * 4 + j];
    let mut gam = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                // the metric is diagonal
                gam[k][i][j] = 0.5 / g[k][k] * (dgm(i, k, j) + dgm(j, k, i) - dgm(k, i, j));
            }
        }
    }
    gam
}

pub fn flat_gamma(x: &[f64; 4]) -> [f64; 64] {
    let g = christoffel_fd(x);
    std::array::from_fn(|n| g[n / 16][(n / 4) % 4][n % 4])
}

/// `R_ρσμν = g_ρα (∂_μ Γ^α_νσ − ∂_ν Γ^α_μσ + Γ^α_μλ Γ^λ_νσ − Γ^α_νλ Γ^λ_μσ)`.
pub fn riemann_fd(x: &[f64; 4]) -> [f64; 256] {
    let g = metric(x);
    let gam = christoffel_fd(x);
    let dgam: [[f64; 64]; 4] = std::array::from_fn(|d| d4(flat_gamma, x, d, 1e-3));
    let dg = |d: usize, a: usize, i: usize, j: usize| dgam[d][a * 16 + i * 4 + j];
    std::array::from_fn(|n| {
        let (rho, sig, mu, nu) = (n / 64, (n / 16) % 4, (n / 4) % 4, n % 4);
        let mut up = dg(mu, rho, nu, sig) - dg(nu, rho, mu, sig);
        for l in 0..4 {
            up += gam[rho][mu][l] * gam[l][nu][sig] - gam[rho][nu][l] * gam[l][mu][sig];
        }
        g[rho][rho] * up
    })
}

pub fn rel(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale
}

pub fn points(chart: &MetricChart, n: u64) -> Vec<[f64; 4]> {
    (0..n).map(|i| chart.sample_point(42, i)).collect()
}

/// Worst relative mismatch of jet Christoffels and Riemann against the
/// finite-difference oracle on Schwarzschild.
pub fn schwarzschild_fd_mismatch(n: u64) -> (f64, f64) {
    let chart = MetricChart::by_name("schwarzschild").unwrap();
    let (mut gam, mut riem) = (0.0f64, 0.0f64);
    for p in points(&chart, n) {
        let cp = curvature_at(&chart, &p, &CurvatureRequest::depth(0)).unwrap();
        gam = gam.max(rel(cp.christoffel.entries(), &flat_gamma(&p)));
        riem = riem.max(rel(cp.riem_coord.entries(), &riemann_fd(&p)));
    }
    (gam, riem)
}

/// Worst relative mismatch and smallest norm of the Cotton tensor computed from
/// Ricci derivatives and from the Weyl divergence on perturbed Schwarzschild.
pub fn cotton_mismatch(n: u64) -> (f64, f64) {
    let chart = MetricChart::by_name("perturbed-schwarzschild").unwrap();
    let (mut worst, mut smallest) = (0.0f64, f64::INFINITY);
    for p in points(&chart, n) {
        let cp = curvature_at(&chart, &p, &CurvatureRequest::depth(1)).unwrap();
        let a = cotton_from_ricci(cp.ricci_derivative.as_ref().unwrap(), cp.scalar_derivative.as_ref().unwrap()).unwrap();
        let b = cotton_from_weyl_divergence(cp.dw(1)).unwrap();
        smallest = smallest.min(a.norm());
        worst = worst.max(a.sub(&b).unwrap().norm() / a.norm());
    }
    (worst, smallest)
}
