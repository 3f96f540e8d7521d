//! Eigenframe calculus for `∇W±`.
//!
//! With `W± = ½(λ ω⊗ω + μ η⊗η + ν θ⊗θ)`, each derivative `∇_t W±` is expanded
//! in the nine products of the eigen-two-forms:
//!
//! `2∇W± = dλ ω⊗ω + dμ η⊗η + dν θ⊗θ + (λ−μ)c (ω⊗η + η⊗ω)
//!        + (ν−λ)b (ω⊗θ + θ⊗ω) + (μ−ν)a (η⊗θ + θ⊗η)`.
//!
//! The coefficient products `(λ−μ)c` etc. are what the projection yields
//! directly; the one-forms themselves need a division by eigenvalue gaps and
//! are only reported when the frame is non-degenerate.

use thiserror::Error;

use crate::algebra::{lambda_split, pair_form, AlgebraError, Residual, Sector, TwoForm, TwoFormFrame};
use crate::algebra::derdzinski_frame;
use crate::geometry::CurvaturePoint;
use crate::tensor::{DenseTensor, DIM};

pub type OneForm = [f64; DIM];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DerdzinskiError {
    #[error("eigenvalues of W{0} are (nearly) repeated; one-forms a, b, c are undefined")]
    Degenerate(&'static str),
    #[error("curvature point carries no ∇W")]
    MissingDerivative,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Frame derivatives of one sector at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenframeDerivatives {
    pub sector: Sector,
    /// `λ ≤ μ ≤ ν`
    pub eigenvalues: [f64; 3],
    pub d_lambda: OneForm,
    pub d_mu: OneForm,
    pub d_nu: OneForm,
    /// `(λ−μ)c`, `(ν−λ)b`, `(μ−ν)a`.
    pub products: [OneForm; 3],
    pub a: Option<OneForm>,
    pub b: Option<OneForm>,
    pub c: Option<OneForm>,
    pub degenerate: bool,
    /// `|2∇W± − expansion|` against `|2∇W±|`.
    pub reconstruction: Residual,
    /// Largest mismatch between the two slots of each off-diagonal coefficient.
    pub consistency_gap: f64,
    /// `|dλ + dμ + dν|`
    pub trace_defect: f64,
}

impl EigenframeDerivatives {
    /// `(|a|², |b|², |c|²)` when defined; these do not depend on frame signs.
    pub fn one_form_norms(&self) -> Option<[f64; 3]> {
        let n = |v: &OneForm| v.iter().map(|x| x * x).sum();
        Some([n(self.a.as_ref()?), n(self.b.as_ref()?), n(self.c.as_ref()?)])
    }
}

fn slice(dw: &DenseTensor<f64>, t: usize) -> DenseTensor<f64> {
    let e: Vec<f64> = (0..256).map(|o| dw.entries()[o * DIM + t]).collect();
    DenseTensor::covariant(4, e).expect("rank 4")
}

fn outer_forms(a: &TwoForm, b: &TwoForm, s: f64, out: &mut [f64]) {
    for (o, x) in out.iter_mut().enumerate() {
        let (i, j, k, l) = (o / 64, (o / 16) % 4, (o / 4) % 4, o % 4);
        *x += s * a[i][j] * b[k][l];
    }
}

/// Eigenframe of `W±` at a curvature point (positively oriented frame).
pub fn sector_frame(cp: &CurvaturePoint, sector: Sector) -> Result<TwoFormFrame, DerdzinskiError> {
    let blocks = lambda_split(&cp.weyl, 1.0)?;
    Ok(derdzinski_frame(&blocks, sector))
}

/// Projects `2∇W±` (rank 5, derivative slot last) onto the eigenframe.
///
/// Works for any orthonormal eigenbasis, including degenerate ones; only the
/// division producing `a, b, c` is withheld there.
pub fn frame_derivatives(dw_sector: &DenseTensor<f64>, frame: &TwoFormFrame) -> EigenframeDerivatives {
    let f = &frame.forms;
    let mut m = [[[0.0; 3]; 3]; DIM];
    let mut recon_diff = Vec::with_capacity(256 * DIM);
    let mut full = Vec::with_capacity(256 * DIM);
    let mut gap: f64 = 0.0;
    for t in 0..DIM {
        let s = slice(dw_sector, t).scale(2.0);
        let mut raw = [[0.0; 3]; 3];
        for (a, row) in raw.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = pair_form(&s, &f[a], &f[b]) / 16.0;
            }
        }
        let mut expansion = vec![0.0; 256];
        for a in 0..3 {
            for b in 0..3 {
                let v = 0.5 * (raw[a][b] + raw[b][a]);
                gap = gap.max((raw[a][b] - raw[b][a]).abs());
                m[t][a][b] = v;
                outer_forms(&f[a], &f[b], v, &mut expansion);
            }
        }
        for (o, x) in s.entries().iter().enumerate() {
            recon_diff.push(x - expansion[o]);
            full.push(*x);
        }
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let reconstruction = Residual { abs: norm(&recon_diff), scale: norm(&full) };
    let col = |a: usize, b: usize| -> OneForm { std::array::from_fn(|t| m[t][a][b]) };
    let [l, mu, nu] = frame.eigenvalues;
    let products = [col(0, 1), col(0, 2), col(1, 2)];
    let divide = |v: &OneForm, d: f64| -> OneForm { std::array::from_fn(|t| v[t] / d) };
    let (a, b, c) = if frame.degenerate {
        (None, None, None)
    } else {
        (Some(divide(&products[2], mu - nu)), Some(divide(&products[1], nu - l)), Some(divide(&products[0], l - mu)))
    };
    let (d_lambda, d_mu, d_nu) = (col(0, 0), col(1, 1), col(2, 2));
    let trace_defect = norm(&std::array::from_fn::<f64, DIM, _>(|t| d_lambda[t] + d_mu[t] + d_nu[t]));
    EigenframeDerivatives {
        sector: frame.sector,
        eigenvalues: frame.eigenvalues,
        d_lambda,
        d_mu,
        d_nu,
        products,
        a,
        b,
        c,
        degenerate: frame.degenerate,
        reconstruction,
        consistency_gap: gap,
        trace_defect,
    }
}

/// Frame derivatives at a curvature point; refuses degenerate frames.
pub fn extract_frame_derivatives(cp: &CurvaturePoint, frame: &TwoFormFrame) -> Result<EigenframeDerivatives, DerdzinskiError> {
    if frame.degenerate {
        return Err(DerdzinskiError::Degenerate(frame.sector.name()));
    }
    if cp.depth() < 1 {
        return Err(DerdzinskiError::MissingDerivative);
    }
    Ok(frame_derivatives(&cp.dw_sector(1, frame.sector), frame))
}

fn sq(v: &OneForm) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `¼|∇W±|² = |dλ|² + |dμ|² + |dν|² + 2(|(λ−μ)c|² + |(ν−λ)b|² + |(μ−ν)a|²)`.
pub fn check_norm_formula(dw_sector: &DenseTensor<f64>, ed: &EigenframeDerivatives) -> Residual {
    let lhs = 0.25 * dw_sector.norm_sq();
    let diag = sq(&ed.d_lambda) + sq(&ed.d_mu) + sq(&ed.d_nu);
    let off = 2.0 * ed.products.iter().map(sq).sum::<f64>();
    Residual::of(lhs - diag - off, &[lhs, diag, off])
}

/// `⅛ W±_ijkl W±_ijpq,t W±_klpq,t = λ|dλ|² + μ|dμ|² + ν|dν|²
///  − ν|(λ−μ)c|² − μ|(ν−λ)b|² − λ|(μ−ν)a|²`; holds on every metric.
pub fn check_cubic_contraction(w_sector: &DenseTensor<f64>, dw_sector: &DenseTensor<f64>, ed: &EigenframeDerivatives) -> Residual {
    let lhs = 0.125 * crate::identities::contract::w_dw_dw(w_sector, dw_sector);
    let [l, m, n] = ed.eigenvalues;
    let terms = [
        l * sq(&ed.d_lambda),
        m * sq(&ed.d_mu),
        n * sq(&ed.d_nu),
        -n * sq(&ed.products[0]),
        -m * sq(&ed.products[1]),
        -l * sq(&ed.products[2]),
    ];
    let rhs: f64 = terms.iter().sum();
    let mut all = terms.to_vec();
    all.push(lhs);
    Residual::of(lhs - rhs, &all)
}

/// Residual of the harmonic-Weyl relations
/// `dλ_k = θ_kl P_l − η_kl Q_l`, `dμ_k = −θ_kl P_l + ω_kl S_l`,
/// `dν_k = η_kl Q_l − ω_kl S_l` with `P = (λ−μ)c`, `Q = (ν−λ)b`, `S = (μ−ν)a`.
pub fn check_div_free_relations(ed: &EigenframeDerivatives, frame: &TwoFormFrame) -> Residual {
    let [w, e, th] = &frame.forms;
    let [p, q, s] = &ed.products;
    let act = |f: &TwoForm, v: &OneForm| -> OneForm { std::array::from_fn(|k| (0..DIM).map(|l| f[k][l] * v[l]).sum()) };
    let (tp, eq, ws) = (act(th, p), act(e, q), act(w, s));
    let mut worst = Residual { abs: 0.0, scale: 0.0 };
    let vn = |v: &OneForm| sq(v).sqrt();
    let rows: [(&OneForm, OneForm); 3] = [
        (&ed.d_lambda, std::array::from_fn(|k| tp[k] - eq[k])),
        (&ed.d_mu, std::array::from_fn(|k| -tp[k] + ws[k])),
        (&ed.d_nu, std::array::from_fn(|k| eq[k] - ws[k])),
    ];
    for (lhs, rhs) in rows {
        let diff: OneForm = std::array::from_fn(|k| lhs[k] - rhs[k]);
        worst.abs = worst.abs.max(vn(&diff));
    }
    worst.scale = [vn(&ed.d_lambda), vn(&ed.d_mu), vn(&ed.d_nu), vn(&tp), vn(&eq), vn(&ws)]
        .into_iter()
        .fold(0.0, f64::max);
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::MetricChart;
    use crate::geometry::{curvature_at, CurvatureRequest};

    fn point(name: &str, index: u64) -> CurvaturePoint {
        let c = MetricChart::by_name(name).unwrap();
        let p = c.sample_point(7, index);
        curvature_at(&c, &p, &CurvatureRequest::depth(1)).unwrap()
    }

    fn run(cp: &CurvaturePoint, sector: Sector) -> (TwoFormFrame, EigenframeDerivatives, DenseTensor<f64>) {
        let frame = sector_frame(cp, sector).unwrap();
        let dw = cp.dw_sector(1, sector);
        let ed = frame_derivatives(&dw, &frame);
        (frame, ed, dw)
    }

    #[test]
    fn parallel_weyl_has_vanishing_frame_derivatives() {
        let cp = point("cp2", 0);
        let (_, ed, _) = run(&cp, Sector::Plus);
        let scale = cp.curvature_scale();
        for v in [ed.d_lambda, ed.d_mu, ed.d_nu].iter().chain(ed.products.iter()) {
            assert!(v.iter().all(|x| x.abs() <= 1e-9 * scale));
        }
    }

    #[test]
    fn expansion_reconstructs_gradient() {
        for name in ["schwarzschild", "schwarzschild-de-sitter", "perturbed-schwarzschild", "generic-deformation"] {
            for i in 0..3 {
                let cp = point(name, i);
                for sector in [Sector::Plus, Sector::Minus] {
                    let (_, ed, dw) = run(&cp, sector);
                    assert!(ed.reconstruction.abs <= 1e-10 * ed.reconstruction.scale, "{name} {i}");
                    assert!(ed.consistency_gap <= 1e-10 * dw.norm());
                    assert!(ed.trace_defect <= 1e-10 * dw.norm());
                }
            }
        }
    }

    #[test]
    fn norm_and_cubic_formulas() {
        for name in ["schwarzschild-de-sitter", "perturbed-schwarzschild", "generic-deformation"] {
            for i in 0..3 {
                let cp = point(name, i);
                for sector in [Sector::Plus, Sector::Minus] {
                    let (_, ed, dw) = run(&cp, sector);
                    assert!(check_norm_formula(&dw, &ed).relative() < 1e-10);
                    let w = cp.dw_sector(0, sector);
                    let r = check_cubic_contraction(&w, &dw, &ed);
                    assert!(r.relative() < 1e-10, "{name} {i} {r:?}");
                }
            }
        }
    }

    #[test]
    fn div_free_relations_discriminate() {
        for i in 0..3 {
            let cp = point("schwarzschild-de-sitter", i);
            for sector in [Sector::Plus, Sector::Minus] {
                let (frame, ed, _) = run(&cp, sector);
                let r = check_div_free_relations(&ed, &frame);
                assert!(r.relative() < 1e-9, "{i} {sector:?} {r:?}");
            }
        }
        let cp = point("perturbed-schwarzschild", 1);
        let (frame, ed, _) = run(&cp, Sector::Plus);
        assert!(check_div_free_relations(&ed, &frame).relative() > 1e-3);
    }

    #[test]
    fn generic_frame_yields_one_forms() {
        let cp = point("generic-deformation", 2);
        let frame = sector_frame(&cp, Sector::Plus).unwrap();
        assert!(!frame.degenerate);
        let ed = extract_frame_derivatives(&cp, &frame).unwrap();
        let [_, _, c] = ed.one_form_norms().unwrap();
        let p = sq(&ed.products[0]);
        let gap = ed.eigenvalues[0] - ed.eigenvalues[1];
        assert!((c * gap * gap - p).abs() <= 1e-10 * p.max(1e-30));
    }
}
