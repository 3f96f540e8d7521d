//! Pointwise curvature algebra in an oriented orthonormal frame.
//!
//! Everything here works on frame components (`g = δ`), so raising and
//! lowering indices is trivial and contractions are plain sums.

use rand::Rng;
use thiserror::Error;

use crate::tensor::{einsum, einsum_scalar, unravel, DenseTensor, Variance, DIM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("input violates Riemann-type symmetries by {violation:e} (scale {scale:e})")]
    Symmetry { violation: f64, scale: f64 },
    #[error("frame orientation {0} is not ±1")]
    Orientation(f64),
    #[error("expected a rank-{expected} tensor, got rank {got}")]
    Rank { expected: usize, got: usize },
}

/// Duality sector of two-forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Sector {
    Plus,
    Minus,
}

impl Sector {
    pub fn sign(self) -> f64 {
        match self {
            Sector::Plus => 1.0,
            Sector::Minus => -1.0,
        }
    }

    pub fn other(self) -> Sector {
        match self {
            Sector::Plus => Sector::Minus,
            Sector::Minus => Sector::Plus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sector::Plus => "plus",
            Sector::Minus => "minus",
        }
    }
}

/// Absolute residual of an identity together with the magnitude of its
/// largest additive term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residual {
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.abs / self.scale.max(1e-300)
    }

    /// Residual of `lhs − rhs` where the sides are sums of `terms`.
    pub fn of(diff: f64, terms: &[f64]) -> Self {
        Self { abs: diff.abs(), scale: terms.iter().fold(0.0, |m, t| m.max(t.abs())) }
    }

    /// Residual of a tensor equation, measured in Frobenius norm.
    pub fn of_tensors(diff: &DenseTensor<f64>, terms: &[&DenseTensor<f64>]) -> Self {
        Self { abs: diff.norm(), scale: terms.iter().fold(0.0, |m, t| m.max(t.norm())) }
    }

    /// Combines independent residuals, keeping the worst of each.
    pub fn worst(parts: &[Residual]) -> Self {
        parts.iter().fold(Residual::default(), |acc, r| {
            if r.relative() > acc.relative() || acc.scale == 0.0 && acc.abs == 0.0 {
                Residual { abs: acc.abs.max(r.abs), scale: r.scale.max(acc.scale) }
            } else {
                acc
            }
        })
    }
}

fn check_rank(t: &DenseTensor<f64>, rank: usize) -> Result<(), AlgebraError> {
    if t.rank() == rank {
        Ok(())
    } else {
        Err(AlgebraError::Rank { expected: rank, got: t.rank() })
    }
}

fn t4(f: impl FnMut(&[usize]) -> f64) -> DenseTensor<f64> {
    DenseTensor::from_fn(vec![Variance::Down; 4], f).expect("rank 4")
}

fn d(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Ricci tensor `R_ik = Σ_j R_ijkj`, scalar curvature and Weyl tensor.
pub fn ricci_scalar_weyl(riem: &DenseTensor<f64>) -> Result<(DenseTensor<f64>, f64, DenseTensor<f64>), AlgebraError> {
    check_rank(riem, 4)?;
    let scale = riem.norm();
    let violation = riem.riemann_symmetry_violation();
    if violation > 1e-10 * scale.max(1e-300) && violation > 0.0 {
        return Err(AlgebraError::Symmetry { violation, scale });
    }
    let ric = einsum("ijkj->ik", &[riem]).expect("trace");
    let r: f64 = (0..DIM).map(|i| ric.get(&[i, i])).sum();
    let w = weyl_from(riem, &ric, r);
    Ok((ric, r, w))
}

/// `W = Riem − ½(Ric∧g)' + (R/6)(g_ik g_jl − g_il g_jk)` in dimension four.
pub fn weyl_from(riem: &DenseTensor<f64>, ric: &DenseTensor<f64>, r: f64) -> DenseTensor<f64> {
    t4(|x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        let rc = |a: usize, b: usize| *ric.get(&[a, b]);
        riem.get(x) - 0.5 * (rc(i, k) * d(j, l) - rc(i, l) * d(j, k) + rc(j, l) * d(i, k) - rc(j, k) * d(i, l))
            + r / 6.0 * (d(i, k) * d(j, l) - d(i, l) * d(j, k))
    })
}

/// `(g_ik g_jl − g_il g_jk)` in the frame.
pub fn metric_wedge() -> DenseTensor<f64> {
    t4(|x| d(x[0], x[2]) * d(x[1], x[3]) - d(x[0], x[3]) * d(x[1], x[2]))
}

/// `C_ijk = R_ij,k − R_ik,j − (1/6)(R_k g_ij − R_j g_ik)`.
pub fn cotton_from_ricci(dric: &DenseTensor<f64>, dr: &DenseTensor<f64>) -> Result<DenseTensor<f64>, AlgebraError> {
    check_rank(dric, 3)?;
    check_rank(dr, 1)?;
    Ok(DenseTensor::from_fn(vec![Variance::Down; 3], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        dric.get(&[i, j, k]) - dric.get(&[i, k, j]) - (dr.get(&[k]) * d(i, j) - dr.get(&[j]) * d(i, k)) / 6.0
    })
    .expect("rank 3"))
}

/// `C_ijk = 2 W_tikj,t` in dimension four.
pub fn cotton_from_weyl_divergence(nabla_w: &DenseTensor<f64>) -> Result<DenseTensor<f64>, AlgebraError> {
    check_rank(nabla_w, 5)?;
    Ok(einsum("tikjt->ijk", &[nabla_w]).expect("trace").scale(2.0))
}

/// Levi-Civita symbol with `ε_1234 = +1`.
pub fn levi_civita() -> DenseTensor<f64> {
    t4(|x| {
        let mut p = [x[0], x[1], x[2], x[3]];
        let mut sign = 1.0;
        for a in 0..4 {
            for b in a + 1..4 {
                if p[a] == p[b] {
                    return 0.0;
                }
            }
        }
        // bubble sort parity
        for a in 0..4 {
            for b in 0..3 - a {
                if p[b] > p[b + 1] {
                    p.swap(b, b + 1);
                    sign = -sign;
                }
            }
        }
        sign
    })
}

/// Hodge star on the first two slots: `(⋆T)_{kl…} = ½ ε_ijkl T_{ij…}`.
pub fn star_first_pair(t: &DenseTensor<f64>) -> DenseTensor<f64> {
    let rank = t.rank();
    assert!(rank >= 2);
    let rest = 4usize.pow((rank - 2) as u32);
    let eps = levi_civita();
    let mut out = vec![0.0; t.entries().len()];
    for k in 0..DIM {
        for l in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    let e = *eps.get(&[i, j, k, l]);
                    if e == 0.0 {
                        continue;
                    }
                    let src = (i * DIM + j) * rest;
                    let dst = (k * DIM + l) * rest;
                    for r in 0..rest {
                        out[dst + r] += 0.5 * e * t.entries()[src + r];
                    }
                }
            }
        }
    }
    DenseTensor::new(t.variance().to_vec(), out).expect("same shape")
}

/// `P± = ½(I ± ⋆)` applied to the first pair of slots.
pub fn project_first_pair(t: &DenseTensor<f64>, sector: Sector) -> DenseTensor<f64> {
    let s = star_first_pair(t);
    t.scale(0.5).add(&s.scale(0.5 * sector.sign())).expect("same shape")
}

/// Antisymmetric 4×4 matrix.
pub type TwoForm = [[f64; DIM]; DIM];

fn elementary(a: usize, b: usize) -> TwoForm {
    let mut m = [[0.0; DIM]; DIM];
    m[a][b] = 1.0;
    m[b][a] = -1.0;
    m
}

fn form_add(a: &TwoForm, b: &TwoForm, s: f64) -> TwoForm {
    let mut m = *a;
    for i in 0..DIM {
        for j in 0..DIM {
            m[i][j] += s * b[i][j];
        }
    }
    m
}

/// Seed basis `(e12 ± e34, e13 ± e42, e14 ± e23)`; each has `Σ ω_ij² = 4`.
pub fn seed_forms(sector: Sector) -> [TwoForm; 3] {
    let s = sector.sign();
    [
        form_add(&elementary(0, 1), &elementary(2, 3), s),
        form_add(&elementary(0, 2), &elementary(3, 1), s),
        form_add(&elementary(0, 3), &elementary(1, 2), s),
    ]
}

/// Matrix product of two-forms as 4×4 matrices.
pub fn form_product(a: &TwoForm, b: &TwoForm) -> TwoForm {
    let mut m = [[0.0; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            m[i][j] = (0..DIM).map(|p| a[i][p] * b[p][j]).sum();
        }
    }
    m
}

fn form_dot(a: &TwoForm, b: &TwoForm) -> f64 {
    (0..DIM).flat_map(|i| (0..DIM).map(move |j| (i, j))).map(|(i, j)| a[i][j] * b[i][j]).sum()
}

/// `T_ijkl α_ij β_kl`.
pub fn pair_form(t: &DenseTensor<f64>, a: &TwoForm, b: &TwoForm) -> f64 {
    let mut s = 0.0;
    for (o, v) in t.entries().iter().enumerate() {
        if *v != 0.0 {
            let x = unravel(o, 4);
            s += v * a[x[0]][x[1]] * b[x[2]][x[3]];
        }
    }
    s
}

pub type Mat3 = [[f64; 3]; 3];

/// Matrix of a Riemann-type tensor acting on Λ² in the normalized seed basis
/// (Λ⁺ first), so that the Frobenius norm squared equals `¼|T|²`.
pub fn operator_matrix(t: &DenseTensor<f64>) -> [[f64; 6]; 6] {
    let p = seed_forms(Sector::Plus);
    let m = seed_forms(Sector::Minus);
    let basis: Vec<&TwoForm> = p.iter().chain(m.iter()).collect();
    let mut out = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            // e = s/√2, M_ab = ¼ T e_a e_b
            out[a][b] = pair_form(t, basis[a], basis[b]) / 8.0;
        }
    }
    out
}

/// Blocks of a curvature operator with respect to `Λ² = Λ⁺ ⊕ Λ⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureOperatorBlocks {
    pub w_plus: Mat3,
    pub w_minus: Mat3,
    pub ric0_block: Mat3,
    pub scalar: f64,
}

impl CurvatureOperatorBlocks {
    pub fn sector(&self, sector: Sector) -> &Mat3 {
        match sector {
            Sector::Plus => &self.w_plus,
            Sector::Minus => &self.w_minus,
        }
    }

    /// Reassembled 6×6 operator.
    pub fn assemble(&self) -> [[f64; 6]; 6] {
        let mut m = [[0.0; 6]; 6];
        for a in 0..3 {
            for b in 0..3 {
                let diag = if a == b { self.scalar / 12.0 } else { 0.0 };
                m[a][b] = self.w_plus[a][b] + diag;
                m[a + 3][b + 3] = self.w_minus[a][b] + diag;
                m[a][b + 3] = self.ric0_block[a][b];
                m[b + 3][a] = self.ric0_block[a][b];
            }
        }
        m
    }
}

/// Splits a Riemann-type tensor (Riemann or Weyl) into its Λ± blocks. A
/// negative orientation exchanges the roles of the two sectors.
pub fn lambda_split(t: &DenseTensor<f64>, orientation: f64) -> Result<CurvatureOperatorBlocks, AlgebraError> {
    check_rank(t, 4)?;
    if (orientation.abs() - 1.0).abs() > 1e-9 {
        return Err(AlgebraError::Orientation(orientation));
    }
    let m = operator_matrix(t);
    let mut a = [[0.0; 3]; 3];
    let mut b = [[0.0; 3]; 3];
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = m[i][j];
            b[i][j] = m[i + 3][j + 3];
            c[i][j] = m[i][j + 3];
        }
    }
    if orientation < 0.0 {
        std::mem::swap(&mut a, &mut b);
        c = transpose3(&c);
    }
    let ta = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let tb = (b[0][0] + b[1][1] + b[2][2]) / 3.0;
    for i in 0..3 {
        a[i][i] -= ta;
        b[i][i] -= tb;
    }
    Ok(CurvatureOperatorBlocks { w_plus: a, w_minus: b, ric0_block: c, scalar: 6.0 * (ta + tb) })
}

fn transpose3(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi rotations.
/// Eigenvalues come back ascending; eigenvectors are the columns of the
/// returned matrix.
pub fn symmetric_eigen3(m: &Mat3) -> ([f64; 3], Mat3) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..30 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off.sqrt() <= 1e-14 * norm || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let vals = order.map(|i| a[i][i]);
    let mut vecs = [[0.0; 3]; 3];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..3 {
            vecs[row][col] = v[row][src];
        }
    }
    (vals, vecs)
}

/// Eigenvalues and eigen-two-forms of `W±` normalized to `Σ ω_ij² = 4` and
/// ordered so that `ωη = θ` as matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormFrame {
    pub sector: Sector,
    /// `λ ≤ μ ≤ ν`
    pub eigenvalues: [f64; 3],
    /// `ω, η, θ`
    pub forms: [TwoForm; 3],
    /// Set when two eigenvalues are closer than `1e-8` times the spectral radius.
    pub degenerate: bool,
}

impl TwoFormFrame {
    /// `½(λ ω⊗ω + μ η⊗η + ν θ⊗θ)`.
    pub fn reconstruct(&self) -> DenseTensor<f64> {
        t4(|x| {
            (0..3)
                .map(|a| 0.5 * self.eigenvalues[a] * self.forms[a][x[0]][x[1]] * self.forms[a][x[2]][x[3]])
                .sum()
        })
    }

    /// Worst violation of the quaternion relations (`ω² = η² = θ² = −1`,
    /// `ωη = θ`, `ηθ = ω`, `θω = η`).
    pub fn quaternion_violation(&self) -> f64 {
        let [w, e, t] = &self.forms;
        let minus_id = {
            let mut m = [[0.0; DIM]; DIM];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = -1.0;
            }
            m
        };
        let checks = [
            (form_product(w, w), minus_id),
            (form_product(e, e), minus_id),
            (form_product(t, t), minus_id),
            (form_product(w, e), *t),
            (form_product(e, t), *w),
            (form_product(t, w), *e),
        ];
        checks
            .iter()
            .map(|(a, b)| form_add(a, b, -1.0).iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())))
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `½Σ ω_ij²` from 2 and of the pairwise products from 0.
    pub fn orthonormality_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 2.0 } else { 0.0 };
                worst = worst.max((0.5 * form_dot(&self.forms[a], &self.forms[b]) - want).abs());
            }
        }
        worst
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Derdzinski eigenframe of one sector block.
pub fn derdzinski_frame(blocks: &CurvatureOperatorBlocks, sector: Sector) -> TwoFormFrame {
    let (vals, vecs) = symmetric_eigen3(blocks.sector(sector));
    let seeds = seed_forms(sector);
    let mut forms = [[[0.0; DIM]; DIM]; 3];
    for (col, form) in forms.iter_mut().enumerate() {
        for (s, seed) in seeds.iter().enumerate() {
            *form = form_add(form, seed, vecs[s][col]);
        }
    }
    let wt = form_product(&forms[0], &forms[1]);
    if form_dot(&wt, &forms[2]) < 0.0 {
        for row in forms[2].iter_mut() {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
    }
    let radius = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = (vals[1] - vals[0]).min(vals[2] - vals[1]);
    TwoFormFrame { sector, eigenvalues: vals, forms, degenerate: gap <= 1e-8 * radius }
}

/// Residuals of the pointwise algebraic identities for one Weyl-type tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraicResiduals {
    /// `W_ijkt W_ijkl − ¼|W|² δ_tl`
    pub quadratic: Residual,
    /// `W_ijkl W_ipkq W_jplq − ½ W_ijkl W_ijpq W_klpq`
    pub cubic: Residual,
    /// `Q − ¼|W|⁴`; only meaningful for a single sector.
    pub quartic: Residual,
}

pub fn quadratic_residual(w: &DenseTensor<f64>) -> Residual {
    let lhs = einsum("ijkt,ijkl->tl", &[w, w]).expect("contraction");
    let rhs = DenseTensor::identity().scale(0.25 * w.norm_sq());
    Residual::of_tensors(&lhs.sub(&rhs).unwrap(), &[&lhs, &rhs])
}

/// `W_ijkl W_ijpq W_klpq`
pub fn cubic_trace(w: &DenseTensor<f64>) -> f64 {
    let ww = einsum("ijkl,ijpq->klpq", &[w, w]).expect("contraction");
    ww.dot(w)
}

/// `W_ijkl W_ipkq W_jplq`
pub fn cubic_cross(w: &DenseTensor<f64>) -> f64 {
    let x = einsum("ijkl,ipkq->jlpq", &[w, w]).expect("contraction");
    einsum_scalar("jlpq,jplq->", &[&x, w])
}

pub fn cubic_residual(w: &DenseTensor<f64>) -> Residual {
    let lhs = cubic_cross(w);
    let rhs = 0.5 * cubic_trace(w);
    Residual::of(lhs - rhs, &[lhs, rhs])
}

/// `Q = (W_pjkl W_pist + W_ipkl W_pjst + W_ijpl W_pkst + W_ijkp W_plst) W_rjkl W_rist`
pub fn quartic_q(w: &DenseTensor<f64>) -> f64 {
    let y = einsum("rjkl,rist->ijklst", &[w, w]).expect("contraction");
    let terms = [
        einsum("pjkl,pist->ijklst", &[w, w]),
        einsum("ipkl,pjst->ijklst", &[w, w]),
        einsum("ijpl,pkst->ijklst", &[w, w]),
        einsum("ijkp,plst->ijklst", &[w, w]),
    ];
    terms.into_iter().map(|t| t.expect("contraction").dot(&y)).sum()
}

pub fn quartic_residual(w: &DenseTensor<f64>) -> Residual {
    let q = quartic_q(w);
    let rhs = 0.25 * w.norm_sq().powi(2);
    Residual::of(q - rhs, &[q, rhs])
}

pub fn algebraic_identities(w: &DenseTensor<f64>) -> AlgebraicResiduals {
    AlgebraicResiduals { quadratic: quadratic_residual(w), cubic: cubic_residual(w), quartic: quartic_residual(w) }
}

/// Proper rotation of ℝ⁴ built from six plane angles.
pub fn rotation_from_angles(angles: &[f64; 6]) -> [[f64; DIM]; DIM] {
    let mut q = [[0.0; DIM]; DIM];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let planes = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for (&(a, b), &th) in planes.iter().zip(angles) {
        let (s, c) = th.sin_cos();
        for row in q.iter_mut() {
            let (x, y) = (row[a], row[b]);
            row[a] = c * x - s * y;
            row[b] = s * x + c * y;
        }
    }
    q
}

/// Random Weyl-type tensor supported in one sector: `½Σ λ_a ω_a⊗ω_a` for a
/// random trace-free spectrum and a random rotation of the seed triple.
pub fn random_sector_tensor<R: Rng + ?Sized>(rng: &mut R, sector: Sector) -> (DenseTensor<f64>, TwoFormFrame) {
    let l: f64 = rng.gen_range(-2.0..2.0);
    let m: f64 = rng.gen_range(-2.0..2.0);
    let mut vals = [l, m, -l - m];
    vals.sort_by(f64::total_cmp);
    // random unit quaternion → rotation of Λ±
    let mut q = [0.0f64; 4];
    loop {
        for x in q.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        let n = q.iter().map(|x| x * x).sum::<f64>();
        if n > 1e-3 && n <= 1.0 {
            let n = n.sqrt();
            q.iter_mut().for_each(|x| *x /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    let rot = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ];
    let seeds = seed_forms(sector);
    let mut forms = [[[0.0; DIM]; DIM]; 3];
    for (col, form) in forms.iter_mut().enumerate() {
        for (s, seed) in seeds.iter().enumerate() {
            *form = form_add(form, seed, rot[s][col]);
        }
    }
    let frame = TwoFormFrame { sector, eigenvalues: vals, forms, degenerate: false };
    (frame.reconstruct(), frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn seeds_are_eigenforms_of_star() {
        for sector in [Sector::Plus, Sector::Minus] {
            for s in seed_forms(sector) {
                let t = DenseTensor::from_fn(vec![Variance::Down; 2], |x| s[x[0]][x[1]]).unwrap();
                let st = star_first_pair(&t);
                let diff = st.sub(&t.scale(sector.sign())).unwrap();
                assert_eq!(diff.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn star_is_an_involution_with_split_spectrum() {
        let eps = levi_civita();
        // ⋆ as a 6×6 operator in the seed basis is diag(1,1,1,−1,−1,−1)
        let m = operator_matrix(&eps);
        for a in 0..6 {
            for b in 0..6 {
                let want = if a != b {
                    0.0
                } else if a < 3 {
                    1.0
                } else {
                    -1.0
                };
                assert!((m[a][b] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn seeds_satisfy_quaternion_table() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        for sector in [Sector::Plus, Sector::Minus] {
            let (w, _) = random_sector_tensor(&mut rng, sector);
            let blocks = lambda_split(&w, 1.0).unwrap();
            let f = derdzinski_frame(&blocks, sector);
            assert!(f.quaternion_violation() < 1e-12);
            assert!(f.orthonormality_violation() < 1e-12);
        }
    }

    #[test]
    fn constant_curvature_has_no_weyl() {
        let riem = metric_wedge();
        let (ric, r, w) = ricci_scalar_weyl(&riem).unwrap();
        assert_eq!(r, 12.0);
        assert_eq!(ric, DenseTensor::identity().scale(3.0));
        assert!(w.max_abs() < 1e-15);
    }

    #[test]
    fn symmetry_violation_rejected() {
        let mut riem = metric_wedge();
        *riem.get_mut(&[0, 1, 0, 1]) += 0.1;
        assert!(matches!(ricci_scalar_weyl(&riem), Err(AlgebraError::Symmetry { .. })));
    }

    #[test]
    fn orientation_must_be_unit() {
        assert_eq!(lambda_split(&metric_wedge(), 0.5), Err(AlgebraError::Orientation(0.5)));
    }

    #[test]
    fn jacobi_reconstructs_random_blocks() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        for _ in 0..200 {
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    let x = rng.gen_range(-1.0..1.0);
                    m[i][j] = x;
                    m[j][i] = x;
                }
            }
            let (vals, v) = symmetric_eigen3(&m);
            assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
            for i in 0..3 {
                for j in 0..3 {
                    let r: f64 = (0..3).map(|k| v[i][k] * vals[k] * v[j][k]).sum();
                    assert!((r - m[i][j]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn frame_reconstruction_matches_input() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        for _ in 0..100 {
            let (w, _) = random_sector_tensor(&mut rng, Sector::Plus);
            let f = derdzinski_frame(&lambda_split(&w, 1.0).unwrap(), Sector::Plus);
            let diff = f.reconstruct().sub(&w).unwrap();
            assert!(diff.norm() <= 1e-12 * w.norm());
            let sum: f64 = f.eigenvalues.iter().sum();
            assert!(sum.abs() <= 1e-12 * f.spectral_radius());
        }
    }

    #[test]
    fn zero_weyl_gives_zero_residuals() {
        let w = DenseTensor::zeros(4);
        let r = algebraic_identities(&w);
        assert_eq!((r.quadratic.abs, r.cubic.abs, r.quartic.abs), (0.0, 0.0, 0.0));
        let f = derdzinski_frame(&lambda_split(&w, 1.0).unwrap(), Sector::Plus);
        assert_eq!(f.eigenvalues, [0.0; 3]);
        assert!(f.degenerate);
    }

    #[test]
    fn operator_norm_is_quarter_tensor_norm() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let (wp, _) = random_sector_tensor(&mut rng, Sector::Plus);
        let (wm, _) = random_sector_tensor(&mut rng, Sector::Minus);
        let w = wp.add(&wm).unwrap();
        let m = operator_matrix(&w);
        let fro: f64 = m.iter().flatten().map(|x| x * x).sum();
        assert!((fro - 0.25 * w.norm_sq()).abs() < 1e-12 * fro);
        let p = project_first_pair(&w, Sector::Plus);
        assert!(p.sub(&wp).unwrap().norm() < 1e-13 * w.norm());
    }

    #[test]
    fn mixed_sectors_satisfy_quadratic_and_cubic() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        for _ in 0..50 {
            let (wp, _) = random_sector_tensor(&mut rng, Sector::Plus);
            let (wm, _) = random_sector_tensor(&mut rng, Sector::Minus);
            let w = wp.add(&wm).unwrap();
            assert!(quadratic_residual(&w).relative() < 1e-12);
            assert!(cubic_residual(&w).relative() < 1e-12);
            assert!(quartic_residual(&wp).relative() < 1e-12);
            assert!(quartic_residual(&wm).relative() < 1e-12);
        }
    }
}
