//! Pointwise curvature data from a metric chart.
//!
//! Covariant derivatives are taken in coordinates on jet-valued components
//! (`∂` minus one Christoffel correction per slot, derivative slot appended
//! last) and moved to an orthonormal frame only at the end. Scalar Laplacians
//! of squared norms are evaluated independently by differentiating the
//! jet-valued norm field.

use thiserror::Error;

use crate::algebra::{project_first_pair, ricci_scalar_weyl, AlgebraError, Sector};
use crate::chart::{ChartError, MetricChart};
use crate::jet::{Jet, JetError, MAX_ORDER};
use crate::tensor::{DenseTensor, Variance, DIM};

/// Deepest covariant derivative of W that can be requested.
pub const MAX_DEPTH: usize = 4;

/// Deepest `k` for which `Δ|∇ᵏW|²` can be requested.
pub const MAX_LAPLACIAN: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("request needs metric jets of order {needed} but only {available} are available")]
    Capacity { needed: usize, available: usize },
    #[error("derivative depth {0} exceeds {MAX_DEPTH}")]
    Depth(usize),
}

/// What `curvature_at` should compute.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureRequest {
    /// Highest `k` for which `∇ᵏW` is needed.
    pub depth: usize,
    /// Highest `k` for which `Δ|∇ᵏW|²` (and its sector parts) is needed.
    pub laplacian: Option<usize>,
    /// Whether `∇C` is needed.
    pub cotton_derivative: bool,
    /// Fixed metric jet order instead of the automatic choice.
    pub jet_order: Option<usize>,
    /// Extra constant rotation applied to the Cholesky frame.
    pub frame_rotation: Option<[[f64; DIM]; DIM]>,
}

impl CurvatureRequest {
    pub fn depth(depth: usize) -> Self {
        Self { depth, ..Default::default() }
    }

    /// Smallest metric jet order that satisfies the request: W uses two
    /// orders, each covariant derivative one more, and a scalar Laplacian
    /// needs two spare orders on top of the differentiated field.
    pub fn required_jet_order(&self) -> usize {
        let mut k = (self.depth + 2).max(3);
        if let Some(l) = self.laplacian {
            k = k.max(l + 4);
        }
        if self.cotton_derivative {
            k = k.max(4);
        }
        k
    }
}

/// Squared norms and their Laplacians for `∇ᵏW` and its sector parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormLaplacian {
    /// `Δ|∇ᵏW|²`
    pub full: f64,
    /// `Δ|∇ᵏW⁺|²`
    pub plus: f64,
    /// `Δ|∇ᵏW⁻|²`
    pub minus: f64,
}

impl NormLaplacian {
    pub fn get(&self, sector: Option<Sector>) -> f64 {
        match sector {
            None => self.full,
            Some(Sector::Plus) => self.plus,
            Some(Sector::Minus) => self.minus,
        }
    }
}

/// All curvature data at one point, in an oriented orthonormal frame.
#[derive(Debug, Clone)]
pub struct CurvaturePoint {
    pub point: [f64; 4],
    pub jet_order: usize,
    /// Frame vectors as columns: `e_a = Σ_i frame[i][a] ∂_i`.
    pub frame: [[f64; DIM]; DIM],
    /// `g(e_a, e_b)`; the identity up to rounding.
    pub metric_in_frame: DenseTensor<f64>,
    /// Coordinate Christoffel symbols `Γ^k_ij`, stored as `[k][i][j]`.
    pub christoffel: DenseTensor<f64>,
    /// Coordinate components `R_ijkl`.
    pub riem_coord: DenseTensor<f64>,
    pub riem: DenseTensor<f64>,
    pub ric: DenseTensor<f64>,
    pub scalar: f64,
    pub weyl: DenseTensor<f64>,
    pub w_plus: DenseTensor<f64>,
    pub w_minus: DenseTensor<f64>,
    /// `R_ij,k`
    pub ricci_derivative: Option<DenseTensor<f64>>,
    /// `R_,k`
    pub scalar_derivative: Option<DenseTensor<f64>>,
    /// Cotton tensor from Ricci data.
    pub cotton: Option<DenseTensor<f64>>,
    /// `C_ijk,l`
    pub cotton_derivative: Option<DenseTensor<f64>>,
    /// `nabla_w[k-1] = ∇ᵏW`, derivative slots appended after the four Weyl slots.
    pub nabla_w: Vec<DenseTensor<f64>>,
    /// `laplacians[k]` holds `Δ|∇ᵏW|²` and its sector parts.
    pub laplacians: Vec<NormLaplacian>,
}

impl CurvaturePoint {
    pub fn depth(&self) -> usize {
        self.nabla_w.len()
    }

    /// `∇ᵏW` (`k = 0` is W itself).
    pub fn dw(&self, k: usize) -> &DenseTensor<f64> {
        if k == 0 {
            &self.weyl
        } else {
            &self.nabla_w[k - 1]
        }
    }

    /// `∇ᵏW±`, obtained by projecting the first pair of `∇ᵏW`.
    pub fn dw_sector(&self, k: usize, sector: Sector) -> DenseTensor<f64> {
        if k == 0 {
            return match sector {
                Sector::Plus => self.w_plus.clone(),
                Sector::Minus => self.w_minus.clone(),
            };
        }
        project_first_pair(self.dw(k), sector)
    }

    /// `∇ᵏW` or one of its sector parts.
    pub fn dw_part(&self, k: usize, sector: Option<Sector>) -> std::borrow::Cow<'_, DenseTensor<f64>> {
        match sector {
            None => std::borrow::Cow::Borrowed(self.dw(k)),
            Some(s) => std::borrow::Cow::Owned(self.dw_sector(k, s)),
        }
    }

    /// `|Riem|`, the curvature scale used for noise floors.
    pub fn curvature_scale(&self) -> f64 {
        self.riem.norm()
    }
}

type Field = Vec<Jet>;

fn jet_err(chart: &MetricChart, point: &[f64; 4]) -> impl Fn(JetError) -> GeometryError {
    let point = *point;
    let name = chart.name.clone();
    move |e| match e {
        JetError::Domain { .. } => GeometryError::Chart(ChartError::NotPositiveDefinite { chart: name.clone(), point }),
        other => GeometryError::Chart(ChartError::Jet(other)),
    }
}

/// Metric, frame field and inverse metric as jets.
struct MetricData {
    g: [[Jet; DIM]; DIM],
    ginv: [[Jet; DIM]; DIM],
    /// `E[i][a]`
    frame: [[Jet; DIM]; DIM],
}

fn metric_data(
    chart: &MetricChart,
    point: &[f64; 4],
    order: usize,
    rotation: Option<&[[f64; DIM]; DIM]>,
) -> Result<MetricData, GeometryError> {
    let g = chart.metric_jets(point, order)?;
    let err = jet_err(chart, point);
    let zero = Jet::zero(order);
    let mut l: [[Jet; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    let mut inv_diag: [Jet; DIM] = std::array::from_fn(|_| zero.clone());
    for j in 0..DIM {
        let mut s = g[j][j].clone();
        for k in 0..j {
            s.fma(-1.0, &l[j][k], &l[j][k]);
        }
        if s.value().is_nan() || s.value() <= 0.0 {
            return Err(ChartError::NotPositiveDefinite { chart: chart.name.clone(), point: *point }.into());
        }
        l[j][j] = s.sqrt().map_err(&err)?;
        inv_diag[j] = l[j][j].recip().map_err(&err)?;
        for i in j + 1..DIM {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s.fma(-1.0, &l[i][k], &l[j][k]);
            }
            l[i][j] = &s * &inv_diag[j];
        }
    }
    // L⁻¹ by forward substitution
    let mut li: [[Jet; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    for j in 0..DIM {
        li[j][j] = inv_diag[j].clone();
        for i in j + 1..DIM {
            let mut s = zero.clone();
            for k in j..i {
                s.fma(1.0, &l[i][k], &li[k][j]);
            }
            li[i][j] = (&s * &inv_diag[i]).scale(-1.0);
        }
    }
    // E = L^{-T}, then orientation and optional rotation
    let mut q = [[0.0; DIM]; DIM];
    for (a, row) in q.iter_mut().enumerate() {
        row[a] = 1.0;
    }
    if chart.orientation < 0.0 {
        q[3][3] = -1.0;
    }
    if let Some(r) = rotation {
        let mut m = [[0.0; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                m[a][b] = (0..DIM).map(|c| q[a][c] * r[c][b]).sum();
            }
        }
        q = m;
    }
    let frame: [[Jet; DIM]; DIM] = std::array::from_fn(|i| {
        std::array::from_fn(|b| {
            let mut e = zero.clone();
            for a in 0..DIM {
                if q[a][b] != 0.0 {
                    e.axpy(q[a][b], &li[a][i]);
                }
            }
            e
        })
    });
    let ginv: [[Jet; DIM]; DIM] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = zero.clone();
            for a in 0..DIM {
                s.fma(1.0, &li[a][i], &li[a][j]);
            }
            s
        })
    });
    Ok(MetricData { g, ginv, frame })
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`, order one below the metric.
fn christoffel_jets(md: &MetricData) -> Field {
    let order = md.g[0][0].order() - 1;
    let dg: Vec<Vec<Vec<Jet>>> = (0..DIM)
        .map(|s| (0..DIM).map(|i| (0..DIM).map(|j| md.g[i][j].partial0(s)).collect()).collect())
        .collect();
    let mut gam = vec![Jet::zero(order); 64];
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut acc = Jet::zero(order);
                for l in 0..DIM {
                    let mut bracket = dg[i][j][l].clone();
                    bracket.add_assign(&dg[j][i][l]);
                    bracket.axpy(-1.0, &dg[l][i][j]);
                    acc.fma(0.5, &md.ginv[k][l], &bracket);
                }
                gam[(k * DIM + i) * DIM + j] = acc;
            }
        }
    }
    gam
}

fn gamma(g: &Field, k: usize, i: usize, j: usize) -> &Jet {
    &g[(k * DIM + i) * DIM + j]
}

/// Coordinate `R_ijkl` from `R^l_ijk = ∂_jΓ^l_ki − ∂_kΓ^l_ji + Γ^m_ki Γ^l_jm − Γ^m_ji Γ^l_km`.
fn riemann_jets(md: &MetricData, gam: &Field) -> Field {
    let order = gam[0].order() - 1;
    let dgam: Vec<Vec<Jet>> = (0..DIM).map(|s| gam.iter().map(|x| x.partial0(s)).collect()).collect();
    let mut up = vec![Jet::zero(order); 256];
    for l in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut r = dgam[j][(l * DIM + k) * DIM + i].clone();
                    r.axpy(-1.0, &dgam[k][(l * DIM + j) * DIM + i]);
                    for m in 0..DIM {
                        r.fma(1.0, gamma(gam, m, k, i), gamma(gam, l, j, m));
                        r.fma(-1.0, gamma(gam, m, j, i), gamma(gam, l, k, m));
                    }
                    up[((l * DIM + i) * DIM + j) * DIM + k] = r;
                }
            }
        }
    }
    let mut down = vec![Jet::zero(order); 256];
    for i in 0..DIM {
        for rest in 0..64 {
            let mut s = Jet::zero(order);
            for m in 0..DIM {
                s.fma(1.0, &md.g[i][m], &up[m * 64 + rest]);
            }
            down[i * 64 + rest] = s;
        }
    }
    down
}

/// Covariant derivative of an all-covariant field; the new slot is last.
fn nabla(t: &Field, rank: usize, gam: &Field) -> Field {
    let n = t.len();
    let partials: Vec<[Jet; DIM]> = t.iter().map(|e| std::array::from_fn(|s| e.partial0(s))).collect();
    let mut out = Vec::with_capacity(n * DIM);
    for off in 0..n {
        for s in 0..DIM {
            let mut r = partials[off][s].clone();
            for slot in 0..rank {
                let stride = DIM.pow((rank - 1 - slot) as u32);
                let ia = (off / stride) % DIM;
                let base = off - ia * stride;
                for p in 0..DIM {
                    r.fma(-1.0, gamma(gam, p, s, ia), &t[base + p * stride]);
                }
            }
            out.push(r);
        }
    }
    out
}

/// Frame components `T_{a…} = Σ T_{i…} E[i][a]…` of a jet field.
fn to_frame_jets(t: &Field, rank: usize, frame: &[[Jet; DIM]; DIM]) -> Field {
    let mut cur = t.clone();
    for slot in 0..rank {
        let stride = DIM.pow((rank - 1 - slot) as u32);
        let mut next = Vec::with_capacity(cur.len());
        for o in 0..cur.len() {
            let a = (o / stride) % DIM;
            let base = o - a * stride;
            let mut e = Jet::zero(cur[0].order());
            for i in 0..DIM {
                e.fma(1.0, &cur[base + i * stride], &frame[i][a]);
            }
            next.push(e);
        }
        cur = next;
    }
    cur
}

fn values(t: &Field, rank: usize) -> DenseTensor<f64> {
    DenseTensor::covariant(rank, t.iter().map(Jet::value).collect()).expect("rank within bounds")
}

fn frame_values(frame: &[[Jet; DIM]; DIM]) -> [[f64; DIM]; DIM] {
    std::array::from_fn(|i| std::array::from_fn(|a| frame[i][a].value()))
}

/// `Δf = g^{pq}(∂_p∂_q f − Γ^r_pq ∂_r f)` at the expansion point.
fn laplacian_at(f: &Jet, ginv: &[[Jet; DIM]; DIM], gam: &Field) -> f64 {
    let unit = |a: usize| {
        let mut e = [0u8; 4];
        e[a] += 1;
        e
    };
    let grad: [f64; DIM] = std::array::from_fn(|r| f.derivative_at(&unit(r)));
    let mut s = 0.0;
    for p in 0..DIM {
        for q in 0..DIM {
            let mut e = unit(p);
            e[q] += 1;
            let mut h = f.derivative_at(&e);
            for (r, gr) in grad.iter().enumerate() {
                h -= gamma(gam, r, p, q).value() * gr;
            }
            s += ginv[p][q].value() * h;
        }
    }
    s
}

/// `(|T|², ⟨T, ⋆₁T⟩)` as jets for a frame-component field.
fn norm_and_duality(f: &Field, rank: usize) -> (Jet, Jet) {
    let order = f[0].order();
    let mut norm = Jet::zero(order);
    for e in f {
        norm.fma(1.0, e, e);
    }
    let eps = crate::algebra::levi_civita();
    let rest = DIM.pow((rank - 2) as u32);
    let mut dual = Jet::zero(order);
    for (o, &e) in eps.entries().iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let ij = o / 16;
        let kl = o % 16;
        for r in 0..rest {
            dual.fma(0.5 * e, &f[ij * rest + r], &f[kl * rest + r]);
        }
    }
    (norm, dual)
}

/// Christoffel symbols as jets of order `order − 1`, stored `[k][i][j]`.
pub fn christoffel(chart: &MetricChart, point: &[f64; 4], order: usize) -> Result<DenseTensor<Jet>, GeometryError> {
    if order == 0 || order > MAX_ORDER {
        return Err(GeometryError::Capacity { needed: 1, available: order });
    }
    let md = metric_data(chart, point, order, None)?;
    let gam = christoffel_jets(&md);
    Ok(DenseTensor::new(vec![Variance::Up, Variance::Down, Variance::Down], gam).expect("rank 3"))
}

/// Computes every field of [`CurvaturePoint`] needed by `request`.
pub fn curvature_at(chart: &MetricChart, point: &[f64; 4], request: &CurvatureRequest) -> Result<CurvaturePoint, GeometryError> {
    if request.depth > MAX_DEPTH {
        return Err(GeometryError::Depth(request.depth));
    }
    if request.laplacian.is_some_and(|l| l > MAX_LAPLACIAN) {
        return Err(GeometryError::Depth(request.laplacian.unwrap()));
    }
    let needed = request.required_jet_order();
    let order = request.jet_order.unwrap_or(needed);
    if order < needed || order > MAX_ORDER {
        return Err(GeometryError::Capacity { needed, available: order.min(MAX_ORDER) });
    }
    let md = metric_data(chart, point, order, request.frame_rotation.as_ref())?;
    let gam = christoffel_jets(&md);
    let riem_c = riemann_jets(&md, &gam);
    let co = order - 2;

    // Ricci, scalar and Weyl in coordinates
    let mut ric_c = vec![Jet::zero(co); 16];
    for i in 0..DIM {
        for k in 0..DIM {
            let mut s = Jet::zero(co);
            for j in 0..DIM {
                for l in 0..DIM {
                    s.fma(1.0, &md.ginv[j][l], &riem_c[((i * DIM + j) * DIM + k) * DIM + l]);
                }
            }
            ric_c[i * DIM + k] = s;
        }
    }
    let mut scal = Jet::zero(co);
    for i in 0..DIM {
        for k in 0..DIM {
            scal.fma(1.0, &md.ginv[i][k], &ric_c[i * DIM + k]);
        }
    }
    let g = &md.g;
    let mut weyl_c = Vec::with_capacity(256);
    for o in 0..256 {
        let (i, j, k, l) = (o / 64, (o / 16) % 4, (o / 4) % 4, o % 4);
        let rc = |a: usize, b: usize| &ric_c[a * DIM + b];
        let mut w = riem_c[o].clone();
        w.fma(-0.5, rc(i, k), &g[j][l]);
        w.fma(0.5, rc(i, l), &g[j][k]);
        w.fma(-0.5, rc(j, l), &g[i][k]);
        w.fma(0.5, rc(j, k), &g[i][l]);
        let mut gg = Jet::zero(co);
        gg.fma(1.0, &g[i][k], &g[j][l]);
        gg.fma(-1.0, &g[i][l], &g[j][k]);
        w.fma(1.0 / 6.0, &scal, &gg);
        weyl_c.push(w);
    }

    let e = frame_values(&md.frame);
    let riem = values(&riem_c, 4).transform(&e);
    let (ric, scalar, weyl_alg) = ricci_scalar_weyl(&riem)?;
    // The algebraic split in the frame is exactly trace-free; the coordinate
    // Weyl field is only used to seed the covariant derivatives.
    let weyl = weyl_alg;
    let w_plus = project_first_pair(&weyl, Sector::Plus);
    let w_minus = project_first_pair(&weyl, Sector::Minus);

    let metric_in_frame = {
        let gv = DenseTensor::covariant(2, g.iter().flatten().map(Jet::value).collect()).unwrap();
        gv.transform(&e)
    };

    // Cotton from Ricci data
    let (mut ricci_derivative, mut scalar_derivative, mut cotton, mut cotton_derivative) = (None, None, None, None);
    if order >= 3 {
        let dric = nabla(&ric_c, 2, &gam);
        let ds: Field = (0..DIM).map(|k| scal.partial0(k)).collect();
        let o3 = order - 3;
        let mut c = Vec::with_capacity(64);
        for o in 0..64 {
            let (i, j, k) = (o / 16, (o / 4) % 4, o % 4);
            let mut x = dric[(i * DIM + j) * DIM + k].clone();
            x.axpy(-1.0, &dric[(i * DIM + k) * DIM + j]);
            let mut corr = Jet::zero(o3);
            corr.fma(1.0, &ds[k], &g[i][j]);
            corr.fma(-1.0, &ds[j], &g[i][k]);
            x.axpy(-1.0 / 6.0, &corr);
            c.push(x);
        }
        ricci_derivative = Some(values(&dric, 3).transform(&e));
        scalar_derivative = Some(values(&ds, 1).transform(&e));
        if request.cotton_derivative {
            cotton_derivative = Some(values(&nabla(&c, 3, &gam), 4).transform(&e));
        }
        cotton = Some(values(&c, 3).transform(&e));
    }

    // ∇ᵏW and the Laplacians of their squared norms
    let lap_k = request.laplacian;
    let mut cur = weyl_c;
    let top = request.depth.max(lap_k.unwrap_or(0));
    let mut nabla_w = Vec::new();
    let mut laplacians = Vec::new();
    for k in 0..=top {
        if k > 0 {
            cur = nabla(&cur, 3 + k, &gam);
            if k <= request.depth {
                nabla_w.push(values(&cur, 4 + k).transform(&e));
            }
        }
        if lap_k.is_some_and(|l| k <= l) {
            let f = to_frame_jets(&cur, 4 + k, &md.frame);
            let (n, d) = norm_and_duality(&f, 4 + k);
            let full = laplacian_at(&n, &md.ginv, &gam);
            let dual = laplacian_at(&d, &md.ginv, &gam);
            laplacians.push(NormLaplacian { full, plus: 0.5 * (full + dual), minus: 0.5 * (full - dual) });
        }
    }

    Ok(CurvaturePoint {
        point: *point,
        jet_order: order,
        frame: e,
        metric_in_frame,
        christoffel: DenseTensor::new(
            vec![Variance::Up, Variance::Down, Variance::Down],
            gam.iter().map(Jet::value).collect(),
        )
        .unwrap(),
        riem_coord: values(&riem_c, 4),
        riem,
        ric,
        scalar,
        weyl,
        w_plus,
        w_minus,
        ricci_derivative,
        scalar_derivative,
        cotton,
        cotton_derivative,
        nabla_w,
        laplacians,
    })
}

/// Squared-norm fields whose Laplacian [`scalar_laplacian`] can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormField {
    Weyl,
    GradWeyl,
    HessWeyl,
}

/// `Δ|∇ᵏW|²` at a point, from the jet-valued norm field.
pub fn scalar_laplacian(chart: &MetricChart, point: &[f64; 4], field: NormField) -> Result<f64, GeometryError> {
    let k = match field {
        NormField::Weyl => 0,
        NormField::GradWeyl => 1,
        NormField::HessWeyl => 2,
    };
    let cp = curvature_at(chart, point, &CurvatureRequest { laplacian: Some(k), ..Default::default() })?;
    Ok(cp.laplacians[k].full)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(name: &str, p: [f64; 4], req: CurvatureRequest) -> CurvaturePoint {
        curvature_at(&MetricChart::by_name(name).unwrap(), &p, &req).unwrap()
    }

    #[test]
    fn flat_space_has_no_christoffels() {
        let c = MetricChart::by_name("flat").unwrap();
        let g = christoffel(&c, &[0.1, 0.2, 0.3, 0.4], 3).unwrap();
        assert!(g.entries().iter().all(Jet::is_zero));
    }

    #[test]
    fn round_two_sphere_christoffel() {
        let c = MetricChart::by_name("s2xs2").unwrap();
        let th = std::f64::consts::PI / 3.0;
        let g = christoffel(&c, &[th, 1.0, 1.0, 1.0], 2).unwrap();
        // Γ^θ_φφ = −sinθ cosθ
        let v = g.get(&[0, 1, 1]).value();
        assert!((v + th.sin() * th.cos()).abs() < 1e-15);
    }

    #[test]
    fn unit_four_sphere() {
        let cp = at("s4", [0.3, -0.2, 0.5, 0.1], CurvatureRequest::depth(1));
        assert!((cp.scalar - 12.0).abs() < 1e-12);
        let ric0 = cp.ric.sub(&DenseTensor::identity().scale(3.0)).unwrap();
        assert!(ric0.max_abs() < 1e-12);
        assert!(cp.weyl.norm() < 1e-12);
        assert!(cp.dw(1).norm() < 1e-11);
        let want = crate::algebra::metric_wedge();
        assert!(cp.riem.sub(&want).unwrap().max_abs() < 1e-12);
        assert!(cp.metric_in_frame.sub(&DenseTensor::identity()).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn fubini_study_values() {
        let cp = at("cp2", [0.3, -0.4, 0.2, 0.5], CurvatureRequest::depth(1));
        assert!((cp.scalar - 24.0).abs() < 1e-10, "R = {}", cp.scalar);
        assert!(cp.w_minus.norm() < 1e-10);
        assert!((cp.w_plus.norm_sq() - 96.0).abs() < 1e-9);
        assert!(cp.dw(1).norm() < 1e-9);
    }

    #[test]
    fn schwarzschild_is_ricci_flat_with_moving_weyl() {
        let cp = at("schwarzschild", [0.5, 4.0, 1.0, 2.0], CurvatureRequest::depth(1));
        assert!(cp.ric.norm() < 1e-12 * cp.riem.norm());
        assert!(cp.dw(1).norm_sq() > 1e-6);
    }

    #[test]
    fn product_of_unit_spheres_is_parallel() {
        let cp = at("s2xs2", [1.0, 0.3, 2.0, 0.7], CurvatureRequest::depth(1));
        assert!(cp.dw(1).norm() < 1e-9 * cp.weyl.norm());
        assert!(cp.ric.sub(&DenseTensor::identity()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn capacity_checked() {
        let c = MetricChart::by_name("s4").unwrap();
        let req = CurvatureRequest { depth: 3, jet_order: Some(4), ..Default::default() };
        assert_eq!(
            curvature_at(&c, &[0.0; 4], &req).unwrap_err(),
            GeometryError::Capacity { needed: 5, available: 4 }
        );
    }

    #[test]
    fn constant_norm_has_zero_laplacian() {
        let c = MetricChart::by_name("s2xs2").unwrap();
        let l = scalar_laplacian(&c, &[1.0, 0.3, 2.0, 0.7], NormField::Weyl).unwrap();
        let cp = at("s2xs2", [1.0, 0.3, 2.0, 0.7], CurvatureRequest::depth(0));
        assert!(l.abs() <= 1e-8 * cp.weyl.norm_sq() * cp.riem.norm());
    }

    #[test]
    fn frame_invariance_of_norms() {
        let c = MetricChart::by_name("schwarzschild-de-sitter").unwrap();
        let p = [0.2, 5.0, 1.2, 0.4];
        let a = curvature_at(&c, &p, &CurvatureRequest::depth(2)).unwrap();
        let q = crate::algebra::rotation_from_angles(&[0.3, -1.1, 0.7, 2.0, -0.4, 0.9]);
        let req = CurvatureRequest { depth: 2, frame_rotation: Some(q), ..Default::default() };
        let b = curvature_at(&c, &p, &req).unwrap();
        for k in 0..=2 {
            let (x, y) = (a.dw(k).norm_sq(), b.dw(k).norm_sq());
            assert!((x - y).abs() <= 1e-11 * x, "k = {k}");
        }
    }
}
