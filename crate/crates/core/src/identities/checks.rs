//! Residual evaluations. Each check returns one residual per independent
//! statement it covers; the runner keeps the worst one.

use crate::algebra::{
    cubic_residual, cubic_trace, cubic_cross, lambda_split, metric_wedge, operator_matrix, quadratic_residual,
    quartic_residual, Residual, Sector,
};
use crate::derdzinski::{check_cubic_contraction, check_div_free_relations, check_norm_formula, frame_derivatives, sector_frame};
use crate::geometry::CurvaturePoint;
use crate::tensor::DenseTensor;

use super::contract::*;

fn w_part(cp: &CurvaturePoint, s: Option<Sector>) -> T {
    cp.dw_part(0, s).into_owned()
}

fn dw_part(cp: &CurvaturePoint, k: usize, s: Option<Sector>) -> T {
    cp.dw_part(k, s).into_owned()
}

fn cotton(cp: &CurvaturePoint) -> &T {
    cp.cotton.as_ref().expect("cotton requested")
}

pub fn bianchi1(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let w = &cp.weyl;
    let b = e("itjk->ijkt", &[w]);
    let c = e("iktj->ijkt", &[w]);
    vec![tensor_identity(&[(1.0, w), (1.0, &b), (1.0, &c)], &[])]
}

pub fn weyl_trace_free(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let t = e("ijil->jl", &[&cp.weyl]);
    vec![Residual { abs: t.norm(), scale: cp.weyl.norm() }]
}

pub fn riemann_einstein(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let mw = metric_wedge();
    vec![tensor_identity(&[(1.0, &cp.riem)], &[(1.0, &cp.weyl), (cp.scalar / 12.0, &mw)])]
}

pub fn weyl_weyl_metric(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    vec![quadratic_residual(&w_part(cp, s))]
}

pub fn www(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    vec![cubic_residual(&w_part(cp, s))]
}

pub fn quartic(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    vec![quartic_residual(&w_part(cp, s))]
}

pub fn ricci_weyl_coupling(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let lhs = 2.0 * es("pq,pikl,qikl->", &[&cp.ric, &cp.weyl, &cp.weyl]);
    vec![scalar_identity(&[lhs], &[0.5 * cp.scalar * cp.weyl.norm_sq()])]
}

/// Eigen-decomposition `W± = ½Σ λ ω⊗ω`, quaternion relations, `W ω = 2λ ω`
/// under the operator convention, and `‖W±‖² = Σλ² = ¼|W±|²`.
pub fn eigenframe(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let s = s.expect("sector check");
    let w = cp.dw_sector(0, s);
    let frame = sector_frame(cp, s).expect("Weyl has curvature symmetries");
    let wn = w.norm();
    let recon = frame.reconstruct();
    let mut parts = vec![
        tensor_identity(&[(1.0, &w)], &[(1.0, &recon)]),
        Residual { abs: wn * (frame.quaternion_violation() + frame.orthonormality_violation()), scale: wn },
    ];
    for (lambda, form) in frame.eigenvalues.iter().zip(&frame.forms) {
        let f = DenseTensor::covariant(2, form.iter().flatten().copied().collect()).unwrap();
        let wf = e("ijkl,ij->kl", &[&w, &f]);
        parts.push(tensor_identity(&[(1.0, &wf)], &[(2.0 * lambda, &f)]));
    }
    let op = frame.eigenvalues.iter().map(|x| x * x).sum::<f64>().sqrt();
    parts.push(Residual::of(op - 0.5 * wn, &[op, 0.5 * wn]));
    parts
}

/// `Riem` as an operator on `Λ⁺ ⊕ Λ⁻` has blocks `W± + R/12`, off-diagonal
/// trace-free Ricci, with `W = W⁺ + W⁻`.
pub fn block_decomposition(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let blocks = lambda_split(&cp.riem, 1.0).expect("Riemann symmetries");
    let op = operator_matrix(&cp.riem);
    let asm = blocks.assemble();
    let frob = |m: &[[f64; 6]; 6]| m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let mut diff = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            diff[a][b] = op[a][b] - asm[a][b];
        }
    }
    let mut parts = vec![Residual { abs: frob(&diff), scale: frob(&op) }];
    parts.push(Residual::of(blocks.scalar - cp.scalar, &[blocks.scalar, cp.scalar]));
    for (k, s) in [Sector::Plus, Sector::Minus].into_iter().enumerate() {
        let wop = operator_matrix(&cp.dw_sector(0, s));
        let block = blocks.sector(s);
        let mut d: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                d = d.max((wop[3 * k + a][3 * k + b] - block[a][b]).abs());
            }
        }
        parts.push(Residual { abs: d, scale: frob(&wop).max(frob(&op)) });
    }
    let sum = cp.w_plus.add(&cp.w_minus).unwrap();
    parts.push(tensor_identity(&[(1.0, &cp.weyl)], &[(1.0, &sum)]));
    parts
}

pub fn cotton_symmetries(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let c = cotton(cp);
    let swapped = e("ikj->ijk", &[c]);
    let b = e("jki->ijk", &[c]);
    let d = e("kij->ijk", &[c]);
    vec![
        tensor_identity(&[(1.0, c), (1.0, &swapped)], &[]),
        tensor_identity(&[(1.0, c), (1.0, &b), (1.0, &d)], &[]),
    ]
}

pub fn cotton_traces(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let c = cotton(cp);
    ["iik->k", "iki->k", "kii->k"]
        .iter()
        .map(|spec| Residual { abs: e(spec, &[c]).norm(), scale: c.norm() })
        .collect()
}

pub fn cotton_weyl_divergence(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let c = cotton(cp);
    let dw = cp.dw(1);
    let a = e("tikjt->ijk", &[dw]);
    let b = e("tijkt->ijk", &[dw]);
    vec![tensor_identity(&[(1.0, c)], &[(2.0, &a)]), tensor_identity(&[(1.0, c)], &[(-2.0, &b)])]
}

pub fn cotton_divergence_free(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dc = cp.cotton_derivative.as_ref().expect("cotton derivative requested");
    vec![Residual { abs: e("ijki->jk", &[dc]).norm(), scale: dc.norm() }]
}

pub fn bianchi2_cotton(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let c = cotton(cp);
    let d = delta();
    let b = e("ijlkt->ijktl", &[dw]);
    let f = e("ijtlk->ijktl", &[dw]);
    let rhs = [
        e("itl,jk->ijktl", &[c, &d]),
        e("ilk,jt->ijktl", &[c, &d]),
        e("ikt,jl->ijktl", &[c, &d]),
        e("jtl,ik->ijktl", &[c, &d]),
        e("jlk,it->ijktl", &[c, &d]),
        e("jkt,il->ijktl", &[c, &d]),
    ];
    vec![tensor_identity(
        &[(1.0, dw), (1.0, &b), (1.0, &f)],
        &[(0.5, &rhs[0]), (0.5, &rhs[1]), (0.5, &rhs[2]), (-0.5, &rhs[3]), (-0.5, &rhs[4]), (-0.5, &rhs[5])],
    )]
}

fn div_w(cp: &CurvaturePoint) -> T {
    e("ijkli->jkl", &[cp.dw(1)])
}

pub fn grad_weyl_general(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let lhs = es("ijklt,ijktl->", &[dw, dw]);
    vec![scalar_identity(&[lhs], &[0.5 * dw.norm_sq(), -div_w(cp).norm_sq()])]
}

pub fn grad_weyl_harmonic(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let lhs = es("ijklt,ijktl->", &[dw, dw]);
    vec![scalar_identity(&[lhs], &[0.5 * dw.norm_sq()])]
}

pub fn bianchi2_harmonic(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let b = e("klmij->klijm", &[dw]);
    let c = e("kljmi->klijm", &[dw]);
    vec![tensor_identity(&[(1.0, dw), (1.0, &b), (1.0, &c)], &[])]
}

/// `W_tijk,t = 0` and `R_tijk,t = 0`.
pub fn harmonic_divergences(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let dric = cp.ricci_derivative.as_ref().expect("ricci derivative");
    let ds = cp.scalar_derivative.as_ref().expect("scalar derivative");
    let d = delta();
    let mw = metric_wedge();
    let ric_part = [
        e("ikt,jl->ijklt", &[dric, &d]),
        e("ilt,jk->ijklt", &[dric, &d]),
        e("jlt,ik->ijklt", &[dric, &d]),
        e("jkt,il->ijklt", &[dric, &d]),
    ];
    let scal_part = e("ijkl,t->ijklt", &[&mw, ds]);
    let terms: Vec<(f64, &T)> = vec![
        (1.0, dw),
        (0.5, &ric_part[0]),
        (-0.5, &ric_part[1]),
        (0.5, &ric_part[2]),
        (-0.5, &ric_part[3]),
        (-1.0 / 6.0, &scal_part),
    ];
    let driem = tensor_sum(&terms);
    vec![
        Residual { abs: e("tijkt->ijk", &[dw]).norm(), scale: dw.norm() },
        Residual { abs: e("tijkt->ijk", &[&driem]).norm(), scale: driem.norm() },
    ]
}

fn tensor_sum(terms: &[(f64, &T)]) -> T {
    let mut out = terms[0].1.scale(terms[0].0);
    for (c, t) in &terms[1..] {
        out = out.add(&t.scale(*c)).unwrap();
    }
    out
}

pub fn commutation2_riemann(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let lhs = commutator(cp.dw(2));
    let rhs = curvature_action(&cp.weyl, &cp.riem);
    vec![tensor_identity(&[(1.0, &lhs)], &[(1.0, &rhs)])]
}

/// `Z_rist = ½(R_rs δ_it − R_rt δ_is + R_it δ_rs − R_is δ_rt) − R/6 (δ_rs δ_it − δ_rt δ_is)`
fn schouten_wedge(cp: &CurvaturePoint) -> T {
    let r = &cp.ric;
    let d = delta();
    let mw = e("rs,it->rist", &[&d, &d]).sub(&e("rt,is->rist", &[&d, &d])).unwrap();
    let parts = [
        e("rs,it->rist", &[r, &d]),
        e("rt,is->rist", &[r, &d]),
        e("it,rs->rist", &[r, &d]),
        e("is,rt->rist", &[r, &d]),
    ];
    tensor_sum(&[
        (0.5, &parts[0]),
        (-0.5, &parts[1]),
        (0.5, &parts[2]),
        (-0.5, &parts[3]),
        (-cp.scalar / 6.0, &mw),
    ])
}

pub fn commutation2_general(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let lhs = commutator(cp.dw(2));
    let ww = curvature_action(&cp.weyl, &cp.weyl);
    let wz = curvature_action(&cp.weyl, &schouten_wedge(cp));
    vec![tensor_identity(&[(1.0, &lhs)], &[(1.0, &ww), (1.0, &wz)])]
}

pub fn commutation2_einstein(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let w = &cp.weyl;
    let d = delta();
    let lhs = commutator(cp.dw(2));
    let ww = curvature_action(w, w);
    let specs = [
        (1.0, "sjkl,it->ijklst"),
        (-1.0, "tjkl,is->ijklst"),
        (1.0, "iskl,jt->ijklst"),
        (-1.0, "itkl,js->ijklst"),
        (1.0, "ijsl,kt->ijklst"),
        (-1.0, "ijtl,ks->ijklst"),
        (1.0, "ijks,lt->ijklst"),
        (-1.0, "ijkt,ls->ijklst"),
    ];
    let pieces: Vec<(f64, T)> = specs.iter().map(|(c, s)| (*c, e(s, &[w, &d]))).collect();
    let refs: Vec<(f64, &T)> = pieces.iter().map(|(c, t)| (*c, t)).collect();
    let r12 = tensor_sum(&refs).scale(cp.scalar / 12.0);
    vec![tensor_identity(&[(1.0, &lhs)], &[(1.0, &ww), (1.0, &r12)])]
}

pub fn commutation2_contracted(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let w = &cp.weyl;
    let lhs = e("ijklsi->jkls", &[cp.dw(2)]);
    let a = e("irkl,rjsi->jkls", &[w, w]);
    let b = e("ijrl,rksi->jkls", &[w, w]);
    let c = e("ijkr,rlsi->jkls", &[w, w]);
    let d = e("sjkl->jkls", &[w]);
    vec![tensor_identity(&[(1.0, &lhs)], &[(1.0, &a), (1.0, &b), (1.0, &c), (cp.scalar / 4.0, &d)])]
}

/// The commutator `W_klmi,jm − W_klmi,mj` rewritten with the curvature split.
pub fn commutation2_first_term(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let w = &cp.weyl;
    let r = &cp.ric;
    let d = delta();
    let d2 = cp.dw(2);
    let l1 = e("klmijm->klij", &[d2]);
    let l2 = e("klmimj->klij", &[d2]);
    let rhs = [
        (-1.0, e("rlmi,rkmj->klij", &[w, w])),
        (1.0, e("rkmi,rlmj->klij", &[w, w])),
        (-1.0, e("mirj,mrlk->klij", &[w, w])),
        (-1.0, e("rj,irkl->klij", &[r, w])),
        (0.5, e("im,mjkl->klij", &[r, w])),
        (0.5, e("lm,mikj->klij", &[r, w])),
        (0.5, e("km,mijl->klij", &[r, w])),
        (-0.5, e("rm,mirl,kj->klij", &[r, w, &d])),
        (-0.5, e("rm,mikr,lj->klij", &[r, w, &d])),
        (-0.5, e("rm,mrkl,ij->klij", &[r, w, &d])),
    ];
    let refs: Vec<(f64, &T)> = rhs.iter().map(|(c, t)| (*c, t)).collect();
    vec![tensor_identity(&[(1.0, &l1), (-1.0, &l2)], &refs)]
}

/// Third-order commutation written out term by term.
pub fn commutation3_explicit(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let r = &cp.riem;
    let lhs = commutator(cp.dw(3));
    let terms = [
        e("vjklt,virs->ijkltrs", &[dw, r]),
        e("ivklt,vjrs->ijkltrs", &[dw, r]),
        e("ijvlt,vkrs->ijkltrs", &[dw, r]),
        e("ijkvt,vlrs->ijkltrs", &[dw, r]),
        e("ijklv,vtrs->ijkltrs", &[dw, r]),
    ];
    let refs: Vec<(f64, &T)> = terms.iter().map(|t| (1.0, t)).collect();
    vec![tensor_identity(&[(1.0, &lhs)], &refs)]
}

fn commutation_k(cp: &CurvaturePoint, k: usize) -> Vec<Residual> {
    let lhs = commutator(cp.dw(k));
    let rhs = curvature_action(cp.dw(k - 2), &cp.riem);
    vec![tensor_identity(&[(1.0, &lhs)], &[(1.0, &rhs)])]
}

pub fn commutation3_korder(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    commutation_k(cp, 3)
}

pub fn commutation4_korder(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    commutation_k(cp, 4)
}

fn laplacian_w(cp: &CurvaturePoint) -> T {
    trace_last_two(cp.dw(2))
}

pub fn laplacian_harmonic(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let (w, r, d) = (&cp.weyl, &cp.ric, delta());
    let lap = laplacian_w(cp);
    let rw = |s: &str| e(s, &[r, w]);
    let ww = |s: &str| e(s, &[w, w]);
    let rwd = |s: &str| e(s, &[r, w, &d]);
    let terms = [
        (1.0, rw("ip,pjkl->ijkl")),
        (-1.0, rw("jp,pikl->ijkl")),
        (-2.0, ww("ipjq,pqkl->ijkl")),
        (2.0, ww("ipql,jpqk->ijkl")),
        (-2.0, ww("ipqk,jpql->ijkl")),
        (0.5, rw("jp,pikl->ijkl")),
        (-0.5, rw("ip,pjkl->ijkl")),
        (0.5, rw("lp,pjki->ijkl")),
        (-0.5, rw("lp,pikj->ijkl")),
        (-0.5, rw("kp,pjli->ijkl")),
        (0.5, rw("kp,pilj->ijkl")),
        (0.5, rwd("pq,piql,kj->ijkl")),
        (-0.5, rwd("pq,pjql,ki->ijkl")),
        (0.5, rwd("pq,pikq,lj->ijkl")),
        (-0.5, rwd("pq,pjkq,li->ijkl")),
    ];
    let refs: Vec<(f64, &T)> = terms.iter().map(|(c, t)| (*c, t)).collect();
    vec![tensor_identity(&[(1.0, &lap)], &refs)]
}

/// `ΔW = (R/2)W − 2(W_ipjq W_pqkl − W_ipql W_jpqk + W_ipqk W_jpql)`
pub fn laplacian_bw(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let w = &cp.weyl;
    let lap = laplacian_w(cp);
    let a = e("ipjq,pqkl->ijkl", &[w, w]);
    let b = e("ipql,jpqk->ijkl", &[w, w]);
    let c = e("ipqk,jpql->ijkl", &[w, w]);
    vec![tensor_identity(&[(1.0, &lap)], &[(cp.scalar / 2.0, w), (-2.0, &a), (2.0, &b), (-2.0, &c)])]
}

/// `ΔW = (R/2)W − W_ijpq W_klpq − 2(W_ipkq W_jplq − W_iplq W_jpkq)`
pub fn laplacian_bw_rewritten(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let w = &cp.weyl;
    let lap = laplacian_w(cp);
    let a = e("ijpq,klpq->ijkl", &[w, w]);
    let b = e("ipkq,jplq->ijkl", &[w, w]);
    let c = e("iplq,jpkq->ijkl", &[w, w]);
    vec![tensor_identity(&[(1.0, &lap)], &[(cp.scalar / 2.0, w), (-1.0, &a), (-2.0, &b), (2.0, &c)])]
}

/// `−W_klij,mm − (W_klmi,jm − W_klmi,mj) + (W_mjkl,im − W_mjkl,mi) = 0`
pub fn laplacian_step(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let d2 = cp.dw(2);
    let t = [
        e("klijmm->klij", &[d2]),
        e("klmijm->klij", &[d2]),
        e("klmimj->klij", &[d2]),
        e("mjklim->klij", &[d2]),
        e("mjklmi->klij", &[d2]),
    ];
    vec![tensor_identity(&[(-1.0, &t[0]), (-1.0, &t[1]), (1.0, &t[2]), (1.0, &t[3]), (-1.0, &t[4])], &[])]
}

fn half_lap(cp: &CurvaturePoint, k: usize, s: Option<Sector>) -> f64 {
    0.5 * cp.laplacians[k].get(s)
}

pub fn bochner_weyl_harmonic(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let w = &cp.weyl;
    let ric = 2.0 * es("pq,pikl,qikl->", &[&cp.ric, w, w]);
    let cubic = -2.0 * (2.0 * cubic_cross(w) + 0.5 * cubic_trace(w));
    vec![scalar_identity(&[half_lap(cp, 0, None)], &[cp.dw(1).norm_sq(), ric, cubic])]
}

/// `½Δ|W|² = |∇W|² + (R/2)|W|² − 3 W_ijkl W_ijpq W_klpq`, for W or W±.
pub fn bochner_nice(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let w = w_part(cp, s);
    let dw = dw_part(cp, 1, s);
    vec![scalar_identity(
        &[half_lap(cp, 0, s)],
        &[dw.norm_sq(), 0.5 * cp.scalar * w.norm_sq(), -3.0 * cubic_trace(&w)],
    )]
}

pub fn key1(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let w = w_part(cp, s);
    let dw = dw_part(cp, 1, s);
    let lhs = key1_form(&w, &dw, &dw);
    vec![scalar_identity(&[lhs], &[-0.5 * w_dw_dw(&w, &dw)])]
}

pub fn key2(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let w = w_part(cp, s);
    let dw = dw_part(cp, 1, s);
    vec![scalar_identity(&[key2_form(&w, &dw)], &[0.5 * w_dw_dw(&w, &dw)])]
}

/// Orthogonality of the sectors inside the cubic gradient contraction:
/// `W∇W∇W = W⁺∇W⁺∇W⁺ + W⁻∇W⁻∇W⁻`, i.e. all mixed terms vanish.
pub fn sector_additivity(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let (wp, wm) = (&cp.w_plus, &cp.w_minus);
    let (dp, dm) = (cp.dw_sector(1, Sector::Plus), cp.dw_sector(1, Sector::Minus));
    let full = w_dw_dw(&cp.weyl, cp.dw(1));
    let split = [w_dw_dw(wp, &dp), w_dw_dw(wm, &dm)];
    let bound = |a: &T, b: &T, c: &T| a.norm() * b.norm() * c.norm();
    vec![
        scalar_identity(&[full], &split),
        vanishing(w_dw_dw_mixed(&cp.weyl, &dm, &dp), bound(&cp.weyl, &dm, &dp)),
        vanishing(w_dw_dw_mixed(wm, &dp, &dp), bound(wm, &dp, &dp)),
        vanishing(w_dw_dw_mixed(wp, &dm, &dm), bound(wp, &dm, &dm)),
    ]
}

pub fn mix(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let s = s.expect("sector check");
    let w = cp.dw_sector(0, s);
    let d = cp.dw_sector(1, s.other());
    vec![vanishing(key1_form(&w, &d, &d), w.norm() * d.norm_sq())]
}

pub fn derder(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let s = s.expect("sector check");
    let frame = sector_frame(cp, s).expect("Weyl has curvature symmetries");
    let dw = cp.dw_sector(1, s);
    let ed = frame_derivatives(&dw, &frame);
    let scale = 2.0 * dw.norm();
    vec![
        ed.reconstruction,
        Residual { abs: ed.consistency_gap, scale },
        Residual { abs: ed.trace_defect, scale },
    ]
}

pub fn nqder(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let s = s.expect("sector check");
    let frame = sector_frame(cp, s).expect("Weyl has curvature symmetries");
    let dw = cp.dw_sector(1, s);
    vec![check_norm_formula(&dw, &frame_derivatives(&dw, &frame))]
}

pub fn eqrhs(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let s = s.expect("sector check");
    let frame = sector_frame(cp, s).expect("Weyl has curvature symmetries");
    let dw = cp.dw_sector(1, s);
    let w = cp.dw_sector(0, s);
    vec![check_cubic_contraction(&w, &dw, &frame_derivatives(&dw, &frame))]
}

pub fn divz(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let s = s.expect("sector check");
    let frame = sector_frame(cp, s).expect("Weyl has curvature symmetries");
    let dw = cp.dw_sector(1, s);
    vec![check_div_free_relations(&frame_derivatives(&dw, &frame), &frame)]
}

/// `⟨∇ᵏW, ∇Δ∇^{k−1}W⟩`: the Laplacian sits in derivative slots `k, k+1` of `∇^{k+2}W`.
fn grad_lap(cp: &CurvaturePoint, k: usize, s: Option<Sector>) -> f64 {
    let a = dw_part(cp, k, s);
    let b = dw_part(cp, k + 2, s);
    let head = a.entries().len() / 4;
    // b slots: head, t, t, last
    let mut sum = 0.0;
    for h in 0..head {
        for last in 0..4 {
            let lap: f64 = (0..4).map(|t| b.entries()[((h * 4 + t) * 4 + t) * 4 + last]).sum();
            sum += a.entries()[h * 4 + last] * lap;
        }
    }
    sum
}

/// `8 W_{αβγi0,i1…ik} W_{αβγj0,i1…jk} K_{j0 i0 ik jk}`
fn bochner_first_slot(dk: &T, k_tensor: &T, k: usize) -> f64 {
    let head = "abc";
    let mid: String = "xyzuv".chars().take(k - 1).collect();
    let spec = format!("{head}i{mid}s,{head}j{mid}t->isjt");
    let y = e(&spec, &[dk, dk]);
    8.0 * es("isjt,jist->", &[&y, k_tensor])
}

/// `2 Σ_h W_{…,i1…ih…ik} W_{…,i1…jh…jk} R_{jh ih ik jk}`
fn bochner_derivative_slots(dk: &T, r: &T, k: usize) -> f64 {
    let mut total = 0.0;
    for h in 1..k {
        let mut a = String::from("abcd");
        let mut b = String::from("abcd");
        let others = ['x', 'y', 'z'];
        let mut o = 0;
        for slot in 1..k {
            if slot == h {
                a.push('i');
                b.push('j');
            } else {
                a.push(others[o]);
                b.push(others[o]);
                o += 1;
            }
        }
        a.push('s');
        b.push('t');
        let y = e(&format!("{a},{b}->isjt"), &[dk, dk]);
        total += 2.0 * es("isjt,jist->", &[&y, r]);
    }
    total
}

fn rough_bochner(cp: &CurvaturePoint, k: usize, s: Option<Sector>) -> Vec<Residual> {
    let dk = dw_part(cp, k, s);
    let dk1 = dw_part(cp, k + 1, s);
    let lhs = half_lap(cp, k, s);
    let r = &cp.riem;
    let terms = [
        dk1.norm_sq(),
        grad_lap(cp, k, s),
        0.25 * cp.scalar * dk.norm_sq(),
        bochner_first_slot(&dk, r, k),
        bochner_derivative_slots(&dk, r, k),
    ];
    vec![scalar_identity(&[lhs], &terms)]
}

pub fn rough_bochner_k1(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    rough_bochner(cp, 1, s)
}

pub fn rough_bochner_k2(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    rough_bochner(cp, 2, s)
}

/// Weyl form of the first rough Bochner formula.
pub fn rough_bochner_k1_weyl(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let w = &cp.weyl;
    let x = e("ijkls,rjklt->isrt", &[dw, dw]);
    let terms = [
        cp.dw(2).norm_sq(),
        grad_lap(cp, 1, None),
        0.25 * cp.scalar * dw.norm_sq(),
        8.0 * es("isrt,rist->", &[&x, w]),
        2.0 / 3.0 * cp.scalar * es("ijkls,sjkli->", &[dw, dw]),
    ];
    vec![scalar_identity(&[half_lap(cp, 1, None)], &terms)]
}

/// The explicit `k = 2` shape with indices as printed.
pub fn rough_bochner_k2_explicit(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let d2 = cp.dw(2);
    let r = &cp.riem;
    let a = e("ijkltr,pjklts->irps", &[d2, d2]);
    let b = e("ijkltr,ijklps->trps", &[d2, d2]);
    let terms = [
        cp.dw(3).norm_sq(),
        grad_lap(cp, 2, None),
        0.25 * cp.scalar * d2.norm_sq(),
        8.0 * es("irps,pirs->", &[&a, r]),
        2.0 * es("trps,ptrs->", &[&b, r]),
    ];
    vec![scalar_identity(&[half_lap(cp, 2, None)], &terms)]
}

pub fn second_bochner(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    let terms = [
        cp.dw(2).norm_sq(),
        13.0 / 12.0 * cp.scalar * dw.norm_sq(),
        -10.0 * w_dw_dw(&cp.weyl, dw),
    ];
    vec![scalar_identity(&[half_lap(cp, 1, None)], &terms)]
}

pub fn grad_laplacian(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    let dw = cp.dw(1);
    vec![scalar_identity(
        &[grad_lap(cp, 1, None)],
        &[0.5 * cp.scalar * dw.norm_sq(), -6.0 * w_dw_dw(&cp.weyl, dw)],
    )]
}

/// `½Δ|∇ᵏW|² = |∇^{k+1}W|² + ⟨∇ᵏW, Δ∇ᵏW⟩`
fn laplacian_norm(cp: &CurvaturePoint, k: usize) -> Vec<Residual> {
    let dk = cp.dw(k);
    let lap = trace_last_two(cp.dw(k + 2));
    vec![scalar_identity(&[half_lap(cp, k, None)], &[cp.dw(k + 1).norm_sq(), dk.dot(&lap)])]
}

pub fn laplacian_norm_k0(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    laplacian_norm(cp, 0)
}

pub fn laplacian_norm_k1(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    laplacian_norm(cp, 1)
}

pub fn laplacian_norm_k2(cp: &CurvaturePoint, _: Option<Sector>) -> Vec<Residual> {
    laplacian_norm(cp, 2)
}

pub fn pointwise_gap(cp: &CurvaturePoint, s: Option<Sector>) -> Vec<Residual> {
    let w = w_part(cp, s);
    let a = 6.0 * w.norm_sq();
    let b = cp.scalar * cp.scalar;
    vec![Residual::of(a - b, &[a, b])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::MetricChart;
    use crate::geometry::{curvature_at, CurvatureRequest};

    fn bw_with_last_term(cp: &CurvaturePoint, last: &str) -> f64 {
        let w = &cp.weyl;
        let lap = laplacian_w(cp);
        let a = e("ipjq,pqkl->ijkl", &[w, w]);
        let b = e("ipql,jpqk->ijkl", &[w, w]);
        let c = e(last, &[w, w]);
        let r = tensor_identity(&[(1.0, &lap)], &[(cp.scalar / 2.0, w), (-2.0, &a), (2.0, &b), (-2.0, &c)]);
        r.abs / r.scale
    }

    #[test]
    fn bw_last_term_index_order() {
        // The transposed order `W_ipqk W_jqpl` is not an identity; `W_ipqk W_jpql` is.
        let chart = MetricChart::by_name("schwarzschild").unwrap();
        for i in 0..5 {
            let p = chart.sample_point(7, i);
            let cp = curvature_at(&chart, &p, &CurvatureRequest::depth(2)).unwrap();
            assert!(bw_with_last_term(&cp, "ipqk,jpql->ijkl") < 1e-10);
            assert!(bw_with_last_term(&cp, "ipqk,jqpl->ijkl") > 1e-2);
        }
    }
}
