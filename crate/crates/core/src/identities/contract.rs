//! Contraction helpers shared by the identity checks.

use crate::algebra::Residual;
use crate::tensor::{einsum, DenseTensor, DIM};

pub type T = DenseTensor<f64>;

/// [`einsum`] for specs known to be valid.
pub fn e(spec: &str, ops: &[&T]) -> T {
    einsum(spec, ops).unwrap_or_else(|err| panic!("contraction `{spec}`: {err}"))
}

/// Scalar [`e`].
pub fn es(spec: &str, ops: &[&T]) -> f64 {
    e(spec, ops).entries()[0]
}

/// `W_ijkl W_ijpq,t W_klpq,t`
pub fn w_dw_dw(w: &T, dw: &T) -> f64 {
    let a = e("ijpqt,klpqt->ijkl", &[dw, dw]);
    a.dot(w)
}

/// `A_ijkl B_ijpq,t C_klpq,t` for three possibly different tensors.
pub fn w_dw_dw_mixed(a: &T, b: &T, c: &T) -> f64 {
    e("ijpqt,klpqt->ijkl", &[b, c]).dot(a)
}

/// `A_ijkl B_jpqt,k C_ipqt,l`
pub fn key1_form(a: &T, b: &T, c: &T) -> f64 {
    let x = e("jpqtk,ipqtl->ijkl", &[b, c]);
    x.dot(a)
}

/// `W_ijkl W_ipkq,t W_jplq,t`
pub fn key2_form(w: &T, dw: &T) -> f64 {
    e("ipkqt,jplqt->ijkl", &[dw, dw]).dot(w)
}

/// Antisymmetrization in the last two slots: `T_{…st} − T_{…ts}`.
pub fn commutator(t: &T) -> T {
    let r = t.rank();
    let mut perm: Vec<usize> = (0..r).collect();
    perm.swap(r - 1, r - 2);
    t.sub(&t.permute(&perm).expect("valid permutation")).expect("same shape")
}

/// Trace of the last two slots (the rough Laplacian of a derivative tensor).
pub fn trace_last_two(t: &T) -> T {
    let r = t.rank();
    let n = t.entries().len() / (DIM * DIM);
    let e: Vec<f64> = (0..n).map(|o| (0..DIM).map(|s| t.entries()[o * DIM * DIM + s * DIM + s]).sum()).collect();
    DenseTensor::covariant(r - 2, e).expect("rank within bounds")
}

/// `Σ_a Σ_p T_{…p…} K_{p x_a s t}` over every slot `a` of `t`, with the two
/// new slots `s, t` appended: the curvature action behind all commutation
/// formulas.
pub fn curvature_action(t: &T, k: &T) -> T {
    let r = t.rank();
    let n = t.entries().len();
    let te = t.entries();
    let ke = k.entries();
    let mut out = vec![0.0; n * DIM * DIM];
    for o in 0..n {
        for a in 0..r {
            let stride = DIM.pow((r - 1 - a) as u32);
            let xa = (o / stride) % DIM;
            let base = o - xa * stride;
            for p in 0..DIM {
                let v = te[base + p * stride];
                if v == 0.0 {
                    continue;
                }
                let kb = (p * DIM + xa) * DIM * DIM;
                let ob = o * DIM * DIM;
                for st in 0..DIM * DIM {
                    out[ob + st] += v * ke[kb + st];
                }
            }
        }
    }
    DenseTensor::covariant(r + 2, out).expect("rank within bounds")
}

/// Residual of `Σ lhs = Σ rhs` for tensors with coefficients; the scale is the
/// largest weighted term.
pub fn tensor_identity(lhs: &[(f64, &T)], rhs: &[(f64, &T)]) -> Residual {
    let shape = lhs.first().or(rhs.first()).expect("non-empty identity").1;
    let mut diff = vec![0.0; shape.entries().len()];
    let mut scale: f64 = 0.0;
    for (sign, side) in [(1.0, lhs), (-1.0, rhs)] {
        for (c, t) in side {
            scale = scale.max(c.abs() * t.norm());
            for (d, x) in diff.iter_mut().zip(t.entries()) {
                *d += sign * c * x;
            }
        }
    }
    Residual { abs: diff.iter().map(|x| x * x).sum::<f64>().sqrt(), scale }
}

/// Residual of `Σ lhs = Σ rhs` for scalars.
pub fn scalar_identity(lhs: &[f64], rhs: &[f64]) -> Residual {
    let diff = lhs.iter().sum::<f64>() - rhs.iter().sum::<f64>();
    Residual::of(diff, &[lhs, rhs].concat())
}

/// Residual of an identity asserting `value = 0`, referenced against a
/// Cauchy–Schwarz bound of the contraction.
pub fn vanishing(value: f64, bound: f64) -> Residual {
    Residual { abs: value.abs(), scale: bound }
}

/// Identity tensor `δ_ij`.
pub fn delta() -> T {
    DenseTensor::identity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{metric_wedge, random_sector_tensor, Sector};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn commutator_is_antisymmetric() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let (w, _) = random_sector_tensor(&mut rng, Sector::Plus);
        let x = w.outer(&delta()).unwrap();
        let c = commutator(&x);
        assert!(c.add(&commutator(&c).scale(-0.5)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn curvature_action_matches_einsum() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
        let (w, _) = random_sector_tensor(&mut rng, Sector::Minus);
        let r = metric_wedge().add(&w).unwrap();
        let a = curvature_action(&w, &r);
        let b = [
            e("rjkl,rist->ijklst", &[&w, &r]),
            e("irkl,rjst->ijklst", &[&w, &r]),
            e("ijrl,rkst->ijklst", &[&w, &r]),
            e("ijkr,rlst->ijklst", &[&w, &r]),
        ]
        .into_iter()
        .reduce(|x, y| x.add(&y).unwrap())
        .unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn trace_last_two_of_outer_delta() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let (w, _) = random_sector_tensor(&mut rng, Sector::Plus);
        let x = w.outer(&delta()).unwrap();
        assert!(trace_last_two(&x).sub(&w.scale(4.0)).unwrap().max_abs() < 1e-14);
    }
}
