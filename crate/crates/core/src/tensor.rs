//! Dense tensors over four dimensions.
//!
//! Entries are stored row-major: the first slot varies slowest. Entries may be
//! plain `f64` (frame components at a point) or [`Jet`]s (coordinate
//! components as Taylor expansions about a point).

use std::collections::HashMap;

use thiserror::Error;

use crate::jet::Jet;

pub const DIM: usize = 4;

/// Highest rank a tensor may carry. Eight covers the fourth covariant
/// derivative of a four-slot tensor.
pub const MAX_RANK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Variance {
    Up,
    Down,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("rank {0} exceeds the maximum {MAX_RANK}")]
    RankTooLarge(usize),
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("slot {slot} out of range for rank {rank}")]
    Slot { slot: usize, rank: usize },
    #[error("contracting two {0:?} slots needs an inverse metric")]
    Variance(Variance),
    #[error("bad einsum spec `{0}`")]
    Einsum(String),
    #[error("Riemann-type symmetry violated by {0:e}")]
    Symmetry(f64),
}

/// Scalar types a tensor can hold.
pub trait Entry: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn add_assign(&mut self, other: &Self);
    /// `self += s · a · b`
    fn fma(&mut self, s: f64, a: &Self, b: &Self);
    fn scaled(&self, s: f64) -> Self;
    /// Value at the expansion point.
    fn value(&self) -> f64;
}

impl Entry for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn fma(&mut self, s: f64, a: &Self, b: &Self) {
        *self += s * a * b;
    }
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Entry for Jet {
    fn zero_like(&self) -> Self {
        Jet::zero(self.order())
    }
    fn add_assign(&mut self, other: &Self) {
        Jet::add_assign(self, other);
    }
    fn fma(&mut self, s: f64, a: &Self, b: &Self) {
        Jet::fma(self, s, a, b);
    }
    fn scaled(&self, s: f64) -> Self {
        self.scale(s)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    variance: Vec<Variance>,
    entries: Vec<T>,
}

/// Row-major offset of a multi-index.
pub fn offset(index: &[usize]) -> usize {
    index.iter().fold(0, |acc, &i| acc * DIM + i)
}

/// Multi-index of a row-major offset.
pub fn unravel(mut off: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = off % DIM;
        off /= DIM;
    }
    idx
}

impl<T: Entry> DenseTensor<T> {
    pub fn new(variance: Vec<Variance>, entries: Vec<T>) -> Result<Self, TensorError> {
        let rank = variance.len();
        if rank > MAX_RANK {
            return Err(TensorError::RankTooLarge(rank));
        }
        let expected = DIM.pow(rank as u32);
        if entries.len() != expected {
            return Err(TensorError::EntryCount { expected, got: entries.len() });
        }
        Ok(Self { variance, entries })
    }

    /// All-covariant tensor.
    pub fn covariant(rank: usize, entries: Vec<T>) -> Result<Self, TensorError> {
        Self::new(vec![Variance::Down; rank], entries)
    }

    /// Tensor of the given variance filled with zeros shaped like `proto`.
    pub fn zeros_like(variance: Vec<Variance>, proto: &T) -> Result<Self, TensorError> {
        let n = DIM.pow(variance.len() as u32);
        Self::new(variance, vec![proto.zero_like(); n])
    }

    pub fn from_fn(variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self, TensorError> {
        let rank = variance.len();
        if rank > MAX_RANK {
            return Err(TensorError::RankTooLarge(rank));
        }
        let entries = (0..DIM.pow(rank as u32)).map(|o| f(&unravel(o, rank))).collect();
        Self::new(variance, entries)
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [T] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn get(&self, index: &[usize]) -> &T {
        debug_assert_eq!(index.len(), self.rank());
        &self.entries[offset(index)]
    }

    pub fn get_mut(&mut self, index: &[usize]) -> &mut T {
        &mut self.entries[offset(index)]
    }

    fn check_slot(&self, slot: usize) -> Result<(), TensorError> {
        if slot >= self.rank() {
            Err(TensorError::Slot { slot, rank: self.rank() })
        } else {
            Ok(())
        }
    }

    /// Traces slots `a` and `b`. Mixed-variance pairs contract directly; equal
    /// variance pairs need the inverse (down, down) or the metric (up, up).
    pub fn contract(&self, a: usize, b: usize, metric: Option<&DenseTensor<T>>) -> Result<Self, TensorError> {
        self.check_slot(a)?;
        self.check_slot(b)?;
        if a == b {
            return Err(TensorError::Shape("cannot contract a slot with itself".into()));
        }
        let (a, b) = (a.min(b), a.max(b));
        let same = self.variance[a] == self.variance[b];
        if same && metric.is_none() {
            return Err(TensorError::Variance(self.variance[a]));
        }
        if let Some(m) = metric {
            if m.rank() != 2 {
                return Err(TensorError::Shape("metric argument must have rank 2".into()));
            }
        }
        let rank = self.rank();
        let variance: Vec<Variance> =
            self.variance.iter().enumerate().filter(|(s, _)| *s != a && *s != b).map(|(_, v)| *v).collect();
        let proto = &self.entries[0];
        let mut out = Self::zeros_like(variance, proto)?;
        let mut idx = vec![0; rank];
        for (o, slot_val) in out.entries.iter_mut().enumerate() {
            let rest = unravel(o, rank - 2);
            let mut r = rest.iter();
            for (s, x) in idx.iter_mut().enumerate() {
                if s != a && s != b {
                    *x = *r.next().unwrap();
                }
            }
            for p in 0..DIM {
                if same {
                    for q in 0..DIM {
                        idx[a] = p;
                        idx[b] = q;
                        slot_val.fma(1.0, metric.unwrap().get(&[p, q]), &self.entries[offset(&idx)]);
                    }
                } else {
                    idx[a] = p;
                    idx[b] = p;
                    slot_val.add_assign(&self.entries[offset(&idx)]);
                }
            }
        }
        Ok(out)
    }

    pub fn outer(&self, other: &Self) -> Result<Self, TensorError> {
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&other.variance);
        if variance.len() > MAX_RANK {
            return Err(TensorError::RankTooLarge(variance.len()));
        }
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for a in &self.entries {
            for b in &other.entries {
                let mut e = a.zero_like();
                e.fma(1.0, a, b);
                entries.push(e);
            }
        }
        Self::new(variance, entries)
    }

    /// Reorders slots: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self, TensorError> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank || perm.iter().any(|&p| p >= rank || std::mem::replace(&mut seen[p], true)) {
            return Err(TensorError::Shape(format!("{perm:?} is not a permutation of {rank} slots")));
        }
        let variance = perm.iter().map(|&p| self.variance[p]).collect();
        let mut src = vec![0; rank];
        Self::from_fn(variance, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.entries[offset(&src)].clone()
        })
    }

    fn swap_combine(&self, a: usize, b: usize, sign: f64) -> Result<Self, TensorError> {
        self.check_slot(a)?;
        self.check_slot(b)?;
        let mut perm: Vec<usize> = (0..self.rank()).collect();
        perm.swap(a, b);
        let swapped = self.permute(&perm)?;
        let entries = self
            .entries
            .iter()
            .zip(&swapped.entries)
            .map(|(x, y)| {
                let mut e = x.scaled(0.5);
                e.add_assign(&y.scaled(0.5 * sign));
                e
            })
            .collect();
        Self::new(self.variance.clone(), entries)
    }

    pub fn symmetrize(&self, a: usize, b: usize) -> Result<Self, TensorError> {
        self.swap_combine(a, b, 1.0)
    }

    pub fn antisymmetrize(&self, a: usize, b: usize) -> Result<Self, TensorError> {
        self.swap_combine(a, b, -1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { variance: self.variance.clone(), entries: self.entries.iter().map(|e| e.scaled(s)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, s: f64) -> Result<Self, TensorError> {
        if self.variance != other.variance {
            return Err(TensorError::Shape("operands differ in variance".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| {
                let mut e = a.clone();
                e.add_assign(&b.scaled(s));
                e
            })
            .collect();
        Ok(Self { variance: self.variance.clone(), entries })
    }

    /// Values at the expansion point.
    pub fn values(&self) -> DenseTensor<f64> {
        DenseTensor { variance: self.variance.clone(), entries: self.entries.iter().map(Entry::value).collect() }
    }
}

impl DenseTensor<f64> {
    pub fn zeros(rank: usize) -> Self {
        Self::covariant(rank, vec![0.0; DIM.pow(rank as u32)]).expect("rank within bounds")
    }

    pub fn identity() -> Self {
        Self::from_fn(vec![Variance::Down; 2], |i| if i[0] == i[1] { 1.0 } else { 0.0 }).unwrap()
    }

    /// Sum of squared components; the squared norm in an orthonormal frame.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum()
    }

    /// Largest deviation from `R_ijkl = −R_jikl = −R_ijlk = R_klij`.
    pub fn riemann_symmetry_violation(&self) -> f64 {
        assert_eq!(self.rank(), 4);
        let mut worst: f64 = 0.0;
        for o in 0..256 {
            let [i, j, k, l] = <[usize; 4]>::try_from(unravel(o, 4)).unwrap();
            let r = self.get(&[i, j, k, l]);
            worst = worst
                .max((r + self.get(&[j, i, k, l])).abs())
                .max((r + self.get(&[i, j, l, k])).abs())
                .max((r - self.get(&[k, l, i, j])).abs());
        }
        worst
    }

    /// Applies an orthogonal (or any) change of frame to every slot:
    /// `T'_{a..} = Σ T_{i..} M_{i a} ...`.
    pub fn transform(&self, m: &[[f64; DIM]; DIM]) -> Self {
        let mut cur = self.entries.clone();
        let rank = self.rank();
        let n = cur.len();
        for slot in 0..rank {
            let stride = DIM.pow((rank - 1 - slot) as u32);
            let mut next = vec![0.0; n];
            for (o, out) in next.iter_mut().enumerate() {
                let a = (o / stride) % DIM;
                let base = o - a * stride;
                *out = (0..DIM).map(|i| cur[base + i * stride] * m[i][a]).sum();
            }
            cur = next;
        }
        Self { variance: self.variance.clone(), entries: cur }
    }
}

/// Kulkarni–Nomizu product of two symmetric two-tensors:
/// `(a∧b)_ijkl = a_ik b_jl − a_il b_jk + b_ik a_jl − b_il a_jk`.
pub fn kulkarni_nomizu<T: Entry>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>, TensorError> {
    if a.rank() != 2 || b.rank() != 2 {
        return Err(TensorError::Shape("Kulkarni–Nomizu needs two rank-2 tensors".into()));
    }
    let proto = &a.entries[0];
    DenseTensor::from_fn(vec![a.variance[0]; 4], |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        // sum each sign separately so that a∧b and b∧a agree bit for bit
        let mut pos = proto.zero_like();
        pos.fma(1.0, a.get(&[i, k]), b.get(&[j, l]));
        pos.fma(1.0, b.get(&[i, k]), a.get(&[j, l]));
        let mut neg = proto.zero_like();
        neg.fma(1.0, a.get(&[i, l]), b.get(&[j, k]));
        neg.fma(1.0, b.get(&[i, l]), a.get(&[j, k]));
        pos.add_assign(&neg.scaled(-1.0));
        pos
    })
}

struct EinsumPlan {
    letters: Vec<char>,
    operands: Vec<Vec<usize>>,
    output: Vec<usize>,
}

fn plan(spec: &str, ranks: &[usize]) -> Result<EinsumPlan, TensorError> {
    let bad = || TensorError::Einsum(spec.to_string());
    let (lhs, rhs) = spec.split_once("->").ok_or_else(bad)?;
    let mut letters: Vec<char> = Vec::new();
    let mut pos: HashMap<char, usize> = HashMap::new();
    let mut slot = |c: char, letters: &mut Vec<char>| -> Result<usize, TensorError> {
        if !c.is_ascii_alphabetic() {
            return Err(bad());
        }
        Ok(*pos.entry(c).or_insert_with(|| {
            letters.push(c);
            letters.len() - 1
        }))
    };
    let mut operands = Vec::new();
    for term in lhs.split(',') {
        let ids = term.trim().chars().map(|c| slot(c, &mut letters)).collect::<Result<Vec<_>, _>>()?;
        operands.push(ids);
    }
    let output = rhs.trim().chars().map(|c| slot(c, &mut letters)).collect::<Result<Vec<_>, _>>()?;
    if operands.len() != ranks.len() || operands.iter().zip(ranks).any(|(o, r)| o.len() != *r) {
        return Err(bad());
    }
    if letters.len() > 10 {
        return Err(bad());
    }
    Ok(EinsumPlan { letters, operands, output })
}

/// Frame-component contraction by index string, e.g. `"ijkl,ipkq,jplq->"`.
/// Every repeated letter is summed; letters after `->` index the result.
pub fn einsum(spec: &str, operands: &[&DenseTensor<f64>]) -> Result<DenseTensor<f64>, TensorError> {
    let ranks: Vec<usize> = operands.iter().map(|t| t.rank()).collect();
    let p = plan(spec, &ranks)?;
    let nl = p.letters.len();
    let strides: Vec<Vec<usize>> = p
        .operands
        .iter()
        .map(|ids| {
            let mut s = vec![0usize; nl];
            for (k, &l) in ids.iter().enumerate() {
                s[l] += DIM.pow((ids.len() - 1 - k) as u32);
            }
            s
        })
        .collect();
    let mut out_stride = vec![0usize; nl];
    for (k, &l) in p.output.iter().enumerate() {
        out_stride[l] += DIM.pow((p.output.len() - 1 - k) as u32);
    }
    let mut out = vec![0.0; DIM.pow(p.output.len() as u32)];
    // odometer over all letters, keeping running offsets per operand
    let mut counter = vec![0usize; nl];
    let mut offs = vec![0usize; operands.len()];
    let mut out_off = 0usize;
    loop {
        let mut prod = 1.0;
        for (t, &o) in operands.iter().zip(&offs) {
            prod *= t.entries[o];
            if prod == 0.0 {
                break;
            }
        }
        out[out_off] += prod;
        // advance
        let mut l = nl;
        loop {
            if l == 0 {
                let variance = vec![Variance::Down; p.output.len()];
                return DenseTensor::new(variance, out);
            }
            l -= 1;
            counter[l] += 1;
            for (o, s) in offs.iter_mut().zip(&strides) {
                *o += s[l];
            }
            out_off += out_stride[l];
            if counter[l] < DIM {
                break;
            }
            counter[l] = 0;
            for (o, s) in offs.iter_mut().zip(&strides) {
                *o -= DIM * s[l];
            }
            out_off -= DIM * out_stride[l];
        }
    }
}

/// Scalar-valued [`einsum`].
pub fn einsum_scalar(spec: &str, operands: &[&DenseTensor<f64>]) -> f64 {
    einsum(spec, operands).expect("valid contraction spec").entries()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn delta() -> DenseTensor<f64> {
        DenseTensor::identity()
    }

    fn random_symmetric(seed: &[f64; 10]) -> DenseTensor<f64> {
        let mut k = 0;
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                m[i][j] = seed[k];
                m[j][i] = seed[k];
                k += 1;
            }
        }
        DenseTensor::from_fn(vec![Variance::Down; 2], |ix| m[ix[0]][ix[1]]).unwrap()
    }

    #[test]
    fn trace_of_identity() {
        let t = delta().contract(0, 1, Some(&delta())).unwrap();
        assert_eq!(t.entries(), &[4.0]);
    }

    #[test]
    fn down_down_contraction_needs_metric() {
        assert_eq!(delta().contract(0, 1, None), Err(TensorError::Variance(Variance::Down)));
        let mixed = DenseTensor::new(vec![Variance::Up, Variance::Down], delta().into_entries()).unwrap();
        assert_eq!(mixed.contract(0, 1, None).unwrap().entries(), &[4.0]);
    }

    #[test]
    fn kulkarni_nomizu_of_delta() {
        let gg = kulkarni_nomizu(&delta(), &delta()).unwrap();
        for o in 0..256 {
            let i = unravel(o, 4);
            let d = |a: usize, b: usize| if i[a] == i[b] { 1.0 } else { 0.0 };
            assert_eq!(gg.entries()[o], 2.0 * (d(0, 2) * d(1, 3) - d(0, 3) * d(1, 2)));
        }
        assert_eq!(gg.riemann_symmetry_violation(), 0.0);
        // (g∧g)_ijij = 2n(n−1)
        let t = einsum("ijij->", &[&gg]).unwrap();
        assert_eq!(t.entries(), &[24.0]);
    }

    #[test]
    fn entry_count_checked() {
        assert!(matches!(DenseTensor::covariant(2, vec![0.0; 15]), Err(TensorError::EntryCount { .. })));
        assert!(matches!(DenseTensor::covariant(9, vec![0.0; 4]), Err(TensorError::RankTooLarge(9))));
    }

    #[test]
    fn einsum_matches_explicit_loops() {
        let a = DenseTensor::from_fn(vec![Variance::Down; 3], |i| (i[0] * 7 + i[1] * 3 + i[2]) as f64 * 0.1).unwrap();
        let b = DenseTensor::from_fn(vec![Variance::Down; 2], |i| (i[0] as f64 - i[1] as f64).sin()).unwrap();
        let c = einsum("ijk,kj->i", &[&a, &b]).unwrap();
        for i in 0..4 {
            let mut s = 0.0;
            for j in 0..4 {
                for k in 0..4 {
                    s += a.get(&[i, j, k]) * b.get(&[k, j]);
                }
            }
            assert!((c.get(&[i]) - s).abs() < 1e-14);
        }
        assert!(einsum("ij,j->", &[&b, &b]).is_err());
    }

    proptest! {
        #[test]
        fn antisymmetrized_symmetric_vanishes(seed in prop::array::uniform10(-5.0f64..5.0)) {
            let s = random_symmetric(&seed);
            prop_assert!(s.antisymmetrize(0, 1).unwrap().max_abs() == 0.0);
        }

        #[test]
        fn kulkarni_nomizu_is_symmetric_and_riemann_type(
            sa in prop::array::uniform10(-5.0f64..5.0),
            sb in prop::array::uniform10(-5.0f64..5.0),
        ) {
            let (a, b) = (random_symmetric(&sa), random_symmetric(&sb));
            let ab = kulkarni_nomizu(&a, &b).unwrap();
            prop_assert_eq!(&ab, &kulkarni_nomizu(&b, &a).unwrap());
            prop_assert_eq!(ab.riemann_symmetry_violation(), 0.0);
        }

        #[test]
        fn permute_round_trip(vals in prop::collection::vec(-1.0f64..1.0, 64)) {
            let t = DenseTensor::covariant(3, vals).unwrap();
            let p = t.permute(&[2, 0, 1]).unwrap();
            // inverse of [2,0,1] is [1,2,0]
            prop_assert_eq!(p.permute(&[1, 2, 0]).unwrap(), t);
        }

        #[test]
        fn norm_invariant_under_rotation(
            vals in prop::collection::vec(-1.0f64..1.0, 256),
            angles in prop::array::uniform6(-3.0f64..3.0),
        ) {
            let t = DenseTensor::covariant(4, vals).unwrap();
            let q = crate::algebra::rotation_from_angles(&angles);
            let r = t.transform(&q);
            prop_assert!((r.norm_sq() - t.norm_sq()).abs() <= 1e-12 * t.norm_sq().max(1.0));
        }
    }
}
