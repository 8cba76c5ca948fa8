//! Sparse operators on the exterior algebra `∧*u`.
//!
//! The basis of `∧*u` is indexed by subsets `S ⊆ Δu` encoded as bitmasks,
//! bit `k` standing for the `k`-th root of `Δu` in lexicographic order.
//! `Z_S = Z_{s_1} ∧ … ∧ Z_{s_k}` with `s_1 < … < s_k`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rootsys::{ParabolicData, Root};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct ExtOp<S> {
    dim: usize,
    entries: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> ExtOp<S> {
    pub fn zero(dim: usize) -> Self {
        ExtOp { dim, entries: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let entries = (0..dim).map(|k| ((k, k), S::one())).collect();
        ExtOp { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.entries.get(&(row, col)).copied().unwrap_or_else(S::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    fn insert_add(&mut self, row: usize, col: usize, v: S) {
        let e = self.entries.entry((row, col)).or_insert_with(S::zero);
        *e = *e + v;
        if e.is_zero() {
            self.entries.remove(&(row, col));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, s: S) -> Self {
        if s.is_zero() {
            return Self::zero(self.dim);
        }
        let entries = self
            .entries
            .iter()
            .map(|(&k, &v)| (k, v * s))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        ExtOp { dim: self.dim, entries }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(r, c), &v) in &other.entries {
            out.insert_add(r, c, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-S::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut by_row: BTreeMap<usize, Vec<(usize, S)>> = BTreeMap::new();
        for (&(r, c), &v) in &other.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut out = Self::zero(self.dim);
        for (&(r, k), &a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(c, b) in row {
                    out.insert_add(r, c, a * b);
                }
            }
        }
        out
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn adjoint(&self) -> Self {
        let entries = self.entries.iter().map(|(&(r, c), v)| ((c, r), v.conj())).collect();
        ExtOp { dim: self.dim, entries }
    }

    pub fn is_hermitian(&self) -> bool {
        self.sub(&self.adjoint()).is_zero()
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        for (&(r, c), &a) in &self.entries {
            out[r] = out[r] + a * v[c];
        }
        out
    }

    /// Keep only the entries with both indices of exterior degree `k`.
    pub fn restrict_degree(&self, k: usize) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(&(r, c), _)| degree(r) == k && degree(c) == k)
            .map(|(&key, &v)| (key, v))
            .collect();
        ExtOp { dim: self.dim, entries }
    }

    /// True when every entry maps degree `d` to degree `d`.
    pub fn preserves_degree(&self) -> bool {
        self.entries.keys().all(|&(r, c)| degree(r) == degree(c))
    }

    /// Dense block on the degree-`k` subspace, in [`subsets_of_degree`] order.
    pub fn block(&self, k: usize) -> Vec<Vec<S>> {
        let idx = subsets_of_degree(self.dim.trailing_zeros() as usize, k);
        idx.iter().map(|&r| idx.iter().map(|&c| self.get(r, c)).collect()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> ExtOp<T> {
        let entries = self
            .entries
            .iter()
            .map(|(&k, &v)| (k, f(v)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        ExtOp { dim: self.dim, entries }
    }
}

impl<S: Scalar> fmt::Debug for ExtOp<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtOp[{}]{{", self.dim)?;
        for (k, ((r, c), v)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({r},{c}): {v:?}")?;
        }
        write!(f, "}}")
    }
}

pub fn degree(mask: usize) -> usize {
    mask.count_ones() as usize
}

/// Bitmasks of size `k` over `m` generators, ascending.
pub fn subsets_of_degree(m: usize, k: usize) -> Vec<usize> {
    (0..1usize << m).filter(|&s| degree(s) == k).collect()
}

/// `e_γ` and `i_γ` for every `γ ∈ Δu`.
#[derive(Clone, Debug)]
pub struct ExteriorOps<S: Scalar> {
    pub roots: Vec<Root>,
    pub e: Vec<ExtOp<S>>,
    pub i: Vec<ExtOp<S>>,
}

impl<S: Scalar> ExteriorOps<S> {
    pub fn dim(&self) -> usize {
        1 << self.roots.len()
    }

    pub fn rank(&self) -> usize {
        self.roots.len()
    }

    pub fn index(&self, root: Root) -> Option<usize> {
        self.roots.iter().position(|&r| r == root)
    }

    pub fn e_of(&self, root: Root) -> &ExtOp<S> {
        &self.e[self.index(root).expect("root in Δu")]
    }

    pub fn i_of(&self, root: Root) -> &ExtOp<S> {
        &self.i[self.index(root).expect("root in Δu")]
    }

    pub fn identity(&self) -> ExtOp<S> {
        ExtOp::identity(self.dim())
    }

    pub fn zero_op(&self) -> ExtOp<S> {
        ExtOp::zero(self.dim())
    }

    /// Basis vector `Z_S` for the given roots (any order; the sign of the
    /// reordering is applied).
    pub fn wedge(&self, roots: &[Root]) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim()];
        v[0] = S::one();
        for &r in roots.iter().rev() {
            v = self.e_of(r).apply(&v);
        }
        v
    }

    /// Label `Z(1,2)∧Z(1,3)` of a basis mask.
    pub fn label(&self, mask: usize) -> String {
        if mask == 0 {
            return "1".to_string();
        }
        (0..self.rank())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| format!("Z{}", self.roots[k]))
            .collect::<Vec<_>>()
            .join("∧")
    }

    /// `{e_γ, i_γ'} = δ_{γγ'}`, `e_γ² = i_γ² = 0`, `i_γ = e_γ*`.
    pub fn check_relations(&self) -> Result<()> {
        let id = self.identity();
        for a in 0..self.rank() {
            if !self.e[a].mul(&self.e[a]).is_zero() || !self.i[a].mul(&self.i[a]).is_zero() {
                return Err(Error::consistency("exterior-nilpotency", format!("at {}", self.roots[a])));
            }
            if self.e[a].adjoint() != self.i[a] {
                return Err(Error::consistency("exterior-adjoint", format!("at {}", self.roots[a])));
            }
            for b in 0..self.rank() {
                let ac = self.e[a].anticommutator(&self.i[b]);
                let expected = if a == b { id.clone() } else { self.zero_op() };
                if ac != expected {
                    return Err(Error::consistency(
                        "exterior-anticommutation",
                        format!("{{e{}, i{}}}", self.roots[a], self.roots[b]),
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn exterior_ops<S: Scalar>(pd: &ParabolicData) -> ExteriorOps<S> {
    exterior_ops_for(pd.u.clone())
}

pub fn exterior_ops_for<S: Scalar>(roots: Vec<Root>) -> ExteriorOps<S> {
    let m = roots.len();
    let dim = 1usize << m;
    let mut e = Vec::with_capacity(m);
    let mut i = Vec::with_capacity(m);
    for g in 0..m {
        let mut eg = ExtOp::zero(dim);
        for s in 0..dim {
            if s >> g & 1 == 0 {
                let before = degree(s & ((1 << g) - 1));
                let sign = if before.is_multiple_of(2) { S::one() } else { -S::one() };
                eg.entries.insert((s | 1 << g, s), sign);
            }
        }
        i.push(eg.adjoint());
        e.push(eg);
    }
    ExteriorOps { roots, e, i }
}

/// Sign of `Z_S ∧ Z_{S^c} = ± Z_{all}`.
fn complement_sign(m: usize, s: usize) -> i64 {
    // each element of S^c must pass over the elements of S that follow it
    let mut inversions = 0;
    for b in 0..m {
        if s >> b & 1 == 0 {
            inversions += degree(s >> (b + 1));
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Hodge star `⋆Z_S = sgn(S, S^c) Z_{S^c}`.
pub fn hodge_star<S: Scalar>(m: usize, v: &[S]) -> Vec<S> {
    let full = (1usize << m) - 1;
    let mut out = vec![S::zero(); v.len()];
    for (s, &c) in v.iter().enumerate() {
        if !c.is_zero() {
            out[full ^ s] = c * S::from_int(complement_sign(m, s));
        }
    }
    out
}

/// Antilinear duality `v ↦ ⋆ v̄`, exchanging degrees `k` and `m − k`.
pub fn duality<S: Scalar>(m: usize, v: &[S]) -> Vec<S> {
    let conj: Vec<S> = v.iter().map(Scalar::conj).collect();
    hodge_star(m, &conj)
}

pub fn vec_is_zero<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(Scalar::is_zero)
}

pub fn vec_scale<S: Scalar>(v: &[S], s: S) -> Vec<S> {
    v.iter().map(|&x| x * s).collect()
}

pub fn vec_add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn vec_sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Hermitian inner product `Σ a_k conj(b_k)`.
pub fn vec_inner<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y.conj())
}

/// Unique exterior degree of a nonzero homogeneous vector.
pub fn vec_degree<S: Scalar>(v: &[S]) -> Option<usize> {
    let mut degs = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(s, _)| degree(s));
    let d = degs.next()?;
    degs.all(|e| e == d).then_some(d)
}
