//! Type-A root data for `u(p,q)` and the parabolic partition attached to
//! `L = U(p1) × U(p2,q)`.
//!
//! Root vectors are realized by matrix units: `E_{(i,j)} = e_ij` for every
//! root. With the trace form this basis is orthonormal for
//! `⟨X,Y⟩ = tr(X Y*)`, satisfies `[E_α, E_{−α}] = H_α` with
//! `H_α = e_ii − e_jj`, and `E_α* = E_{−α}`. Every structure constant is
//! `0` or `±1`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{Qi2, Scalar};

/// The root `e_i − e_j` (1-based, `i ≠ j`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn new(i: usize, j: usize) -> Self {
        assert!(i != j && i > 0 && j > 0, "not a root: ({i},{j})");
        Root { i, j }
    }

    pub fn is_positive(self) -> bool {
        self.i < self.j
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Root {
        Root { i: self.j, j: self.i }
    }

    /// `|δ|`: the positive root among `±δ`.
    pub fn abs(self) -> Root {
        if self.is_positive() {
            self
        } else {
            self.neg()
        }
    }

    /// `ε(δ)`: `+1` for positive roots, `−1` otherwise.
    pub fn sign(self) -> i64 {
        if self.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn is_compact(self, p: usize) -> bool {
        (self.i <= p) == (self.j <= p)
    }

    /// `self + other` when it is a root.
    pub fn plus(self, other: Root) -> Option<Root> {
        if self.j == other.i && self.i != other.j {
            Some(Root::new(self.i, other.j))
        } else if other.j == self.i && other.i != self.j {
            Some(Root::new(other.i, self.j))
        } else {
            None
        }
    }

    /// `self − other` when it is a root.
    pub fn minus(self, other: Root) -> Option<Root> {
        self.plus(other.neg())
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Flag data `(p, q, p1)` with the derived root sets (all positive roots,
/// sorted lexicographically).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicData {
    pub p: usize,
    pub q: usize,
    pub p1: usize,
    /// Δ(u)
    pub u: Vec<Root>,
    /// Δ(u∩k)
    pub u_k: Vec<Root>,
    /// Δ(u∩p)
    pub u_p: Vec<Root>,
    /// Δ(l∩p), positive part
    pub l_p: Vec<Root>,
    /// Δ(l∩k), positive part
    pub l_k: Vec<Root>,
}

impl ParabolicData {
    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn p2(&self) -> usize {
        self.p - self.p1
    }

    /// `s = |Δ(u∩k)|`
    pub fn s(&self) -> usize {
        self.u_k.len()
    }

    /// `t = |Δ(u∩p)|`
    pub fn t(&self) -> usize {
        self.u_p.len()
    }

    pub fn is_compact(&self, root: Root) -> bool {
        root.is_compact(self.p)
    }

    pub fn in_u(&self, root: Root) -> bool {
        root.i <= self.p1 && root.j > self.p1
    }

    pub fn in_l_p(&self, root: Root) -> bool {
        root.i > self.p1 && root.i <= self.p && root.j > self.p
    }

    /// `p2 = 0`: no fiber directions, the nilpotent algebra is abelian.
    pub fn is_degenerate(&self) -> bool {
        self.l_p.is_empty()
    }

    /// All roots of `A_{n−1}`, positive ones first.
    pub fn all_roots(&self) -> Vec<Root> {
        let n = self.n();
        let mut pos = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                pos.push(Root::new(i, j));
            }
        }
        let neg: Vec<Root> = pos.iter().map(|r| r.neg()).collect();
        pos.extend(neg);
        pos
    }
}

pub fn build_parabolic(p: i64, q: i64, p1: i64) -> Result<ParabolicData> {
    let bad = |reason: &str| Error::InvalidParabolic { p, q, p1, reason: reason.to_string() };
    if p < 1 {
        return Err(bad("p must be at least 1"));
    }
    if q < 1 {
        return Err(bad("q must be at least 1"));
    }
    if p1 < 1 || p1 > p {
        return Err(bad("p1 must satisfy 1 ≤ p1 ≤ p"));
    }
    if p + q > 64 {
        return Err(bad("p + q too large"));
    }
    let (p, q, p1) = (p as usize, q as usize, p1 as usize);
    let n = p + q;
    let mut pd = ParabolicData {
        p,
        q,
        p1,
        u: Vec::new(),
        u_k: Vec::new(),
        u_p: Vec::new(),
        l_p: Vec::new(),
        l_k: Vec::new(),
    };
    for i in 1..=n {
        for j in i + 1..=n {
            let r = Root::new(i, j);
            if pd.in_u(r) {
                pd.u.push(r);
                if r.is_compact(p) {
                    pd.u_k.push(r);
                } else {
                    pd.u_p.push(r);
                }
            } else if pd.in_l_p(r) {
                pd.l_p.push(r);
            } else {
                pd.l_k.push(r);
            }
        }
    }
    Ok(pd)
}

/// `N_{α,β}` from `[E_α, E_β] = N_{α,β} E_{α+β}`, computed from the
/// matrix-unit rule `[e_ij, e_kl] = δ_jk e_il − δ_li e_kj`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    table: BTreeMap<(Root, Root), i64>,
}

impl StructureConstants {
    /// `N_{α,β}`; zero when `α + β` is not a root.
    pub fn get(&self, a: Root, b: Root) -> i64 {
        self.table.get(&(a, b)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Root, Root), &i64)> {
        self.table.iter()
    }

    /// Flip the sign of one entry. Used by the self-test fault injection.
    pub fn corrupt(&mut self, a: Root, b: Root) {
        let v = self.get(a, b);
        self.table.insert((a, b), if v == 0 { 1 } else { -v });
    }
}

pub fn structure_constants(pd: &ParabolicData) -> StructureConstants {
    let roots = pd.all_roots();
    let mut table = BTreeMap::new();
    for &a in &roots {
        for &b in &roots {
            let v = if a.j == b.i && a.i != b.j {
                1
            } else if b.j == a.i && b.i != a.j {
                -1
            } else {
                0
            };
            if v != 0 {
                table.insert((a, b), v);
            }
        }
    }
    StructureConstants { table }
}

/// Labels of the matrix realization.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Generator {
    E(Root),
    H(Root),
}

/// Explicit `n×n` matrices for the root vectors and coroots.
#[derive(Clone, Debug)]
pub struct MatrixRealization {
    pub n: usize,
    pub p: usize,
    e: BTreeMap<Root, Mat<Qi2>>,
}

impl MatrixRealization {
    pub fn e(&self, r: Root) -> &Mat<Qi2> {
        &self.e[&r]
    }

    /// `H_α = e_ii − e_jj`, dual to `α` under the trace form.
    pub fn h(&self, r: Root) -> Mat<Qi2> {
        let mut m = Mat::zeros(self.n);
        m.set(r.i - 1, r.i - 1, Qi2::one());
        m.set(r.j - 1, r.j - 1, -Qi2::one());
        m
    }

    pub fn matrix(&self, g: Generator) -> Mat<Qi2> {
        match g {
            Generator::E(r) => self.e(r).clone(),
            Generator::H(r) => self.h(r),
        }
    }

    /// Diagonal matrix with the given entries.
    pub fn cartan(&self, diag: &[Qi2]) -> Mat<Qi2> {
        let mut m = Mat::zeros(self.n);
        for (k, &d) in diag.iter().enumerate() {
            m.set(k, k, d);
        }
        m
    }

    /// Antilinear involution fixing `u(p,q)`: `X ↦ −J X* J`.
    pub fn conj(&self, x: &Mat<Qi2>) -> Mat<Qi2> {
        let adj = x.adjoint();
        let mut m = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let s = if (i < self.p) == (j < self.p) { -1 } else { 1 };
                m.set(i, j, adj.get(i, j) * Qi2::from_int(s));
            }
        }
        m
    }

    /// Cartan involution `X ↦ J X J`.
    pub fn theta(&self, x: &Mat<Qi2>) -> Mat<Qi2> {
        let mut m = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let s = if (i < self.p) == (j < self.p) { 1 } else { -1 };
                m.set(i, j, x.get(i, j) * Qi2::from_int(s));
            }
        }
        m
    }

    pub fn generators(&self) -> Vec<Generator> {
        let mut g: Vec<Generator> = self.e.keys().map(|&r| Generator::E(r)).collect();
        g.extend(self.e.keys().filter(|r| r.is_positive()).map(|&r| Generator::H(r)));
        g
    }

    /// Check `[E_α,E_{−α}] = H_α`, `[E_α,E_β] = N_{α,β}E_{α+β}`, the relation
    /// `−θ(conj E_α) = E_α* = E_{−α}` and orthonormality.
    pub fn verify(&self, nc: &StructureConstants) -> Result<()> {
        let roots: Vec<Root> = self.e.keys().copied().collect();
        for &a in &roots {
            let br = self.e(a).commutator(self.e(a.neg()));
            if br != self.h(a) {
                return Err(Error::consistency(
                    "coroot-bracket",
                    format!("[E{a}, E{}] ≠ H{a}", a.neg()),
                ));
            }
            let inv = -self.theta(&self.conj(self.e(a)));
            if &inv != self.e(a.neg()) || self.e(a).adjoint() != *self.e(a.neg()) {
                return Err(Error::consistency(
                    "conjugation-involution",
                    format!("−θ(conj E{a}) ≠ E{}", a.neg()),
                ));
            }
            if self.e(a).inner(self.e(a)) != Qi2::one() {
                return Err(Error::consistency("orthonormal-root-vectors", format!("|E{a}| ≠ 1")));
            }
            for &b in &roots {
                if b == a.neg() {
                    continue;
                }
                let br = self.e(a).commutator(self.e(b));
                let expect = match a.plus(b) {
                    Some(c) => self.e(c).scale(Qi2::from_int(nc.get(a, b))),
                    None => Mat::zeros(self.n),
                };
                if a.plus(b).is_none() && nc.get(a, b) != 0 || br != expect {
                    return Err(Error::consistency(
                        "structure-constants-match-oracle",
                        format!("[E{a}, E{b}] disagrees with N = {}", nc.get(a, b)),
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn matrix_oracle(pd: &ParabolicData) -> MatrixRealization {
    let n = pd.n();
    let e = pd
        .all_roots()
        .into_iter()
        .map(|r| (r, Mat::unit(n, r.i - 1, r.j - 1)))
        .collect();
    MatrixRealization { n, p: pd.p, e }
}
