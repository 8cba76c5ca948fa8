//! Principal symbols of `∂̄`, `∂̄*` and `□ = ∂̄∂̄* + ∂̄*∂̄` as elements of
//! `U(n₀) ⊗ End(∧*u)`, truncated to degree two.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{ExtOp, ExteriorOps};
use crate::nilpotent::NilpotentAlgebra;
use crate::realframe::FrameVector;
use crate::rootsys::{ParabolicData, Root, StructureConstants};
use crate::scalar::{Q2, Qi2, Scalar};

/// Word in the basis of `n₀`, by basis index.
pub type Word = Vec<usize>;

/// `Σ A_w ⊗ w` with words in PBW order (non-decreasing basis indices).
#[derive(Clone, PartialEq)]
pub struct ESymbol {
    dim: usize,
    terms: BTreeMap<Word, ExtOp<Qi2>>,
}

/// Rewrite a word in PBW order using `uv = vu + ⟦u,v⟧`.
pub fn normalize_word(n: &NilpotentAlgebra, w: &[usize]) -> Vec<(Q2, Word)> {
    let Some(k) = (0..w.len().saturating_sub(1)).find(|&k| w[k] > w[k + 1]) else {
        return vec![(Q2::one(), w.to_vec())];
    };
    let mut swapped = w.to_vec();
    swapped.swap(k, k + 1);
    let mut out = normalize_word(n, &swapped);
    for (m, c) in n.bracket(w[k], w[k + 1]) {
        let mut shorter: Word = w[..k].to_vec();
        shorter.push(m);
        shorter.extend_from_slice(&w[k + 2..]);
        for (c2, word) in normalize_word(n, &shorter) {
            out.push((c * c2, word));
        }
    }
    out
}

impl ESymbol {
    pub fn zero(dim: usize) -> Self {
        ESymbol { dim, terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &ExtOp<Qi2>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &[usize]) -> Option<&ExtOp<Qi2>> {
        self.terms.get(w)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `a ⊗ w` for a word already in PBW order.
    fn add_normal(&mut self, w: Word, a: ExtOp<Qi2>) {
        let sum = match self.terms.remove(&w) {
            Some(old) => old.add(&a),
            None => a,
        };
        if !sum.is_zero() {
            self.terms.insert(w, sum);
        }
    }

    /// Add `a ⊗ w` for an arbitrary word.
    pub fn add_word(&mut self, n: &NilpotentAlgebra, w: &[usize], a: &ExtOp<Qi2>) {
        for (c, word) in normalize_word(n, w) {
            self.add_normal(word, a.scale(Qi2::real(c)));
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, a) in &o.terms {
            out.add_normal(w.clone(), a.clone());
        }
        out
    }

    pub fn scale(&self, s: Qi2) -> Self {
        let mut out = Self::zero(self.dim);
        for (w, a) in &self.terms {
            out.add_normal(w.clone(), a.scale(s));
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-Qi2::one()))
    }

    pub fn mul(&self, o: &Self, n: &NilpotentAlgebra) -> Self {
        let mut out = Self::zero(self.dim);
        for (w1, a) in &self.terms {
            for (w2, b) in &o.terms {
                let ab = a.mul(b);
                if ab.is_zero() {
                    continue;
                }
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_word(n, &w, &ab);
            }
        }
        out
    }

    /// Formal adjoint: real vector fields are skew-adjoint, so
    /// `(A ⊗ b_1⋯b_k)* = (−1)^k A* ⊗ b_k⋯b_1`.
    pub fn formal_adjoint(&self, n: &NilpotentAlgebra) -> Self {
        let mut out = Self::zero(self.dim);
        for (w, a) in &self.terms {
            let mut rev = w.clone();
            rev.reverse();
            let sign = if w.len() % 2 == 0 { Qi2::one() } else { -Qi2::one() };
            out.add_word(n, &rev, &a.adjoint().scale(sign));
        }
        out
    }

    pub fn restrict_degree(&self, k: usize) -> Result<Self> {
        let max = self.dim.trailing_zeros() as usize;
        if k > max {
            return Err(Error::DegreeOutOfRange { degree: k, max });
        }
        let mut out = Self::zero(self.dim);
        for (w, a) in &self.terms {
            out.add_normal(w.clone(), a.restrict_degree(k));
        }
        Ok(out)
    }

    /// Terms whose word has the given length.
    pub fn part(&self, order: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(w, _)| w.len() == order)
            .map(|(w, a)| (w.clone(), a.clone()))
            .collect();
        ESymbol { dim: self.dim, terms }
    }

    pub fn preserves_degree(&self) -> bool {
        self.terms.values().all(ExtOp::preserves_degree)
    }

    pub fn display(&self, n: &NilpotentAlgebra) -> String {
        let mut parts = Vec::new();
        for (w, a) in &self.terms {
            let word: Vec<String> = w.iter().map(|&k| n.basis[k].to_string()).collect();
            parts.push(format!("[{} entries]⊗{}", a.nnz(), word.join("·")));
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for ESymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

fn frame_index(n: &NilpotentAlgebra, v: FrameVector) -> usize {
    n.index_of(v).expect("frame vector of n₀")
}

/// `∂̄ ≃ Σ_γ e_γ (X_γ − iY_γ)/√2`.
pub fn dolbeault_symbol(pd: &ParabolicData, n: &NilpotentAlgebra, ext: &ExteriorOps<Qi2>) -> ESymbol {
    let h = Qi2::real(Q2::inv_sqrt2());
    let i = Qi2::imag_unit();
    let mut out = ESymbol::zero(ext.dim());
    for &g in &pd.u {
        let e = ext.e_of(g);
        out.add_word(n, &[frame_index(n, FrameVector::x(g))], &e.scale(h));
        out.add_word(n, &[frame_index(n, FrameVector::y(g))], &e.scale(-i * h));
    }
    out
}

/// `∂̄* ≃ −Σ_γ i_γ (X_γ + iY_γ)/√2`, the formal adjoint of [`dolbeault_symbol`].
pub fn adjoint_symbol(pd: &ParabolicData, n: &NilpotentAlgebra, ext: &ExteriorOps<Qi2>) -> ESymbol {
    let h = Qi2::real(Q2::inv_sqrt2());
    let i = Qi2::imag_unit();
    let mut out = ESymbol::zero(ext.dim());
    for &g in &pd.u {
        let c = ext.i_of(g);
        out.add_word(n, &[frame_index(n, FrameVector::x(g))], &c.scale(-h));
        out.add_word(n, &[frame_index(n, FrameVector::y(g))], &c.scale(-i * h));
    }
    out
}

/// `∂̄∂̄* + ∂̄*∂̄` by composition in `U(n₀) ⊗ End(∧*u)`.
pub fn laplacian_symbol(pd: &ParabolicData, n: &NilpotentAlgebra, ext: &ExteriorOps<Qi2>) -> ESymbol {
    let d = dolbeault_symbol(pd, n, ext);
    let ds = adjoint_symbol(pd, n, ext);
    d.mul(&ds, n).add(&ds.mul(&d, n))
}

/// Which structure constant multiplies the first-order terms of the
/// closed-form Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalReading {
    /// `N_{α,−β}`
    AlphaMinusBeta,
    /// `N_{−α,β} = −N_{α,−β}`
    MinusAlphaBeta,
}

impl LocalReading {
    pub fn coefficient(self, nc: &StructureConstants, alpha: Root, beta: Root) -> i64 {
        match self {
            LocalReading::AlphaMinusBeta => nc.get(alpha, beta.neg()),
            LocalReading::MinusAlphaBeta => nc.get(alpha.neg(), beta),
        }
    }
}

/// The reading confirmed by [`laplacian_symbol`] for every instance with
/// `p + q ≤ 6` (see the tests and the acceptance suite).
pub const LOCAL_READING: LocalReading = LocalReading::MinusAlphaBeta;

/// Pairs `(α, β)` with `α ∈ Δ(u∩k)`, `β ∈ Δ(u∩p)`, `|α−β| = γ`.
pub fn starred_pairs(pd: &ParabolicData, gamma: Root) -> Vec<(Root, Root)> {
    let mut out = Vec::new();
    for &a in &pd.u_k {
        for &b in &pd.u_p {
            if a.minus(b).map(Root::abs) == Some(gamma) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Closed form
///
/// ```text
/// −½ Σ_{γ∈Δu} (X_γ² + Y_γ²)
///   + (√2/2) Σ_{γ∈Δ(l∩p)} [ (Σ* c (e_α i_β − e_β i_α)) X_γ + i (Σ* c (e_α i_β + e_β i_α)) Y_γ ]
/// ```
///
/// with `c` given by `reading`.
pub fn local_formula(
    pd: &ParabolicData,
    n: &NilpotentAlgebra,
    nc: &StructureConstants,
    ext: &ExteriorOps<Qi2>,
    reading: LocalReading,
) -> ESymbol {
    let mut out = ESymbol::zero(ext.dim());
    let id = ext.identity().scale(Qi2::real(Q2::from_ratio(-1, 2)));
    for &g in &pd.u {
        for v in [FrameVector::x(g), FrameVector::y(g)] {
            let k = frame_index(n, v);
            out.add_word(n, &[k, k], &id);
        }
    }
    let h = Qi2::real(Q2::inv_sqrt2());
    let i = Qi2::imag_unit();
    for &g in &pd.l_p {
        let mut xs = ext.zero_op();
        let mut ys = ext.zero_op();
        for (a, b) in starred_pairs(pd, g) {
            let c = Qi2::from_int(reading.coefficient(nc, a, b));
            let ab = ext.e_of(a).mul(ext.i_of(b));
            let ba = ext.e_of(b).mul(ext.i_of(a));
            xs = xs.add(&ab.sub(&ba).scale(c));
            ys = ys.add(&ab.add(&ba).scale(c));
        }
        out.add_word(n, &[frame_index(n, FrameVector::x(g))], &xs.scale(h));
        out.add_word(n, &[frame_index(n, FrameVector::y(g))], &ys.scale(i * h));
    }
    out
}

/// Readings of the closed form that agree with the composition.
pub fn matching_readings(
    pd: &ParabolicData,
    n: &NilpotentAlgebra,
    nc: &StructureConstants,
    ext: &ExteriorOps<Qi2>,
    lap: &ESymbol,
) -> Vec<LocalReading> {
    [LocalReading::AlphaMinusBeta, LocalReading::MinusAlphaBeta]
        .into_iter()
        .filter(|&r| local_formula(pd, n, nc, ext, r) == *lap)
        .collect()
}

/// Composition against the closed form under [`LOCAL_READING`], plus formal
/// self-adjointness and degree preservation.
pub fn verify_laplacian(
    pd: &ParabolicData,
    n: &NilpotentAlgebra,
    nc: &StructureConstants,
    ext: &ExteriorOps<Qi2>,
    lap: &ESymbol,
) -> Result<()> {
    if local_formula(pd, n, nc, ext, LOCAL_READING) != *lap {
        return Err(Error::consistency(
            "laplacian-symbol-composition",
            "composition differs from the closed form",
        ));
    }
    if lap.formal_adjoint(n) != *lap {
        return Err(Error::consistency("laplacian-self-adjoint", "□* ≠ □"));
    }
    if !lap.preserves_degree() {
        return Err(Error::consistency("laplacian-degree", "a term changes exterior degree"));
    }
    Ok(())
}
