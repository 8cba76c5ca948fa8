//! The graded 2-step nilpotent algebra `n₀` on the tangent space at the
//! origin, the bracket-generating condition, and strongly orthogonal
//! sequences in `Δ(l∩p)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::rank;
use crate::realframe::{build_frame, frame_bracket, FrameKind, FrameVector};
use crate::rootsys::{matrix_oracle, MatrixRealization, ParabolicData, Root, StructureConstants};
use crate::scalar::{Q2, Qi2};

/// `n₀ = layer1 ⊕ layer2` with `layer1` spanned by the horizontal frame
/// (`Δu`) and `layer2` by the fiber frame (`Δ(l∩p)`). The basis order is the
/// PBW order: layer 1 then layer 2, each sorted by `(kind, root)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilpotentAlgebra {
    pub basis: Vec<FrameVector>,
    pub layer1_len: usize,
    index: BTreeMap<FrameVector, usize>,
    /// `⟦b_i, b_j⟧` for `i < j`, as a combination of layer-2 indices.
    table: BTreeMap<(usize, usize), BTreeMap<usize, Q2>>,
}

impl NilpotentAlgebra {
    fn empty(pd: &ParabolicData) -> Self {
        let frame = build_frame(pd);
        let layer1_len = frame.e_block.len();
        let basis: Vec<FrameVector> = frame.iter().copied().collect();
        let index = basis.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        NilpotentAlgebra { basis, layer1_len, index, table: BTreeMap::new() }
    }

    fn set(&mut self, a: FrameVector, b: FrameVector, combo: BTreeMap<usize, Q2>) {
        let (i, j) = (self.index[&a], self.index[&b]);
        if combo.is_empty() || i == j {
            return;
        }
        if i < j {
            self.table.insert((i, j), combo);
        } else {
            let neg = combo.into_iter().map(|(k, c)| (k, -c)).collect();
            self.table.insert((j, i), neg);
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn layer1(&self) -> &[FrameVector] {
        &self.basis[..self.layer1_len]
    }

    pub fn layer2(&self) -> &[FrameVector] {
        &self.basis[self.layer1_len..]
    }

    pub fn is_layer2(&self, i: usize) -> bool {
        i >= self.layer1_len
    }

    pub fn index_of(&self, v: FrameVector) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// `⟦b_i, b_j⟧` as a combination of basis indices.
    pub fn bracket(&self, i: usize, j: usize) -> BTreeMap<usize, Q2> {
        if i < j {
            self.table.get(&(i, j)).cloned().unwrap_or_default()
        } else if i > j {
            self.table
                .get(&(j, i))
                .map(|c| c.iter().map(|(&k, &v)| (k, -v)).collect())
                .unwrap_or_default()
        } else {
            BTreeMap::new()
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.table.is_empty()
    }

    /// Check the 2-step grading, antisymmetry and Jacobi identity.
    pub fn check_invariants(&self) -> Result<()> {
        for (&(i, j), combo) in &self.table {
            if self.is_layer2(i) || self.is_layer2(j) {
                return Err(Error::consistency(
                    "nilpotent-two-step",
                    format!("⟦{}, {}⟧ ≠ 0 with a layer-2 argument", self.basis[i], self.basis[j]),
                ));
            }
            if combo.keys().any(|&k| !self.is_layer2(k)) {
                return Err(Error::consistency(
                    "nilpotent-two-step",
                    format!("⟦{}, {}⟧ leaves layer 2", self.basis[i], self.basis[j]),
                ));
            }
        }
        let d = self.dim();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut acc: BTreeMap<usize, Q2> = BTreeMap::new();
                    for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                        for (k, v) in self.bracket(x, y) {
                            for (m, w) in self.bracket(k, z) {
                                let e = acc.entry(m).or_insert_with(Q2::zero);
                                *e = *e + v * w;
                            }
                        }
                    }
                    if acc.values().any(|v| !v.is_zero()) {
                        return Err(Error::consistency(
                            "nilpotent-jacobi",
                            format!("Jacobi fails on ({a},{b},{c})"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Pairs `(i, j, combo)` with `i < j` and nonzero bracket.
    pub fn nonzero_brackets(&self) -> impl Iterator<Item = (usize, usize, &BTreeMap<usize, Q2>)> {
        self.table.iter().map(|(&(i, j), c)| (i, j, c))
    }
}

/// Nilpotentization from the oracle: `⟦u, v⟧` is the fiber projection of
/// the frame bracket for horizontal `u, v`, zero otherwise.
pub fn nilpotentize(pd: &ParabolicData) -> Result<NilpotentAlgebra> {
    nilpotentize_with(pd, &matrix_oracle(pd))
}

pub fn nilpotentize_with(pd: &ParabolicData, oracle: &MatrixRealization) -> Result<NilpotentAlgebra> {
    let mut n = NilpotentAlgebra::empty(pd);
    let frame = build_frame(pd);
    let l1: Vec<FrameVector> = n.layer1().to_vec();
    for (a, &u) in l1.iter().enumerate() {
        for &v in &l1[a + 1..] {
            let br = frame_bracket(pd, oracle, &frame, u, v)?;
            let combo = br.f_part.iter().map(|(w, &c)| (n.index[w], c)).collect();
            n.set(u, v, combo);
        }
    }
    n.check_invariants()?;
    Ok(n)
}

/// Nilpotentization from the closed-form table: for `α ∈ Δ(u∩k)`,
/// `β ∈ Δ(u∩p)`, `γ = |α−β|`, `N' = N_{α,−β}` when `α−β ∈ ±Δ(l∩p)`:
///
/// ```text
/// ⟦Xα,Xβ⟧ =  N'/√2 Xγ      ⟦Xα,Yβ⟧ = −ε N'/√2 Yγ
/// ⟦Yα,Xβ⟧ =  ε N'/√2 Yγ    ⟦Yα,Yβ⟧ =  N'/√2 Xγ
/// ```
pub fn nilpotentize_from_formulas(pd: &ParabolicData, nc: &StructureConstants) -> NilpotentAlgebra {
    let mut n = NilpotentAlgebra::empty(pd);
    let h = Q2::inv_sqrt2();
    for &alpha in &pd.u_k {
        for &beta in &pd.u_p {
            let Some(diff) = alpha.minus(beta) else { continue };
            let gamma = diff.abs();
            if !pd.in_l_p(gamma) {
                continue;
            }
            let np = Q2::from_int(nc.get(alpha, beta.neg()));
            let eps = Q2::from_int(diff.sign());
            let entries = [
                (FrameVector::x(alpha), FrameVector::x(beta), FrameVector::x(gamma), np * h),
                (FrameVector::x(alpha), FrameVector::y(beta), FrameVector::y(gamma), -eps * np * h),
                (FrameVector::y(alpha), FrameVector::x(beta), FrameVector::y(gamma), eps * np * h),
                (FrameVector::y(alpha), FrameVector::y(beta), FrameVector::x(gamma), np * h),
            ];
            for (u, v, w, c) in entries {
                if c.is_zero() {
                    continue;
                }
                let mut combo = BTreeMap::new();
                combo.insert(n.index[&w], c);
                n.set(u, v, combo);
            }
        }
    }
    n
}

/// Hörmander condition at order 2: `⟦,⟧ : ∧²(layer1) → layer2` is onto.
pub fn check_hormander(n: &NilpotentAlgebra) -> bool {
    let l2 = n.dim() - n.layer1_len;
    if l2 == 0 {
        return true;
    }
    let rows: Vec<Vec<Qi2>> = n
        .nonzero_brackets()
        .map(|(_, _, c)| {
            (0..l2)
                .map(|k| Qi2::real(c.get(&(n.layer1_len + k)).copied().unwrap_or_else(Q2::zero)))
                .collect()
        })
        .collect();
    rank(rows) == l2
}

/// Strongly orthogonal roots `γ_1..γ_r` in `Δ(l∩p)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalSequence {
    pub roots: Vec<Root>,
}

impl OrthogonalSequence {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

pub fn strongly_orthogonal(a: Root, b: Root) -> bool {
    a.plus(b).is_none() && a.minus(b).is_none()
}

/// Maximal strongly orthogonal subset of `Δ(l∩p)` of size `min(p2, q)`.
/// Tries `γ_i = (p1+i, n−i)` first and falls back to a greedy pass that
/// prefers the anti-diagonal `(p1+1, n), (p1+2, n−1), …`.
pub fn strongly_orthogonal_sequence(pd: &ParabolicData) -> Result<OrthogonalSequence> {
    if pd.l_p.is_empty() {
        return Err(Error::NoFiberRoots);
    }
    let target = pd.p2().min(pd.q);
    let n = pd.n();
    let direct: Vec<Root> = (1..=target)
        .filter(|&i| n - i > pd.p)
        .map(|i| Root::new(pd.p1 + i, n - i))
        .collect();
    let direct_ok = direct.len() == target
        && direct.iter().enumerate().all(|(k, &a)| {
            pd.in_l_p(a) && direct[k + 1..].iter().all(|&b| strongly_orthogonal(a, b))
        });
    let roots = if direct_ok {
        direct
    } else {
        let mut candidates = pd.l_p.clone();
        candidates.sort_by_key(|r| (r.i, std::cmp::Reverse(r.j)));
        let mut chosen: Vec<Root> = Vec::new();
        for c in candidates {
            if chosen.len() == target {
                break;
            }
            if chosen.iter().all(|&g| strongly_orthogonal(g, c)) {
                chosen.push(c);
            }
        }
        chosen
    };
    let seq = OrthogonalSequence { roots };
    verify_sequence(pd, &seq)?;
    Ok(seq)
}

fn verify_sequence(pd: &ParabolicData, seq: &OrthogonalSequence) -> Result<()> {
    let target = pd.p2().min(pd.q);
    if seq.len() != target {
        return Err(Error::consistency(
            "orthogonal-sequence-size",
            format!("found {} strongly orthogonal roots, expected {target}", seq.len()),
        ));
    }
    for (k, &a) in seq.roots.iter().enumerate() {
        if !pd.in_l_p(a) {
            return Err(Error::consistency("orthogonal-sequence-membership", format!("{a} ∉ Δ(l∩p)")));
        }
        for &b in &seq.roots[k + 1..] {
            if !strongly_orthogonal(a, b) {
                return Err(Error::consistency(
                    "orthogonal-sequence-strong-orthogonality",
                    format!("{a} ± {b} is a root"),
                ));
            }
        }
    }
    uniqueness_report(pd, seq).map(|_| ())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniquenessEntry {
    pub alpha: Root,
    pub compact: bool,
    /// `(i, β)` with `α ± γ_i = β ∈ Δu` (0-based `i`).
    pub matches: Vec<(usize, Root)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniquenessReport {
    pub entries: Vec<UniquenessEntry>,
    pub all_compact_match: bool,
    pub all_noncompact_match: bool,
}

impl UniquenessReport {
    /// The unique partner `(i, β)` of `α`, if any.
    pub fn partner(&self, alpha: Root) -> Option<(usize, Root)> {
        self.entries
            .iter()
            .find(|e| e.alpha == alpha)
            .and_then(|e| e.matches.first().copied())
    }
}

pub fn uniqueness_report(pd: &ParabolicData, seq: &OrthogonalSequence) -> Result<UniquenessReport> {
    let mut entries = Vec::new();
    for &alpha in &pd.u {
        let mut matches = Vec::new();
        for (i, &g) in seq.roots.iter().enumerate() {
            for cand in [alpha.plus(g), alpha.minus(g)].into_iter().flatten() {
                if pd.in_u(cand) {
                    matches.push((i, cand));
                }
            }
        }
        if matches.len() > 1 {
            return Err(Error::UniquenessViolation { alpha, count: matches.len() });
        }
        entries.push(UniquenessEntry { alpha, compact: pd.is_compact(alpha), matches });
    }
    let all = |compact: bool| {
        entries
            .iter()
            .filter(|e| e.compact == compact)
            .all(|e| !e.matches.is_empty())
    };
    Ok(UniquenessReport {
        all_compact_match: all(true),
        all_noncompact_match: all(false),
        entries,
    })
}

/// Frame vector of the given kind, convenience for callers.
pub fn fv(kind: FrameKind, root: Root) -> FrameVector {
    FrameVector { kind, root }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_parabolic, structure_constants};

    fn r(i: usize, j: usize) -> Root {
        Root::new(i, j)
    }

    #[test]
    fn u22_dimensions_and_bracket() {
        let pd = build_parabolic(2, 2, 1).unwrap();
        let n = nilpotentize(&pd).unwrap();
        assert_eq!((n.layer1().len(), n.layer2().len()), (6, 4));
        let i = n.index_of(FrameVector::x(r(1, 2))).unwrap();
        let j = n.index_of(FrameVector::x(r(1, 3))).unwrap();
        let k = n.index_of(FrameVector::x(r(2, 3))).unwrap();
        let br = n.bracket(i, j);
        assert_eq!(br.len(), 1);
        let c = br[&k];
        assert!(c == Q2::inv_sqrt2() || c == -Q2::inv_sqrt2());
    }

    #[test]
    fn abelian_when_degenerate() {
        let pd = build_parabolic(1, 1, 1).unwrap();
        let n = nilpotentize(&pd).unwrap();
        assert!(n.is_abelian() && n.layer2().is_empty());
        assert!(check_hormander(&n));
    }

    #[test]
    fn noncompact_pairs_commute() {
        let pd = build_parabolic(2, 2, 1).unwrap();
        let n = nilpotentize(&pd).unwrap();
        let a = n.index_of(FrameVector::x(r(1, 3))).unwrap();
        let b = n.index_of(FrameVector::y(r(1, 4))).unwrap();
        assert!(n.bracket(a, b).is_empty());
    }

    #[test]
    fn formulas_match_oracle() {
        for (p, q, p1) in [(2, 2, 1), (3, 1, 1), (3, 2, 2), (2, 3, 1)] {
            let pd = build_parabolic(p, q, p1).unwrap();
            let nc = structure_constants(&pd);
            assert_eq!(nilpotentize(&pd).unwrap(), nilpotentize_from_formulas(&pd, &nc));
        }
    }

    #[test]
    fn hormander_u22() {
        let pd = build_parabolic(2, 2, 1).unwrap();
        assert!(check_hormander(&nilpotentize(&pd).unwrap()));
    }

    #[test]
    fn orthogonal_sequence_u22() {
        let pd = build_parabolic(2, 2, 1).unwrap();
        let g = strongly_orthogonal_sequence(&pd).unwrap();
        assert_eq!(g.roots, vec![r(2, 3)]);
        let rep = uniqueness_report(&pd, &g).unwrap();
        assert_eq!(rep.partner(r(1, 2)), Some((0, r(1, 3))));
        assert!(rep.all_compact_match);
    }

    #[test]
    fn orthogonal_sequence_size_is_min_p2_q() {
        // p2 = 1 here, so every pair in Δ(l∩p) = {(3,4),(3,5)} shares index 3
        let pd = build_parabolic(3, 2, 2).unwrap();
        let g = strongly_orthogonal_sequence(&pd).unwrap();
        assert_eq!(g.len(), 1);
        assert!(!strongly_orthogonal(r(3, 4), r(3, 5)));
        let pd = build_parabolic(4, 2, 1).unwrap();
        let g = strongly_orthogonal_sequence(&pd).unwrap();
        assert_eq!(g.roots, vec![r(2, 6), r(3, 5)]);
        // q = 1: the direct formula leaves Δ(l∩p), greedy takes over
        let pd = build_parabolic(3, 1, 1).unwrap();
        assert_eq!(strongly_orthogonal_sequence(&pd).unwrap().roots, vec![r(2, 4)]);
    }

    #[test]
    fn second_case_noncompact_side_matches() {
        let pd = build_parabolic(3, 1, 1).unwrap();
        let g = strongly_orthogonal_sequence(&pd).unwrap();
        let rep = uniqueness_report(&pd, &g).unwrap();
        assert!(rep.all_noncompact_match);
        assert!(!rep.all_compact_match);
    }

    #[test]
    fn no_fiber_roots() {
        let pd = build_parabolic(1, 1, 1).unwrap();
        assert_eq!(strongly_orthogonal_sequence(&pd), Err(Error::NoFiberRoots));
    }

    #[test]
    fn uniqueness_violation_detected() {
        let pd = build_parabolic(3, 2, 1).unwrap();
        // (2,4) and (2,5) share index 2: α = (1,2) matches both
        let seq = OrthogonalSequence { roots: vec![r(2, 4), r(2, 5)] };
        assert!(matches!(
            uniqueness_report(&pd, &seq),
            Err(Error::UniquenessViolation { count: 2, .. })
        ));
    }
}
