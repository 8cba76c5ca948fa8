//! Linear forms on `n₀`, the skew form `B_l`, hypothesis (H), polarizations
//! and the induced representation `π_l` as first-order differential
//! operators with polynomial coefficients.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::rank;
use crate::nilpotent::{NilpotentAlgebra, OrthogonalSequence};
use crate::realframe::{FrameKind, FrameVector};
use crate::rootsys::{ParabolicData, Root, StructureConstants};
use crate::scalar::{Q2, Qi2, Scalar};
use crate::weyl::{Coeff, DiffOp};

pub(crate) fn q2s<S: Scalar>(c: Q2) -> S {
    S::from_exact(Qi2::real(c))
}

/// Real linear form on `n₀`, stored by its coordinates `ξ_γ = l(X_γ)`,
/// `η_γ = l(Y_γ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm<S> {
    coords: BTreeMap<FrameVector, S>,
}

impl<S: Scalar> Default for LinearForm<S> {
    fn default() -> Self {
        LinearForm { coords: BTreeMap::new() }
    }
}

impl<S: Scalar> LinearForm<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: FrameVector, c: S) {
        if c.is_zero() {
            self.coords.remove(&v);
        } else {
            self.coords.insert(v, c);
        }
    }

    pub fn get(&self, v: FrameVector) -> S {
        self.coords.get(&v).copied().unwrap_or_else(S::zero)
    }

    pub fn xi(&self, root: Root) -> S {
        self.get(FrameVector::x(root))
    }

    pub fn eta(&self, root: Root) -> S {
        self.get(FrameVector::y(root))
    }

    pub fn coords(&self) -> impl Iterator<Item = (&FrameVector, &S)> {
        self.coords.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn scale(&self, c: S) -> Self {
        let mut out = Self::new();
        for (&v, &x) in &self.coords {
            out.set(v, x * c);
        }
        out
    }

    /// True when `l` vanishes on every horizontal direction.
    pub fn is_vertical(&self, pd: &ParabolicData) -> bool {
        self.coords.keys().all(|v| pd.in_l_p(v.root))
    }

    /// `l` on a combination of basis indices of `n`.
    pub fn eval(&self, n: &NilpotentAlgebra, combo: &BTreeMap<usize, Q2>) -> S {
        combo
            .iter()
            .fold(S::zero(), |acc, (&k, &c)| acc + q2s::<S>(c) * self.get(n.basis[k]))
    }
}

/// `ξ_{γ_i} = weights[i]`, every other coordinate zero.
pub fn canonical_form<S: Scalar>(gamma: &OrthogonalSequence, weights: &[S]) -> Result<LinearForm<S>> {
    if gamma.is_empty() {
        return Err(Error::InvalidForm("empty orthogonal sequence".into()));
    }
    if weights.len() != gamma.len() {
        return Err(Error::InvalidForm(format!(
            "{} weights for {} roots",
            weights.len(),
            gamma.len()
        )));
    }
    let mut l = LinearForm::new();
    for (&g, &w) in gamma.roots.iter().zip(weights) {
        if !w.is_positive_real() {
            return Err(Error::InvalidForm(format!("weight {w:?} on {g} is not positive")));
        }
        l.set(FrameVector::x(g), w);
    }
    Ok(l)
}

/// `√2` on every root of the sequence, which makes every `r = 1`.
pub fn default_weights<S: Scalar>(gamma: &OrthogonalSequence) -> Vec<S> {
    vec![q2s(Q2::sqrt2()); gamma.len()]
}

/// `B_l(u, v) = l(⟦u, v⟧)` on the basis of `n₀`, with the block `A`
/// (compact horizontal rows, noncompact horizontal columns).
#[derive(Clone, Debug, PartialEq)]
pub struct SkewForm<S> {
    pub basis: Vec<FrameVector>,
    pub matrix: Vec<Vec<S>>,
    pub a_rows: Vec<usize>,
    pub a_cols: Vec<usize>,
    pub s: usize,
    pub t: usize,
}

impl<S: Scalar> SkewForm<S> {
    pub fn block_a(&self) -> Vec<Vec<S>> {
        self.a_rows
            .iter()
            .map(|&r| self.a_cols.iter().map(|&c| self.matrix[r][c]).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        rank(self.matrix.clone())
    }

    pub fn rank_a(&self) -> usize {
        rank(self.block_a())
    }

    pub fn is_skew(&self) -> bool {
        let d = self.matrix.len();
        (0..d).all(|i| (0..d).all(|j| (self.matrix[i][j] + self.matrix[j][i]).is_zero()))
    }
}

pub fn bl_and_a<S: Scalar>(l: &LinearForm<S>, n: &NilpotentAlgebra, pd: &ParabolicData) -> SkewForm<S> {
    let d = n.dim();
    let matrix = (0..d)
        .map(|i| (0..d).map(|j| l.eval(n, &n.bracket(i, j))).collect())
        .collect();
    let horizontal = 0..n.layer1_len;
    let a_rows = horizontal.clone().filter(|&k| pd.is_compact(n.basis[k].root)).collect();
    let a_cols = horizontal.filter(|&k| !pd.is_compact(n.basis[k].root)).collect();
    SkewForm { basis: n.basis.clone(), matrix, a_rows, a_cols, s: pd.s(), t: pd.t() }
}

/// (H): `A` has maximal rank `2·min(s, t)`.
pub fn check_hypothesis_h<S: Scalar>(sf: &SkewForm<S>) -> bool {
    sf.rank_a() == 2 * sf.s.min(sf.t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// `t ≥ s`: compact horizontal directions are transverse.
    First,
    /// `t < s`: noncompact horizontal directions are transverse.
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polarization {
    pub case: Case,
    /// Basis indices of `h₀` in `n₀`.
    pub basis: Vec<usize>,
    /// Basis indices of the complement, in variable order
    /// `x_{α_1}, y_{α_1}, x_{α_2}, …` with roots sorted.
    pub transverse: Vec<usize>,
    pub transverse_roots: Vec<Root>,
}

impl Polarization {
    pub fn nvars(&self) -> usize {
        self.transverse.len()
    }

    pub fn codim(&self) -> usize {
        self.transverse.len()
    }

    pub fn variable_of(&self, basis_index: usize) -> Option<usize> {
        self.transverse.iter().position(|&k| k == basis_index)
    }
}

pub fn choose_polarization<S: Scalar>(
    sf: &SkewForm<S>,
    pd: &ParabolicData,
    n: &NilpotentAlgebra,
) -> Result<Polarization> {
    if !check_hypothesis_h(sf) {
        return Err(Error::HypothesisFailed { rank: sf.rank_a(), expected: 2 * sf.s.min(sf.t) });
    }
    let case = if pd.t() >= pd.s() { Case::First } else { Case::Second };
    let transverse_compact = case == Case::First;
    let mut transverse_roots: Vec<Root> = if transverse_compact { pd.u_k.clone() } else { pd.u_p.clone() };
    transverse_roots.sort();
    let mut transverse = Vec::new();
    for &r in &transverse_roots {
        for kind in [FrameKind::X, FrameKind::Y] {
            transverse.push(n.index_of(FrameVector { kind, root: r }).expect("horizontal frame vector"));
        }
    }
    let basis: Vec<usize> = (0..n.dim()).filter(|k| !transverse.contains(k)).collect();

    for (a, &i) in basis.iter().enumerate() {
        for &j in &basis[a + 1..] {
            if !n.bracket(i, j).is_empty() {
                return Err(Error::consistency(
                    "polarization-abelian",
                    format!("⟦{}, {}⟧ ≠ 0", n.basis[i], n.basis[j]),
                ));
            }
            if !sf.matrix[i][j].is_zero() {
                return Err(Error::consistency(
                    "polarization-isotropic",
                    format!("B_l({}, {}) ≠ 0", n.basis[i], n.basis[j]),
                ));
            }
        }
    }
    let rk = sf.rank();
    if 2 * transverse.len() != rk {
        return Err(Error::consistency(
            "polarization-codimension",
            format!("codim {} but rank B_l = {rk}", transverse.len()),
        ));
    }
    Ok(Polarization { case, basis, transverse, transverse_roots })
}

/// Polynomial in the representation variables, by exponent vector.
pub type Poly<S> = BTreeMap<Vec<u32>, S>;

/// `Σ_k P_k ∂_k + i Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDiffOp<S> {
    pub nvars: usize,
    pub p: Vec<Poly<S>>,
    pub q: Poly<S>,
}

impl<S: Scalar + Coeff<S = S>> PolyDiffOp<S> {
    pub fn zero(nvars: usize) -> Self {
        PolyDiffOp { nvars, p: vec![Poly::new(); nvars], q: Poly::new() }
    }

    fn add_q(&mut self, e: Vec<u32>, c: S) {
        let v = self.q.entry(e.clone()).or_insert_with(S::zero);
        *v = *v + c;
        if v.is_zero() {
            self.q.remove(&e);
        }
    }

    pub fn to_diffop(&self) -> DiffOp<S> {
        let n = self.nvars;
        let mut op = DiffOp::zero(n);
        for (k, pk) in self.p.iter().enumerate() {
            for (e, &c) in pk {
                let mut de = vec![0; n];
                de[k] = 1;
                op.add_term((e.clone(), de), c);
            }
        }
        for (e, &c) in &self.q {
            op.add_term((e.clone(), vec![0; n]), c * S::imag_unit());
        }
        op
    }

    /// `P_k(0)` for each `k`.
    pub fn p_at_zero(&self) -> Vec<S> {
        let origin = vec![0; self.nvars];
        self.p.iter().map(|pk| pk.get(&origin).copied().unwrap_or_else(S::zero)).collect()
    }
}

/// `π_l` on every basis vector of `n₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation<S> {
    pub nvars: usize,
    pub variables: Vec<FrameVector>,
    pub ops: Vec<PolyDiffOp<S>>,
}

impl<S: Scalar + Coeff<S = S>> Representation<S> {
    pub fn diffop(&self, k: usize) -> DiffOp<S> {
        self.ops[k].to_diffop()
    }

    /// `π` of a combination of basis vectors.
    pub fn image(&self, combo: &BTreeMap<usize, Q2>) -> DiffOp<S> {
        combo.iter().fold(DiffOp::zero(self.nvars), |acc, (&k, &c)| {
            acc.add(&self.diffop(k).scale(q2s(c)))
        })
    }
}

/// Induced representation: `π(e_k) = ∂_k + i l(e_k)` on transverse
/// directions and `π(h) = i(l(h) + Σ_k x_k l(⟦e_k, h⟧))` on `h₀`.
pub fn realize_rep<S: Scalar + Coeff<S = S>>(
    l: &LinearForm<S>,
    pol: &Polarization,
    n: &NilpotentAlgebra,
    pd: &ParabolicData,
) -> Result<Representation<S>> {
    if !l.is_vertical(pd) {
        return Err(Error::UnsupportedForm("the form has horizontal components".into()));
    }
    let nv = pol.nvars();
    let zero_exp = vec![0u32; nv];
    let mut ops = Vec::with_capacity(n.dim());
    for k in 0..n.dim() {
        let mut op = PolyDiffOp::zero(nv);
        op.add_q(zero_exp.clone(), l.get(n.basis[k]));
        match pol.variable_of(k) {
            Some(v) => {
                op.p[v].insert(zero_exp.clone(), S::one());
            }
            None => {
                for (v, &e) in pol.transverse.iter().enumerate() {
                    let c = l.eval(n, &n.bracket(e, k));
                    let mut ex = zero_exp.clone();
                    ex[v] = 1;
                    op.add_q(ex, c);
                }
            }
        }
        ops.push(op);
    }
    let variables = pol.transverse.iter().map(|&k| n.basis[k]).collect();
    Ok(Representation { nvars: nv, variables, ops })
}

/// `π(⟦u, v⟧) = [π(u), π(v)]` for every pair of basis vectors.
pub fn check_rep_homomorphism<S: Scalar + Coeff<S = S>>(rep: &Representation<S>, n: &NilpotentAlgebra) -> bool {
    let ops: Vec<DiffOp<S>> = (0..n.dim()).map(|k| rep.diffop(k)).collect();
    for i in 0..n.dim() {
        for j in i + 1..n.dim() {
            let lhs = rep.image(&n.bracket(i, j));
            let rhs = ops[i].commutator(&ops[j]);
            if lhs.sub(&rhs).terms().next().is_some() {
                return false;
            }
        }
    }
    true
}

/// The forms `X ↦ P_k(0; X)` are linearly independent.
pub fn check_p0_independence<S: Scalar + Coeff<S = S>>(rep: &Representation<S>) -> bool {
    let rows: Vec<Vec<S>> = (0..rep.nvars)
        .map(|k| rep.ops.iter().map(|op| op.p_at_zero()[k]).collect())
        .collect();
    rank(rows) == rep.nvars
}

/// First-case closed forms for compact `α` paired with noncompact `β`,
/// `γ = |α−β|`, `N' = N_{α,−β}`, `ε = sign(α−β)`:
///
/// ```text
/// π(X_β) = i Σ_α N'/√2 (ξ_γ x_α + ε η_γ y_α)
/// π(Y_β) = i Σ_α N'/√2 (−ε η_γ x_α + ξ_γ y_α)
/// ```
///
/// Returns the linear coefficients `(x_α, y_α)` of `Q` per `β`.
pub fn displayed_noncompact_images<S: Scalar>(
    l: &LinearForm<S>,
    pd: &ParabolicData,
    nc: &StructureConstants,
) -> BTreeMap<FrameVector, BTreeMap<FrameVector, S>> {
    let h = q2s::<S>(Q2::inv_sqrt2());
    let mut out: BTreeMap<FrameVector, BTreeMap<FrameVector, S>> = BTreeMap::new();
    for &beta in &pd.u_p {
        out.entry(FrameVector::x(beta)).or_default();
        out.entry(FrameVector::y(beta)).or_default();
        for &alpha in &pd.u_k {
            let Some(diff) = alpha.minus(beta) else { continue };
            let gamma = diff.abs();
            if !pd.in_l_p(gamma) {
                continue;
            }
            let np = S::from_int(nc.get(alpha, beta.neg())) * h;
            let eps = S::from_int(diff.sign());
            let (xi, eta) = (l.xi(gamma), l.eta(gamma));
            let mut put = |target: FrameVector, var: FrameVector, c: S| {
                if !c.is_zero() {
                    out.entry(target).or_default().insert(var, c);
                }
            };
            put(FrameVector::x(beta), FrameVector::x(alpha), np * xi);
            put(FrameVector::x(beta), FrameVector::y(alpha), np * eps * eta);
            put(FrameVector::y(beta), FrameVector::x(alpha), -(np * eps * eta));
            put(FrameVector::y(beta), FrameVector::y(alpha), np * xi);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilpotent::{nilpotentize, strongly_orthogonal_sequence};
    use crate::rootsys::{build_parabolic, structure_constants};

    type S = Qi2;

    struct Setup {
        pd: ParabolicData,
        n: NilpotentAlgebra,
        l: LinearForm<S>,
    }

    fn setup(p: i64, q: i64, p1: i64) -> Setup {
        let pd = build_parabolic(p, q, p1).unwrap();
        let n = nilpotentize(&pd).unwrap();
        let g = strongly_orthogonal_sequence(&pd).unwrap();
        let l = canonical_form(&g, &default_weights::<S>(&g)).unwrap();
        Setup { pd, n, l }
    }

    fn r(i: usize, j: usize) -> Root {
        Root::new(i, j)
    }

    #[test]
    fn canonical_form_u22() {
        let st = setup(2, 2, 1);
        assert_eq!(st.l.xi(r(2, 3)), Qi2::real(Q2::sqrt2()));
        assert!(st.l.is_vertical(&st.pd));
        assert_eq!(st.l.coords().count(), 1);
    }

    #[test]
    fn canonical_form_errors() {
        let empty = OrthogonalSequence { roots: vec![] };
        assert!(canonical_form::<S>(&empty, &[]).is_err());
        let g = OrthogonalSequence { roots: vec![r(2, 3)] };
        assert!(matches!(canonical_form(&g, &[Qi2::from_int(-1)]), Err(Error::InvalidForm(_))));
        assert!(matches!(canonical_form(&g, &[Qi2::zero()]), Err(Error::InvalidForm(_))));
        assert!(canonical_form::<S>(&g, &[]).is_err());
    }

    #[test]
    fn skew_form_and_h() {
        let st = setup(2, 2, 1);
        let sf = bl_and_a(&st.l, &st.n, &st.pd);
        assert!(sf.is_skew());
        assert_eq!(sf.rank_a(), 2);
        assert_eq!(sf.rank(), 4);
        assert!(check_hypothesis_h(&sf));
        let zero = bl_and_a(&LinearForm::<S>::new(), &st.n, &st.pd);
        assert_eq!(zero.rank(), 0);
        assert!(!check_hypothesis_h(&zero));
        let st = setup(3, 1, 1);
        assert!(check_hypothesis_h(&bl_and_a(&st.l, &st.n, &st.pd)));
    }

    #[test]
    fn a_block_cell_pattern() {
        // cell for (α, β) = ((1,2), (1,3)) is N'/√2 [[ξ, −εη], [εη, ξ]] with η = 0
        let st = setup(2, 2, 1);
        let nc = structure_constants(&st.pd);
        let sf = bl_and_a(&st.l, &st.n, &st.pd);
        let ix = |v| st.n.index_of(v).unwrap();
        let np = Qi2::from_int(nc.get(r(1, 2), r(3, 1)));
        let xi = st.l.xi(r(2, 3));
        let h = Qi2::real(Q2::inv_sqrt2());
        let xa = ix(FrameVector::x(r(1, 2)));
        let ya = ix(FrameVector::y(r(1, 2)));
        let xb = ix(FrameVector::x(r(1, 3)));
        let yb = ix(FrameVector::y(r(1, 3)));
        assert_eq!(sf.matrix[xa][xb], np * h * xi);
        assert_eq!(sf.matrix[ya][yb], np * h * xi);
        assert!(sf.matrix[xa][yb].is_zero() && sf.matrix[ya][xb].is_zero());
    }

    #[test]
    fn polarization_cases() {
        let st = setup(2, 2, 1);
        let sf = bl_and_a(&st.l, &st.n, &st.pd);
        let pol = choose_polarization(&sf, &st.pd, &st.n).unwrap();
        assert_eq!(pol.case, Case::First);
        assert_eq!(pol.codim(), 2);
        assert_eq!(pol.basis.len(), 8);
        let st = setup(3, 1, 1);
        let sf = bl_and_a(&st.l, &st.n, &st.pd);
        let pol = choose_polarization(&sf, &st.pd, &st.n).unwrap();
        assert_eq!(pol.case, Case::Second);
        assert_eq!(pol.nvars(), 2);
    }

    #[test]
    fn polarization_needs_h() {
        let st = setup(2, 2, 1);
        let sf = bl_and_a(&LinearForm::<S>::new(), &st.n, &st.pd);
        assert!(matches!(
            choose_polarization(&sf, &st.pd, &st.n),
            Err(Error::HypothesisFailed { rank: 0, expected: 2 })
        ));
    }

    #[test]
    fn representation_u22() {
        let st = setup(2, 2, 1);
        let sf = bl_and_a(&st.l, &st.n, &st.pd);
        let pol = choose_polarization(&sf, &st.pd, &st.n).unwrap();
        let rep = realize_rep(&st.l, &pol, &st.n, &st.pd).unwrap();
        let ix = |v| st.n.index_of(v).unwrap();
        // π(X(1,2)) = ∂/∂x
        assert_eq!(rep.diffop(ix(FrameVector::x(r(1, 2)))), DiffOp::d(2, 0));
        // π(X(2,3)) = i√2, π(Y(2,3)) = 0
        let i = Qi2::imag_unit();
        assert_eq!(
            rep.diffop(ix(FrameVector::x(r(2, 3)))),
            DiffOp::scalar(2, i * Qi2::real(Q2::sqrt2()))
        );
        assert!(rep.diffop(ix(FrameVector::y(r(2, 3)))).is_zero());
        // π(X(1,3)) = ±i x
        let xb = rep.diffop(ix(FrameVector::x(r(1, 3))));
        assert!(xb == DiffOp::x(2, 0).scale(i) || xb == DiffOp::x(2, 0).scale(-i));
        assert!(check_rep_homomorphism(&rep, &st.n));
        assert!(check_p0_independence(&rep));
    }

    #[test]
    fn corrupted_sign_breaks_homomorphism() {
        let st = setup(2, 2, 1);
        let sf = bl_and_a(&st.l, &st.n, &st.pd);
        let pol = choose_polarization(&sf, &st.pd, &st.n).unwrap();
        let mut rep = realize_rep(&st.l, &pol, &st.n, &st.pd).unwrap();
        let k = st.n.index_of(FrameVector::x(r(1, 3))).unwrap();
        for c in rep.ops[k].q.values_mut() {
            *c = -*c;
        }
        assert!(!check_rep_homomorphism(&rep, &st.n));
    }

    #[test]
    fn displayed_formulas_agree() {
        for (p, q, p1) in [(2, 2, 1), (2, 3, 1), (3, 3, 2), (3, 2, 1)] {
            let st = setup(p, q, p1);
            let mut l = st.l.clone();
            // give every fiber root some η as well
            for (k, &g) in st.pd.l_p.iter().enumerate() {
                l.set(FrameVector::y(g), Qi2::from_int(k as i64 + 2));
            }
            let sf = bl_and_a(&l, &st.n, &st.pd);
            let Ok(pol) = choose_polarization(&sf, &st.pd, &st.n) else { continue };
            if pol.case != Case::First {
                continue;
            }
            let rep = realize_rep(&l, &pol, &st.n, &st.pd).unwrap();
            let nc = structure_constants(&st.pd);
            for (target, lin) in displayed_noncompact_images(&l, &st.pd, &nc) {
                let op = &rep.ops[st.n.index_of(target).unwrap()];
                for (var, c) in lin {
                    let v = pol.variable_of(st.n.index_of(var).unwrap()).unwrap();
                    let mut e = vec![0; pol.nvars()];
                    e[v] = 1;
                    assert_eq!(op.q.get(&e).copied().unwrap_or_else(Qi2::zero), c, "{target} at {var}");
                }
            }
        }
    }

    #[test]
    fn horizontal_form_rejected() {
        let st = setup(2, 2, 1);
        let mut l = st.l.clone();
        l.set(FrameVector::x(r(1, 3)), Qi2::one());
        let sf = bl_and_a(&l, &st.n, &st.pd);
        let pol = choose_polarization(&sf, &st.pd, &st.n).unwrap();
        assert!(matches!(realize_rep(&l, &pol, &st.n, &st.pd), Err(Error::UnsupportedForm(_))));
    }
}
