//! `π_l(□)` on the model space, the operators `M_α`, kernel witnesses and
//! the Rockland verdict.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{
    duality, exterior_ops, vec_add, vec_degree, vec_inner, vec_is_zero, vec_scale, vec_sub, ExtOp,
    ExteriorOps,
};
use crate::hermite::{fit_truncation, TruncatedBasis};
use crate::linalg::hermitian_eigenvalues;
use crate::nilpotent::{
    check_hormander, nilpotentize_from_formulas, nilpotentize_with, strongly_orthogonal_sequence,
    uniqueness_report, NilpotentAlgebra, OrthogonalSequence, UniquenessReport,
};
use crate::orbit::{
    bl_and_a, canonical_form, check_hypothesis_h, check_p0_independence, check_rep_homomorphism,
    choose_polarization, default_weights, q2s, realize_rep, Case, LinearForm, Representation,
};
use crate::realframe::verify_frame_relations;
use crate::rootsys::{matrix_oracle, structure_constants, ParabolicData, Root, StructureConstants};
use crate::scalar::{Q2, Qi2, Scalar, FLOAT_TOL};
use crate::symbol::{laplacian_symbol, verify_laplacian, ESymbol, LocalReading, LOCAL_READING};
use crate::weyl::{Coeff, DiffOp, GaussPoly};

/// Eigenvalue comparisons on dense float spectra.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Everything that does not depend on the linear form, with its
/// consistency checks already run.
#[derive(Clone, Debug)]
pub struct Structure {
    pub pd: ParabolicData,
    pub nc: StructureConstants,
    pub n: NilpotentAlgebra,
    pub ext: ExteriorOps<Qi2>,
    pub laplacian: ESymbol,
    pub hormander: bool,
    pub gamma: Option<OrthogonalSequence>,
    pub uniqueness: Option<UniquenessReport>,
    /// Names of the invariants checked while building.
    pub checks: Vec<&'static str>,
}

impl Structure {
    pub fn build(pd: &ParabolicData) -> Result<Self> {
        Self::build_with(pd, structure_constants(pd))
    }

    /// Build against a given structure-constant table (used to inject
    /// faults).
    pub fn build_with(pd: &ParabolicData, nc: StructureConstants) -> Result<Self> {
        let mut checks = Vec::new();
        let oracle = matrix_oracle(pd);
        oracle.verify(&nc)?;
        checks.push("structure-constants-match-oracle");
        let fc = verify_frame_relations(pd, &nc, &oracle);
        if !fc.ok {
            return Err(Error::consistency("frame-bracket-relations", fc.diffs.join("; ")));
        }
        checks.push("frame-bracket-relations");
        let n = nilpotentize_with(pd, &oracle)?;
        if n != nilpotentize_from_formulas(pd, &nc) {
            return Err(Error::consistency(
                "nilpotent-bracket-table",
                "oracle projection and closed-form table differ",
            ));
        }
        checks.push("nilpotent-bracket-table");
        let hormander = check_hormander(&n);
        let ext = exterior_ops::<Qi2>(pd);
        ext.check_relations()?;
        checks.push("exterior-anticommutation");
        let laplacian = laplacian_symbol(pd, &n, &ext);
        verify_laplacian(pd, &n, &nc, &ext, &laplacian)?;
        checks.push("laplacian-symbol-composition");
        let (gamma, uniqueness) = if pd.is_degenerate() {
            (None, None)
        } else {
            let g = strongly_orthogonal_sequence(pd)?;
            let u = uniqueness_report(pd, &g)?;
            checks.push("orthogonal-sequence-uniqueness");
            (Some(g), Some(u))
        };
        Ok(Structure { pd: pd.clone(), nc, n, ext, laplacian, hormander, gamma, uniqueness, checks })
    }
}

/// `(α, β)` with `α ∈ Δ(u∩k)`, `β ∈ Δ(u∩p)`, `|α−β| ∈ Δ(l∩p)` and
/// `root ∈ {α, β}`.
pub fn pairs_through(pd: &ParabolicData, root: Root) -> Vec<(Root, Root)> {
    let mut out = Vec::new();
    for &a in &pd.u_k {
        for &b in &pd.u_p {
            if a != root && b != root {
                continue;
            }
            if a.minus(b).is_some_and(|d| pd.in_l_p(d.abs())) {
                out.push((a, b));
            }
        }
    }
    out
}

fn gamma_of(a: Root, b: Root) -> Root {
    a.minus(b).expect("difference is a root").abs()
}

/// `r² = Σ* (N'²/2)(ξ² + η²)` over the pairs through `root`.
pub fn compute_r_sq<S: Scalar>(l: &LinearForm<S>, pd: &ParabolicData, nc: &StructureConstants, root: Root) -> S {
    let half = q2s::<S>(Q2::from_ratio(1, 2));
    pairs_through(pd, root).into_iter().fold(S::zero(), |acc, (a, b)| {
        let g = gamma_of(a, b);
        let c = S::from_int(nc.get(a, b.neg()));
        let (xi, eta) = (l.xi(g), l.eta(g));
        acc + half * c * c * (xi * xi + eta * eta)
    })
}

/// `r ≥ 0`, if representable in `S`.
pub fn compute_r<S: Scalar>(
    l: &LinearForm<S>,
    pd: &ParabolicData,
    nc: &StructureConstants,
    root: Root,
) -> Option<S> {
    compute_r_sq(l, pd, nc, root).sqrt_nonneg()
}

/// `M_{α,β} = (ic/√2)[(ξ+iη) e_α i_β − (ξ−iη) e_β i_α]` with `c` the
/// coefficient of the first-order part of the Laplacian symbol.
pub fn m_pair<S: Scalar>(
    l: &LinearForm<S>,
    nc: &StructureConstants,
    ext: &ExteriorOps<S>,
    alpha: Root,
    beta: Root,
) -> ExtOp<S> {
    let g = gamma_of(alpha, beta);
    let i = S::imag_unit();
    let c = S::from_int(LOCAL_READING.coefficient(nc, alpha, beta)) * q2s::<S>(Q2::inv_sqrt2());
    let (xi, eta) = (l.xi(g), l.eta(g));
    let ab = ext.e_of(alpha).mul(ext.i_of(beta));
    let ba = ext.e_of(beta).mul(ext.i_of(alpha));
    ab.scale(xi + i * eta).sub(&ba.scale(xi - i * eta)).scale(i * c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MOperator<S: Scalar> {
    pub root: Root,
    pub pairs: Vec<(Root, Root)>,
    pub matrix: ExtOp<S>,
}

/// `M_root = Σ* M_{α,β}` over the pairs through `root`.
pub fn build_m<S: Scalar>(
    l: &LinearForm<S>,
    pd: &ParabolicData,
    nc: &StructureConstants,
    ext: &ExteriorOps<S>,
    root: Root,
) -> MOperator<S> {
    let pairs = pairs_through(pd, root);
    let matrix = pairs
        .iter()
        .fold(ext.zero_op(), |acc, &(a, b)| acc.add(&m_pair(l, nc, ext, a, b)));
    MOperator { root, pairs, matrix }
}

/// Hermitian, degree preserving, `M² v = r² v`, cross terms vanish on `v`,
/// and the `M`'s commute on `v`.
pub fn verify_m<S: Scalar>(
    l: &LinearForm<S>,
    nc: &StructureConstants,
    ext: &ExteriorOps<S>,
    ms: &[MOperator<S>],
    r_sq: &[S],
    v: &[S],
) -> Result<()> {
    for (m, &r2) in ms.iter().zip(r_sq) {
        if !m.matrix.is_hermitian() || !m.matrix.preserves_degree() {
            return Err(Error::consistency("m-operator-hermitian", format!("M{}", m.root)));
        }
        let m2v = m.matrix.apply(&m.matrix.apply(v));
        if !vec_is_zero(&vec_sub(&m2v, &vec_scale(v, r2))) {
            return Err(Error::consistency("m-operator-square", format!("M{}² v ≠ r² v", m.root)));
        }
        let parts: Vec<ExtOp<S>> = m.pairs.iter().map(|&(a, b)| m_pair(l, nc, ext, a, b)).collect();
        for (x, px) in parts.iter().enumerate() {
            for (y, py) in parts.iter().enumerate() {
                if x != y && !vec_is_zero(&px.apply(&py.apply(v))) {
                    return Err(Error::consistency(
                        "m-operator-cross-terms",
                        format!("M{}: pairs {:?} and {:?}", m.root, m.pairs[x], m.pairs[y]),
                    ));
                }
            }
        }
    }
    for a in ms {
        for b in ms {
            let ab = a.matrix.apply(&b.matrix.apply(v));
            let ba = b.matrix.apply(&a.matrix.apply(v));
            if !vec_is_zero(&vec_sub(&ab, &ba)) {
                return Err(Error::consistency(
                    "m-operators-commute",
                    format!("M{} M{} v ≠ M{} M{} v", a.root, b.root, b.root, a.root),
                ));
            }
        }
    }
    Ok(())
}

/// Substitute `π_l` into the symbol: `Σ A_w ⊗ π(w_1)⋯π(w_k)`.
pub fn rep_laplacian<S: Scalar + Coeff<S = S>>(rep: &Representation<S>, sym: &ESymbol) -> DiffOp<ExtOp<S>> {
    let mut out = DiffOp::zero(rep.nvars);
    for (w, a) in sym.terms() {
        let img = w
            .iter()
            .fold(DiffOp::scalar(rep.nvars, S::one()), |acc, &k| acc.mul(&rep.diffop(k)));
        let a = a.map(S::from_exact);
        out = out.add(&img.tensor(&a));
    }
    out
}

/// `Σ_τ −½[∂²_{x_τ} + ∂²_{y_τ} − r_τ²(x_τ² + y_τ²)]`, variables `2k, 2k+1`
/// for the `k`-th transverse root.
pub fn hermite_part<S: Scalar + Coeff<S = S>>(r_sq: &[S]) -> DiffOp<S> {
    let nv = 2 * r_sq.len();
    let half = q2s::<S>(Q2::from_ratio(-1, 2));
    let mut out = DiffOp::zero(nv);
    for (k, &r2) in r_sq.iter().enumerate() {
        for v in [2 * k, 2 * k + 1] {
            let d = DiffOp::d(nv, v);
            let x = DiffOp::x(nv, v);
            out = out.add(&d.mul(&d).sub(&x.mul(&x).scale(r2)).scale(half));
        }
    }
    out
}

/// `hermite ⊗ Id + Id ⊗ M`.
pub fn model_operator<S: Scalar + Coeff<S = S>>(hermite: &DiffOp<S>, m: &ExtOp<S>) -> DiffOp<ExtOp<S>> {
    let id = ExtOp::identity(m.dim());
    hermite.tensor(&id).add(&DiffOp::constant(hermite.nvars(), m.clone()))
}

/// `v_k = (M_k + σ r_k) v_{k−1}`; the result satisfies `M_k v = σ r_k v`.
pub fn build_eigenvector<S: Scalar>(ms: &[MOperator<S>], rs: &[S], v0: &[S], sign: i64) -> Result<Vec<S>> {
    let sigma = S::from_int(sign);
    let mut v = v0.to_vec();
    for (m, &r) in ms.iter().zip(rs) {
        v = vec_add(&m.matrix.apply(&v), &vec_scale(&v, sigma * r));
        if vec_is_zero(&v) {
            return Err(Error::ZeroVectorCollapse(m.root));
        }
    }
    for (m, &r) in ms.iter().zip(rs) {
        if !vec_is_zero(&vec_sub(&m.matrix.apply(&v), &vec_scale(&v, sigma * r))) {
            return Err(Error::consistency(
                "eigenvector-recursion",
                format!("M{} v ≠ {sign}·r v", m.root),
            ));
        }
    }
    Ok(v)
}

/// `op` applied to `exp(−Σ r (x² + y²)/2) ⊗ w`: the image, its `L²` norm
/// and the norm of the witness itself.
pub fn kernel_residual<S: Scalar>(op: &DiffOp<ExtOp<S>>, rs: &[S], w: &[S]) -> (GaussPoly<S>, f64, f64) {
    let freqs: Vec<S> = rs.iter().flat_map(|&r| [r, r]).collect();
    let g = GaussPoly::ground(freqs, w.to_vec());
    let img = g.apply(op);
    let res = img.l2_norm();
    (img, res, g.l2_norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLabel {
    First,
    Second,
    Degenerate,
}

impl From<Case> for CaseLabel {
    fn from(c: Case) -> Self {
        match c {
            Case::First => CaseLabel::First,
            Case::Second => CaseLabel::Second,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Computed in `ℚ(√2)(i)`; a zero residual is an exact identity.
    Exact,
    /// Computed in `f64`; zero means below [`FLOAT_TOL`].
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Recursion,
    Duality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub basis: String,
    pub coefficient: String,
}

/// A candidate `Gaussian ⊗ w` with `w` an eigenvector of `ΣM`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub degree: usize,
    pub origin: Origin,
    /// Eigenvalue of `ΣM` on `w`.
    pub eigenvalue: f64,
    pub residual: f64,
    pub witness_norm: f64,
    pub provenance: Provenance,
    pub in_kernel: bool,
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RValue {
    pub root: Root,
    pub value: f64,
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeSpectrum {
    pub degree: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub truncation: u32,
    pub formula: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_deviation: f64,
    pub zero_in_spectrum: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub p: usize,
    pub q: usize,
    pub p1: usize,
    pub hormander: bool,
    pub hypothesis_h: Option<bool>,
    pub witness_degrees: Vec<usize>,
    pub rockland_fails: bool,
    /// `Some(false)` when Rockland fails; `None` when undetermined.
    pub maximal_hypoelliptic: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub pd: ParabolicData,
    pub hormander: bool,
    pub gamma: Vec<Root>,
    pub weights: Vec<String>,
    pub hypothesis_h: Option<bool>,
    pub case: CaseLabel,
    pub exact: bool,
    pub local_reading: LocalReading,
    pub r_values: Vec<RValue>,
    pub m_spectra: Vec<DegreeSpectrum>,
    pub candidates: Vec<Candidate>,
    pub spectral_kernel_degrees: Vec<usize>,
    pub degree0_min: Option<f64>,
    pub cross_check: Option<CrossCheck>,
    pub checks: Vec<&'static str>,
    pub verdict: Verdict,
}

impl Analysis {
    pub fn witnesses(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.in_kernel)
    }

    pub fn sum_r(&self) -> f64 {
        self.r_values.iter().map(|r| r.value).sum()
    }
}

/// Weights for the canonical form.
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Exact(Vec<Q2>),
    Float(Vec<f64>),
}

impl Weights {
    pub fn len(&self) -> usize {
        match self {
            Weights::Exact(w) => w.len(),
            Weights::Float(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn to_float(&self) -> Vec<Complex64> {
        match self {
            Weights::Exact(w) => w.iter().map(|x| Complex64::new(x.to_f64(), 0.0)).collect(),
            Weights::Float(w) => w.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    /// Run the truncated Hermite cross-check when the dense blocks stay
    /// below this many rows.
    pub cross_check_max_rows: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { cross_check_max_rows: 400 }
    }
}

pub fn analyze(pd: &ParabolicData, weights: Option<&Weights>) -> Result<Analysis> {
    let st = Structure::build(pd)?;
    analyze_structure(&st, weights, Options::default())
}

pub fn analyze_structure(st: &Structure, weights: Option<&Weights>, opts: Options) -> Result<Analysis> {
    let Some(gamma) = &st.gamma else {
        if weights.is_some_and(|w| !w.is_empty()) {
            return Err(Error::InvalidForm("no fiber roots to carry weights".into()));
        }
        return Ok(degenerate(st));
    };
    let exact_weights = match weights {
        None => Some(default_weights::<Qi2>(gamma)),
        Some(Weights::Exact(w)) => Some(w.iter().map(|&x| Qi2::real(x)).collect()),
        Some(Weights::Float(_)) => None,
    };
    if let Some(w) = exact_weights {
        let l = canonical_form(gamma, &w)?;
        let representable = st.pd.u.iter().all(|&r| compute_r(&l, &st.pd, &st.nc, r).is_some());
        if representable {
            return analyze_form(st, &l, opts);
        }
    }
    let w = weights.map_or_else(|| default_weights::<Complex64>(gamma), Weights::to_float);
    let l = canonical_form(gamma, &w)?;
    analyze_form(st, &l, opts)
}

fn degenerate(st: &Structure) -> Analysis {
    let pd = &st.pd;
    Analysis {
        pd: pd.clone(),
        hormander: st.hormander,
        gamma: Vec::new(),
        weights: Vec::new(),
        hypothesis_h: None,
        case: CaseLabel::Degenerate,
        exact: true,
        local_reading: LOCAL_READING,
        r_values: Vec::new(),
        m_spectra: Vec::new(),
        candidates: Vec::new(),
        spectral_kernel_degrees: Vec::new(),
        degree0_min: None,
        cross_check: None,
        checks: st.checks.clone(),
        verdict: Verdict {
            p: pd.p,
            q: pd.q,
            p1: pd.p1,
            hormander: st.hormander,
            hypothesis_h: None,
            witness_degrees: Vec::new(),
            rockland_fails: false,
            maximal_hypoelliptic: None,
        },
    }
}

fn fmt_scalar<S: Scalar>(x: S) -> String {
    if S::EXACT {
        return x.to_string();
    }
    let c = x.to_c64();
    if c.im.abs() < FLOAT_TOL {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

fn clean(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn components<S: Scalar>(ext: &ExteriorOps<S>, v: &[S]) -> Vec<Component> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(s, &c)| Component { basis: ext.label(s), coefficient: fmt_scalar(c) })
        .collect()
}

/// Full pipeline for a given form.
pub fn analyze_form<S: Scalar + Coeff<S = S>>(st: &Structure, l: &LinearForm<S>, opts: Options) -> Result<Analysis> {
    let pd = &st.pd;
    let gamma = st.gamma.as_ref().ok_or(Error::NoFiberRoots)?;
    let mut checks = st.checks.clone();
    let weights: Vec<String> = gamma.roots.iter().map(|&g| fmt_scalar(l.xi(g))).collect();
    let sf = bl_and_a(l, &st.n, pd);
    let h_ok = check_hypothesis_h(&sf);
    let mut out = Analysis {
        pd: pd.clone(),
        hormander: st.hormander,
        gamma: gamma.roots.clone(),
        weights,
        hypothesis_h: Some(h_ok),
        case: if pd.t() >= pd.s() { CaseLabel::First } else { CaseLabel::Second },
        exact: S::EXACT,
        local_reading: LOCAL_READING,
        r_values: Vec::new(),
        m_spectra: Vec::new(),
        candidates: Vec::new(),
        spectral_kernel_degrees: Vec::new(),
        degree0_min: None,
        cross_check: None,
        checks: Vec::new(),
        verdict: Verdict {
            p: pd.p,
            q: pd.q,
            p1: pd.p1,
            hormander: st.hormander,
            hypothesis_h: Some(h_ok),
            witness_degrees: Vec::new(),
            rockland_fails: false,
            maximal_hypoelliptic: None,
        },
    };
    if !h_ok {
        out.checks = checks;
        return Ok(out);
    }

    let pol = choose_polarization(&sf, pd, &st.n)?;
    checks.push("polarization-isotropic");
    out.case = pol.case.into();
    let rep = realize_rep(l, &pol, &st.n, pd)?;
    if !check_rep_homomorphism(&rep, &st.n) {
        return Err(Error::consistency("rep-homomorphism", "π(⟦u,v⟧) ≠ [π(u), π(v)]"));
    }
    checks.push("rep-homomorphism");
    if !check_p0_independence(&rep) {
        return Err(Error::consistency("rep-p0-independence", "P_k(0) are dependent"));
    }
    checks.push("rep-p0-independence");

    let ext: ExteriorOps<S> = exterior_ops(pd);
    let roots = pol.transverse_roots.clone();
    let r_sq: Vec<S> = roots.iter().map(|&r| compute_r_sq(l, pd, &st.nc, r)).collect();
    let rs: Vec<S> = r_sq
        .iter()
        .zip(&roots)
        .map(|(r2, root)| {
            r2.sqrt_nonneg()
                .ok_or_else(|| Error::consistency("r-representable", format!("√(r²) at {root}")))
        })
        .collect::<Result<_>>()?;
    out.r_values = roots
        .iter()
        .zip(&rs)
        .map(|(&root, &r)| RValue {
            root,
            value: r.to_c64().re,
            exact: S::EXACT.then(|| fmt_scalar(r)),
        })
        .collect();
    if rs.iter().any(|r| !r.is_positive_real()) {
        return Err(Error::consistency("r-positive", "some r vanishes under (H)"));
    }

    let ms: Vec<MOperator<S>> = roots.iter().map(|&r| build_m(l, pd, &st.nc, &ext, r)).collect();
    let v0 = ext.wedge(&roots);
    verify_m(l, &st.nc, &ext, &ms, &r_sq, &v0)?;
    checks.push("m-operator-identities");
    let m_sum = ms.iter().fold(ext.zero_op(), |acc, m| acc.add(&m.matrix));

    let op = rep_laplacian(&rep, &st.laplacian);
    let hermite = hermite_part(&r_sq);
    let model = model_operator(&hermite, &m_sum);
    if !op.sub(&model).is_zero() {
        return Err(Error::DecompositionMismatch(format!(
            "π(□) − (ΣD + ΣM) has {} terms",
            op.sub(&model).terms().count()
        )));
    }
    checks.push("rep-laplacian-decomposition");
    let h_ext = hermite.tensor(&ext.identity());
    let m_op = DiffOp::constant(hermite.nvars(), m_sum.clone());
    if !h_ext.commutator(&m_op).is_zero() {
        return Err(Error::consistency("tensor-commutation", "[ΣD, ΣM] ≠ 0"));
    }
    checks.push("tensor-commutation");

    let sum_r = rs.iter().fold(S::zero(), |acc, &r| acc + r);
    let m = ext.rank();
    for sign in [-1i64, 1] {
        let v = build_eigenvector(&ms, &rs, &v0, sign)?;
        let v = if S::EXACT { v } else { normalize(&v) };
        let dual = duality(m, &v);
        for (w, origin) in [(v, Origin::Recursion), (dual, Origin::Duality)] {
            let (img, res, norm) = kernel_residual(&op, &rs, &w);
            let eig = rayleigh(&m_sum, &w);
            let in_kernel = if S::EXACT { img.is_zero() } else { res < FLOAT_TOL };
            out.candidates.push(Candidate {
                degree: vec_degree(&w).ok_or_else(|| {
                    Error::consistency("witness-homogeneous", "eigenvector mixes degrees")
                })?,
                origin,
                eigenvalue: clean(eig),
                residual: if in_kernel && S::EXACT { 0.0 } else { res },
                witness_norm: norm,
                provenance: if S::EXACT { Provenance::Exact } else { Provenance::Float },
                in_kernel,
                components: components(&ext, &w),
            });
        }
    }
    // the candidate from σ = +1 in recursion must see 2Σr‖w‖
    let sr = sum_r.to_c64().re;
    for c in &out.candidates {
        if c.origin == Origin::Recursion && c.eigenvalue > 0.0 {
            let expected = 2.0 * sr * c.witness_norm;
            if (c.residual - expected).abs() > 1e-8 * expected.max(1.0) {
                return Err(Error::consistency(
                    "opposite-sign-residual",
                    format!("residual {} but 2Σr‖w‖ = {expected}", c.residual),
                ));
            }
        }
    }
    checks.push("kernel-residuals");

    for k in 0..=m {
        let ev: Vec<f64> = hermitian_eigenvalues(&m_sum.block(k)).into_iter().map(clean).collect();
        if ev.iter().any(|&e| (e + sr).abs() < SPECTRAL_TOL) {
            out.spectral_kernel_degrees.push(k);
        }
        out.m_spectra.push(DegreeSpectrum { degree: k, eigenvalues: ev });
    }

    let nv = pol.nvars();
    let freqs: Vec<f64> = rs.iter().flat_map(|r| [r.to_c64().re; 2]).collect();
    let t0 = fit_truncation(nv, 6, 300);
    let basis0 = TruncatedBasis::new(freqs.clone(), t0);
    let d0 = basis0.eigenvalues(&op, m, 0);
    let d0_min = d0.first().copied().unwrap_or(f64::NAN);
    if (d0_min - sr).abs() > SPECTRAL_TOL {
        return Err(Error::consistency(
            "degree-zero-positivity",
            format!("lowest degree-0 eigenvalue {d0_min} ≠ Σr = {sr}"),
        ));
    }
    out.degree0_min = Some(clean(d0_min));
    checks.push("degree-zero-positivity");

    out.cross_check = cross_check(&op, &m_sum, &freqs, &rs, m, opts.cross_check_max_rows);
    if let Some(cc) = &out.cross_check {
        let has_witness = out.candidates.iter().any(|c| c.in_kernel);
        if cc.max_deviation > SPECTRAL_TOL || cc.zero_in_spectrum != has_witness {
            return Err(Error::consistency(
                "spectral-cross-check",
                format!("deviation {} / zero {} vs witness {has_witness}", cc.max_deviation, cc.zero_in_spectrum),
            ));
        }
        checks.push("spectral-cross-check");
    }

    let mut degrees: Vec<usize> = out.witnesses().map(|c| c.degree).collect();
    degrees.sort_unstable();
    degrees.dedup();
    out.verdict.rockland_fails = !degrees.is_empty();
    out.verdict.maximal_hypoelliptic = out.verdict.rockland_fails.then_some(false);
    out.verdict.witness_degrees = degrees;
    out.checks = checks;
    Ok(out)
}

fn normalize<S: Scalar>(v: &[S]) -> Vec<S> {
    let n = vec_inner(v, v).to_c64().re.sqrt();
    match S::from_f64(1.0 / n) {
        Some(c) => vec_scale(v, c),
        None => v.to_vec(),
    }
}

/// `⟨Mw, w⟩ / ⟨w, w⟩`.
fn rayleigh<S: Scalar>(m: &ExtOp<S>, w: &[S]) -> f64 {
    let num = vec_inner(&m.apply(w), w).to_c64().re;
    let den = vec_inner(w, w).to_c64().re;
    num / den
}

/// Bottom of the spectrum of `op` on a truncated Hermite basis, against
/// `{Σ r (n_x + n_y + 1) + μ}` with `μ ∈ spec(ΣM)`.
fn cross_check<S: Scalar>(
    op: &DiffOp<ExtOp<S>>,
    m_sum: &ExtOp<S>,
    freqs: &[f64],
    rs: &[S],
    m: usize,
    max_rows: usize,
) -> Option<CrossCheck> {
    let widest = (0..=m).map(|k| binomial(m, k)).max()?;
    let t = fit_truncation(freqs.len(), 6, max_rows / widest.max(1));
    if t < 2 {
        return None;
    }
    let basis = TruncatedBasis::new(freqs.to_vec(), t);
    let mut numeric = Vec::new();
    let mut formula = Vec::new();
    let rf: Vec<f64> = rs.iter().map(|r| r.to_c64().re).collect();
    for k in 0..=m {
        numeric.extend(basis.eigenvalues(op, m, k));
        let mu = hermitian_eigenvalues(&m_sum.block(k));
        for st in &basis.states {
            let e: f64 = rf
                .iter()
                .enumerate()
                .map(|(a, r)| r * f64::from(st[2 * a] + st[2 * a + 1] + 1))
                .sum();
            formula.extend(mu.iter().map(|x| e + x));
        }
    }
    numeric.sort_by(f64::total_cmp);
    formula.sort_by(f64::total_cmp);
    let zero_in_spectrum = numeric.iter().any(|e| e.abs() < SPECTRAL_TOL);
    numeric.truncate(10);
    formula.truncate(10);
    let max_deviation = numeric
        .iter()
        .zip(&formula)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Some(CrossCheck {
        truncation: t,
        numeric: numeric.into_iter().map(clean).collect(),
        formula: formula.into_iter().map(clean).collect(),
        max_deviation,
        zero_in_spectrum,
    })
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

/// Check `ΣM` on the dual of a recursion vector: eigenvalue flips sign.
pub fn dual_flips_eigenvalue<S: Scalar>(m_sum: &ExtOp<S>, v: &[S], m: usize) -> bool {
    let lam = rayleigh(m_sum, v);
    let d = duality(m, v);
    let md = m_sum.apply(&d);
    let expected: Vec<Complex64> = d.iter().map(|x| x.to_c64() * -lam).collect();
    md.iter()
        .zip(expected)
        .all(|(a, b)| (a.to_c64() - b).norm() < 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::build_parabolic;

    fn setup(p: i64, q: i64, p1: i64) -> (Structure, LinearForm<Qi2>) {
        let st = Structure::build(&build_parabolic(p, q, p1).unwrap()).unwrap();
        let gamma = st.gamma.clone().unwrap();
        let l = canonical_form(&gamma, &default_weights::<Qi2>(&gamma)).unwrap();
        (st, l)
    }

    fn r(i: usize, j: usize) -> Root {
        Root::new(i, j)
    }

    #[test]
    fn r_values() {
        let (st, l) = setup(2, 2, 1);
        let r12 = compute_r(&l, &st.pd, &st.nc, r(1, 2)).unwrap();
        assert_eq!(r12, Qi2::one());

        let zero = LinearForm::<Qi2>::new();
        assert_eq!(compute_r(&zero, &st.pd, &st.nc, r(1, 2)), Some(Qi2::zero()));

        let gamma = st.gamma.clone().unwrap();
        let l2 = canonical_form(&gamma, &[Qi2::from_int(2)]).unwrap();
        assert_eq!(compute_r_sq(&l2, &st.pd, &st.nc, r(1, 2)), Qi2::from_int(2));
    }

    #[test]
    fn m_through_unique_partner() {
        let (st, l) = setup(2, 2, 1);
        let ext: ExteriorOps<Qi2> = exterior_ops(&st.pd);
        let m = build_m(&l, &st.pd, &st.nc, &ext, r(1, 2));
        let active: Vec<_> = m
            .pairs
            .iter()
            .filter(|&&(a, b)| !m_pair(&l, &st.nc, &ext, a, b).is_zero())
            .collect();
        assert_eq!(active, vec![&(r(1, 2), r(1, 3))]);
        assert!(m.matrix.is_hermitian());

        let zero = LinearForm::<Qi2>::new();
        assert!(build_m(&zero, &st.pd, &st.nc, &ext, r(1, 2)).matrix.is_zero());
    }

    #[test]
    fn m_spectrum_in_zero_plus_minus_r() {
        let a = analyze(&build_parabolic(2, 2, 1).unwrap(), None).unwrap();
        let all: Vec<f64> = a.m_spectra.iter().flat_map(|d| d.eigenvalues.clone()).collect();
        assert!(all.iter().all(|e| [0.0, 1.0, -1.0].iter().any(|x| (e - x).abs() < 1e-9)));
        assert!(all.iter().any(|e| (e - 1.0).abs() < 1e-9));
        assert!(all.iter().any(|e| (e + 1.0).abs() < 1e-9));
    }

    #[test]
    fn eigenvector_signs() {
        let (st, l) = setup(2, 2, 1);
        let ext: ExteriorOps<Qi2> = exterior_ops(&st.pd);
        let m = build_m(&l, &st.pd, &st.nc, &ext, r(1, 2));
        let v0 = ext.wedge(&[r(1, 2)]);
        for sign in [1, -1] {
            let v = build_eigenvector(std::slice::from_ref(&m), &[Qi2::one()], &v0, sign).unwrap();
            assert_eq!(vec_degree(&v), Some(1));
            assert_eq!(m.matrix.apply(&v), vec_scale(&v, Qi2::from_int(sign)));
        }
    }

    #[test]
    fn recursion_order_independent() {
        let (st, l) = setup(3, 2, 2);
        let ext: ExteriorOps<Qi2> = exterior_ops(&st.pd);
        let roots = st.pd.u_k.clone();
        assert!(roots.len() >= 2);
        let ms: Vec<_> = roots.iter().map(|&a| build_m(&l, &st.pd, &st.nc, &ext, a)).collect();
        let rs: Vec<Qi2> = roots.iter().map(|&a| compute_r(&l, &st.pd, &st.nc, a).unwrap()).collect();
        let v0 = ext.wedge(&roots);
        for sign in [1, -1] {
            let fwd = build_eigenvector(&ms, &rs, &v0, sign).unwrap();
            let (mut ms_r, mut rs_r) = (ms.clone(), rs.clone());
            ms_r.reverse();
            rs_r.reverse();
            let bwd = build_eigenvector(&ms_r, &rs_r, &v0, sign).unwrap();
            assert_eq!(fwd, bwd);
        }
    }

    #[test]
    fn witness_residuals() {
        let a = analyze(&build_parabolic(2, 2, 1).unwrap(), None).unwrap();
        assert!(a.exact);
        let rec: Vec<_> = a.candidates.iter().filter(|c| c.origin == Origin::Recursion).collect();
        let good = rec.iter().find(|c| c.eigenvalue < 0.0).unwrap();
        let bad = rec.iter().find(|c| c.eigenvalue > 0.0).unwrap();
        assert!(good.in_kernel);
        assert_eq!(good.residual, 0.0);
        assert_eq!(good.degree, 1);
        assert!((bad.residual - 2.0 * a.sum_r() * bad.witness_norm).abs() < 1e-9);
        assert_eq!(a.verdict.witness_degrees, vec![1, 2]);
        assert_eq!(a.verdict.maximal_hypoelliptic, Some(false));
    }

    #[test]
    fn homogeneous_in_form() {
        let pd = build_parabolic(2, 2, 1).unwrap();
        for c in ["1", "2", "3/2", "2*sqrt2", "1/3*sqrt2"] {
            let w = Weights::Exact(vec![c.parse().unwrap()]);
            let a = analyze(&pd, Some(&w)).unwrap();
            assert!(a.verdict.rockland_fails, "{c}");
            assert_eq!(a.verdict.witness_degrees, vec![1, 2]);
        }
        let a = analyze(&pd, Some(&Weights::Float(vec![0.37]))).unwrap();
        assert!(!a.exact);
        assert!(a.verdict.rockland_fails);
        assert!(a.witnesses().all(|c| c.residual < FLOAT_TOL));
    }

    #[test]
    fn second_case_and_degenerate() {
        let a = analyze(&build_parabolic(3, 1, 1).unwrap(), None).unwrap();
        assert_eq!(a.case, CaseLabel::Second);
        let w: Vec<_> = a.witnesses().map(|c| (c.degree, c.origin)).collect();
        assert!(w.contains(&(1, Origin::Recursion)));
        assert!(w.contains(&(2, Origin::Duality)));

        let d = analyze(&build_parabolic(1, 1, 1).unwrap(), None).unwrap();
        assert_eq!(d.case, CaseLabel::Degenerate);
        assert_eq!(d.verdict.maximal_hypoelliptic, None);
        let w = Weights::Exact(vec![Q2::one()]);
        assert!(analyze(&build_parabolic(1, 1, 1).unwrap(), Some(&w)).is_err());
    }

    #[test]
    fn degree_zero_positive() {
        let a = analyze(&build_parabolic(2, 2, 1).unwrap(), None).unwrap();
        assert_eq!(a.degree0_min, Some(1.0));
        let cc = a.cross_check.unwrap();
        assert!(cc.max_deviation < SPECTRAL_TOL);
        assert!(cc.zero_in_spectrum);
    }
}
