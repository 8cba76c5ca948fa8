//! Real orthonormal frame `X_γ, Y_γ` of the tangent space at the origin of
//! `G/L∩K`, and its bracket table.
//!
//! With `Z̄_γ = E_γ`, `Z_γ = −E_{−γ}` (compact) or `E_{−γ}` (noncompact):
//!
//! ```text
//! compact:     X = (E_γ − E_{−γ})/√2    Y = −i(E_γ + E_{−γ})/√2
//! noncompact:  X = (E_γ + E_{−γ})/√2    Y = −i(E_γ − E_{−γ})/√2
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rootsys::{MatrixRealization, ParabolicData, Root, StructureConstants};
use crate::scalar::{Q2, Qi2, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrameKind {
    X,
    Y,
}

/// Frame vector `X_γ` or `Y_γ`. Ordered by `(kind, root)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FrameVector {
    pub kind: FrameKind,
    pub root: Root,
}

impl FrameVector {
    pub fn x(root: Root) -> Self {
        FrameVector { kind: FrameKind::X, root }
    }

    pub fn y(root: Root) -> Self {
        FrameVector { kind: FrameKind::Y, root }
    }
}

impl fmt::Display for FrameVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            FrameKind::X => "X",
            FrameKind::Y => "Y",
        };
        write!(f, "{k}{}", self.root)
    }
}

/// Real linear combination of frame vectors.
pub type FrameCombination = BTreeMap<FrameVector, Q2>;

fn add_term(c: &mut FrameCombination, v: FrameVector, coef: Q2) {
    let e = c.entry(v).or_insert_with(Q2::zero);
    *e = *e + coef;
    if e.is_zero() {
        c.remove(&v);
    }
}

/// Bracket of two frame vectors, split into horizontal (`Δu`) and fiber
/// (`Δ(l∩p)`) parts. The `l∩k` component is dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BracketEntry {
    pub e_part: FrameCombination,
    pub f_part: FrameCombination,
}

impl BracketEntry {
    fn push(&mut self, pd: &ParabolicData, v: FrameVector, coef: Q2) {
        if pd.in_u(v.root) {
            add_term(&mut self.e_part, v, coef);
        } else if pd.in_l_p(v.root) {
            add_term(&mut self.f_part, v, coef);
        }
    }

    fn negated(mut self) -> Self {
        for c in self.e_part.values_mut().chain(self.f_part.values_mut()) {
            *c = -*c;
        }
        self
    }
}

/// The frame: `E` block (roots of `Δu`) then `F` block (roots of `Δ(l∩p)`),
/// each sorted by `(kind, root)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub e_block: Vec<FrameVector>,
    pub f_block: Vec<FrameVector>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.e_block.len() + self.f_block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &FrameVector> {
        self.e_block.iter().chain(&self.f_block)
    }
}

fn block(roots: &[Root]) -> Vec<FrameVector> {
    let mut v: Vec<FrameVector> = roots
        .iter()
        .flat_map(|&r| [FrameVector::x(r), FrameVector::y(r)])
        .collect();
    v.sort();
    v
}

pub fn build_frame(pd: &ParabolicData) -> Frame {
    Frame { e_block: block(&pd.u), f_block: block(&pd.l_p) }
}

/// Matrix of a frame vector in the oracle realization.
pub fn frame_matrix(pd: &ParabolicData, oracle: &MatrixRealization, v: FrameVector) -> Mat<Qi2> {
    let r = v.root;
    let ep = oracle.e(r);
    let em = oracle.e(r.neg());
    let s = Qi2::real(Q2::inv_sqrt2());
    let compact = pd.is_compact(r);
    match (v.kind, compact) {
        (FrameKind::X, true) => (ep - em).scale(s),
        (FrameKind::X, false) => (ep + em).scale(s),
        (FrameKind::Y, true) => (ep + em).scale(-Qi2::imag_unit() * s),
        (FrameKind::Y, false) => (ep - em).scale(-Qi2::imag_unit() * s),
    }
}

/// Gram matrix `⟨v_a, v_b⟩` of the frame.
pub fn gram_matrix(pd: &ParabolicData, oracle: &MatrixRealization, frame: &Frame) -> Vec<Vec<Qi2>> {
    let mats: Vec<Mat<Qi2>> = frame.iter().map(|&v| frame_matrix(pd, oracle, v)).collect();
    mats.iter()
        .map(|a| mats.iter().map(|b| a.inner(b)).collect())
        .collect()
}

/// Bracket computed by a literal matrix commutator and re-expanded in the
/// frame. Fails when the remainder is not in `l∩k`.
pub fn frame_bracket(
    pd: &ParabolicData,
    oracle: &MatrixRealization,
    frame: &Frame,
    u: FrameVector,
    v: FrameVector,
) -> Result<BracketEntry> {
    let m = frame_matrix(pd, oracle, u).commutator(&frame_matrix(pd, oracle, v));
    let mut rest = m.clone();
    let mut out = BracketEntry::default();
    for &w in frame.iter() {
        let wm = frame_matrix(pd, oracle, w);
        let c = m.inner(&wm);
        if !c.is_real() {
            return Err(Error::consistency(
                "frame-expressibility",
                format!("[{u}, {v}] has non-real coefficient on {w}"),
            ));
        }
        if c.is_zero() {
            continue;
        }
        rest = &rest - &wm.scale(c);
        out.push(pd, w, c.re);
    }
    // Remainder must lie in l∩k: the Cartan plus root spaces of Δ(l∩k).
    for i in 0..pd.n() {
        for j in 0..pd.n() {
            if i == j || rest.get(i, j).is_zero() {
                continue;
            }
            let r = Root::new(i + 1, j + 1).abs();
            if !pd.l_k.contains(&r) {
                return Err(Error::consistency(
                    "frame-expressibility",
                    format!("[{u}, {v}] has a component on E{r} outside the frame and l∩k"),
                ));
            }
        }
    }
    Ok(out)
}

/// The closed-form bracket of a compact and a noncompact root vector of
/// `Δu` (either order). `None` for any other pair.
pub fn formula_bracket(
    pd: &ParabolicData,
    nc: &StructureConstants,
    u: FrameVector,
    v: FrameVector,
) -> Option<BracketEntry> {
    if !pd.in_u(u.root) || !pd.in_u(v.root) {
        return None;
    }
    let (a, b, flip) = match (pd.is_compact(u.root), pd.is_compact(v.root)) {
        (true, false) => (u, v, false),
        (false, true) => (v, u, true),
        _ => return None,
    };
    let (alpha, beta) = (a.root, b.root);
    let h = Q2::inv_sqrt2();
    let n_plus = Q2::from_int(nc.get(alpha, beta));
    let n_minus = Q2::from_int(nc.get(alpha, beta.neg()));
    let mut out = BracketEntry::default();
    let sum = alpha.plus(beta);
    let diff = alpha.minus(beta);
    let eps = Q2::from_int(diff.map_or(1, Root::sign));
    use FrameKind::{X, Y};
    // (coefficient of the α+β term, kind), (coefficient of the |α−β| term, kind)
    let (plus_term, minus_term) = match (a.kind, b.kind) {
        (X, X) => ((n_plus * h, X), (n_minus * h, X)),
        (X, Y) => ((n_plus * h, Y), (-eps * n_minus * h, Y)),
        (Y, X) => ((n_plus * h, Y), (eps * n_minus * h, Y)),
        (Y, Y) => ((-n_plus * h, X), (n_minus * h, X)),
    };
    if let Some(s) = sum {
        out.push(pd, FrameVector { kind: plus_term.1, root: s.abs() }, plus_term.0);
    }
    if let Some(d) = diff {
        out.push(pd, FrameVector { kind: minus_term.1, root: d.abs() }, minus_term.0);
    }
    Some(if flip { out.negated() } else { out })
}

/// Outcome of [`verify_frame_relations`].
#[derive(Clone, Debug, Default)]
pub struct FrameCheck {
    pub ok: bool,
    pub diffs: Vec<String>,
}

/// Compare the closed-form brackets with the oracle on every
/// compact×noncompact pair, and check that every other bracket of frame
/// vectors has zero fiber part.
pub fn verify_frame_relations(
    pd: &ParabolicData,
    nc: &StructureConstants,
    oracle: &MatrixRealization,
) -> FrameCheck {
    let frame = build_frame(pd);
    let mut diffs = Vec::new();
    let vs: Vec<FrameVector> = frame.iter().copied().collect();
    for (ia, &u) in vs.iter().enumerate() {
        for &v in &vs[ia..] {
            let got = match frame_bracket(pd, oracle, &frame, u, v) {
                Ok(b) => b,
                Err(e) => {
                    diffs.push(e.to_string());
                    continue;
                }
            };
            match formula_bracket(pd, nc, u, v) {
                Some(expect) if expect != got => diffs.push(format!(
                    "[{u}, {v}]: oracle {:?} vs formula {:?}",
                    fmt_entry(&got),
                    fmt_entry(&expect)
                )),
                Some(_) => {}
                None if !got.f_part.is_empty() => {
                    diffs.push(format!("[{u}, {v}] has fiber part {:?}", fmt_combo(&got.f_part)))
                }
                None => {}
            }
        }
    }
    FrameCheck { ok: diffs.is_empty(), diffs }
}

pub(crate) fn fmt_combo(c: &FrameCombination) -> String {
    c.iter()
        .map(|(v, k)| format!("{k}·{v}"))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn fmt_entry(b: &BracketEntry) -> String {
    format!("E[{}] F[{}]", fmt_combo(&b.e_part), fmt_combo(&b.f_part))
}
