#![allow(dead_code)]

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use flagrock::exterior::{exterior_ops, vec_is_zero, vec_scale, vec_sub, ExteriorOps};
use flagrock::orbit::{bl_and_a, canonical_form, LinearForm};
use flagrock::realframe::FrameVector;
use flagrock::rootsys::{build_parabolic, ParabolicData, Root};
use flagrock::scalar::{Q2, Qi2, Scalar};
use flagrock::spectral::{
    analyze_structure, build_eigenvector, build_m, compute_r_sq, MOperator, Options, Structure, Weights,
};

pub fn instances(max_n: usize) -> Vec<(usize, usize, usize)> {
    flagrock::cli::instances(max_n)
}

pub fn pd(p: usize, q: usize, p1: usize) -> ParabolicData {
    build_parabolic(p as i64, q as i64, p1 as i64).unwrap()
}

/// Nondegenerate structures with `p + q ≤ 5`.
pub fn small_structures() -> &'static [Structure] {
    static CELL: OnceLock<Vec<Structure>> = OnceLock::new();
    CELL.get_or_init(|| {
        instances(5)
            .into_iter()
            .map(|(p, q, p1)| pd(p, q, p1))
            .filter(|d| !d.is_degenerate())
            .map(|d| Structure::build(&d).unwrap())
            .collect()
    })
}

/// Roots carried by the transverse variables of the polarization.
pub fn transverse_roots(pd: &ParabolicData) -> Vec<Root> {
    if pd.t() >= pd.s() {
        pd.u_k.clone()
    } else {
        pd.u_p.clone()
    }
}

/// Rationals `n/d` with `1 ≤ n ≤ 40`, `1 ≤ d ≤ 12`.
pub fn positive_rational() -> impl Strategy<Value = Q2> {
    (1i64..=40, 1i64..=12).prop_map(|(n, d)| Q2::from_ratio(n, d))
}

/// Positive elements of `ℚ` or `ℚ·√2`.
pub fn positive_q2() -> impl Strategy<Value = Q2> {
    (positive_rational(), any::<bool>()).prop_map(|(x, root)| if root { x * Q2::sqrt2() } else { x })
}

/// `{e_a, i_b} = δ_ab`, `{e_a, e_b} = 0`, `{i_a, i_b} = 0`.
pub fn anticommutation(ext: &ExteriorOps<Qi2>, a: Root, b: Root) -> Result<(), String> {
    let id = ext.identity();
    let zero = ext.zero_op();
    let ei = ext.e_of(a).anticommutator(ext.i_of(b));
    let expected = if a == b { &id } else { &zero };
    if ei != *expected {
        return Err(format!("{{e{a}, i{b}}} wrong"));
    }
    if !ext.e_of(a).anticommutator(ext.e_of(b)).is_zero() {
        return Err(format!("{{e{a}, e{b}}} ≠ 0"));
    }
    if !ext.i_of(a).anticommutator(ext.i_of(b)).is_zero() {
        return Err(format!("{{i{a}, i{b}}} ≠ 0"));
    }
    if ext.e_of(a).adjoint() != *ext.i_of(a) {
        return Err(format!("e{a}* ≠ i{a}"));
    }
    Ok(())
}

fn ms_for<S: Scalar>(st: &Structure, l: &LinearForm<S>, ext: &ExteriorOps<S>) -> Vec<MOperator<S>> {
    transverse_roots(&st.pd).iter().map(|&r| build_m(l, &st.pd, &st.nc, ext, r)).collect()
}

/// `M² v = r² v` on the top transverse vector, with `M` Hermitian and
/// degree preserving, for exact weights.
pub fn m_square(st: &Structure, weights: &[Q2]) -> Result<(), String> {
    let gamma = st.gamma.as_ref().unwrap();
    let w: Vec<Qi2> = weights.iter().map(|&x| Qi2::real(x)).collect();
    let l = canonical_form(gamma, &w).map_err(|e| e.to_string())?;
    let ext: ExteriorOps<Qi2> = exterior_ops(&st.pd);
    let roots = transverse_roots(&st.pd);
    let v = ext.wedge(&roots);
    for m in ms_for(st, &l, &ext) {
        if !m.matrix.is_hermitian() || !m.matrix.preserves_degree() {
            return Err(format!("M{} not Hermitian / degree preserving", m.root));
        }
        let r2 = compute_r_sq(&l, &st.pd, &st.nc, m.root);
        let m2v = m.matrix.apply(&m.matrix.apply(&v));
        if !vec_is_zero(&vec_sub(&m2v, &vec_scale(&v, r2))) {
            return Err(format!("M{}² v ≠ r² v", m.root));
        }
    }
    Ok(())
}

/// The recursion vector does not depend on the order of the roots.
pub fn order_independent(st: &Structure, weights: &[f64], perm_seed: u64) -> Result<(), String> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let gamma = st.gamma.as_ref().unwrap();
    let w: Vec<Complex64> = weights.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let l = canonical_form(gamma, &w).map_err(|e| e.to_string())?;
    let ext: ExteriorOps<Complex64> = exterior_ops(&st.pd);
    let roots = transverse_roots(&st.pd);
    let v0 = ext.wedge(&roots);
    let ms = ms_for(st, &l, &ext);
    let rs: Vec<Complex64> = ms
        .iter()
        .map(|m| compute_r_sq(&l, &st.pd, &st.nc, m.root).sqrt_nonneg().unwrap())
        .collect();
    let mut order: Vec<usize> = (0..ms.len()).collect();
    order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
    let ms_p: Vec<_> = order.iter().map(|&k| ms[k].clone()).collect();
    let rs_p: Vec<_> = order.iter().map(|&k| rs[k]).collect();
    for sign in [1, -1] {
        let a = build_eigenvector(&ms, &rs, &v0, sign).map_err(|e| e.to_string())?;
        let b = build_eigenvector(&ms_p, &rs_p, &v0, sign).map_err(|e| e.to_string())?;
        let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
        if a.iter().zip(&b).any(|(x, y)| (x - y).norm() > 1e-9 * scale) {
            return Err(format!("order {order:?} changes the σ={sign} vector"));
        }
    }
    Ok(())
}

/// Replacing `l` by `c·l` keeps the verdict and the exact zero residuals.
pub fn homogeneous(st: &Structure, c: Q2) -> Result<(), String> {
    let opts = Options { cross_check_max_rows: 0 };
    let base = analyze_structure(st, None, opts).map_err(|e| e.to_string())?;
    let gamma = st.gamma.as_ref().unwrap();
    let w = Weights::Exact(vec![c * Q2::sqrt2(); gamma.len()]);
    let scaled = analyze_structure(st, Some(&w), opts).map_err(|e| e.to_string())?;
    if scaled.verdict.rockland_fails != base.verdict.rockland_fails
        || scaled.verdict.witness_degrees != base.verdict.witness_degrees
    {
        return Err(format!("verdict changed under l ↦ {c}·l"));
    }
    if !scaled.exact || scaled.witnesses().any(|w| w.residual != 0.0) {
        return Err("scaled witness not exact".into());
    }
    Ok(())
}

/// `B_l` is skew for an arbitrary form on the second layer.
pub fn bl_skew(st: &Structure, coords: &[(i64, i64)]) -> Result<(), String> {
    let mut l = LinearForm::<Qi2>::new();
    for (&g, &(x, y)) in st.pd.l_p.iter().zip(coords) {
        l.set(FrameVector::x(g), Qi2::from_int(x));
        l.set(FrameVector::y(g), Qi2::from_int(y));
    }
    let sf = bl_and_a(&l, &st.n, &st.pd);
    if !sf.is_skew() {
        return Err("B_l not skew".into());
    }
    Ok(())
}

/// Independent structure constants from integer matrix units.
pub fn matrix_unit_constant(n: usize, a: Root, b: Root) -> i64 {
    let unit = |r: Root| {
        let mut m = vec![vec![0i64; n]; n];
        m[r.i - 1][r.j - 1] = 1;
        m
    };
    let (x, y) = (unit(a), unit(b));
    let mut c = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[i][j] += x[i][k] * y[k][j] - y[i][k] * x[k][j];
            }
        }
    }
    match a.plus(b) {
        Some(s) => c[s.i - 1][s.j - 1],
        None => 0,
    }
}
