mod common;

use flagrock::exterior::exterior_ops;
use flagrock::scalar::Qi2;
use proptest::prelude::*;

use common::*;

fn structure_index() -> impl Strategy<Value = usize> {
    0..small_structures().len()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exterior_anticommutation(k in structure_index(), a in 0usize..16, b in 0usize..16) {
        let st = &small_structures()[k];
        let ext = exterior_ops::<Qi2>(&st.pd);
        let u = &st.pd.u;
        let r = anticommutation(&ext, u[a % u.len()], u[b % u.len()]);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn m_squares_to_r_squared(k in structure_index(), w in proptest::collection::vec(positive_q2(), 4)) {
        let st = &small_structures()[k];
        let n = st.gamma.as_ref().unwrap().len();
        let r = m_square(st, &w[..n]);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn recursion_order_independent(
        k in structure_index(),
        w in proptest::collection::vec(0.05f64..5.0, 4),
        seed in any::<u64>(),
    ) {
        let st = &small_structures()[k];
        let n = st.gamma.as_ref().unwrap().len();
        let r = order_independent(st, &w[..n], seed);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn verdict_homogeneous(k in structure_index(), c in positive_rational()) {
        let r = homogeneous(&small_structures()[k], c);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn bilinear_form_skew(
        k in structure_index(),
        coords in proptest::collection::vec((-9i64..=9, -9i64..=9), 8),
    ) {
        let r = bl_skew(&small_structures()[k], &coords);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn structure_constants_match_matrix_units(k in structure_index(), a in 0usize..64, b in 0usize..64) {
        let st = &small_structures()[k];
        let roots = st.pd.all_roots();
        let (x, y) = (roots[a % roots.len()], roots[b % roots.len()]);
        prop_assert_eq!(st.nc.get(x, y), matrix_unit_constant(st.pd.n(), x, y));
    }
}
