//! Dense matrices of polynomial differential operators on a truncated
//! Hermite basis, via ladder operators.
//!
//! For a variable with frequency `r`, `x = (a + a†)/√(2r)` and
//! `∂ = √(r/2) (a − a†)`, where `|n⟩` is the `n`-th Hermite function of
//! `exp(−r x²/2)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::exterior::{subsets_of_degree, ExtOp};
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::Scalar;
use crate::weyl::DiffOp;

/// Multi-indices of total degree at most `max_total`.
#[derive(Clone, Debug)]
pub struct TruncatedBasis {
    pub freqs: Vec<f64>,
    pub states: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
}

fn multi_indices(nvars: usize, max_total: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=max_total {
        for mut rest in multi_indices(nvars - 1, max_total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Number of multi-indices in `nvars` variables of total degree `≤ n`.
pub fn basis_size(nvars: usize, n: u32) -> usize {
    // C(nvars + n, n)
    (1..=n as usize).fold(1usize, |acc, k| acc * (nvars + k) / k)
}

/// Largest truncation `≤ max_total` with at most `cap` states.
pub fn fit_truncation(nvars: usize, max_total: u32, cap: usize) -> u32 {
    (0..=max_total).rev().find(|&n| basis_size(nvars, n) <= cap).unwrap_or(0)
}

impl TruncatedBasis {
    pub fn new(freqs: Vec<f64>, max_total: u32) -> Self {
        let states = multi_indices(freqs.len(), max_total);
        let index = states.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
        TruncatedBasis { freqs, states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `x^a ∂^b |n⟩` in one variable, as `(n', coefficient)` pairs.
    fn apply_1d(r: f64, a: u32, b: u32, n: u32) -> Vec<(u32, f64)> {
        let mut state: BTreeMap<u32, f64> = BTreeMap::new();
        state.insert(n, 1.0);
        let lower = |s: &BTreeMap<u32, f64>, c_lo: f64, c_hi: f64| {
            let mut out: BTreeMap<u32, f64> = BTreeMap::new();
            for (&m, &v) in s {
                if m > 0 {
                    *out.entry(m - 1).or_insert(0.0) += c_lo * v * f64::from(m).sqrt();
                }
                *out.entry(m + 1).or_insert(0.0) += c_hi * v * f64::from(m + 1).sqrt();
            }
            out
        };
        let dc = (r / 2.0).sqrt();
        for _ in 0..b {
            state = lower(&state, dc, -dc);
        }
        let xc = 1.0 / (2.0 * r).sqrt();
        for _ in 0..a {
            state = lower(&state, xc, xc);
        }
        state.into_iter().filter(|(_, v)| *v != 0.0).collect()
    }

    /// `x^a ∂^b` applied to basis state `k`, projected on the basis.
    fn apply_mono(&self, xe: &[u32], de: &[u32], k: usize) -> Vec<(usize, f64)> {
        let mut acc: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 1.0)];
        for v in 0..self.freqs.len() {
            let one = Self::apply_1d(self.freqs[v], xe[v], de[v], self.states[k][v]);
            let mut next = Vec::new();
            for (idx, c) in &acc {
                for &(m, w) in &one {
                    let mut i = idx.clone();
                    i.push(m);
                    next.push((i, c * w));
                }
            }
            acc = next;
        }
        acc.into_iter()
            .filter_map(|(i, c)| self.index.get(&i).map(|&j| (j, c)))
            .collect()
    }

    /// Matrix of `op` on `basis ⊗ ∧^k` (exterior rank `m`), rows
    /// `(state, subset)` in lexicographic order.
    pub fn matrix<S: Scalar>(&self, op: &DiffOp<ExtOp<S>>, m: usize, k: usize) -> Vec<Vec<Complex64>> {
        let subsets = subsets_of_degree(m, k);
        let sub_index: BTreeMap<usize, usize> = subsets.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let ns = subsets.len();
        let dim = self.len() * ns;
        let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for ((xe, de), a) in op.terms() {
            let a = a.restrict_degree(k);
            if a.is_zero() {
                continue;
            }
            for col_state in 0..self.len() {
                let images = self.apply_mono(xe, de, col_state);
                for (row, col, v) in a.entries() {
                    let (ri, ci) = (sub_index[&row], sub_index[&col]);
                    let v = v.to_c64();
                    for &(row_state, c) in &images {
                        mat[row_state * ns + ri][col_state * ns + ci] += v * c;
                    }
                }
            }
        }
        mat
    }

    pub fn eigenvalues<S: Scalar>(&self, op: &DiffOp<ExtOp<S>>, m: usize, k: usize) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix(op, m, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Qi2, Q2};
    use crate::weyl::DiffOp;

    #[test]
    fn sizes() {
        assert_eq!(basis_size(2, 6), 28);
        assert_eq!(TruncatedBasis::new(vec![1.0, 1.0], 6).len(), 28);
        assert_eq!(fit_truncation(8, 6, 300), 3);
    }

    #[test]
    fn oscillator_spectrum() {
        // −½(∂² − r² x²) has spectrum r(n + ½)
        let r = 2.0;
        let x = DiffOp::<Qi2>::x(1, 0);
        let d = DiffOp::<Qi2>::d(1, 0);
        let h = d
            .mul(&d)
            .sub(&x.mul(&x).scale(Qi2::from_int(4)))
            .scale(Qi2::real(Q2::from_ratio(-1, 2)));
        let op = h.tensor(&ExtOp::identity(1));
        let b = TruncatedBasis::new(vec![r], 8);
        let ev = b.eigenvalues(&op, 0, 0);
        for (n, e) in ev.iter().enumerate() {
            assert!((e - r * (n as f64 + 0.5)).abs() < 1e-10, "{n}: {e}");
        }
    }
}
