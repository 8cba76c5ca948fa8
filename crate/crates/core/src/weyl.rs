//! Differential operators with polynomial coefficients, normal ordered as
//! `Σ c · x^a ∂^b`, with coefficients in a scalar field or in `End(∧*u)`.
//! Also the Gaussian-weighted polynomial space they act on.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_complex::Complex64;

use crate::exterior::ExtOp;
use crate::scalar::{Qi2, Scalar};

/// Coefficient ring for [`DiffOp`]. Coefficients commute with `x` and `∂`.
pub trait Coeff: Clone + PartialEq + Debug {
    type S: Scalar;
    fn vanishes(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, s: Self::S) -> Self;
}

macro_rules! scalar_coeff {
    ($t:ty) => {
        impl Coeff for $t {
            type S = $t;
            fn vanishes(&self) -> bool {
                Scalar::is_zero(self)
            }
            fn plus(&self, o: &Self) -> Self {
                *self + *o
            }
            fn times(&self, o: &Self) -> Self {
                *self * *o
            }
            fn scaled(&self, s: Self::S) -> Self {
                *self * s
            }
        }
    };
}

scalar_coeff!(Qi2);
scalar_coeff!(Complex64);

impl<S: Scalar> Coeff for ExtOp<S> {
    type S = S;
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scaled(&self, s: S) -> Self {
        self.scale(s)
    }
}

/// Exponent vectors `(x^a, ∂^b)`.
pub type Mono = (Vec<u32>, Vec<u32>);

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp<C> {
    nvars: usize,
    terms: BTreeMap<Mono, C>,
}

fn falling(c: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * i64::from(c - j))
}

fn binom(n: u32, k: u32) -> i64 {
    falling(n, k) / falling(k, k)
}

impl<C: Coeff> DiffOp<C> {
    pub fn zero(nvars: usize) -> Self {
        DiffOp { nvars, terms: BTreeMap::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Mono, C)>) -> Self {
        let mut op = Self::zero(nvars);
        for (m, c) in terms {
            op.add_term(m, c);
        }
        op
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::from_terms(nvars, [((vec![0; nvars], vec![0; nvars]), c)])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, xexp: &[u32], dexp: &[u32]) -> Option<&C> {
        self.terms.get(&(xexp.to_vec(), dexp.to_vec()))
    }

    pub fn add_term(&mut self, m: Mono, c: C) {
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old.plus(&c);
                if !sum.vanishes() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                if !c.vanishes() {
                    self.terms.insert(m, c);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: C::S) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), c.scaled(s))))
    }

    pub fn neg(&self) -> Self {
        self.scale(-C::S::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Composition, normal ordering `∂^b x^c` by the Leibniz rule.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, b), c1) in &self.terms {
            for ((c, d), c2) in &o.terms {
                let coeff = c1.times(c2);
                if coeff.vanishes() {
                    continue;
                }
                for (k, xe, de) in reorder(a, b, c, d) {
                    out.add_term((xe, de), coeff.scaled(C::S::from_int(k)));
                }
            }
        }
        out
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// Highest total order in `∂`.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|(_, d)| d.iter().sum()).max().unwrap_or(0)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> DiffOp<D> {
        DiffOp::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

/// `x^a ∂^b · x^c ∂^d = Σ k · x^{a+c−j} ∂^{b+d−j}` over multi-indices `j ≤ min(b, c)`.
fn reorder(a: &[u32], b: &[u32], c: &[u32], d: &[u32]) -> Vec<(i64, Vec<u32>, Vec<u32>)> {
    let mut acc = vec![(1i64, Vec::new(), Vec::new())];
    for v in 0..a.len() {
        let mut next = Vec::new();
        for (k, xe, de) in &acc {
            for j in 0..=b[v].min(c[v]) {
                let f = binom(b[v], j) * falling(c[v], j);
                let mut xe = xe.clone();
                let mut de = de.clone();
                xe.push(a[v] + c[v] - j);
                de.push(b[v] + d[v] - j);
                next.push((k * f, xe, de));
            }
        }
        acc = next;
    }
    acc
}

impl<S: Scalar> DiffOp<S>
where
    S: Coeff<S = S>,
{
    pub fn scalar(nvars: usize, c: S) -> Self {
        Self::constant(nvars, c)
    }

    pub fn x(nvars: usize, k: usize) -> Self {
        let mut xe = vec![0; nvars];
        xe[k] = 1;
        Self::from_terms(nvars, [((xe, vec![0; nvars]), S::one())])
    }

    pub fn d(nvars: usize, k: usize) -> Self {
        let mut de = vec![0; nvars];
        de[k] = 1;
        Self::from_terms(nvars, [((vec![0; nvars], de), S::one())])
    }

    /// `A ⊗ self`.
    pub fn tensor(&self, a: &ExtOp<S>) -> DiffOp<ExtOp<S>> {
        self.map(|&c| a.scale(c))
    }
}

/// `Σ_a c_a x^a · exp(−Σ_k r_k x_k²/2)` with `c_a ∈ ∧*u`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussPoly<S> {
    pub freqs: Vec<S>,
    pub terms: BTreeMap<Vec<u32>, Vec<S>>,
}

impl<S: Scalar> GaussPoly<S> {
    /// `exp(−Σ r_k x_k²/2) ⊗ w`.
    pub fn ground(freqs: Vec<S>, w: Vec<S>) -> Self {
        let n = freqs.len();
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; n], w);
        GaussPoly { freqs, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|v| v.iter().all(Scalar::is_zero))
    }

    fn add_to(terms: &mut BTreeMap<Vec<u32>, Vec<S>>, e: Vec<u32>, v: Vec<S>) {
        match terms.get_mut(&e) {
            Some(old) => {
                for (o, x) in old.iter_mut().zip(v) {
                    *o = *o + x;
                }
            }
            None => {
                terms.insert(e, v);
            }
        }
    }

    /// `∂^dexp (x^e G)` as `Σ c · x^e' G`.
    fn derive(&self, e: &[u32], dexp: &[u32]) -> Vec<(S, Vec<u32>)> {
        let mut acc = vec![(S::one(), e.to_vec())];
        for (k, &times) in dexp.iter().enumerate() {
            for _ in 0..times {
                let mut next = Vec::new();
                for (c, ex) in &acc {
                    // ∂(x^n G) = n x^{n−1} G − r x^{n+1} G
                    if ex[k] > 0 {
                        let mut lo = ex.clone();
                        lo[k] -= 1;
                        next.push((*c * S::from_int(i64::from(ex[k])), lo));
                    }
                    let mut hi = ex.clone();
                    hi[k] += 1;
                    next.push((-*c * self.freqs[k], hi));
                }
                acc = next;
            }
        }
        acc
    }

    pub fn apply(&self, op: &DiffOp<ExtOp<S>>) -> GaussPoly<S> {
        let mut terms = BTreeMap::new();
        for ((xe, de), a) in op.terms() {
            for (e, v) in &self.terms {
                let av = a.apply(v);
                if av.iter().all(Scalar::is_zero) {
                    continue;
                }
                for (c, mut ex) in self.derive(e, de) {
                    for (k, &p) in xe.iter().enumerate() {
                        ex[k] += p;
                    }
                    Self::add_to(&mut terms, ex, av.iter().map(|&x| x * c).collect());
                }
            }
        }
        terms.retain(|_, v: &mut Vec<S>| !v.iter().all(Scalar::is_zero));
        GaussPoly { freqs: self.freqs.clone(), terms }
    }

    /// `L²` norm over `ℝ^n` (the `∧*u` factor with its standard inner product).
    pub fn l2_norm(&self) -> f64 {
        let freqs: Vec<f64> = self.freqs.iter().map(|r| r.to_c64().re).collect();
        let mut total = 0.0;
        for (a, va) in &self.terms {
            for (b, vb) in &self.terms {
                let ip: Complex64 = va
                    .iter()
                    .zip(vb)
                    .map(|(x, y)| x.to_c64() * y.to_c64().conj())
                    .sum();
                if ip.norm() == 0.0 {
                    continue;
                }
                let mut m = 1.0;
                for k in 0..freqs.len() {
                    m *= gaussian_moment(a[k] + b[k], freqs[k]);
                }
                total += ip.re * m;
            }
        }
        total.max(0.0).sqrt()
    }
}

/// `∫_ℝ x^n e^{−r x²} dx`.
pub fn gaussian_moment(n: u32, r: f64) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    // Γ(m + ½) = √π (2m)! / (4^m m!) = √π Π_{j<m} (j + ½)
    let m = n / 2;
    let gamma = (0..m).fold(std::f64::consts::PI.sqrt(), |acc, j| acc * (f64::from(j) + 0.5));
    gamma / r.powf(f64::from(m) + 0.5)
}
