//! Scalar fields used throughout the pipeline.
//!
//! All structure constants of the flag-manifold frame live in the field
//! `Q(√2)(i)`, so the geometric part of the computation is carried out in the
//! exact type [`Qi2`]. The spectral part is generic over [`Scalar`] so that
//! linear forms whose oscillator frequencies leave the field can fall back to
//! `Complex64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

/// Tolerance used by the floating-point scalar for zero tests and ranks.
pub const FLOAT_TOL: f64 = 1e-10;

fn rat(n: i128) -> Rational {
    Rational::from_integer(n)
}

fn rational_sqrt(x: Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = *x.numer();
    let d = *x.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    (sn * sn == n && sd * sd == d).then(|| Rational::new(sn, sd))
}

/// An element `a + b√2` of the real quadratic field `Q(√2)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Q2 {
    pub a: Rational,
    pub b: Rational,
}

impl Q2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        Q2 { a, b }
    }

    pub fn from_int(n: i64) -> Self {
        Q2::new(rat(n as i128), Rational::zero())
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Q2::new(Rational::new(n as i128, d as i128), Rational::zero())
    }

    pub fn zero() -> Self {
        Q2::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        Q2::from_int(1)
    }

    pub fn sqrt2() -> Self {
        Q2::new(Rational::zero(), Rational::one())
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Q2::new(Rational::zero(), Rational::new(1, 2))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Galois conjugate `a − b√2`.
    pub fn galois(&self) -> Self {
        Q2::new(self.a, -self.b)
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = self.a * self.a - rat(2) * self.b * self.b;
        Some(Q2::new(self.a / norm, -self.b / norm))
    }

    /// Sign of the real number `a + b√2`.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with 2b²
        match (self.a * self.a).cmp(&(rat(2) * self.b * self.b)) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    /// Exact square root inside `Q(√2)`, when it exists and `self ≥ 0`.
    pub fn sqrt(&self) -> Option<Self> {
        if self.signum() < 0 {
            return None;
        }
        if self.is_zero() {
            return Some(Q2::zero());
        }
        if self.b.is_zero() {
            if let Some(x) = rational_sqrt(self.a) {
                return Some(Q2::new(x, Rational::zero()));
            }
            return rational_sqrt(self.a / rat(2)).map(|y| Q2::new(Rational::zero(), y));
        }
        // (x + y√2)² = x² + 2y² + 2xy√2
        let disc = rational_sqrt(self.a * self.a - rat(2) * self.b * self.b)?;
        for x2 in [(self.a + disc) / rat(2), (self.a - disc) / rat(2)] {
            if let Some(x) = rational_sqrt(x2) {
                if x.is_zero() {
                    continue;
                }
                let y = self.b / (rat(2) * x);
                let cand = Q2::new(x, y);
                if cand.signum() > 0 && cand * cand == *self {
                    return Some(cand);
                }
                let cand = Q2::new(-x, -y);
                if cand.signum() > 0 && cand * cand == *self {
                    return Some(cand);
                }
            }
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
}

fn sign_of(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl Add for Q2 {
    type Output = Q2;
    fn add(self, o: Q2) -> Q2 {
        Q2::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for Q2 {
    type Output = Q2;
    fn sub(self, o: Q2) -> Q2 {
        Q2::new(self.a - o.a, self.b - o.b)
    }
}

impl Mul for Q2 {
    type Output = Q2;
    fn mul(self, o: Q2) -> Q2 {
        Q2::new(
            self.a * o.a + rat(2) * self.b * o.b,
            self.a * o.b + self.b * o.a,
        )
    }
}

impl Neg for Q2 {
    type Output = Q2;
    fn neg(self) -> Q2 {
        Q2::new(-self.a, -self.b)
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Q2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let surd = |b: &Rational| -> String {
            if b.is_one() {
                "sqrt2".to_string()
            } else if *b == -Rational::one() {
                "-sqrt2".to_string()
            } else {
                format!("{}*sqrt2", fmt_rational(b))
            }
        };
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", fmt_rational(&self.a)),
            (true, false) => write!(f, "{}", surd(&self.b)),
            (false, false) => {
                let s = surd(&self.b);
                if let Some(rest) = s.strip_prefix('-') {
                    write!(f, "{}-{}", fmt_rational(&self.a), rest)
                } else {
                    write!(f, "{}+{}", fmt_rational(&self.a), s)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as an element of Q(sqrt2)")]
pub struct ParseQ2Error(pub String);

fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" || int == "+" {
            0
        } else {
            int.parse().ok()?
        };
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) || frac.len() > 18 {
            return None;
        }
        let scale = 10i128.pow(frac.len() as u32);
        let f: i128 = frac.parse().ok()?;
        let mag = int_part.abs() * scale + f;
        return Some(Rational::new(if neg { -mag } else { mag }, scale));
    }
    s.parse::<i128>().ok().map(rat)
}

impl FromStr for Q2 {
    type Err = ParseQ2Error;

    /// Accepts a rational (`3`, `-2/5`, `1.25`), the token `sqrt2` (also
    /// `√2` or `sqrt(2)`), or a product `<rational>*sqrt2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseQ2Error(s.to_string());
        let t = s.trim().replace("sqrt(2)", "sqrt2").replace('√', "sqrt");
        let t = t.replace(' ', "");
        if let Some(coef) = t.strip_suffix("sqrt2") {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let b = match coef {
                "" | "+" => Rational::one(),
                "-" => -Rational::one(),
                c => parse_rational(c).ok_or_else(err)?,
            };
            return Ok(Q2::new(Rational::zero(), b));
        }
        parse_rational(&t).map(|a| Q2::new(a, Rational::zero())).ok_or_else(err)
    }
}

/// An element `re + i·im` of `Q(√2)(i)`, with `re, im ∈ Q(√2)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Qi2 {
    pub re: Q2,
    pub im: Q2,
}

impl Qi2 {
    pub fn new(re: Q2, im: Q2) -> Self {
        Qi2 { re, im }
    }

    pub fn real(re: Q2) -> Self {
        Qi2::new(re, Q2::zero())
    }

    pub fn imag(im: Q2) -> Self {
        Qi2::new(Q2::zero(), im)
    }

    pub fn from_int(n: i64) -> Self {
        Qi2::real(Q2::from_int(n))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl Add for Qi2 {
    type Output = Qi2;
    fn add(self, o: Qi2) -> Qi2 {
        Qi2::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Qi2 {
    type Output = Qi2;
    fn sub(self, o: Qi2) -> Qi2 {
        Qi2::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Qi2 {
    type Output = Qi2;
    fn mul(self, o: Qi2) -> Qi2 {
        Qi2::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for Qi2 {
    type Output = Qi2;
    fn neg(self) -> Qi2 {
        Qi2::new(-self.re, -self.im)
    }
}

impl fmt::Display for Qi2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}", Imag(self.im)),
            (false, false) => write!(f, "{} + {}", self.re, Imag(self.im)),
        }
    }
}

struct Imag(Q2);

impl fmt::Display for Imag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.0;
        if x == Q2::one() {
            write!(f, "i")
        } else if x == -Q2::one() {
            write!(f, "-i")
        } else {
            write!(f, "i*({x})")
        }
    }
}

/// Field operations needed by the linear algebra and the spectral analysis.
pub trait Scalar:
    Copy
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Whether equality and zero tests are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn from_exact(x: Qi2) -> Self;
    fn conj(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> Complex64;
    /// Square root of a nonnegative real element, if representable.
    fn sqrt_nonneg(&self) -> Option<Self>;
    /// True for real elements that are strictly positive.
    fn is_positive_real(&self) -> bool;
    /// Real `f64` value, for inexact scalars only.
    fn from_f64(x: f64) -> Option<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_exact(Qi2::from_int(n))
    }

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    fn norm_sqr(&self) -> Self {
        *self * self.conj()
    }
}

impl Scalar for Qi2 {
    const EXACT: bool = true;

    fn zero() -> Self {
        Qi2::real(Q2::zero())
    }
    fn one() -> Self {
        Qi2::real(Q2::one())
    }
    fn imag_unit() -> Self {
        Qi2::imag(Q2::one())
    }
    fn from_exact(x: Qi2) -> Self {
        x
    }
    fn conj(&self) -> Self {
        Qi2::new(self.re, -self.im)
    }
    fn inv(&self) -> Option<Self> {
        // 1/(u + iv) = (u − iv)/(u² + v²)
        let n = (self.re * self.re + self.im * self.im).inv()?;
        Some(Qi2::new(self.re * n, -self.im * n))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    fn sqrt_nonneg(&self) -> Option<Self> {
        if !self.im.is_zero() {
            return None;
        }
        self.re.sqrt().map(Qi2::real)
    }
    fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.signum() > 0
    }
    fn from_f64(_: f64) -> Option<Self> {
        None
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_exact(x: Qi2) -> Self {
        x.to_c64()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn inv(&self) -> Option<Self> {
        (!Scalar::is_zero(self)).then(|| 1.0 / *self)
    }
    fn is_zero(&self) -> bool {
        self.norm() < FLOAT_TOL
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn sqrt_nonneg(&self) -> Option<Self> {
        (self.im.abs() < FLOAT_TOL && self.re > -FLOAT_TOL)
            .then(|| Complex64::new(self.re.max(0.0).sqrt(), 0.0))
    }
    fn is_positive_real(&self) -> bool {
        self.im.abs() < FLOAT_TOL && self.re > FLOAT_TOL
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Complex64::new(x, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Q2 {
        s.parse().unwrap()
    }

    #[test]
    fn parse_forms() {
        assert_eq!(q("sqrt2"), Q2::sqrt2());
        assert_eq!(q("√2"), Q2::sqrt2());
        assert_eq!(q("3/2"), Q2::from_ratio(3, 2));
        assert_eq!(q("1.25"), Q2::from_ratio(5, 4));
        assert_eq!(q("-1/2*sqrt2"), Q2::new(Rational::zero(), Rational::new(-1, 2)));
        assert!("abc".parse::<Q2>().is_err());
        assert!("1/0".parse::<Q2>().is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["0", "1", "-3/7", "sqrt2", "-sqrt2", "2/3*sqrt2"] {
            assert_eq!(q(s).to_string(), s);
        }
        let x = Q2::from_int(1) + Q2::sqrt2();
        assert_eq!(x.to_string(), "1+sqrt2");
    }

    #[test]
    fn signs_and_inverse() {
        let x = Q2::from_int(3) - Q2::from_int(2) * Q2::sqrt2(); // 3 − 2.83 > 0
        assert_eq!(x.signum(), 1);
        let y = Q2::from_int(1) - Q2::sqrt2();
        assert_eq!(y.signum(), -1);
        assert_eq!(x * x.inv().unwrap(), Q2::one());
        assert!(Q2::zero().inv().is_none());
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(Q2::from_int(2).sqrt(), Some(Q2::sqrt2()));
        assert_eq!(Q2::from_ratio(9, 4).sqrt(), Some(Q2::from_ratio(3, 2)));
        // (1 + √2)² = 3 + 2√2
        let s = Q2::from_int(3) + Q2::from_int(2) * Q2::sqrt2();
        assert_eq!(s.sqrt(), Some(Q2::one() + Q2::sqrt2()));
        assert_eq!(Q2::from_int(3).sqrt(), None);
        assert_eq!(Q2::from_int(-1).sqrt(), None);
    }

    #[test]
    fn complex_field_inverse() {
        let z = Qi2::new(Q2::from_int(1), Q2::sqrt2());
        assert_eq!(z * z.inv().unwrap(), Qi2::one());
        assert_eq!(Qi2::imag_unit() * Qi2::imag_unit(), Qi2::from_int(-1));
    }
}
