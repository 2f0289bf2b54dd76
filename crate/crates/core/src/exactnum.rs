//! Exact arithmetic over Q and real quadratic fields Q(sqrt(d)).
//!
//! A [`QuadNum`] is a value `a + b*sqrt(d)` with arbitrary-precision rational
//! coefficients. Signs, comparisons, and floors are decided by integer
//! arithmetic only; no floating point is ever consulted for a decision.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Int = BigInt;
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum NumError {
    #[error("mismatched quadratic fields: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("d = {0} is not a square-free integer > 1")]
    InvalidD(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Exact element `a + b*sqrt(d)` of the real quadratic field Q(sqrt(d)).
///
/// Rational values (b = 0) compare equal across fields; irrational values
/// require matching `d`.
#[derive(Debug, Clone)]
pub struct QuadNum {
    d: u64,
    a: Rational,
    b: Rational,
}

fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

impl QuadNum {
    /// Build `a + b*sqrt(d)`. Fails if `d` is not square-free and > 1.
    pub fn new(d: u64, a: Rational, b: Rational) -> Result<Self, NumError> {
        if !is_square_free(d) {
            return Err(NumError::InvalidD(d));
        }
        Ok(QuadNum { d, a, b })
    }

    pub fn from_rational(d: u64, a: Rational) -> Self {
        QuadNum { d, a, b: Rational::zero() }
    }

    pub fn from_int(d: u64, n: i64) -> Self {
        Self::from_rational(d, Rational::from_integer(Int::from(n)))
    }

    pub fn zero(d: u64) -> Self {
        Self::from_int(d, 0)
    }

    pub fn one(d: u64) -> Self {
        Self::from_int(d, 1)
    }

    /// The golden ratio (1+sqrt(5))/2 in Q(sqrt(5)).
    pub fn tau() -> Self {
        QuadNum {
            d: 5,
            a: Rational::new(Int::one(), Int::from(2)),
            b: Rational::new(Int::one(), Int::from(2)),
        }
    }

    /// sqrt(d) itself.
    pub fn sqrt_d(d: u64) -> Result<Self, NumError> {
        Self::new(d, Rational::zero(), Rational::one())
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn rat_part(&self) -> &Rational {
        &self.a
    }

    pub fn irr_part(&self) -> &Rational {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Unify fields of two operands; rational values adopt the other field.
    fn unify(&self, rhs: &Self) -> Result<u64, NumError> {
        if self.d == rhs.d || rhs.b.is_zero() {
            Ok(self.d)
        } else if self.b.is_zero() {
            Ok(rhs.d)
        } else {
            Err(NumError::FieldMismatch(self.d, rhs.d))
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, NumError> {
        let d = self.unify(rhs)?;
        Ok(QuadNum { d, a: &self.a + &rhs.a, b: &self.b + &rhs.b })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, NumError> {
        let d = self.unify(rhs)?;
        Ok(QuadNum { d, a: &self.a - &rhs.a, b: &self.b - &rhs.b })
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, NumError> {
        let d = self.unify(rhs)?;
        let dd = Rational::from_integer(Int::from(d));
        Ok(QuadNum {
            d,
            a: &self.a * &rhs.a + (&self.b * &rhs.b) * &dd,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        })
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self, NumError> {
        let d = self.unify(rhs)?;
        if rhs.is_zero() {
            return Err(NumError::DivisionByZero);
        }
        // 1/(a+b sqrt d) = (a - b sqrt d)/(a^2 - b^2 d)
        let dd = Rational::from_integer(Int::from(d));
        let norm = &rhs.a * &rhs.a - (&rhs.b * &rhs.b) * &dd;
        let inv = QuadNum { d, a: &rhs.a / &norm, b: -(&rhs.b / &norm) };
        self.try_mul(&inv)
    }

    /// Algebraic conjugate `a - b*sqrt(d)`.
    pub fn conjugate(&self) -> Self {
        QuadNum { d: self.d, a: self.a.clone(), b: -self.b.clone() }
    }

    /// Field norm `a^2 - b^2 d` (rational).
    pub fn norm(&self) -> Rational {
        let dd = Rational::from_integer(Int::from(self.d));
        &self.a * &self.a - (&self.b * &self.b) * &dd
    }

    /// Exact sign of `a + b*sqrt(d)`, decided by integer arithmetic.
    pub fn sign(&self) -> i32 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // Opposite signs: compare a^2 with b^2 d. |a| > |b| sqrt(d) iff a^2 > b^2 d.
        let dd = Rational::from_integer(Int::from(self.d));
        let lhs = &self.a * &self.a;
        let rhs = (&self.b * &self.b) * &dd;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Greatest integer `n <= self`, exact.
    pub fn floor_int(&self) -> Int {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        // Seed with a rational approximation, then verify by exact signs.
        let approx = self.approx_rational(32);
        let mut n = approx.floor().to_integer();
        loop {
            let lo = self.try_sub(&QuadNum::from_rational(
                self.d,
                Rational::from_integer(n.clone()),
            ))
            .unwrap();
            if lo.sign() < 0 {
                n -= 1;
                continue;
            }
            let hi = self
                .try_sub(&QuadNum::from_rational(
                    self.d,
                    Rational::from_integer(&n + 1),
                ))
                .unwrap();
            if hi.sign() >= 0 {
                n += 1;
                continue;
            }
            return n;
        }
    }

    pub fn floor(&self) -> Self {
        QuadNum::from_rational(self.d, Rational::from_integer(self.floor_int()))
    }

    /// Fractional part in [0,1).
    pub fn fract(&self) -> Self {
        self.try_sub(&self.floor()).unwrap()
    }

    /// Rational approximation with absolute error <= 2^-bits.
    pub fn approx_rational(&self, bits: u32) -> Rational {
        if self.b.is_zero() {
            return self.a.clone();
        }
        // |b| * |s - sqrt(d)| <= |b| * 2^-k; pick k so the product <= 2^-bits.
        let babs = self.b.abs();
        let extra = babs.ceil().to_integer().bits() as u32 + 2;
        let k = bits + extra;
        let s = sqrt_rational_lower(&Rational::from_integer(Int::from(self.d)), k);
        &self.a + &self.b * s
    }

    /// Correctly-rounded-ish float with stated error bound <= 2^(1-bits)*|x|.
    pub fn to_f64(&self, bits: u32) -> f64 {
        let bits = bits.max(24);
        self.approx_rational(bits.min(512))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        match self.try_sub(other).expect("field mismatch in comparison").sign() {
            s if s < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    pub fn min_exact(self, other: Self) -> Self {
        if self.cmp_exact(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max_exact(self, other: Self) -> Self {
        if self.cmp_exact(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

fn rat_sign(r: &Rational) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Rational lower bound of sqrt(x) with error <= 2^-bits, for x >= 0.
pub fn sqrt_rational_lower(x: &Rational, bits: u32) -> Rational {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return Rational::zero();
    }
    // sqrt(p/q) ~= isqrt(p*q*4^k) / (q*2^k); error <= 1/(q*2^k) <= 2^-bits
    // once q*2^k >= 2^bits.
    let p = x.numer();
    let q = x.denom();
    let k = bits as u64 + 1;
    let scaled: Int = p * q << (2 * k);
    let root = scaled.sqrt();
    Rational::new(root, q << k)
}

impl PartialEq for QuadNum {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
            && self.b == other.b
            && (self.b.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadNum {}

impl Hash for QuadNum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
        if !self.b.is_zero() {
            self.d.hash(state);
        }
    }
}

impl PartialOrd for QuadNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_exact(other))
    }
}

impl Ord for QuadNum {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for &QuadNum {
            type Output = QuadNum;
            fn $method(self, rhs: &QuadNum) -> QuadNum {
                self.$checked(rhs).expect("quadratic field arithmetic error")
            }
        }
        impl $trait for QuadNum {
            type Output = QuadNum;
            fn $method(self, rhs: QuadNum) -> QuadNum {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $method(self, rhs: &QuadNum) -> QuadNum {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum { d: self.d, a: -self.a, b: -self.b }
    }
}

impl Neg for &QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        -self.clone()
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadNum {
    /// Canonical text form `a+b*sqrt(d)`; pure rationals print as `a`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        let babs = fmt_rational(&self.b.abs());
        let sign = if self.b.is_negative() { "-" } else { "+" };
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{}*sqrt({})", babs, self.d)
            } else {
                write!(f, "{}*sqrt({})", babs, self.d)
            }
        } else {
            write!(f, "{}{}{}*sqrt({})", fmt_rational(&self.a), sign, babs, self.d)
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational, NumError> {
    let s = s.trim();
    let bad = || NumError::Parse(format!("invalid rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = Int::from_str(p.trim()).map_err(|_| bad())?;
        let q = Int::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(NumError::Parse("zero denominator".into()));
        }
        Ok(Rational::new(p, q))
    } else {
        let p = Int::from_str(s).map_err(|_| bad())?;
        Ok(Rational::from_integer(p))
    }
}

/// Parse the canonical text syntax: `a`, `b*sqrt(d)`, `a+b*sqrt(d)`,
/// `a-b*sqrt(d)`, `sqrt(d)`, with rationals written `p/q`.
pub fn parse_quadnum(s: &str, default_d: Option<u64>) -> Result<QuadNum, NumError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(NumError::Parse("empty input".into()));
    }
    // Split into at most two signed terms, respecting that '-' may start a term
    // or separate terms. Scan for '+'/'-' not at position 0 and not following
    // '/', '*', '(', 'e' etc. (our grammar has none of those ambiguities except
    // position 0).
    let bytes = s.as_bytes();
    let mut split_at = None;
    for i in 1..bytes.len() {
        if bytes[i] == b'+' || bytes[i] == b'-' {
            split_at = Some(i);
            break;
        }
    }
    let (first, second) = match split_at {
        Some(i) => (&s[..i], Some((&s[i..i + 1], &s[i + 1..]))),
        None => (&s[..], None),
    };

    let parse_term = |term: &str| -> Result<(Rational, Option<u64>), NumError> {
        // term := rational | rational '*' 'sqrt(' int ')' | '-'? 'sqrt(' int ')'
        if let Some(idx) = term.find("sqrt(") {
            let close = term
                .rfind(')')
                .ok_or_else(|| NumError::Parse(format!("missing ')' in {term:?}")))?;
            let d: u64 = term[idx + 5..close]
                .parse()
                .map_err(|_| NumError::Parse(format!("invalid radicand in {term:?}")))?;
            let coeff_str = term[..idx].trim_end_matches('*');
            let coeff = if coeff_str.is_empty() {
                Rational::one()
            } else if coeff_str == "-" {
                -Rational::one()
            } else {
                parse_rational(coeff_str)?
            };
            Ok((coeff, Some(d)))
        } else {
            Ok((parse_rational(term)?, None))
        }
    };

    let (c1, d1) = parse_term(first)?;
    let (mut a, mut b, mut d) = match d1 {
        None => (c1, Rational::zero(), None),
        Some(dd) => (Rational::zero(), c1, Some(dd)),
    };
    if let Some((sgn, rest)) = second {
        let (c2, d2) = parse_term(rest)?;
        let c2 = if sgn == "-" { -c2 } else { c2 };
        match d2 {
            None => {
                if d1.is_none() {
                    return Err(NumError::Parse(format!("two rational terms in {s:?}")));
                }
                a = c2;
            }
            Some(dd) => {
                if let Some(d0) = d {
                    if d0 != dd {
                        return Err(NumError::FieldMismatch(d0, dd));
                    }
                } else {
                    d = Some(dd);
                }
                if !b.is_zero() {
                    return Err(NumError::Parse(format!("two sqrt terms in {s:?}")));
                }
                b = c2;
            }
        }
    }
    let d = d.or(default_d).unwrap_or(5);
    QuadNum::new(d, a, b)
}

impl FromStr for QuadNum {
    type Err = NumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_quadnum(s, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(Int::from(p), Int::from(q))
    }

    fn qn(a: (i64, i64), b: (i64, i64), d: u64) -> QuadNum {
        QuadNum::new(d, rat(a.0, a.1), rat(b.0, b.1)).unwrap()
    }

    #[test]
    fn tau_squared_is_tau_plus_one() {
        let tau = QuadNum::tau();
        let sq = tau.try_mul(&tau).unwrap();
        let expect = qn((3, 2), (1, 2), 5);
        assert_eq!(sq, expect);
        assert_eq!(sq, tau.try_add(&QuadNum::one(5)).unwrap());
    }

    #[test]
    fn additive_identity() {
        let x = qn((7, 3), (-2, 5), 2);
        assert_eq!(x.try_add(&QuadNum::zero(2)).unwrap(), x);
    }

    #[test]
    fn difference_of_squares() {
        // (1+sqrt5)(1-sqrt5) = -4
        let x = qn((1, 1), (1, 1), 5);
        let y = qn((1, 1), (-1, 1), 5);
        assert_eq!(x.try_mul(&y).unwrap(), QuadNum::from_int(5, -4));
    }

    #[test]
    fn mixed_field_is_error() {
        let x = qn((0, 1), (1, 1), 2);
        let y = qn((0, 1), (1, 1), 3);
        assert_eq!(x.try_add(&y), Err(NumError::FieldMismatch(2, 3)));
    }

    #[test]
    fn division_by_zero_is_error() {
        let x = QuadNum::tau();
        assert_eq!(x.try_div(&QuadNum::zero(5)), Err(NumError::DivisionByZero));
    }

    #[test]
    fn conjugate_of_tau() {
        let tau = QuadNum::tau();
        let conj = tau.conjugate();
        assert_eq!(conj, qn((1, 2), (-1, 2), 5));
        // conj(tau) = -1/tau
        let minus_inv = QuadNum::from_int(5, -1).try_div(&tau).unwrap();
        assert_eq!(conj, minus_inv);
        assert_eq!(conj.conjugate(), tau);
    }

    #[test]
    fn conjugate_is_homomorphism() {
        let x = QuadNum::tau();
        let y = qn((1, 1), (1, 1), 5);
        let lhs = x.try_mul(&y).unwrap().conjugate();
        let rhs = x.conjugate().try_mul(&y.conjugate()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn signs() {
        assert_eq!(QuadNum::tau().sign(), 1);
        assert_eq!(qn((1, 2), (-1, 2), 5).sign(), -1);
        // 2 - sqrt5 + (sqrt5 - 2) = 0
        let a = qn((2, 1), (-1, 1), 5);
        let b = qn((-2, 1), (1, 1), 5);
        assert_eq!(a.try_add(&b).unwrap().sign(), 0);
    }

    #[test]
    fn floors() {
        assert_eq!(QuadNum::tau().floor_int(), Int::from(1));
        let minus_inv_tau = QuadNum::tau().conjugate(); // = -1/tau in (-1,0)
        assert_eq!(minus_inv_tau.floor_int(), Int::from(-1));
        assert_eq!(QuadNum::from_rational(5, rat(7, 2)).floor_int(), Int::from(3));
    }

    #[test]
    fn floor_bracket_property() {
        for (a, b, d) in [((5, 3), (7, 2), 2), ((-9, 4), (3, 7), 5), ((0, 1), (-13, 3), 13)] {
            let x = qn(a, b, d);
            let n = x.floor_int();
            let fl = QuadNum::from_rational(d, Rational::from_integer(n.clone()));
            assert!(x.try_sub(&fl).unwrap().sign() >= 0);
            let fl1 = QuadNum::from_rational(d, Rational::from_integer(n + 1));
            assert!(x.try_sub(&fl1).unwrap().sign() < 0);
        }
    }

    #[test]
    fn float_conversion() {
        // Oracle: integer-square-root Newton (BigInt::sqrt) drives approx_rational.
        let tau = QuadNum::tau();
        let f = tau.to_f64(53);
        assert!((f - 1.618033988749895).abs() < 1e-15);
        assert_eq!(QuadNum::zero(5).to_f64(53), 0.0);
        let third = QuadNum::from_rational(5, rat(1, 3));
        assert!((third.to_f64(53) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn sign_agrees_with_float_randomized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let a = rat(rng.gen_range(-50..50), rng.gen_range(1..20));
            let b = rat(rng.gen_range(-50..50), rng.gen_range(1..20));
            let x = QuadNum::new(5, a, b).unwrap();
            let f = x.approx_rational(128).to_f64().unwrap();
            if f.abs() > 1e-20 {
                assert_eq!(x.sign(), if f > 0.0 { 1 } else { -1 }, "x = {x}");
            } else {
                assert_eq!(x.sign(), 0);
            }
        }
    }

    #[test]
    fn parse_roundtrip() {
        for s in [
            "1/2+1/2*sqrt(5)",
            "-3/4",
            "2-1*sqrt(2)",
            "7",
            "-1/7*sqrt(13)",
            "0",
        ] {
            let x: QuadNum = s.parse().unwrap();
            let printed = x.to_string();
            let y: QuadNum = printed.parse().unwrap();
            assert_eq!(x, y, "roundtrip {s} -> {printed}");
        }
        assert_eq!("sqrt(5)".parse::<QuadNum>().unwrap(), qn((0, 1), (1, 1), 5));
        assert!("1/0".parse::<QuadNum>().is_err());
        assert!(QuadNum::new(4, rat(1, 1), rat(1, 1)).is_err());
    }

    #[test]
    fn field_axioms_randomized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut sample = |rng: &mut rand_chacha::ChaCha8Rng| {
            QuadNum::new(
                2,
                rat(rng.gen_range(-9..9), rng.gen_range(1..5)),
                rat(rng.gen_range(-9..9), rng.gen_range(1..5)),
            )
            .unwrap()
        };
        for _ in 0..300 {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let z = sample(&mut rng);
            let assoc_l = (x.clone() + y.clone()) + z.clone();
            let assoc_r = x.clone() + (y.clone() + z.clone());
            assert_eq!(assoc_l, assoc_r);
            let dist_l = x.clone() * (y.clone() + z.clone());
            let dist_r = x.clone() * y.clone() + x.clone() * z.clone();
            assert_eq!(dist_l, dist_r);
            if !y.is_zero() {
                let back = (x.clone() / y.clone()) * y.clone();
                assert_eq!(back, x);
            }
        }
    }
}
