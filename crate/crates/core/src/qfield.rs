//! Exact arithmetic in Q and in real quadratic fields Q(√d).
//!
//! Everything exact in the crate (Coxeter normals, rational Klein points,
//! Bernoulli values) is built from [`Rational`] and [`QuadElem`]. A `QuadElem`
//! carries its own radicand; combining elements of different fields is an
//! error rather than an implicit coercion.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{invalid, Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// `n/d` as a [`Rational`]. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The exact dyadic rational equal to a finite float.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| invalid(format!("non-finite value {x}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators and denominators overflow the direct path.
        let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
        let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
        n / d
    })
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int =
        |t: &str| t.trim().parse::<BigInt>().map_err(|_| invalid(format!("bad rational `{s}`")));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(Rational::new(parse_int(n)?, d))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

fn bigint_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact square root of a rational, if it is the square of a rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    let n = bigint_sqrt_exact(r.numer())?;
    let d = bigint_sqrt_exact(r.denom())?;
    Some(Rational::new(n, d))
}

pub fn is_squarefree(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// One of the two real embeddings of Q(√d): `One` sends √d to the positive
/// root, `Two` to the negative one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    One,
    Two,
}

impl Place {
    pub fn from_index(i: u8) -> Result<Place> {
        match i {
            1 => Ok(Place::One),
            2 => Ok(Place::Two),
            _ => Err(invalid(format!("place must be 1 or 2, got {i}"))),
        }
    }
}

/// An element `a + b√d` of the real quadratic field Q(√d).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadElem {
    a: Rational,
    b: Rational,
    d: u64,
}

impl QuadElem {
    /// `d = 1` is accepted as the rational field itself: `b` is folded into
    /// `a`, so both embeddings coincide.
    pub fn new(a: Rational, b: Rational, d: u64) -> Result<QuadElem> {
        if d == 1 {
            return Ok(QuadElem { a: a + b, b: Rational::zero(), d });
        }
        if !is_squarefree(d) {
            return Err(invalid(format!("radicand {d} must be squarefree")));
        }
        Ok(QuadElem { a, b, d })
    }

    /// A rational number viewed inside Q(√d).
    pub fn from_rational(a: Rational, d: u64) -> Result<QuadElem> {
        QuadElem::new(a, Rational::zero(), d)
    }

    pub fn zero(d: u64) -> QuadElem {
        QuadElem { a: Rational::zero(), b: Rational::zero(), d }
    }

    pub fn one(d: u64) -> QuadElem {
        QuadElem { a: Rational::one(), b: Rational::zero(), d }
    }

    /// √d itself.
    pub fn sqrt_d(d: u64) -> QuadElem {
        if d == 1 {
            return QuadElem::one(1);
        }
        QuadElem { a: Rational::zero(), b: Rational::one(), d }
    }

    /// A rational number in the trivial field context `d = 1`.
    pub fn rational(a: Rational) -> QuadElem {
        QuadElem { a, b: Rational::zero(), d: 1 }
    }

    /// The golden ratio (1+√5)/2.
    pub fn golden() -> QuadElem {
        QuadElem { a: rat(1, 2), b: rat(1, 2), d: 5 }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Floating-point value under the given real embedding.
    pub fn embed(&self, place: Place) -> f64 {
        let root = (self.d as f64).sqrt();
        let b = rational_to_f64(&self.b);
        let a = rational_to_f64(&self.a);
        match place {
            Place::One => a + b * root,
            Place::Two => a - b * root,
        }
    }

    /// Galois conjugate `a - b√d`.
    pub fn conj(&self) -> QuadElem {
        QuadElem { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }

    /// Field norm `a² - d b²`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * int(self.d as i64)
    }

    pub fn trace(&self) -> Rational {
        &self.a + &self.a
    }

    /// Exact sign of the real embedding, decided without floating point.
    pub fn sign(&self, place: Place) -> i8 {
        let sa = sign_of(&self.a);
        let sb = match place {
            Place::One => sign_of(&self.b),
            Place::Two => -sign_of(&self.b),
        };
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * int(self.d as i64);
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            // a² = d b² has no solution with b ≠ 0 when d is not a square.
            Ordering::Equal => 0,
        }
    }

    fn check(&self, other: &QuadElem) -> Result<()> {
        if self.d != other.d {
            return Err(Error::MixedField(self.d, other.d));
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &QuadElem) -> Result<QuadElem> {
        self.check(o)?;
        Ok(QuadElem { a: &self.a + &o.a, b: &self.b + &o.b, d: self.d })
    }

    pub fn checked_sub(&self, o: &QuadElem) -> Result<QuadElem> {
        self.check(o)?;
        Ok(QuadElem { a: &self.a - &o.a, b: &self.b - &o.b, d: self.d })
    }

    pub fn checked_mul(&self, o: &QuadElem) -> Result<QuadElem> {
        self.check(o)?;
        let d = int(self.d as i64);
        Ok(QuadElem {
            a: &self.a * &o.a + &self.b * &o.b * d,
            b: &self.a * &o.b + &self.b * &o.a,
            d: self.d,
        })
    }

    pub fn inv(&self) -> Result<QuadElem> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QuadElem { a: &self.a / &n, b: -(&self.b / &n), d: self.d })
    }

    pub fn checked_div(&self, o: &QuadElem) -> Result<QuadElem> {
        self.check(o)?;
        self.checked_mul(&o.inv()?)
    }

    pub fn scale(&self, r: &Rational) -> QuadElem {
        QuadElem { a: &self.a * r, b: &self.b * r, d: self.d }
    }

    /// Exact square root inside Q(√d), if one exists.
    ///
    /// Writing `z = u + v√d`, `z² = x` becomes `u² + d v² = a`, `2uv = b`,
    /// which reduces to rational squareness of the norm and of `(a ± √N)/2`.
    pub fn sqrt(&self) -> Option<QuadElem> {
        let d = self.d;
        if self.b.is_zero() {
            if let Some(u) = rational_sqrt(&self.a) {
                return Some(QuadElem { a: u, b: Rational::zero(), d });
            }
            let v = rational_sqrt(&(&self.a / int(d as i64)))?;
            return Some(QuadElem { a: Rational::zero(), b: v, d });
        }
        let n = rational_sqrt(&self.norm())?;
        let two = int(2);
        for cand in [(&self.a + &n) / &two, (&self.a - &n) / &two] {
            if let Some(u) = rational_sqrt(&cand) {
                if u.is_zero() {
                    continue;
                }
                let v = &self.b / (&two * &u);
                let z = QuadElem { a: u, b: v, d };
                if &z * &z == *self {
                    return Some(z);
                }
            }
        }
        None
    }

    /// The 4-tuple `[a_num, a_den, b_num, b_den]`.
    pub fn to_tuple(&self) -> [BigInt; 4] {
        [
            self.a.numer().clone(),
            self.a.denom().clone(),
            self.b.numer().clone(),
            self.b.denom().clone(),
        ]
    }

    pub fn from_tuple(t: &[BigInt; 4], d: u64) -> Result<QuadElem> {
        if t[1].is_zero() || t[3].is_zero() {
            return Err(Error::DivisionByZero);
        }
        QuadElem::new(
            Rational::new(t[0].clone(), t[1].clone()),
            Rational::new(t[2].clone(), t[3].clone()),
            d,
        )
    }

    /// JSON array form; entries are numbers when they fit in an i64, strings
    /// otherwise.
    pub fn to_json(&self) -> Value {
        Value::Array(self.to_tuple().iter().map(bigint_to_json).collect())
    }

    pub fn from_json(v: &Value, d: u64) -> Result<QuadElem> {
        let arr = v.as_array().filter(|a| a.len() == 4).ok_or_else(|| {
            invalid("field element must be a 4-tuple [a_num, a_den, b_num, b_den]")
        })?;
        let mut t: [BigInt; 4] = Default::default();
        for (slot, x) in t.iter_mut().zip(arr) {
            *slot = bigint_from_json(x)?;
        }
        QuadElem::from_tuple(&t, d)
    }
}

pub(crate) fn sign_of(r: &Rational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

fn bigint_to_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(n.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| invalid(format!("expected integer, got {n}"))),
        Value::String(s) => s.parse().map_err(|_| invalid(format!("expected integer, got `{s}`"))),
        other => Err(invalid(format!("expected integer, got {other}"))),
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + {}*sqrt({})",
            rational_to_string(&self.a),
            rational_to_string(&self.b),
            self.d
        )
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a> $trait<&'a QuadElem> for &'a QuadElem {
            type Output = QuadElem;
            /// Panics when the operands live in different fields; use the
            /// `checked_*` form to get an error instead.
            fn $method(self, rhs: &'a QuadElem) -> QuadElem {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait for QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: QuadElem) -> QuadElem {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        -(self.clone())
    }
}

/// Best rational approximation `p/q` with `q ≤ max_den` and `|x - p/q| ≤ tol`,
/// searched along the continued-fraction convergents of `x`. The first
/// qualifying convergent (smallest denominator) wins.
pub fn recognize_rational(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() || max_den == 0 || tol.is_nan() || tol < 0.0 {
        return None;
    }
    let max_den = max_den as i128;
    let (mut h1, mut h2): (i128, i128) = (1, 0);
    let (mut k1, mut k2): (i128, i128) = (0, 1);
    let mut r = x;
    for _ in 0..80 {
        let a = r.floor();
        if a.abs() > 1e30 {
            return None;
        }
        let ai = a as i128;
        let h = ai.checked_mul(h1)?.checked_add(h2)?;
        let k = ai.checked_mul(k1)?.checked_add(k2)?;
        if k > max_den {
            return None;
        }
        let approx = h as f64 / k as f64;
        if (x - approx).abs() <= tol {
            return Some(Rational::new(BigInt::from(h), BigInt::from(k)));
        }
        let frac = r - a;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
    }
    None
}
