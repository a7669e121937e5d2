//! Special values of ζ, Dirichlet L-functions and Dedekind zeta functions;
//! Euler products from factorization mod p; orders of finite groups of Lie
//! type; covolume classes of arithmetic groups.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg;
use crate::qfield::{int, Rational};

/// Bernoulli numbers `B_0, ..., B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    let mut binom_row: Vec<BigInt> = vec![BigInt::one()];
    for m in 0..=n {
        // Row m + 1 of Pascal's triangle.
        let mut next = vec![BigInt::one(); m + 2];
        for k in 1..=m {
            next[k] = &binom_row[k - 1] + &binom_row[k];
        }
        binom_row = next;
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        // Σ_{k=0}^{m} C(m+1, k) B_k = 0.
        let s: Rational = (0..m).map(|k| Rational::from_integer(binom_row[k].clone()) * &b[k]).sum();
        b.push(-s / Rational::from_integer(binom_row[m].clone()));
    }
    b
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Bernoulli polynomial `B_n(x) = Σ C(n,k) B_k x^{n-k}`.
pub fn bernoulli_poly(n: usize, x: &Rational) -> Rational {
    let b = bernoulli_numbers(n);
    (0..=n)
        .map(|k| Rational::from_integer(binomial(n as u64, k as u64)) * &b[k] * x.pow((n - k) as i32))
        .sum()
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut a = a;
    let mut n = n;
    let mut t: i8 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            t = -t;
        }
    }
    let v = n.trailing_zeros();
    n >>= v;
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && (a.rem_euclid(8) == 3 || a.rem_euclid(8) == 5) {
            t = -t;
        }
    }
    // Jacobi symbol (a/n) for odd positive n.
    a = a.rem_euclid(n);
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// A real (quadratic or trivial) Dirichlet character given by its values on
/// one period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletChar {
    pub modulus: u64,
    pub values: Vec<i8>,
}

impl DirichletChar {
    pub fn trivial() -> DirichletChar {
        DirichletChar { modulus: 1, values: vec![1] }
    }

    /// The character `χ_D = (D/·)` of a fundamental discriminant.
    pub fn kronecker(disc: i64) -> Result<DirichletChar> {
        if !is_fundamental_discriminant(disc) {
            return Err(invalid(format!("{disc} is not a fundamental discriminant")));
        }
        let f = disc.unsigned_abs();
        Ok(DirichletChar { modulus: f, values: (0..f as i64).map(|a| kronecker(disc, a)).collect() })
    }

    pub fn eval(&self, a: i64) -> i8 {
        self.values[a.rem_euclid(self.modulus as i64) as usize]
    }

    pub fn is_even(&self) -> bool {
        self.eval(-1) == 1
    }
}

pub fn squarefree_part(d: i64) -> i64 {
    let sign = d.signum();
    let mut m = d.abs();
    let mut out = 1;
    let mut p = 2;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    sign * out * m
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 || d == 0 {
        return false;
    }
    let d0 = squarefree_part(d);
    if d0 == d {
        return d.rem_euclid(4) == 1;
    }
    d == 4 * d0 && (d0.rem_euclid(4) == 2 || d0.rem_euclid(4) == 3)
}

/// Discriminant of Q(√d).
pub fn fundamental_discriminant(d: i64) -> Result<i64> {
    if d == 0 {
        return Err(invalid("d must be nonzero"));
    }
    let d0 = squarefree_part(d);
    if d0 == 1 {
        return Err(invalid(format!("Q(sqrt {d}) is Q, not a quadratic field")));
    }
    Ok(if d0.rem_euclid(4) == 1 { d0 } else { 4 * d0 })
}

/// Generalized Bernoulli number `B_{n,χ} = f^{n-1} Σ_{a=1}^{f} χ(a) B_n(a/f)`.
pub fn gen_bernoulli(n: usize, chi: &DirichletChar) -> Result<Rational> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let f = chi.modulus;
    let b = bernoulli_numbers(n);
    let fr = Rational::from_integer(BigInt::from(f));
    let mut acc = Rational::zero();
    for a in 1..=f {
        let c = chi.eval(a as i64);
        if c == 0 {
            continue;
        }
        let x = Rational::new(BigInt::from(a), BigInt::from(f));
        let bn: Rational = (0..=n)
            .map(|k| Rational::from_integer(binomial(n as u64, k as u64)) * &b[k] * x.pow((n - k) as i32))
            .sum();
        acc += bn * int(i64::from(c));
    }
    Ok(acc * fr.pow(n as i32 - 1))
}

/// `L(χ, 1 - n) = -B_{n,χ}/n`.
pub fn l_value_at_negative(n: usize, chi: &DirichletChar) -> Result<Rational> {
    Ok(-gen_bernoulli(n, chi)? / int(n as i64))
}

/// An exact special value; `trivial_zero` marks values forced to vanish by
/// the Γ-factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaSpecial {
    pub value: Rational,
    pub trivial_zero: bool,
}

/// `ζ_k(1 - n)` for the real quadratic field `k = Q(√d)`, as
/// `ζ(1-n) L(χ_D, 1-n)`.
pub fn zeta_quad_special(d: i64, n: usize) -> Result<ZetaSpecial> {
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    let disc = fundamental_discriminant(d)?;
    if disc < 0 {
        return Err(invalid(format!("Q(sqrt {d}) is not a real field")));
    }
    if n % 2 == 1 {
        return Ok(ZetaSpecial { value: Rational::zero(), trivial_zero: true });
    }
    let z = l_value_at_negative(n, &DirichletChar::trivial())?;
    let l = l_value_at_negative(n, &DirichletChar::kronecker(disc)?)?;
    Ok(ZetaSpecial { value: z * l, trivial_zero: false })
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) by the Lanczos approximation (g = 7), with the reflection formula
/// `Γ(x) Γ(1-x) = π / sin(πx)` for `x < 1/2`. Infinite at the poles.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

const EM_ORDER: usize = 10;

/// Euler-Maclaurin tail `Σ_{k>=0} (N + q + k)^{-s}` beyond a partial sum.
fn em_tail(s: f64, x: f64) -> f64 {
    let b = bernoulli_numbers(2 * EM_ORDER);
    let mut acc = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Rising factorial s (s+1) ... (s + 2j - 2) over (2j)!.
    let mut rising = s;
    let mut fact = 2.0;
    let mut pow = x.powf(-s - 1.0);
    for j in 1..=EM_ORDER {
        let bj = b[2 * j].to_f64().unwrap_or(0.0);
        acc += bj / fact * rising * pow;
        rising *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
        fact *= (2 * j + 1) as f64 * (2 * j + 2) as f64;
        pow /= x * x;
    }
    acc
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k>=0} (k + q)^{-s}` from `terms` explicit terms
/// plus an Euler-Maclaurin tail. Summed smallest term first.
pub fn hurwitz_zeta(s: f64, q: f64, terms: usize) -> f64 {
    let terms = terms.max(16);
    let mut acc = em_tail(s, terms as f64 + q);
    for k in (0..terms).rev() {
        acc += (k as f64 + q).powf(-s);
    }
    acc
}

pub fn riemann_zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0, 32)
}

/// `L(χ, s) = f^{-s} Σ_a χ(a) ζ(s, a/f)` for real `s > 1`, with about
/// `terms` explicit terms in total.
pub fn dirichlet_l(chi: &DirichletChar, s: f64, terms: usize) -> f64 {
    let f = chi.modulus as f64;
    let per = (terms / chi.modulus as usize).max(16);
    let mut acc = 0.0;
    for a in 1..=chi.modulus {
        let c = chi.eval(a as i64);
        if c != 0 {
            acc += f64::from(c) * hurwitz_zeta(s, a as f64 / f, per);
        }
    }
    acc * f.powf(-s)
}

/// `ζ_k(n) = ζ(n) L(χ_D, n)` for `k = Q(√d)`, or `ζ(n)` when `d = 1`.
pub fn zeta_k_positive(d: i64, n: f64, terms: usize) -> Result<f64> {
    let z = hurwitz_zeta(n, 1.0, terms);
    if d == 1 {
        return Ok(z);
    }
    let disc = fundamental_discriminant(d)?;
    Ok(z * dirichlet_l(&DirichletChar::kronecker(disc)?, n, terms))
}

/// `ζ_k(1 - n)` from `ζ_k(n)` through `Λ(s) = Λ(1 - s)`, with
/// `Λ(s) = D^{s/2} (π^{-s/2} Γ(s/2))^r ζ_k(s)`. `d = 1` is the rational
/// field (`D = 1, r = 1`).
pub fn zeta_numeric_fe(d: i64, n: u32, terms: usize) -> Result<f64> {
    if n < 2 || n % 2 == 1 {
        return Err(invalid("the functional-equation route needs even n >= 2"));
    }
    let (disc, r) = if d == 1 { (1.0, 1) } else { (fundamental_discriminant(d)? as f64, 2) };
    if disc < 0.0 {
        return Err(invalid("imaginary quadratic fields are not supported here"));
    }
    let s = f64::from(n);
    let gfac = |x: f64| PI.powf(-x / 2.0) * gamma(x / 2.0);
    let lambda = disc.powf(s / 2.0) * gfac(s).powi(r) * zeta_k_positive(d, s, terms)?;
    Ok(lambda / (disc.powf((1.0 - s) / 2.0) * gfac(1.0 - s).powi(r)))
}

/// Integer polynomial, coefficients from the constant term up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly(pub Vec<i64>);

impl IntPoly {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.0.last() == Some(&1)
    }

    fn trimmed(mut c: Vec<i64>) -> IntPoly {
        while c.len() > 1 && c.last() == Some(&0) {
            c.pop();
        }
        IntPoly(c)
    }

    /// Parses expressions such as `x^4-x^2-1` or `x - 1`.
    pub fn parse(s: &str) -> Result<IntPoly> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(invalid("empty polynomial"));
        }
        let mut coeffs: Vec<i64> = Vec::new();
        let mut rest = src.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ => (1, rest),
            };
            let end = body[1.min(body.len())..].find(['+', '-']).map_or(body.len(), |i| i + 1);
            let term = &body[..end];
            rest = &body[end..];
            let bad = || invalid(format!("cannot parse polynomial `{s}`"));
            let (c, e) = match term.find('x') {
                None => (term.parse::<i64>().map_err(|_| bad())?, 0usize),
                Some(i) => {
                    let cs = term[..i].trim_end_matches('*');
                    let c = if cs.is_empty() { 1 } else { cs.parse::<i64>().map_err(|_| bad())? };
                    let es = &term[i + 1..];
                    let e = if es.is_empty() {
                        1
                    } else {
                        es.strip_prefix('^').ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?
                    };
                    (c, e)
                }
            };
            if coeffs.len() <= e {
                coeffs.resize(e + 1, 0);
            }
            coeffs[e] += sign * c;
        }
        let p = IntPoly::trimmed(coeffs);
        if p.degree() == 0 {
            return Err(invalid("polynomial must have positive degree"));
        }
        Ok(p)
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::trimmed(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as i64).collect())
    }

    /// Discriminant `(-1)^{n(n-1)/2} Res(f, f') / a_n` via the Sylvester
    /// matrix.
    pub fn discriminant(&self) -> BigInt {
        let n = self.degree();
        if n == 1 {
            return BigInt::one();
        }
        let f = &self.0;
        let g = self.derivative().0;
        let m = n - 1;
        let size = n + m;
        let mut rows = vec![vec![Rational::zero(); size]; size];
        for i in 0..m {
            for (j, c) in f.iter().rev().enumerate() {
                rows[i][i + j] = int(*c);
            }
        }
        for i in 0..n {
            for (j, c) in g.iter().rev().enumerate() {
                rows[m + i][i + j] = int(*c);
            }
        }
        let q: Vec<Vec<crate::qfield::QuadElem>> =
            rows.into_iter().map(|r| r.into_iter().map(crate::qfield::QuadElem::rational).collect()).collect();
        let res = linalg::det_exact(&q).map(|x| x.a().clone()).unwrap_or_else(|_| Rational::zero());
        let sign = if (n * (n - 1) / 2).is_multiple_of(2) { 1 } else { -1 };
        let d = res * int(sign) / int(*f.last().unwrap());
        d.to_integer()
    }

    /// Rational roots by the rational root theorem (monic: integer divisors
    /// of the constant term).
    fn has_rational_root(&self) -> bool {
        let c0 = self.0[0];
        if c0 == 0 {
            return true;
        }
        let lead = *self.0.last().unwrap();
        let divisors = |n: i64| (1..=n.abs()).filter(move |d| n % d == 0);
        for p in divisors(c0) {
            for q in divisors(lead) {
                for sgn in [1i64, -1] {
                    let num = sgn * p;
                    // Evaluate q^n f(num/q) exactly.
                    let n = self.degree() as u32;
                    let v: i128 = self
                        .0
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            i128::from(*c) * i128::from(num).pow(i as u32) * i128::from(q).pow(n - i as u32)
                        })
                        .sum();
                    if v == 0 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let coeff = if a == 1 && i > 0 { String::new() } else { a.to_string() };
            let var = match i {
                0 => String::new(),
                1 => "x".into(),
                _ => format!("x^{i}"),
            };
            write!(f, "{sign}{coeff}{var}")?;
            first = false;
        }
        Ok(())
    }
}

/// Dense polynomial over F_p, coefficients from the constant term up.
type Fp = Vec<u64>;

fn fp_trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_inv(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn fp_from_int(f: &IntPoly, p: u64) -> Fp {
    fp_trim(f.0.iter().map(|c| c.rem_euclid(p as i64) as u64).collect())
}

fn fp_mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    fp_trim(out)
}

/// Quotient and remainder.
fn fp_divrem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    let mut r = a.clone();
    if b.is_empty() {
        panic!("division by the zero polynomial");
    }
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let inv = fp_inv(*b.last().unwrap(), p);
    let mut q = vec![0u64; r.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let c = r[i + b.len() - 1] * inv % p;
        q[i] = c;
        if c != 0 {
            for (j, bj) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + p - c * bj % p) % p;
            }
        }
    }
    (fp_trim(q), fp_trim(r))
}

fn fp_monic(a: Fp, p: u64) -> Fp {
    match a.last() {
        None => a,
        Some(&l) => {
            let inv = fp_inv(l, p);
            a.into_iter().map(|c| c * inv % p).collect()
        }
    }
}

fn fp_gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = fp_divrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    fp_monic(a, p)
}

fn fp_derivative(a: &Fp, p: u64) -> Fp {
    fp_trim(a.iter().enumerate().skip(1).map(|(i, c)| (i as u64 % p) * c % p).collect())
}

fn fp_powmod(base: &Fp, mut e: u64, m: &Fp, p: u64) -> Fp {
    let mut r: Fp = vec![1];
    let mut b = fp_divrem(base, m, p).1;
    while e > 0 {
        if e & 1 == 1 {
            r = fp_divrem(&fp_mul(&r, &b, p), m, p).1;
        }
        b = fp_divrem(&fp_mul(&b, &b, p), m, p).1;
        e >>= 1;
    }
    r
}

fn fp_sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    fp_trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

/// Product of the distinct monic irreducible factors of `f` over F_p.
fn fp_radical(f: &Fp, p: u64) -> Fp {
    let f = fp_monic(f.clone(), p);
    if f.len() <= 1 {
        return vec![1];
    }
    let df = fp_derivative(&f, p);
    if df.is_empty() {
        // f(x) = g(x^p) = g(x)^p.
        let g: Fp = f.iter().step_by(p as usize).copied().collect();
        return fp_radical(&g, p);
    }
    let c = fp_gcd(&f, &df, p);
    let w = fp_divrem(&f, &c, p).0;
    // Strip factors of w from c; what remains has multiplicities divisible by p.
    let mut rest = c;
    loop {
        let g = fp_gcd(&rest, &w, p);
        if g.len() <= 1 {
            break;
        }
        rest = fp_divrem(&rest, &g, p).0;
    }
    let extra = fp_radical(&rest, p);
    fp_monic(fp_mul(&w, &extra, p), p)
}

/// Degrees of the irreducible factors of a squarefree polynomial, by
/// distinct-degree factorization.
fn fp_ddf_degrees(f: &Fp, p: u64) -> Vec<usize> {
    let mut f = fp_monic(f.clone(), p);
    let mut out = Vec::new();
    let mut xq: Fp = vec![0, 1];
    let mut d = 1;
    while f.len() > 1 {
        if 2 * d > f.len() - 1 {
            out.push(f.len() - 1);
            break;
        }
        xq = fp_powmod(&xq, p, &f, p);
        let g = fp_gcd(&fp_sub(&xq, &vec![0, 1], p), &f, p);
        if g.len() > 1 {
            let k = (g.len() - 1) / d;
            out.extend(std::iter::repeat_n(d, k));
            f = fp_divrem(&f, &g, p).0;
            xq = fp_divrem(&xq, &f, p).1;
        }
        d += 1;
    }
    out
}

/// Degrees of the distinct irreducible factors of `f mod p`.
pub fn factor_degrees_mod_p(f: &IntPoly, p: u64) -> Vec<usize> {
    let rad = fp_radical(&fp_from_int(f, p), p);
    let mut d = fp_ddf_degrees(&rad, p);
    d.sort_unstable();
    d
}

/// Dedekind's criterion: whether `p` divides the index of `Z[θ]` in the
/// maximal order, for monic `f`.
pub fn divides_index(f: &IntPoly, p: u64) -> bool {
    let fb = fp_from_int(f, p);
    let g = fp_radical(&fb, p);
    let h = fp_divrem(&fb, &g, p).0;
    let lift = |a: &Fp| -> Vec<i128> { a.iter().map(|&c| i128::from(c)).collect() };
    let (gl, hl) = (lift(&g), lift(&h));
    let mut gh = vec![0i128; gl.len() + hl.len() - 1];
    for (i, x) in gl.iter().enumerate() {
        for (j, y) in hl.iter().enumerate() {
            gh[i + j] += x * y;
        }
    }
    let n = gh.len().max(f.0.len());
    let pi = i128::from(p);
    let big_f: Fp = fp_trim(
        (0..n)
            .map(|i| {
                let v = gh.get(i).copied().unwrap_or(0) - i128::from(f.0.get(i).copied().unwrap_or(0));
                (v / pi).rem_euclid(pi) as u64
            })
            .collect(),
    );
    let common = fp_gcd(&g, &h, p);
    if big_f.is_empty() {
        return common.len() > 1;
    }
    fp_gcd(&big_f, &common, p).len() > 1
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut m = n.abs();
    let mut out = Vec::new();
    let mut p = 2u64;
    while BigInt::from(p) * BigInt::from(p) <= m {
        if (&m % p).is_zero() {
            out.push(p);
            while (&m % p).is_zero() {
                m /= p;
            }
        }
        p += 1;
    }
    if m > BigInt::one() {
        if let Some(v) = m.to_u64() {
            out.push(v);
        }
    }
    out
}

/// Certifies irreducibility over Q from factorization patterns mod p: a
/// factor of degree k must be a subset sum of the mod-p factor degrees at
/// every good prime.
pub fn is_irreducible(f: &IntPoly) -> Result<bool> {
    let n = f.degree();
    if n == 1 {
        return Ok(true);
    }
    if f.has_rational_root() {
        return Ok(false);
    }
    let disc = f.discriminant();
    if disc.is_zero() {
        return Ok(false);
    }
    let mut possible = vec![true; n + 1];
    for p in primes_up_to(2000) {
        if (&disc % p).is_zero() || f.0.last().unwrap() % p as i64 == 0 {
            continue;
        }
        let degs = factor_degrees_mod_p(f, p);
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for d in degs {
            for k in (d..=n).rev() {
                if sums[k - d] {
                    sums[k] = true;
                }
            }
        }
        for k in 1..n {
            possible[k] &= sums[k];
        }
        if (1..n).all(|k| !possible[k]) {
            return Ok(true);
        }
    }
    if n <= 3 {
        // Any factorization of a cubic has a linear factor.
        return Ok(true);
    }
    Err(Error::Unsupported(format!("could not certify irreducibility of {f}")))
}

/// Euler product with its truncation estimate and primes where the local
/// factor could not be certified.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerProduct {
    pub value: f64,
    pub err: f64,
    pub flagged_primes: Vec<u64>,
    pub primes_used: usize,
    /// Polynomial actually used (quadratics are replaced by a generator of
    /// the maximal order).
    pub poly: IntPoly,
}

/// Minimal polynomial of `(D + √D)/2`, which generates the maximal order of
/// the quadratic field with discriminant `D`.
fn maximal_quadratic(f: &IntPoly) -> Result<IntPoly> {
    let [c, b, a] = f.0[..] else {
        return Err(invalid("not a quadratic"));
    };
    let disc = b * b - 4 * a * c;
    let d = fundamental_discriminant(disc)?;
    Ok(IntPoly(vec![(d * d - d) / 4, -d, 1]))
}

/// `ζ_L(s)` for `L = Q[x]/(f)` as `ζ(s) Π_{p <= p_max} L_p(s) (1 - p^{-s})`.
///
/// Dividing out `ζ(s)` prime by prime makes the truncated tail oscillate
/// instead of drifting. At primes dividing the discriminant the factor
/// degrees of the radical are used; primes where Dedekind's criterion
/// detects an index are flagged.
pub fn dedekind_euler(f: &IntPoly, s: f64, p_max: u64, exec: Execution) -> Result<EulerProduct> {
    if !f.is_monic() {
        return Err(invalid("minimal polynomial must be monic"));
    }
    if s <= 1.5 {
        return Err(invalid("s must exceed 1.5"));
    }
    if p_max < 100 {
        return Err(invalid("p_max must be at least 100"));
    }
    if !is_irreducible(f)? {
        return Err(invalid(format!("{f} is reducible")));
    }
    let poly = if f.degree() == 2 { maximal_quadratic(f)? } else { f.clone() };
    let disc = poly.discriminant();
    let ramified = prime_factors(&disc);
    let flagged: Vec<u64> =
        if poly.degree() <= 2 { Vec::new() } else { ramified.iter().copied().filter(|&p| divides_index(&poly, p)).collect() };
    let primes = primes_up_to(p_max);
    let chunks = 64.min(primes.len());
    let per = primes.len().div_ceil(chunks);
    let logs = map_indexed(exec, chunks, |c| {
        let mut acc = 0.0;
        for &p in primes.iter().skip(c * per).take(per) {
            let ps = (p as f64).powf(-s);
            let mut term = (-ps).ln_1p();
            for d in factor_degrees_mod_p(&poly, p) {
                term -= (-(p as f64).powf(-s * d as f64)).ln_1p();
            }
            acc += term;
        }
        acc
    });
    let log_sum: f64 = logs.iter().sum();
    let value = riemann_zeta(s) * log_sum.exp();
    let n = poly.degree() as f64;
    let pm = p_max as f64;
    let mut err = value * (n - 1.0) * pm.powf(1.0 - s) / ((s - 1.0) * pm.ln());
    for p in &flagged {
        err += value * 2.0 * n * (*p as f64).powf(-s);
    }
    Ok(EulerProduct { value, err, flagged_primes: flagged, primes_used: primes.len(), poly })
}

/// Discriminant of the field generated by a root of `f`. Exact for
/// quadratics; otherwise the polynomial discriminant, together with the
/// primes where Dedekind's criterion says it may exceed the field's.
pub fn field_discriminant(f: &IntPoly) -> Result<(BigInt, Vec<u64>)> {
    if f.degree() == 2 {
        let m = maximal_quadratic(f)?;
        return Ok((m.discriminant(), Vec::new()));
    }
    let disc = f.discriminant();
    let flagged = prime_factors(&disc).into_iter().filter(|&p| divides_index(f, p)).collect();
    Ok((disc, flagged))
}

/// Root-system family of a simple group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    A,
    B,
    C,
    D,
    D4Triality,
    E6,
    E7,
    E8,
    F4,
    G2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupType {
    pub family: Family,
    pub rank: u32,
    pub twist: u32,
}

impl GroupType {
    pub fn new(family: Family, rank: u32, twist: u32) -> GroupType {
        GroupType { family, rank, twist }
    }

    /// Every row of the table (with classical ranks up to `max_rank`).
    pub fn table(max_rank: u32) -> Vec<GroupType> {
        let mut out = Vec::new();
        for l in 1..=max_rank {
            out.push(GroupType::new(Family::A, l, 1));
            if l >= 2 {
                out.push(GroupType::new(Family::A, l, 2));
                out.push(GroupType::new(Family::B, l, 1));
            }
            if l >= 3 {
                out.push(GroupType::new(Family::C, l, 1));
            }
            if l >= 4 {
                out.push(GroupType::new(Family::D, l, 1));
                out.push(GroupType::new(Family::D, l, 2));
            }
        }
        out.extend([
            GroupType::new(Family::D4Triality, 4, 3),
            GroupType::new(Family::E6, 6, 1),
            GroupType::new(Family::E6, 6, 2),
            GroupType::new(Family::E7, 7, 1),
            GroupType::new(Family::E8, 8, 1),
            GroupType::new(Family::F4, 4, 1),
            GroupType::new(Family::G2, 2, 1),
        ]);
        out
    }

    /// Dimension of the algebraic group.
    pub fn dim(&self) -> u32 {
        let l = self.rank;
        match self.family {
            Family::A => l * (l + 2),
            Family::B | Family::C => l * (2 * l + 1),
            Family::D | Family::D4Triality => l * (2 * l - 1),
            Family::E6 => 78,
            Family::E7 => 133,
            Family::E8 => 248,
            Family::F4 => 52,
            Family::G2 => 14,
        }
    }
}

/// Polynomial in q with integer coefficients, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly(pub Vec<BigInt>);

impl QPoly {
    fn monomial(e: u32) -> QPoly {
        let mut c = vec![BigInt::zero(); e as usize + 1];
        c[e as usize] = BigInt::one();
        QPoly(c)
    }

    /// `q^e + c`.
    fn binomial(e: u32, c: i64) -> QPoly {
        let mut p = QPoly::monomial(e);
        p.0[0] += c;
        p
    }

    fn mul(&self, o: &QPoly) -> QPoly {
        let mut out = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly(out)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn eval(&self, q: u64) -> BigInt {
        self.0.iter().rev().fold(BigInt::zero(), |acc, c| acc * q + c)
    }
}

/// The order polynomial `#G(F_q)` of a table row.
pub fn point_count_poly(g: &GroupType) -> Result<QPoly> {
    let l = g.rank;
    let bad = || invalid(format!("no table row for {g:?}"));
    let prod = |factors: Vec<QPoly>| factors.iter().fold(QPoly::monomial(0), |a, b| a.mul(b));
    let minus = |es: &[u32]| es.iter().map(|&e| QPoly::binomial(e, -1)).collect::<Vec<_>>();
    let poly = match (g.family, g.twist) {
        (Family::A, 1) if l >= 1 => {
            let mut f = vec![QPoly::monomial(l * (l + 1) / 2)];
            f.extend((1..=l).map(|k| QPoly::binomial(k + 1, -1)));
            prod(f)
        }
        (Family::A, 2) if l >= 2 => {
            let mut f = vec![QPoly::monomial(l * (l + 1) / 2)];
            f.extend((1..=l).map(|k| QPoly::binomial(k + 1, if (k + 1) % 2 == 0 { -1 } else { 1 })));
            prod(f)
        }
        (Family::B, 1) if l >= 2 => bc_poly(l),
        (Family::C, 1) if l >= 3 => bc_poly(l),
        (Family::D, t @ (1 | 2)) if l >= 4 => {
            let mut f = vec![QPoly::monomial(l * (l - 1)), QPoly::binomial(l, if t == 1 { -1 } else { 1 })];
            f.extend((1..l).map(|k| QPoly::binomial(2 * k, -1)));
            prod(f)
        }
        (Family::D4Triality, 3) if l == 4 => {
            // (q⁴ - η)(q⁴ - η̄) = q⁸ + q⁴ + 1 for a primitive cube root η.
            let eta_pair = QPoly(
                (0..=8).map(|i| if i % 4 == 0 { BigInt::one() } else { BigInt::zero() }).collect(),
            );
            prod(vec![QPoly::monomial(12), QPoly::binomial(2, -1), eta_pair, QPoly::binomial(6, -1)])
        }
        (Family::E6, 1) if l == 6 => {
            let mut f = vec![QPoly::monomial(36)];
            f.extend(minus(&[2, 5, 6, 8, 9, 12]));
            prod(f)
        }
        (Family::E6, 2) if l == 6 => prod(vec![
            QPoly::monomial(36),
            QPoly::binomial(2, -1),
            QPoly::binomial(5, 1),
            QPoly::binomial(6, -1),
            QPoly::binomial(8, -1),
            QPoly::binomial(9, 1),
            QPoly::binomial(12, -1),
        ]),
        (Family::E7, 1) if l == 7 => {
            let mut f = vec![QPoly::monomial(63)];
            f.extend(minus(&[2, 6, 8, 10, 12, 14, 18]));
            prod(f)
        }
        (Family::E8, 1) if l == 8 => {
            let mut f = vec![QPoly::monomial(120)];
            f.extend(minus(&[2, 8, 12, 14, 18, 20, 24, 30]));
            prod(f)
        }
        (Family::F4, 1) if l == 4 => {
            let mut f = vec![QPoly::monomial(24)];
            f.extend(minus(&[2, 6, 8, 12]));
            prod(f)
        }
        (Family::G2, 1) if l == 2 => prod(vec![QPoly::monomial(6), QPoly::binomial(2, -1), QPoly::binomial(6, -1)]),
        _ => return Err(bad()),
    };
    Ok(poly)
}

fn bc_poly(l: u32) -> QPoly {
    (1..=l).fold(QPoly::monomial(l * l), |acc, k| acc.mul(&QPoly::binomial(2 * k, -1)))
}

pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..=q).find(|p| q.is_multiple_of(*p)).unwrap();
    let mut m = q;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1
}

/// `#G(F_q)` from the table.
pub fn point_count(g: &GroupType, q: u64) -> Result<BigInt> {
    if !is_prime_power(q) {
        return Err(invalid(format!("{q} is not a prime power")));
    }
    Ok(point_count_poly(g)?.eval(q))
}

/// Cases of arithmetic groups acting on products of hyperbolic spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovolumeCase {
    /// Orthogonal groups of quadratic forms, even n.
    I,
    /// Odd n, discriminant a square: `ζ_k(m)`.
    IISplit,
    /// Odd n, quadratic extension `L = k(√d)`: `L(χ, m)`.
    IINonsplit,
    /// Products of H² and H³ from a field with complex places: `ζ_L(2)`.
    III,
}

impl CovolumeCase {
    pub fn parse(s: &str) -> Result<CovolumeCase> {
        match s.to_ascii_uppercase().replace('_', "-").as_str() {
            "I" => Ok(CovolumeCase::I),
            "II-SPLIT" => Ok(CovolumeCase::IISplit),
            "II-NONSPLIT" => Ok(CovolumeCase::IINonsplit),
            "III" => Ok(CovolumeCase::III),
            _ => Err(invalid(format!("unknown case `{s}` (I, II-split, II-nonsplit, III)"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CovolumeParams {
    /// Dimension of each hyperbolic factor (cases I, II).
    pub n: u32,
    /// Number of noncompact places acted on.
    pub t: u32,
    /// Degree of the totally real field k (cases I, II).
    pub r: u32,
    /// Real and complex places of L (case III).
    pub r1: u32,
    pub r2: u32,
    /// Minimal polynomial of a generator of k (cases I, II).
    pub k_poly: Option<IntPoly>,
    /// Minimal polynomial of a generator of L over Q (cases II-nonsplit, III).
    pub l_poly: Option<IntPoly>,
    /// Prime bound for numeric Euler products; 0 skips evaluation.
    pub p_max: u64,
}

/// L-function part of a covolume class.
#[derive(Clone, Debug, PartialEq)]
pub enum LPart {
    /// Purely a power of π.
    One,
    ZetaK { s: u32 },
    LChi { s: u32 },
    ZetaL { s: u32 },
}

/// A covolume up to a nonzero rational factor, in two equivalent shapes:
/// `π^{star_pi_exp} · (completed value at a negative integer)` and
/// `π^{pi_exp} · √disc · (L-value at a positive integer)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeClass {
    pub case: CovolumeCase,
    pub star_pi_exp: i32,
    pub star_part: String,
    pub pi_exp: i32,
    /// The radicand under the square root, when known.
    pub sqrt_disc: Option<BigInt>,
    pub l_part: LPart,
    /// `l_part` evaluated numerically.
    pub l_value: Option<f64>,
    /// `π^{pi_exp} √disc · l_value`.
    pub numeric: Option<f64>,
    pub caveats: Vec<String>,
}

impl VolumeClass {
    pub fn to_json(&self) -> Value {
        json!({
            "case": format!("{:?}", self.case),
            "star_form": format!("pi^{} * {}", self.star_pi_exp, self.star_part),
            "star_pi_exp": self.star_pi_exp,
            "pi_exp": self.pi_exp,
            "sqrt_disc": self.sqrt_disc.as_ref().map(|d| d.to_string()),
            "l_part": match &self.l_part {
                LPart::One => "1".to_string(),
                LPart::ZetaK { s } => format!("zeta_k({s})"),
                LPart::LChi { s } => format!("L(chi,{s})"),
                LPart::ZetaL { s } => format!("zeta_L({s})"),
            },
            "l_value": self.l_value,
            "numeric": self.numeric,
            "caveats": self.caveats,
        })
    }
}

/// Covolume class of an arithmetic group of the given case, modulo Q^×.
pub fn covolume_class(case: CovolumeCase, p: &CovolumeParams) -> Result<VolumeClass> {
    let exec = Execution::default();
    let mut caveats = Vec::new();
    let check_k = |p: &CovolumeParams| -> Result<()> {
        if p.t == 0 || p.t > p.r {
            return Err(invalid(format!("need 1 <= t <= r, got t = {}, r = {}", p.t, p.r)));
        }
        if let Some(k) = &p.k_poly {
            if k.degree() as u32 != p.r {
                return Err(invalid(format!("k has degree {} but r = {}", k.degree(), p.r)));
            }
        }
        Ok(())
    };
    let disc_of = |f: &Option<IntPoly>, caveats: &mut Vec<String>| -> Result<Option<BigInt>> {
        match f {
            None => Ok(None),
            Some(f) => {
                let (d, flagged) = field_discriminant(f)?;
                if !flagged.is_empty() {
                    caveats.push(format!("index of {f} may be divisible by {flagged:?}; discriminant up to squares"));
                }
                Ok(Some(d.abs()))
            }
        }
    };
    let zeta_of = |f: &IntPoly, s: f64, p_max: u64| -> Result<Option<f64>> {
        if p_max == 0 || s <= 1.5 {
            return Ok(None);
        }
        Ok(Some(dedekind_euler(f, s, p_max, exec)?.value))
    };
    let (star_pi_exp, star_part, pi_exp, sqrt_disc, l_part, l_value) = match case {
        CovolumeCase::I => {
            check_k(p)?;
            if p.n == 0 || p.n % 2 == 1 {
                return Err(invalid("case I needs even n (odd n falls under case II)"));
            }
            let m = (p.n / 2) as i32;
            let e = m * p.t as i32;
            (e, "1".to_string(), e, Some(BigInt::one()), LPart::One, Some(1.0))
        }
        CovolumeCase::IISplit | CovolumeCase::IINonsplit => {
            check_k(p)?;
            if p.n.is_multiple_of(2) {
                return Err(invalid("case II needs odd n"));
            }
            let m = p.n.div_ceil(2);
            let star = (m * p.t) as i32;
            let val = star - (m * p.r) as i32;
            let dk = if p.r == 1 { Some(BigInt::one()) } else { disc_of(&p.k_poly, &mut caveats)? };
            let zk = match (&p.k_poly, p.r) {
                (_, 1) if p.p_max > 0 && m >= 2 => Some(riemann_zeta(f64::from(m))),
                (Some(k), _) => zeta_of(k, f64::from(m), p.p_max)?,
                _ => None,
            };
            if case == CovolumeCase::IISplit {
                (star, format!("zeta*_k({})", 1 - m as i32), val, dk, LPart::ZetaK { s: m }, zk)
            } else {
                let l = p.l_poly.as_ref().ok_or_else(|| invalid("case II-nonsplit needs the field L"))?;
                if l.degree() as u32 != 2 * p.r {
                    return Err(invalid("L must be a quadratic extension of k"));
                }
                let dl = disc_of(&p.l_poly, &mut caveats)?;
                // |d_L| = d_k² N(d_{L/k}), so |d_{L/k} d_k| = |d_L| / |d_k|.
                let rad = match (&dl, &dk) {
                    (Some(a), Some(b)) if !b.is_zero() => Some(a / b),
                    _ => None,
                };
                let zl = zeta_of(l, f64::from(m), p.p_max)?;
                let lv = match (zl, zk) {
                    (Some(a), Some(b)) => Some(a / b),
                    _ => None,
                };
                (star, format!("L*(chi,{})", 1 - m as i32), val, rad, LPart::LChi { s: m }, lv)
            }
        }
        CovolumeCase::III => {
            if p.r2 == 0 {
                return Err(invalid("case III needs at least one complex place"));
            }
            if p.t > p.r1 {
                return Err(invalid(format!("need t <= r1, got t = {}, r1 = {}", p.t, p.r1)));
            }
            if let Some(l) = &p.l_poly {
                if l.degree() as u32 != p.r1 + 2 * p.r2 {
                    return Err(invalid("deg L must equal r1 + 2 r2"));
                }
            }
            let star = (p.t + 2 * p.r2) as i32;
            let val = p.t as i32 - 2 * p.r1 as i32 - 2 * p.r2 as i32;
            let dl = disc_of(&p.l_poly, &mut caveats)?;
            let zl = match &p.l_poly {
                Some(l) => zeta_of(l, 2.0, p.p_max)?,
                None => None,
            };
            (star, "zeta*_L(-1)".to_string(), val, dl, LPart::ZetaL { s: 2 }, zl)
        }
    };
    let numeric = match (&sqrt_disc, l_value) {
        (Some(d), Some(v)) => Some(PI.powi(pi_exp) * d.to_f64().unwrap_or(f64::NAN).sqrt() * v),
        _ => None,
    };
    Ok(VolumeClass { case, star_pi_exp, star_part, pi_exp, sqrt_disc, l_part, l_value, numeric, caveats })
}
