//! Volumes of hyperbolic simplices.
//!
//! Exact engines cover H¹ (length), H² (angle defect) and H³ (Bloch-Wigner
//! for ideal tetrahedra, Lobachevsky-function cones otherwise). Any
//! dimension can be integrated numerically with [`vol_numeric`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::hypmodel::{dist, minkowski, HPoint, Model};
use crate::linalg;
use crate::qfield::{rational_to_string, Rational};
use crate::qmc::{self, Estimate};
use crate::simplex::{cross_ratio_parameter, Simplex};

const LI2_TERMS: usize = 40;

fn li2_coefficients() -> &'static [f64] {
    static C: OnceLock<Vec<f64>> = OnceLock::new();
    C.get_or_init(|| {
        let b = crate::lfunc::bernoulli_numbers(LI2_TERMS);
        let mut fact = Rational::one();
        (0..=LI2_TERMS)
            .map(|n| {
                fact *= Rational::from_integer(BigInt::from(n + 1));
                (&b[n] / &fact).to_f64().unwrap_or(0.0)
            })
            .collect()
    })
}

/// `Li₂(z) = Σ B_n u^{n+1}/(n+1)!` with `u = -log(1 - z)`; accurate on
/// `|z| <= 1, Re z <= 1/2`.
fn li2_reduced(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let mut pow = u;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in li2_coefficients() {
        acc += pow * c;
        pow *= u;
    }
    acc
}

/// The Bloch-Wigner dilogarithm `D(z) = Im Li₂(z) + arg(1 - z) log|z|`.
///
/// `z` is first moved into `|z| <= 1, Re z <= 1/2` with `D(1/z) = -D(z)` and
/// `D(1 - z) = -D(z)`. Returns 0 at 0 and 1, and for non-finite input.
pub fn bloch_wigner(z: Complex64) -> f64 {
    if !z.is_finite() {
        return 0.0;
    }
    let mut w = z;
    let mut sign = 1.0;
    if w.norm_sqr() > 1.0 {
        w = w.inv();
        sign = -sign;
    }
    if w.re > 0.5 {
        w = Complex64::new(1.0, 0.0) - w;
        sign = -sign;
    }
    if w.norm() == 0.0 {
        return 0.0;
    }
    let one_minus = Complex64::new(1.0, 0.0) - w;
    sign * (li2_reduced(w).im + one_minus.arg() * w.norm().ln())
}

/// Clausen function `Cl₂(θ) = D(e^{iθ})`.
pub fn clausen2(theta: f64) -> f64 {
    bloch_wigner(Complex64::from_polar(1.0, theta))
}

/// Lobachevsky function `Л(θ) = -∫₀^θ log|2 sin t| dt = ½ Cl₂(2θ)`.
pub fn lobachevsky(theta: f64) -> f64 {
    0.5 * clausen2(2.0 * theta)
}

fn require(s: &Simplex, n: usize) -> Result<()> {
    if s.ambient() != n || s.dim() != n {
        return Err(invalid(format!("expected a {n}-simplex in H^{n}, got a {}-simplex in H^{}", s.dim(), s.ambient())));
    }
    Ok(())
}

/// Signed length of a segment in H¹.
pub fn length_h1(s: &Simplex) -> Result<f64> {
    require(s, 1)?;
    let sg = s.sign();
    if sg == 0 {
        return Ok(0.0);
    }
    Ok(f64::from(sg) * dist(&s.vertices[0], &s.vertices[1])?)
}

/// Interior angles of a triangle in H²; 0 at ideal vertices.
pub fn triangle_angles(s: &Simplex) -> Result<[f64; 3]> {
    require(s, 2)?;
    let x: Vec<Vec<f64>> = s.vertices.iter().map(HPoint::to_hyperboloid).collect();
    let mut out = [0.0; 3];
    for i in 0..3 {
        if s.vertices[i].ideal {
            continue;
        }
        let p = &x[i];
        let tangent = |w: &Vec<f64>| {
            let c = minkowski(p, w);
            w.iter().zip(p).map(|(a, b)| a + c * b).collect::<Vec<f64>>()
        };
        let a = tangent(&x[(i + 1) % 3]);
        let b = tangent(&x[(i + 2) % 3]);
        let cos = minkowski(&a, &b) / (minkowski(&a, &a) * minkowski(&b, &b)).sqrt();
        out[i] = cos.clamp(-1.0, 1.0).acos();
    }
    Ok(out)
}

/// Area `π - α - β - γ`, signed by orientation; 0 for degenerate triangles.
pub fn area_h2(s: &Simplex) -> Result<f64> {
    require(s, 2)?;
    let sg = s.sign();
    if sg == 0 {
        return Ok(0.0);
    }
    let a = triangle_angles(s)?;
    Ok(f64::from(sg) * (PI - a[0] - a[1] - a[2]))
}

/// Poincaré's alternating sum `(σ₂/2σ₁) Σ_F (-1)^{dim F} vol(θ_F)` for a
/// positively oriented triangle: vertex cones contribute their angles, edges
/// half circles, the triangle a full circle. It evaluates to
/// `α + β + γ - π`, the negative of [`area_h2`].
pub fn poincare_sum_h2(s: &Simplex) -> Result<f64> {
    let a = triangle_angles(s)?;
    let sigma = |k: u32| vol_sphere(k).map(|c| c.value());
    let factor = sigma(2)? / (2.0 * sigma(1)?);
    Ok(factor * (a.iter().sum::<f64>() - 3.0 * PI + 2.0 * PI))
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `½ ∫ dA / (1 - |x|²)` over the sector triangle `(0, p, q)`, signed by the
/// orientation of `(0, p, q)`. With `h = cos δ` the distance from the origin
/// to the line `pq` and `ψ` the polar angle measured from its foot, the
/// antiderivative is `¼[Л(δ+ψ) - Л(δ-ψ) + 2Л(π/2-ψ)]`.
fn sector_term(p: [f64; 2], q: [f64; 2]) -> f64 {
    if cross2(p, q).abs() < 1e-300 {
        return 0.0;
    }
    let d = [q[0] - p[0], q[1] - p[1]];
    let len = d[0].hypot(d[1]);
    let mut n = [d[1] / len, -d[0] / len];
    let mut h = n[0] * p[0] + n[1] * p[1];
    if h < 0.0 {
        n = [-n[0], -n[1]];
        h = -h;
    }
    let delta = h.min(1.0).acos();
    let psi = |x: [f64; 2]| cross2(n, x).atan2(n[0] * x[0] + n[1] * x[1]);
    let g = |t: f64| 0.25 * (lobachevsky(delta + t) - lobachevsky(delta - t) + 2.0 * lobachevsky(FRAC_PI_2 - t));
    g(psi(q)) - g(psi(p))
}

/// Unsigned volume of the tetrahedron with ideal vertex `xi` (a unit vector
/// in the Klein model) and three further vertices.
fn cone_volume(xi: &[f64], others: &[&HPoint; 3]) -> f64 {
    // Householder reflection sending xi to the north pole e3.
    let u = [xi[0], xi[1], xi[2] - 1.0];
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let reflect = |y: &[f64]| -> Vec<f64> {
        if uu < 1e-30 {
            return y.to_vec();
        }
        let k = 2.0 * (u[0] * y[0] + u[1] * y[1] + u[2] * y[2]) / uu;
        (0..3).map(|i| y[i] - k * u[i]).collect()
    };
    let pts: Vec<(f64, f64, f64)> = others
        .iter()
        .map(|p| {
            let k = HPoint { model: Model::Klein, coords: reflect(&p.coords), ideal: p.ideal };
            let c = k.convert(Model::UpperHalf).coords;
            (c[0], c[1], if p.ideal { 0.0 } else { c[2] })
        })
        .collect();
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return 0.0;
    }
    // Hemisphere |x - c|² + t² = R² through the three points.
    let r2 = |p: &(f64, f64, f64)| p.0 * p.0 + p.1 * p.1 + p.2 * p.2;
    let m = vec![
        vec![2.0 * (pts[1].0 - pts[0].0), 2.0 * (pts[1].1 - pts[0].1)],
        vec![2.0 * (pts[2].0 - pts[0].0), 2.0 * (pts[2].1 - pts[0].1)],
    ];
    let rhs = [r2(&pts[1]) - r2(&pts[0]), r2(&pts[2]) - r2(&pts[0])];
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if linalg::det(&m).abs() <= 1e-14 * scale * scale {
        return 0.0;
    }
    let Some(c) = linalg::solve(&m, &rhs) else {
        return 0.0;
    };
    let rr = ((pts[0].0 - c[0]).powi(2) + (pts[0].1 - c[1]).powi(2) + pts[0].2 * pts[0].2).sqrt();
    let a: Vec<[f64; 2]> = pts.iter().map(|p| [(p.0 - c[0]) / rr, (p.1 - c[1]) / rr]).collect();
    let total = sector_term(a[0], a[1]) + sector_term(a[1], a[2]) + sector_term(a[2], a[0]);
    total.abs()
}

/// Fixed, well-spread candidate directions for the auxiliary ideal point.
fn candidate_directions() -> Vec<[f64; 3]> {
    let n = 24;
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64 + 0.3;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Euclidean distance from `x` to the plane through three points.
fn plane_distance(x: &[f64], p: &[f64], q: &[f64], r: &[f64]) -> f64 {
    let a: Vec<f64> = (0..3).map(|i| q[i] - p[i]).collect();
    let b: Vec<f64> = (0..3).map(|i| r[i] - p[i]).collect();
    let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if len == 0.0 {
        return 0.0;
    }
    ((x[0] - p[0]) * n[0] + (x[1] - p[1]) * n[1] + (x[2] - p[2]) * n[2]).abs() / len
}

/// Volume of an H³ simplex by coning from an ideal point, using the
/// Lobachevsky-function formula on each cone.
///
/// With an ideal vertex the simplex is a single cone. Otherwise an auxiliary
/// ideal point `ξ` is chosen and `[v0..v3] = Σ_i [v0..ξ..v3]` (ξ in slot i)
/// is used with determinant signs.
pub fn vol_h3_cone(s: &Simplex) -> Result<f64> {
    require(s, 3)?;
    if s.sign() == 0 {
        return Ok(0.0);
    }
    let o = f64::from(s.orientation);
    if let Some(k) = s.ideal_index() {
        if s.ideal_count() > 1 && s.ideal_count() < 4 {
            return Err(Error::Unsupported("two or three ideal vertices".into()));
        }
        let rest: Vec<&HPoint> = (0..4).filter(|&i| i != k).map(|i| &s.vertices[i]).collect();
        let v = cone_volume(&s.vertices[k].coords, &[rest[0], rest[1], rest[2]]);
        return Ok(f64::from(s.sign()) * v);
    }
    let faces: Vec<[usize; 3]> = vec![[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
    let xi = candidate_directions()
        .into_iter()
        .max_by(|a, b| {
            let score = |x: &[f64; 3]| {
                faces
                    .iter()
                    .map(|f| plane_distance(x, s.klein(f[0]), s.klein(f[1]), s.klein(f[2])))
                    .fold(f64::INFINITY, f64::min)
            };
            score(a).total_cmp(&score(b))
        })
        .expect("candidate list is nonempty");
    let ideal = HPoint { model: Model::Klein, coords: xi.to_vec(), ideal: true };
    let mut total = 0.0;
    for i in 0..4 {
        let mut piece = s.clone();
        piece.vertices[i] = ideal.clone();
        piece.exact = None;
        let d = piece.det();
        if d == 0.0 {
            continue;
        }
        let f = faces[i];
        let v = cone_volume(&xi, &[&s.vertices[f[0]], &s.vertices[f[1]], &s.vertices[f[2]]]);
        total += d.signum() * v;
    }
    Ok(o * total)
}

/// Volume of an H³ simplex: `D(z)` for all-ideal tetrahedra, the cone
/// formula otherwise. Signed by orientation.
pub fn vol_h3(s: &Simplex) -> Result<f64> {
    require(s, 3)?;
    if s.ideal_count() == 4 {
        let sg = s.sign();
        if sg == 0 {
            return Ok(0.0);
        }
        let z = cross_ratio_parameter(s)?;
        return Ok(f64::from(sg) * bloch_wigner(z).abs());
    }
    vol_h3_cone(s)
}

/// Settings for [`vol_numeric_with`].
#[derive(Clone, Copy, Debug)]
pub struct NumericOptions {
    pub samples: usize,
    pub seed: u64,
    /// Independent randomizations used for the error estimate.
    pub batches: usize,
    /// Integrate over ideal vertices in cone coordinates `s = σ²`.
    pub cusp_substitution: bool,
    pub exec: Execution,
}

impl NumericOptions {
    pub fn new(samples: usize, seed: u64) -> NumericOptions {
        NumericOptions { samples, seed, batches: 16, cusp_substitution: true, exec: Execution::default() }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Klein-model volume density `(1 - |y|²)^{-(m+1)/2}`.
fn density(one_minus_r2: f64, m: usize) -> f64 {
    one_minus_r2.powf(-0.5 * (m as f64 + 1.0))
}

fn integrate_finite(vertices: &[Vec<f64>], opts: &NumericOptions, seed: u64) -> Estimate {
    let m = vertices.len() - 1;
    let rows: linalg::Matrix =
        vertices.iter().map(|v| std::iter::once(1.0).chain(v.iter().copied()).collect()).collect();
    let vol_e = linalg::det(&rows).abs() / factorial(m);
    let points = (opts.samples / opts.batches).max(1);
    qmc::integrate(m, points, opts.batches, seed, opts.exec, |u| {
        let mut b = vec![0.0; m + 1];
        qmc::cube_to_simplex(u, &mut b);
        let mut y = vec![0.0; m];
        for (w, v) in b.iter().zip(vertices) {
            for k in 0..m {
                y[k] += w * v[k];
            }
        }
        let r2: f64 = y.iter().map(|x| x * x).sum();
        vol_e * density(1.0 - r2, m)
    })
}

/// Cone coordinates `y = v + s (w - v)` from the ideal vertex `v`, with
/// `w` uniform on the opposite face and `s = σ²`; the integrand is then
/// bounded for `m >= 2`.
fn integrate_cusp(v: &[f64], face: &[Vec<f64>], opts: &NumericOptions, seed: u64) -> Estimate {
    let m = v.len();
    let mut rows: linalg::Matrix = vec![std::iter::once(1.0).chain(v.iter().copied()).collect()];
    rows.extend(face.iter().map(|w| std::iter::once(1.0).chain(w.iter().copied()).collect()));
    let vol_e = linalg::det(&rows).abs() / factorial(m);
    let points = (opts.samples / opts.batches).max(1);
    qmc::integrate(m, points, opts.batches, seed, opts.exec, |u| {
        let sigma = u[0];
        if sigma == 0.0 {
            return 0.0;
        }
        let s = sigma * sigma;
        let mut b = vec![0.0; m];
        qmc::cube_to_simplex(&u[1..], &mut b);
        let mut w = vec![0.0; m];
        for (bi, f) in b.iter().zip(face) {
            for k in 0..m {
                w[k] += bi * f[k];
            }
        }
        let dv: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - b).collect();
        let vd: f64 = v.iter().zip(&dv).map(|(a, b)| a * b).sum();
        let dd: f64 = dv.iter().map(|x| x * x).sum();
        let one_minus_r2 = -2.0 * s * vd - s * s * dd;
        if one_minus_r2 <= 0.0 {
            return 0.0;
        }
        let jac = m as f64 * s.powi(m as i32 - 1) * 2.0 * sigma;
        vol_e * jac * density(one_minus_r2, m)
    })
}

fn combine(parts: &[Estimate]) -> Estimate {
    Estimate {
        value: parts.iter().map(|e| e.value).sum(),
        err: parts.iter().map(|e| e.err * e.err).sum::<f64>().sqrt(),
    }
}

/// Quasi-Monte Carlo volume of a top-dimensional simplex in H^m.
pub fn vol_numeric(s: &Simplex, samples: usize, seed: u64) -> Result<Estimate> {
    vol_numeric_with(s, &NumericOptions::new(samples, seed))
}

pub fn vol_numeric_with(s: &Simplex, opts: &NumericOptions) -> Result<Estimate> {
    let m = s.dim();
    if m != s.ambient() || m == 0 {
        return Err(invalid("numeric volume needs a top-dimensional simplex"));
    }
    if opts.samples < 1000 {
        return Err(invalid("numeric volume needs at least 1000 samples"));
    }
    if opts.batches < 2 {
        return Err(invalid("at least two batches are needed for an error estimate"));
    }
    let sg = s.sign();
    if sg == 0 {
        return Ok(Estimate { value: 0.0, err: 0.0 });
    }
    let verts: Vec<Vec<f64>> = s.vertices.iter().map(|v| v.coords.clone()).collect();
    let ideal = s.ideal_count();
    if ideal > 0 && (!opts.cusp_substitution || m < 2) {
        return Err(Error::NonIntegrable("vertex on the absolute without the cusp substitution".into()));
    }
    let est = if ideal == 0 {
        integrate_finite(&verts, opts, opts.seed)
    } else if ideal == 1 {
        let k = s.ideal_index().unwrap();
        let face: Vec<Vec<f64>> = (0..=m).filter(|&i| i != k).map(|i| verts[i].clone()).collect();
        integrate_cusp(&verts[k], &face, opts, opts.seed)
    } else {
        // Barycentric subdivision: each piece keeps exactly one ideal vertex.
        let perms = permutations(m + 1);
        let per = NumericOptions { samples: (opts.samples / perms.len()).max(opts.batches), ..*opts };
        let parts: Vec<Estimate> = perms
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let chain: Vec<Vec<f64>> = (0..=m)
                    .map(|k| {
                        let mut c = vec![0.0; m];
                        for &i in &p[..=k] {
                            for t in 0..m {
                                c[t] += verts[i][t] / (k + 1) as f64;
                            }
                        }
                        c
                    })
                    .collect();
                let v = s.vertices[p[0]].coords.clone();
                integrate_cusp(&v, &chain[1..], &per, opts.seed.wrapping_add(j as u64))
            })
            .collect();
        combine(&parts)
    };
    Ok(Estimate { value: f64::from(sg) * est.value, err: est.err })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// A volume known up to its exact rational coefficient: `coeff * π^pi_exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiPowerClass {
    pub coeff: Rational,
    pub pi_exp: u32,
}

impl PiPowerClass {
    pub fn value(&self) -> f64 {
        crate::qfield::rational_to_f64(&self.coeff) * PI.powi(self.pi_exp as i32)
    }

    pub fn to_json(&self) -> Value {
        json!({ "coeff": rational_to_string(&self.coeff), "pi_exp": self.pi_exp, "value": self.value() })
    }
}

impl fmt::Display for PiPowerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*pi^{}", rational_to_string(&self.coeff), self.pi_exp)
    }
}

fn big_factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Volume of the unit sphere S^n: `2π^m/(m-1)!` for `n = 2m - 1` and
/// `2^{2m+1} m! π^m / (2m)!` for `n = 2m`.
pub fn vol_sphere(n: u32) -> Result<PiPowerClass> {
    if n == 0 {
        return Err(invalid("sphere dimension must be at least 1"));
    }
    let m = u64::from(n.div_ceil(2));
    let coeff = if n % 2 == 1 {
        Rational::new(BigInt::from(2), big_factorial(m - 1))
    } else {
        Rational::new((BigInt::one() << (2 * m + 1)) * big_factorial(m), big_factorial(2 * m))
    };
    Ok(PiPowerClass { coeff, pi_exp: m as u32 })
}

/// `vol(O(n)) = vol(O(n-1)) vol(S^{n-1})`, with `O(1)` two points.
pub fn vol_orthogonal(n: u32) -> Result<PiPowerClass> {
    if n == 0 {
        return Err(invalid("O(n) needs n >= 1"));
    }
    let mut acc = PiPowerClass { coeff: Rational::from_integer(BigInt::from(2)), pi_exp: 0 };
    for k in 1..n {
        let s = vol_sphere(k)?;
        acc = PiPowerClass { coeff: acc.coeff * s.coeff, pi_exp: acc.pi_exp + s.pi_exp };
    }
    Ok(acc)
}

/// π-exponent of `vol(O(n))` modulo rational multiples.
pub fn vol_orthogonal_class(n: u32) -> Result<u32> {
    Ok(vol_orthogonal(n)?.pi_exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    X0,
    X1,
}

pub fn parse_word(w: &str) -> Result<Vec<Letter>> {
    let mut out = Vec::new();
    let mut chars = w.trim().chars().peekable();
    while let Some(c) = chars.next() {
        match (c, chars.next()) {
            ('x', Some('0')) => out.push(Letter::X0),
            ('x', Some('1')) => out.push(Letter::X1),
            _ => return Err(invalid(format!("bad word `{w}`: use letters x0 and x1"))),
        }
    }
    Ok(out)
}

/// Single-valued polylogarithms `L_w(z)` for words of length at most two.
///
/// `L_{x0} = log|z|²`, `L_{x1} = -log|1-z|²`, `L_{a a} = L_a²/2`,
/// `L_{x0x1} = 2i D(z) - 2 log|z| log|1-z|`, and `L_{x1x0}` is fixed by the
/// shuffle `L_{x0} L_{x1} = L_{x0x1} + L_{x1x0}`. With this normalization of
/// `L_{x1}`, `(L_{x0x1} - L_{x1x0})/(4i) = D(z)`.
pub fn sv_polylog(w: &[Letter], z: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if !z.is_finite() || z.norm() == 0.0 || (one - z).norm() == 0.0 {
        return Err(invalid("z must avoid 0, 1 and infinity"));
    }
    let l0 = 2.0 * z.norm().ln();
    let l1 = -2.0 * (one - z).norm().ln();
    let l01 = Complex64::new(-2.0 * z.norm().ln() * (one - z).norm().ln(), 2.0 * bloch_wigner(z));
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(match w {
        [] => one,
        [Letter::X0] => c(l0),
        [Letter::X1] => c(l1),
        [Letter::X0, Letter::X0] => c(0.5 * l0 * l0),
        [Letter::X1, Letter::X1] => c(0.5 * l1 * l1),
        [Letter::X0, Letter::X1] => l01,
        [Letter::X1, Letter::X0] => c(l0 * l1) - l01,
        _ => return Err(Error::Unsupported("words longer than two letters".into())),
    })
}

/// Volume with the method used and an error estimate (0 for closed forms).
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeReport {
    pub value: f64,
    pub method: &'static str,
    pub err: f64,
}

/// Dispatches to the best engine for the simplex dimension.
pub fn volume(s: &Simplex, opts: &NumericOptions) -> Result<VolumeReport> {
    if s.dim() != s.ambient() {
        return Err(invalid("volume needs a top-dimensional simplex"));
    }
    let closed = |value, method| Ok(VolumeReport { value, method, err: 0.0 });
    match s.dim() {
        1 => closed(length_h1(s)?, "length"),
        2 => closed(area_h2(s)?, "angle_defect"),
        3 if s.ideal_count() == 4 => closed(vol_h3(s)?, "bloch_wigner"),
        3 => closed(vol_h3(s)?, "lobachevsky_cone"),
        _ => {
            let e = vol_numeric_with(s, opts)?;
            Ok(VolumeReport { value: e.value, method: "qmc", err: e.err })
        }
    }
}

/// The regular ideal tetrahedron with vertices at `0, 1, ∞, e^{iπ/3}`.
pub fn regular_ideal_tetrahedron() -> Simplex {
    use crate::simplex::boundary_point;
    Simplex::new(
        vec![
            boundary_point(Some(Complex64::new(0.0, 0.0))),
            boundary_point(Some(Complex64::new(1.0, 0.0))),
            boundary_point(Some(Complex64::from_polar(1.0, PI / 3.0))),
            boundary_point(None),
        ],
        1,
    )
    .expect("valid ideal tetrahedron")
}

/// A triangle with the given interior angles (sum below π), one vertex at
/// the Klein origin.
pub fn triangle_with_angles(alpha: f64, beta: f64, gamma: f64) -> Result<Simplex> {
    if alpha + beta + gamma >= PI || alpha <= 0.0 || beta <= 0.0 || gamma <= 0.0 {
        return Err(invalid("angles must be positive with sum below pi"));
    }
    // Side lengths from the hyperbolic law of cosines for angles.
    let side = |a: f64, b: f64, c: f64| ((a.cos() * b.cos() + c.cos()) / (a.sin() * b.sin())).acosh();
    let c = side(alpha, beta, gamma);
    let b = side(alpha, gamma, beta);
    let (rc, rb) = (c.tanh(), b.tanh());
    Simplex::from_klein(vec![vec![0.0, 0.0], vec![rc, 0.0], vec![rb * alpha.cos(), rb * alpha.sin()]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypmodel::Isometry;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Catalan's constant from its defining alternating series.
    fn catalan_oracle() -> f64 {
        // Pairing consecutive terms and adding half the next term keeps the
        // truncation error far below 1e-12.
        let n = 2_000_000u64;
        let mut s = 0.0;
        for k in (0..n).rev() {
            let t = 1.0 / ((2 * k + 1) as f64).powi(2);
            s += if k % 2 == 0 { t } else { -t };
        }
        s + 0.5 / ((2 * n + 1) as f64).powi(2)
    }

    /// `Cl₂(θ) = -∫₀^θ log(2 sin(t/2)) dt`, splitting off `log t` and using
    /// Simpson's rule on the smooth remainder.
    fn clausen_oracle(theta: f64) -> f64 {
        let n = 2000;
        let h = theta / n as f64;
        let g = |t: f64| if t == 0.0 { 0.0 } else { (2.0 * (t / 2.0).sin() / t).ln() };
        let mut s = g(0.0) + g(theta);
        for i in 1..n {
            s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        -(theta * theta.ln() - theta) - s * h / 3.0
    }

    #[test]
    fn bloch_wigner_at_i_is_catalan() {
        let d = bloch_wigner(Complex64::new(0.0, 1.0));
        assert!((d - catalan_oracle()).abs() < 1e-12, "{d}");
        assert!((d - 0.915_965_594_2).abs() < 1e-10);
    }

    #[test]
    fn bloch_wigner_maximum() {
        let d = bloch_wigner(Complex64::from_polar(1.0, PI / 3.0));
        assert!((d - clausen_oracle(PI / 3.0)).abs() < 1e-12);
        assert!((d - 1.014_941_606_4).abs() < 1e-10);
        assert_eq!(bloch_wigner(Complex64::new(0.0, 0.0)), 0.0);
        assert_eq!(bloch_wigner(Complex64::new(1.0, 0.0)), 0.0);
    }

    #[test]
    fn clausen_matches_quadrature() {
        for theta in [0.3, 1.0, 2.0, 2.9] {
            assert!((clausen2(theta) - clausen_oracle(theta)).abs() < 1e-11);
        }
    }

    #[test]
    fn regular_ideal_tetrahedron_volume() {
        let t = regular_ideal_tetrahedron();
        let v = vol_h3(&t).unwrap();
        let d = bloch_wigner(Complex64::from_polar(1.0, PI / 3.0));
        assert!((v - d).abs() < 1e-12, "{v}");
        assert!((vol_h3_cone(&t.negated()).unwrap().abs() - d).abs() < 1e-10);
        assert_eq!(vol_h3(&t.negated()).unwrap(), -v);
    }

    #[test]
    fn ideal_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let pts: Vec<HPoint> =
                (0..4).map(|_| HPoint::klein_ideal((0..3).map(|_| rng.random_range(-1.0..1.0)).collect())).collect();
            let s = Simplex::new(pts, 1).unwrap();
            let a = vol_h3(&s).unwrap();
            let b = vol_h3_cone(&s).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    fn random_tetra(rng: &mut ChaCha8Rng, r: f64) -> Simplex {
        loop {
            let v: Vec<Vec<f64>> = (0..4)
                .map(|_| loop {
                    let y: Vec<f64> = (0..3).map(|_| rng.random_range(-r..r)).collect();
                    if y.iter().map(|x| x * x).sum::<f64>() < r * r {
                        break y;
                    }
                })
                .collect();
            let s = Simplex::from_klein(v).unwrap();
            if s.det().abs() > 1e-4 {
                return s;
            }
        }
    }

    #[test]
    fn finite_tetrahedron_matches_numeric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let s = random_tetra(&mut rng, 0.9);
            let v = vol_h3(&s).unwrap();
            let e = vol_numeric(&s, 200_000, 1).unwrap();
            assert!((v - e.value).abs() < 5.0 * e.err + 1e-6, "{v} vs {e:?}");
        }
    }

    #[test]
    fn one_ideal_vertex_matches_numeric() {
        let s = Simplex::new(
            vec![
                HPoint::klein_ideal(vec![0.2, 0.3, 0.9]),
                HPoint::klein(vec![0.1, -0.2, 0.0]),
                HPoint::klein(vec![-0.5, 0.1, 0.1]),
                HPoint::klein(vec![0.2, 0.4, -0.3]),
            ],
            1,
        )
        .unwrap();
        let v = vol_h3(&s).unwrap();
        let e = vol_numeric(&s, 400_000, 2).unwrap();
        assert!((v - e.value).abs() < 5.0 * e.err + 1e-6, "{v} vs {e:?}");
        let mut opts = NumericOptions::new(10_000, 0);
        opts.cusp_substitution = false;
        assert!(matches!(vol_numeric_with(&s, &opts), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn subdivision_additivity_h3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let s = random_tetra(&mut rng, 0.95);
            let y = HPoint::klein((0..3).map(|_| rng.random_range(-0.5..0.5)).collect());
            let whole = vol_h3(&s).unwrap();
            let parts: f64 = s.subdivide(&y).unwrap().iter().map(|p| vol_h3(p).unwrap()).sum();
            assert!((whole - parts).abs() < 1e-8, "{whole} vs {parts}");
        }
    }

    #[test]
    fn isometry_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let s = random_tetra(&mut rng, 0.8);
            let g = Isometry::random(3, 0.7, &mut rng);
            let moved = Simplex::new(s.vertices.iter().map(|v| g.apply(v)).collect(), 1).unwrap();
            assert!((vol_h3(&s).unwrap() - vol_h3(&moved).unwrap()).abs() < 1e-9);
            let t = Simplex::from_klein(vec![vec![0.1, 0.2], vec![-0.6, 0.1], vec![0.3, -0.7]]).unwrap();
            let h = Isometry::random(2, 0.7, &mut rng);
            let tm = Simplex::new(t.vertices.iter().map(|v| h.apply(v)).collect(), 1).unwrap();
            assert!((area_h2(&t).unwrap() - area_h2(&tm).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn area_examples() {
        let t = triangle_with_angles(PI / 2.0, PI / 3.0, PI / 7.0).unwrap();
        assert!((area_h2(&t).unwrap() - PI / 42.0).abs() < 1e-12);
        let ideal = Simplex::new(
            vec![
                HPoint::klein_ideal(vec![1.0, 0.0]),
                HPoint::klein_ideal(vec![-0.5, 0.8]),
                HPoint::klein_ideal(vec![-0.4, -0.9]),
            ],
            1,
        )
        .unwrap();
        assert!((area_h2(&ideal).unwrap() - PI).abs() < 1e-12);
        let flat = Simplex::from_klein(vec![vec![0.0, 0.0], vec![0.2, 0.0], vec![0.4, 0.0]]).unwrap();
        assert_eq!(area_h2(&flat).unwrap(), 0.0);
        assert!((poincare_sum_h2(&t).unwrap() + area_h2(&t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn area_subdivision_and_numeric() {
        let t = Simplex::from_klein(vec![vec![0.1, 0.2], vec![-0.6, 0.1], vec![0.3, -0.7]]).unwrap();
        let a = area_h2(&t).unwrap();
        let parts: f64 = t.subdivide(&HPoint::klein(vec![0.0, -0.1])).unwrap().iter().map(|p| area_h2(p).unwrap()).sum();
        assert!((a - parts).abs() < 1e-10);
        let e = vol_numeric(&t, 100_000, 4).unwrap();
        assert!((a - e.value).abs() < 3.0 * e.err + 1e-7, "{a} vs {e:?}");
        let cusp = Simplex::new(
            vec![HPoint::klein_ideal(vec![0.0, 1.0]), HPoint::klein(vec![-0.3, 0.0]), HPoint::klein(vec![0.4, -0.2])],
            1,
        )
        .unwrap();
        let e = vol_numeric(&cusp, 400_000, 4).unwrap();
        let a = area_h2(&cusp).unwrap();
        assert!((a - e.value).abs() < 5.0 * e.err + 1e-6, "{a} vs {e:?}");
    }

    #[test]
    fn regular_ideal_numeric() {
        let e = vol_numeric(&regular_ideal_tetrahedron(), 200_000, 0).unwrap();
        assert!((e.value - 1.014_941_606_4).abs() < 5.0 * e.err.max(1e-4), "{e:?}");
    }

    #[test]
    fn degenerate_numeric_is_zero() {
        let s = Simplex::from_klein(vec![vec![0.0, 0.0], vec![0.2, 0.0], vec![0.4, 0.0]]).unwrap();
        assert_eq!(vol_numeric(&s, 1000, 0).unwrap(), Estimate { value: 0.0, err: 0.0 });
    }

    #[test]
    fn numeric_is_deterministic_across_modes() {
        let s = Simplex::from_klein(vec![vec![0.1, 0.2], vec![-0.6, 0.1], vec![0.3, -0.7]]).unwrap();
        let mut o = NumericOptions::new(20_000, 3);
        o.exec = Execution::Sequential;
        let a = vol_numeric_with(&s, &o).unwrap();
        o.exec = Execution::Parallel;
        assert_eq!(a, vol_numeric_with(&s, &o).unwrap());
    }

    #[test]
    fn sphere_volumes() {
        let v = |n| vol_sphere(n).unwrap();
        assert_eq!(v(1), PiPowerClass { coeff: Rational::from_integer(2.into()), pi_exp: 1 });
        assert_eq!(v(2), PiPowerClass { coeff: Rational::from_integer(4.into()), pi_exp: 1 });
        assert_eq!(v(3), PiPowerClass { coeff: Rational::from_integer(2.into()), pi_exp: 2 });
        assert!((v(4).value() - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!(vol_sphere(0).is_err());
        // Recursion σ_n = 2π σ_{n-2} / (n - 1).
        for n in 3..20 {
            let r = v(n).value() / v(n - 2).value();
            assert!((r - 2.0 * PI / (n as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_classes() {
        assert_eq!(vol_orthogonal_class(2).unwrap(), 1);
        assert_eq!(vol_orthogonal_class(3).unwrap(), 2);
        assert_eq!(vol_orthogonal_class(5).unwrap(), 6);
        for m in 1..6u32 {
            assert_eq!(vol_orthogonal_class(2 * m - 1).unwrap(), m * (m - 1));
            assert_eq!(vol_orthogonal_class(2 * m).unwrap(), m * m);
        }
    }

    #[test]
    fn polylog_basics() {
        let e = Complex64::new(std::f64::consts::E, 0.0);
        assert!((sv_polylog(&[Letter::X0], e).unwrap().re - 2.0).abs() < 1e-15);
        assert!(sv_polylog(&[Letter::X0], Complex64::new(1.0, 0.0)).is_err());
        assert_eq!(parse_word("x0x1").unwrap(), vec![Letter::X0, Letter::X1]);
        assert!(parse_word("x2").is_err());
    }

    fn z_strategy() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, -3.0f64..3.0)
            .prop_filter("away from 0 and 1", |(a, b)| a.hypot(*b) > 1e-3 && (a - 1.0).hypot(*b) > 1e-3)
            .prop_map(|(a, b)| Complex64::new(a, b))
    }

    proptest! {
        #[test]
        fn antisymmetry(z in z_strategy()) {
            prop_assert!((bloch_wigner(z.conj()) + bloch_wigner(z)).abs() < 1e-13);
            let one = Complex64::new(1.0, 0.0);
            prop_assert!((bloch_wigner(one - z) + bloch_wigner(z)).abs() < 1e-12);
            prop_assert!((bloch_wigner(z.inv()) + bloch_wigner(z)).abs() < 1e-12);
        }

        #[test]
        fn five_term(x in 0.01f64..0.99, y in 0.01f64..0.99, ix in -0.5f64..0.5, iy in -0.5f64..0.5) {
            // Complex arguments make every term nonzero.
            let x = Complex64::new(x, ix);
            let y = Complex64::new(y, iy);
            let one = Complex64::new(1.0, 0.0);
            let xy = one - x * y;
            let s = bloch_wigner(x) + bloch_wigner(y) + bloch_wigner((one - x) / xy)
                + bloch_wigner(xy) + bloch_wigner((one - y) / xy);
            prop_assert!(s.abs() < 1e-10, "{}", s);
        }

        #[test]
        fn polylog_identities(z in z_strategy()) {
            let l01 = sv_polylog(&[Letter::X0, Letter::X1], z).unwrap();
            let l10 = sv_polylog(&[Letter::X1, Letter::X0], z).unwrap();
            let l0 = sv_polylog(&[Letter::X0], z).unwrap();
            let l1 = sv_polylog(&[Letter::X1], z).unwrap();
            prop_assert!((l0 * l1 - l01 - l10).norm() < 1e-12);
            let d = (l01 - l10) / Complex64::new(0.0, 4.0);
            prop_assert!((d.re - bloch_wigner(z)).abs() < 1e-10 && d.im.abs() < 1e-10);
        }
    }
}
