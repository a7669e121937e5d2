//! Points and hyperplanes of H^n in the hyperboloid, Klein, Poincaré ball
//! and upper half-space models.
//!
//! Conversions go through the Klein model, which handles finite and ideal
//! points uniformly. Coordinates are floating point; exact data (normals,
//! rational Klein points) is expressed with [`QuadElem`].

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::qfield::{Place, QuadElem};

/// Tolerance deciding whether a Klein point sits on the absolute.
pub const IDEAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Hyperboloid,
    Klein,
    Ball,
    UpperHalf,
}

/// A finite or ideal point of H^n.
///
/// Hyperboloid points have `n + 1` coordinates; the other models have `n`.
/// In the upper half-space the last coordinate is the height `t`, and the
/// point at infinity is stored with `t = +inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPoint {
    pub model: Model,
    pub coords: Vec<f64>,
    pub ideal: bool,
}

/// Minkowski product `-x0 y0 + x1 y1 + ... + xn yn`.
pub fn minkowski(x: &[f64], y: &[f64]) -> f64 {
    -x[0] * y[0] + x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum::<f64>()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

impl HPoint {
    /// A Klein point; ideal when `|y|` is within [`IDEAL_TOL`] of 1.
    pub fn klein(coords: Vec<f64>) -> HPoint {
        let ideal = (1.0 - norm2(&coords)).abs() <= IDEAL_TOL;
        HPoint { model: Model::Klein, coords, ideal }
    }

    /// A Klein point on the absolute, projected radially onto the sphere.
    pub fn klein_ideal(coords: Vec<f64>) -> HPoint {
        let r = norm2(&coords).sqrt();
        HPoint { model: Model::Klein, coords: coords.iter().map(|x| x / r).collect(), ideal: true }
    }

    pub fn upper_half(coords: Vec<f64>) -> HPoint {
        let ideal = coords.last().is_some_and(|t| *t == 0.0 || t.is_infinite());
        HPoint { model: Model::UpperHalf, coords, ideal }
    }

    /// The point at infinity of the upper half-space model of H^n.
    pub fn infinity(n: usize) -> HPoint {
        let mut coords = vec![0.0; n];
        coords[n - 1] = f64::INFINITY;
        HPoint { model: Model::UpperHalf, coords, ideal: true }
    }

    pub fn is_infinity(&self) -> bool {
        self.model == Model::UpperHalf && self.coords.last().is_some_and(|t| t.is_infinite())
    }

    /// Dimension n of the ambient H^n.
    pub fn dim(&self) -> usize {
        match self.model {
            Model::Hyperboloid => self.coords.len() - 1,
            _ => self.coords.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(invalid("point has no coordinates"));
        }
        if self.coords.iter().any(|x| x.is_nan()) {
            return Err(invalid("NaN coordinate"));
        }
        if self.is_infinity() {
            return Ok(());
        }
        if self.coords.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        let tol = 1e-9;
        let ok = match self.model {
            Model::Hyperboloid => {
                let q = minkowski(&self.coords, &self.coords);
                self.coords[0] > 0.0 && if self.ideal { q.abs() <= tol } else { (q + 1.0).abs() <= tol }
            }
            Model::Klein | Model::Ball => {
                let r = norm2(&self.coords);
                if self.ideal {
                    (r - 1.0).abs() <= tol
                } else {
                    r < 1.0
                }
            }
            Model::UpperHalf => {
                let t = self.coords[self.coords.len() - 1];
                if self.ideal {
                    t == 0.0
                } else {
                    t > 0.0
                }
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("point {:?} is not valid in the {:?} model", self.coords, self.model)))
        }
    }

    /// Klein coordinates.
    pub fn to_klein(&self) -> Vec<f64> {
        match self.model {
            Model::Klein => self.coords.clone(),
            Model::Hyperboloid => self.coords[1..].iter().map(|x| x / self.coords[0]).collect(),
            Model::Ball => {
                let r = norm2(&self.coords);
                self.coords.iter().map(|b| 2.0 * b / (1.0 + r)).collect()
            }
            Model::UpperHalf => {
                let n = self.coords.len();
                if self.is_infinity() {
                    let mut y = vec![0.0; n];
                    y[n - 1] = 1.0;
                    return y;
                }
                HPoint { model: Model::Ball, coords: upper_to_ball(&self.coords), ideal: self.ideal }
                    .to_klein()
            }
        }
    }

    /// Hyperboloid coordinates; ideal points are normalized to `x0 = 1`.
    pub fn to_hyperboloid(&self) -> Vec<f64> {
        if self.model == Model::Hyperboloid {
            return self.coords.clone();
        }
        let y = self.to_klein();
        let x0 = if self.ideal { 1.0 } else { 1.0 / (1.0 - norm2(&y)).sqrt() };
        std::iter::once(x0).chain(y.iter().map(|v| v * x0)).collect()
    }

    pub fn convert(&self, target: Model) -> HPoint {
        if target == self.model {
            return self.clone();
        }
        let y = self.to_klein();
        let ideal = self.ideal;
        let coords = match target {
            Model::Klein => y,
            Model::Hyperboloid => {
                return HPoint { model: target, coords: self.to_hyperboloid(), ideal };
            }
            Model::Ball => klein_to_ball(&y, ideal),
            Model::UpperHalf => ball_to_upper(&klein_to_ball(&y, ideal), ideal),
        };
        HPoint { model: target, coords, ideal }
    }

    pub fn to_json(&self) -> Value {
        let coords: Vec<Value> = self
            .coords
            .iter()
            .map(|x| if x.is_infinite() { json!("inf") } else { json!(x) })
            .collect();
        json!({ "model": self.model, "ideal": self.ideal, "coords": coords })
    }

    pub fn from_json(v: &Value) -> Result<HPoint> {
        let model: Model = serde_json::from_value(v.get("model").cloned().unwrap_or(json!("klein")))
            .map_err(|e| invalid(format!("bad model: {e}")))?;
        let raw = v
            .get("coords")
            .and_then(Value::as_array)
            .ok_or_else(|| invalid("point needs a `coords` array"))?;
        let coords = raw
            .iter()
            .map(|c| match c {
                Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                _ => c.as_f64().ok_or_else(|| invalid(format!("bad coordinate {c}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        let ideal = match v.get("ideal") {
            Some(b) => b.as_bool().ok_or_else(|| invalid("`ideal` must be a boolean"))?,
            None => match model {
                Model::Klein => HPoint::klein(coords.clone()).ideal,
                Model::UpperHalf => HPoint::upper_half(coords.clone()).ideal,
                _ => false,
            },
        };
        let p = HPoint { model, coords, ideal };
        p.validate()?;
        Ok(p)
    }
}

fn klein_to_ball(y: &[f64], ideal: bool) -> Vec<f64> {
    let s = if ideal { 0.0 } else { (1.0 - norm2(y)).max(0.0).sqrt() };
    y.iter().map(|v| v / (1.0 + s)).collect()
}

/// Cayley transform: inversion in the sphere of radius √2 about the north
/// pole `e_n`, followed by a reflection of the last coordinate. The ball
/// center goes to `(0, ..., 0, 1)` and `e_n` to infinity.
fn ball_to_upper(b: &[f64], ideal: bool) -> Vec<f64> {
    let n = b.len();
    let mut diff = b.to_vec();
    diff[n - 1] -= 1.0;
    let r = norm2(&diff);
    if r < 1e-24 {
        let mut u = vec![0.0; n];
        u[n - 1] = f64::INFINITY;
        return u;
    }
    let mut u: Vec<f64> = diff.iter().map(|v| 2.0 * v / r).collect();
    u[n - 1] = -(u[n - 1] + 1.0);
    if ideal {
        u[n - 1] = 0.0;
    }
    u
}

fn upper_to_ball(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut diff = u.to_vec();
    diff[n - 1] = -diff[n - 1] - 1.0;
    let r = norm2(&diff);
    let mut b: Vec<f64> = diff.iter().map(|v| 2.0 * v / r).collect();
    b[n - 1] += 1.0;
    b
}

/// Hyperbolic distance between two finite points.
///
/// Uses `2 asinh(|x - y| / 2)` on the hyperboloid, which equals
/// `arccosh(-(x, y))` but keeps full precision for nearby points.
pub fn dist(p: &HPoint, q: &HPoint) -> Result<f64> {
    if p.ideal || q.ideal {
        return Err(Error::InfiniteLength);
    }
    let x = p.to_hyperboloid();
    let y = q.to_hyperboloid();
    let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    let chord = minkowski(&diff, &diff).max(0.0);
    Ok(2.0 * (chord.sqrt() / 2.0).asinh())
}

/// Distance from the cross ratio of the two points with the endpoints of the
/// Klein chord through them: `½ log [a, p, q, b]`.
pub fn chord_distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    if p.ideal || q.ideal {
        return Err(Error::InfiniteLength);
    }
    let y = p.to_klein();
    let z = q.to_klein();
    let dir: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
    let len = norm2(&dir).sqrt();
    if len == 0.0 {
        return Ok(0.0);
    }
    let u: Vec<f64> = dir.iter().map(|v| v / len).collect();
    // y + s u meets the sphere where s² + 2 (y.u) s + |y|² - 1 = 0.
    let bq: f64 = y.iter().zip(&u).map(|(a, b)| a * b).sum();
    let c = norm2(&y) - 1.0;
    let disc = (bq * bq - c).sqrt();
    let s_minus = -bq - disc;
    let s_plus = -bq + disc;
    // Parameters along the chord: a at s_minus, p at 0, q at len, b at s_plus.
    let ratio = ((len - s_minus) * s_plus) / ((0.0 - s_minus) * (s_plus - len));
    Ok(0.5 * ratio.ln())
}

/// Diagonal quadratic form with exact entries in a common field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    pub diag: Vec<QuadElem>,
}

impl QuadraticForm {
    /// `-c x0² + x1² + ... + xn²` with `c` in the field of `c`.
    pub fn lorentz(n: usize, c: QuadElem) -> QuadraticForm {
        let d = c.d();
        let mut diag = vec![-c];
        diag.extend(std::iter::repeat_n(QuadElem::one(d), n));
        QuadraticForm { diag }
    }

    /// The standard form `-x0² + x1² + ... + xn²` over Q.
    pub fn standard(n: usize) -> QuadraticForm {
        QuadraticForm::lorentz(n, QuadElem::one(1))
    }

    pub fn field(&self) -> u64 {
        self.diag[0].d()
    }

    pub fn dim(&self) -> usize {
        self.diag.len() - 1
    }

    pub fn inner(&self, x: &[QuadElem], y: &[QuadElem]) -> Result<QuadElem> {
        if x.len() != self.diag.len() || y.len() != self.diag.len() {
            return Err(invalid("vector length does not match the form"));
        }
        let mut acc = QuadElem::zero(self.field());
        for ((c, a), b) in self.diag.iter().zip(x).zip(y) {
            acc = acc.checked_add(&c.checked_mul(&a.checked_mul(b)?)?)?;
        }
        Ok(acc)
    }

    /// Inner product at the first real embedding, in floating point.
    pub fn inner_f64(&self, x: &[f64], y: &[f64]) -> f64 {
        self.diag.iter().zip(x).zip(y).map(|((c, a), b)| c.embed(Place::One) * a * b).sum()
    }

    /// `{"d": c, "dim": n}` means `-c x0² + x1² + ... + xn²`.
    pub fn from_json(v: &Value) -> Result<QuadraticForm> {
        let c = v.get("d").and_then(Value::as_u64).ok_or_else(|| invalid("form needs integer `d`"))?;
        let n = v.get("dim").and_then(Value::as_u64).ok_or_else(|| invalid("form needs `dim`"))?;
        if c == 0 || n == 0 {
            return Err(invalid("form needs d >= 1 and dim >= 1"));
        }
        Ok(QuadraticForm::lorentz(n as usize, QuadElem::rational(crate::qfield::int(c as i64))))
    }
}

/// Hyperplane `{x : (normal, x)_q = 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    pub normal: Vec<QuadElem>,
    pub form: QuadraticForm,
}

impl Hyperplane {
    pub fn new(normal: Vec<QuadElem>, form: QuadraticForm) -> Result<Hyperplane> {
        let nn = form.inner(&normal, &normal)?;
        if nn.sign(Place::One) <= 0 {
            return Err(invalid("hyperplane normal must be space-like"));
        }
        Ok(Hyperplane { normal, form })
    }
}

/// Relative position of two hyperplanes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dihedral {
    /// Intersecting at the given angle in `(0, π)`.
    Angle(f64),
    /// Meeting at an ideal point; also returned for a hyperplane with itself.
    Parallel,
    /// Disjoint, at the given distance.
    Ultraparallel(f64),
}

/// Exact `cos² θ = (e1, e2)² / ((e1, e1)(e2, e2))` together with the sign
/// of `cos θ`. Both are invariant under positive rescaling of the normals.
pub fn exact_cos_squared(h1: &Hyperplane, h2: &Hyperplane) -> Result<(QuadElem, i8)> {
    if h1.form != h2.form {
        return Err(invalid("hyperplanes use different quadratic forms"));
    }
    let q = &h1.form;
    let g11 = q.inner(&h1.normal, &h1.normal)?;
    let g22 = q.inner(&h2.normal, &h2.normal)?;
    let g12 = q.inner(&h1.normal, &h2.normal)?;
    let c2 = (&g12 * &g12).checked_div(&(&g11 * &g22))?;
    Ok((c2, -g12.sign(Place::One)))
}

/// `cos θ = -(e1, e2) / √((e1, e1)(e2, e2))`, with `|cos|` compared to 1
/// exactly.
pub fn dihedral_angle(h1: &Hyperplane, h2: &Hyperplane) -> Result<Dihedral> {
    let (c2, sign) = exact_cos_squared(h1, h2)?;
    let excess = &c2 - &QuadElem::one(c2.d());
    let c = f64::from(sign) * c2.embed(Place::One).max(0.0).sqrt();
    Ok(match excess.sign(Place::One) {
        0 => Dihedral::Parallel,
        1 => Dihedral::Ultraparallel(c.abs().acosh()),
        _ => Dihedral::Angle(c.clamp(-1.0, 1.0).acos()),
    })
}

/// Whether the Klein point `y` is rational over its field: `1 - Σ y_i²`
/// must be a nonzero square.
pub fn is_rational_point(y: &[QuadElem]) -> Result<bool> {
    let d = y.first().map_or(1, QuadElem::d);
    let mut v = QuadElem::one(d);
    for c in y {
        v = v.checked_sub(&c.checked_mul(c)?)?;
    }
    Ok(!v.is_zero() && v.sqrt().is_some())
}

/// An isometry of H^n as a matrix preserving the Minkowski form.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub matrix: Vec<Vec<f64>>,
}

impl Isometry {
    pub fn identity(n: usize) -> Isometry {
        let matrix =
            (0..=n).map(|i| (0..=n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Isometry { matrix }
    }

    /// Boost of rapidity `t` along axis `k` (1-based spatial index).
    pub fn boost(n: usize, k: usize, t: f64) -> Isometry {
        let mut m = Isometry::identity(n);
        let (c, s) = (t.cosh(), t.sinh());
        m.matrix[0][0] = c;
        m.matrix[k][k] = c;
        m.matrix[0][k] = s;
        m.matrix[k][0] = s;
        m
    }

    /// Rotation by `a` in the plane of spatial axes `i`, `j`.
    pub fn rotation(n: usize, i: usize, j: usize, a: f64) -> Isometry {
        let mut m = Isometry::identity(n);
        let (c, s) = (a.cos(), a.sin());
        m.matrix[i][i] = c;
        m.matrix[j][j] = c;
        m.matrix[i][j] = -s;
        m.matrix[j][i] = s;
        m
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        let n = self.matrix.len();
        let matrix = (0..n)
            .map(|i| {
                (0..n).map(|j| (0..n).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum()).collect()
            })
            .collect();
        Isometry { matrix }
    }

    /// An orientation-preserving isometry built from random rotations and
    /// boosts of rapidity below `max_boost`.
    pub fn random<R: Rng>(n: usize, max_boost: f64, rng: &mut R) -> Isometry {
        let mut m = Isometry::identity(n);
        for _ in 0..3 {
            for i in 1..=n {
                for j in (i + 1)..=n {
                    m = Isometry::rotation(n, i, j, rng.random_range(0.0..2.0 * PI)).compose(&m);
                }
            }
            let k = rng.random_range(1..=n);
            m = Isometry::boost(n, k, rng.random_range(-max_boost..max_boost)).compose(&m);
        }
        m
    }

    /// Applies to a point, returning it in the Klein model.
    pub fn apply(&self, p: &HPoint) -> HPoint {
        let x = p.to_hyperboloid();
        let y: Vec<f64> =
            self.matrix.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let coords = y[1..].iter().map(|v| v / y[0]).collect();
        HPoint { model: Model::Klein, coords, ideal: p.ideal }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> QuadElem {
        QuadElem::rational(rat(n, d))
    }

    fn random_klein(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> HPoint {
        loop {
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-rmax..rmax)).collect();
            if norm2(&y) < rmax * rmax {
                return HPoint::klein(y);
            }
        }
    }

    #[test]
    fn hyperboloid_base_point_is_klein_origin() {
        let p = HPoint { model: Model::Hyperboloid, coords: vec![1.0, 0.0, 0.0, 0.0], ideal: false };
        assert_eq!(p.convert(Model::Klein).coords, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn klein_to_hyperboloid() {
        let h = HPoint::klein(vec![0.6, 0.0, 0.0]).convert(Model::Hyperboloid);
        for (a, b) in h.coords.iter().zip([1.25, 0.75, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn upper_half_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=4 {
            for _ in 0..100 {
                let p = random_klein(&mut rng, n, 0.95);
                let back = p.convert(Model::UpperHalf).convert(Model::Klein);
                let err = p.coords.iter().zip(&back.coords).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-12, "round trip error {err}");
            }
        }
    }

    #[test]
    fn ball_center_and_north_pole() {
        let o = HPoint::klein(vec![0.0, 0.0]).convert(Model::UpperHalf);
        assert!((o.coords[0]).abs() < 1e-15 && (o.coords[1] - 1.0).abs() < 1e-15);
        let np = HPoint::klein_ideal(vec![0.0, 1.0]).convert(Model::UpperHalf);
        assert!(np.is_infinity());
        assert_eq!(HPoint::infinity(2).convert(Model::Klein).coords, vec![0.0, 1.0]);
        let sp = HPoint::klein_ideal(vec![0.0, -1.0]).convert(Model::UpperHalf);
        assert!(sp.ideal && sp.coords.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn distance_examples() {
        let o = HPoint::klein(vec![0.0, 0.0, 0.0]);
        let p = HPoint::klein(vec![0.6, 0.0, 0.0]);
        assert!((dist(&o, &p).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((chord_distance(&o, &p).unwrap() - 2f64.ln()).abs() < 1e-14);
        assert_eq!(dist(&p, &p).unwrap(), 0.0);
        let ideal = HPoint::klein_ideal(vec![1.0, 0.0, 0.0]);
        assert_eq!(dist(&o, &ideal), Err(Error::InfiniteLength));
    }

    #[test]
    fn chord_matches_hyperboloid_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = random_klein(&mut rng, 3, 0.97);
            let q = random_klein(&mut rng, 3, 0.97);
            let a = dist(&p, &q).unwrap();
            assert!((a - chord_distance(&p, &q).unwrap()).abs() < 1e-10);
            assert_eq!(a, dist(&q, &p).unwrap());
            let x = minkowski(&p.to_hyperboloid(), &q.to_hyperboloid());
            assert!((a - (-x).max(1.0).acosh()).abs() < 1e-7);
        }
    }

    #[test]
    fn conversions_preserve_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = random_klein(&mut rng, 3, 0.9);
            let q = random_klein(&mut rng, 3, 0.9);
            let d = dist(&p, &q).unwrap();
            for m in [Model::Hyperboloid, Model::Ball, Model::UpperHalf] {
                let d2 = dist(&p.convert(m), &q.convert(m)).unwrap();
                assert!((d - d2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn isometries_preserve_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Isometry::random(3, 1.0, &mut rng);
        let p = random_klein(&mut rng, 3, 0.8);
        let q = random_klein(&mut rng, 3, 0.8);
        let d = dist(&p, &q).unwrap();
        assert!((dist(&g.apply(&p), &g.apply(&q)).unwrap() - d).abs() < 1e-10);
    }

    fn bugaenko_pair() -> (Hyperplane, Hyperplane, Hyperplane) {
        let phi = QuadElem::golden();
        let z = QuadElem::zero(5);
        let one = QuadElem::one(5);
        let form = QuadraticForm::lorentz(5, phi.clone());
        let e1 = vec![z.clone(), -one.clone(), one.clone(), z.clone(), z.clone(), z.clone()];
        let e3 = vec![z.clone(), z.clone(), z.clone(), -one.clone(), one.clone(), z.clone()];
        let e6 = vec![&phi - &one, phi.clone(), z.clone(), z.clone(), z.clone(), z];
        (
            Hyperplane::new(e1, form.clone()).unwrap(),
            Hyperplane::new(e3, form.clone()).unwrap(),
            Hyperplane::new(e6, form).unwrap(),
        )
    }

    #[test]
    fn bugaenko_angles() {
        let (h1, h3, h6) = bugaenko_pair();
        match dihedral_angle(&h1, &h6).unwrap() {
            Dihedral::Angle(t) => assert!((t - PI / 5.0).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        assert_eq!(dihedral_angle(&h1, &h3).unwrap(), Dihedral::Angle(PI / 2.0));
        assert_eq!(dihedral_angle(&h1, &h1).unwrap(), Dihedral::Parallel);
    }

    #[test]
    fn angle_invariant_under_positive_scaling() {
        let (h1, _, h6) = bugaenko_pair();
        let s = QuadElem::new(rat(3, 2), rat(1, 3), 5).unwrap();
        assert_eq!(s.sign(Place::One), 1);
        let scaled = Hyperplane::new(h6.normal.iter().map(|c| c * &s).collect(), h6.form.clone()).unwrap();
        assert_eq!(dihedral_angle(&h1, &h6).unwrap(), dihedral_angle(&h1, &scaled).unwrap());
    }

    #[test]
    fn ultraparallel_and_mismatched_forms() {
        let form = QuadraticForm::standard(2);
        let a = Hyperplane::new(vec![q(0, 1), q(1, 1), q(0, 1)], form.clone()).unwrap();
        // The Klein lines y1 = 0 and y1 = 1/2.
        let b = Hyperplane::new(vec![q(1, 1), q(2, 1), q(0, 1)], form).unwrap();
        match dihedral_angle(&a, &b).unwrap() {
            Dihedral::Ultraparallel(d) => assert!((d - (2.0 / 3f64.sqrt()).acosh()).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        let other = Hyperplane::new(vec![q(0, 1), q(1, 1), q(0, 1)], QuadraticForm::lorentz(2, q(2, 1))).unwrap();
        assert!(dihedral_angle(&a, &other).is_err());
    }

    #[test]
    fn rational_points() {
        assert!(is_rational_point(&[q(0, 1), q(0, 1)]).unwrap());
        assert!(is_rational_point(&[q(3, 5), q(0, 1)]).unwrap());
        assert!(!is_rational_point(&[q(1, 2), q(0, 1)]).unwrap());
        assert!(!is_rational_point(&[q(1, 1), q(0, 1)]).unwrap());
        // Over Q(√5), y = 2/3 gives 1 - y² = 5/9 = (√5/3)².
        let y = QuadElem::from_rational(rat(2, 3), 5).unwrap();
        assert!(is_rational_point(&[y]).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let p = HPoint::infinity(3);
        let back = HPoint::from_json(&p.to_json()).unwrap();
        assert!(back.is_infinity());
        let k = HPoint::klein(vec![0.25, -0.5]);
        assert_eq!(HPoint::from_json(&k.to_json()).unwrap(), k);
        assert!(HPoint::from_json(&json!({"model": "klein", "coords": [0.9, 0.9]})).is_err());
    }
}
