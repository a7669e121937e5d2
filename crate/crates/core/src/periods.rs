//! Framed period matrices of simplex motives in dimensions 1, 2 and 3, the
//! coproduct as a Dehn invariant, and graded dimensions of simplex motives.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::hypmodel::{dist, minkowski};
use crate::linalg;
use crate::qfield::{int, recognize_rational, Rational};
use crate::scissors::{edge_angle, facet_angles};
use crate::simplex::{subsets, Simplex};
use crate::volume::vol_h3;

const TWO_I_PI: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// Lower-triangular (dual) period matrix. Row `k` has weight `weights[k]`
/// and diagonal `(2iπ)^{weights[k]/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodMatrix {
    pub entries: Vec<Vec<Complex64>>,
    pub weights: Vec<u32>,
    /// Row of the volume class.
    pub frame_top: usize,
    /// Column of the simplex class.
    pub frame_bottom: usize,
}

fn diag(weight: u32) -> Complex64 {
    TWO_I_PI.powu(weight / 2)
}

impl PeriodMatrix {
    fn build(weights: Vec<u32>, below: impl Fn(usize, usize) -> Complex64) -> PeriodMatrix {
        let n = weights.len();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => below(i, j),
                        std::cmp::Ordering::Equal => diag(weights[i]),
                        std::cmp::Ordering::Greater => Complex64::zero(),
                    })
                    .collect()
            })
            .collect();
        PeriodMatrix { entries, weights, frame_top: n - 1, frame_bottom: 0 }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// `n` with the top weight equal to `2n`.
    pub fn top_weight_half(&self) -> u32 {
        self.weights[self.frame_top] / 2
    }

    /// `Re(i^{1-n} P_{top,bottom}) / (2π)^n`, so that `(2π)^n R` is the
    /// volume (or the length when n = 1, up to the factor 2 of the Kummer
    /// period).
    pub fn real_period(&self) -> f64 {
        let n = self.top_weight_half() as i32;
        let phase = Complex64::i().powi(1 - n);
        (phase * self.entries[self.frame_top][self.frame_bottom]).re / (2.0 * PI).powi(n)
    }

    /// Left multiplication `U P`.
    pub fn left_mul(&self, u: &[Vec<Rational>]) -> Result<PeriodMatrix> {
        let n = self.size();
        if u.len() != n || u.iter().enumerate().any(|(i, r)| r.len() != n || r[i] != int(1) || r[i + 1..].iter().any(|x| !x.is_zero())) {
            return Err(invalid("gauge must be unipotent lower-triangular of matching size"));
        }
        let uf: Vec<Vec<f64>> = u.iter().map(|r| r.iter().map(crate::qfield::rational_to_f64).collect()).collect();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.entries[k][j] * uf[i][k]).sum()).collect())
            .collect();
        Ok(PeriodMatrix { entries, ..self.clone() })
    }

    /// Returns to the normalized gauge: every entry `P_kj` with `j >= 1`
    /// below the diagonal loses the rational part of `P_kj / P_jj`, by
    /// subtracting that multiple of row `j`. Column 0 keeps its rational
    /// ambiguity.
    pub fn normalize_gauge(&self, tol: f64, max_den: u64) -> Result<PeriodMatrix> {
        let mut p = self.clone();
        let n = p.size();
        for k in 1..n {
            for j in (1..k).rev() {
                let ratio = p.entries[k][j] / p.entries[j][j];
                if ratio.re.abs() <= tol {
                    continue;
                }
                let c = recognize_rational(ratio.re, max_den, tol)
                    .ok_or_else(|| Error::Numeric(format!("entry ({k},{j}) is not in the rational gauge orbit")))?;
                let cf = crate::qfield::rational_to_f64(&c);
                for col in 0..=j {
                    let sub = p.entries[j][col] * cf;
                    p.entries[k][col] -= sub;
                }
            }
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "size": self.size(),
            "weights": self.weights,
            "frame_top": self.frame_top,
            "frame_bottom": self.frame_bottom,
            "entries": self.entries.iter()
                .map(|r| r.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<PeriodMatrix> {
        let weights: Vec<u32> = v
            .get("weights")
            .and_then(Value::as_array)
            .ok_or_else(|| invalid("missing weights"))?
            .iter()
            .map(|w| w.as_u64().map(|w| w as u32).ok_or_else(|| invalid("weights must be integers")))
            .collect::<Result<_>>()?;
        let rows = v.get("entries").and_then(Value::as_array).ok_or_else(|| invalid("missing entries"))?;
        if rows.len() != weights.len() {
            return Err(invalid("entries and weights disagree in size"));
        }
        let entries = rows
            .iter()
            .map(|r| {
                let r = r.as_array().filter(|r| r.len() == weights.len()).ok_or_else(|| invalid("ragged entries"))?;
                r.iter()
                    .map(|z| match z.as_array().map(Vec::as_slice) {
                        Some([a, b]) => Ok(Complex64::new(
                            a.as_f64().ok_or_else(|| invalid("bad entry"))?,
                            b.as_f64().ok_or_else(|| invalid("bad entry"))?,
                        )),
                        _ => Err(invalid("entries must be [re, im]")),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let n = weights.len();
        let get = |k: &str, d: usize| v.get(k).and_then(Value::as_u64).map_or(d, |x| x as usize);
        Ok(PeriodMatrix { entries, weights, frame_top: get("frame_top", n - 1), frame_bottom: get("frame_bottom", 0) })
    }
}

/// Equality of framed classes: same shape, equal after gauge normalization
/// within `tol`, where Kummer entries of column 0 are compared modulo Q and
/// the framed entry by its real period.
pub fn framed_equal(a: &PeriodMatrix, b: &PeriodMatrix, tol: f64, max_den: u64) -> Result<bool> {
    if a.weights != b.weights || a.frame_top != b.frame_top || a.frame_bottom != b.frame_bottom {
        return Ok(false);
    }
    let (a, b) = (a.normalize_gauge(tol, max_den)?, b.normalize_gauge(tol, max_den)?);
    let n = a.size();
    for k in 1..n {
        for j in 0..k {
            let (x, y) = (a.entries[k][j], b.entries[k][j]);
            let ok = if j == 0 && k == a.frame_top {
                true
            } else if j == 0 {
                (x.im - y.im).abs() <= tol && recognize_rational(x.re - y.re, max_den, tol).is_some()
            } else {
                (x - y).norm() <= tol * x.norm().max(1.0)
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok((a.real_period() - b.real_period()).abs() <= tol * a.real_period().abs().max(1.0))
}

/// Kummer motive of a segment `{x0, x1}` relative to the quadric
/// `{q0, q1}` in P¹: entries `1; 2ℓ, 2iπ` with
/// `ℓ = ½ log [x1 x0 | q0 q1]`.
pub fn period_matrix_h1(x0: f64, x1: f64, q0: f64, q1: f64) -> Result<PeriodMatrix> {
    let pts = [x0, x1, q0, q1];
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(invalid("points must be finite"));
    }
    if x0 == x1 || q0 == q1 || [x0, x1].iter().any(|x| *x == q0 || *x == q1) {
        return Err(invalid("points must be distinct"));
    }
    let cr = (x1 - q0) * (x0 - q1) / ((x0 - q0) * (x1 - q1));
    let l = 0.5 * Complex64::new(cr, 0.0).ln();
    Ok(PeriodMatrix::build(vec![0, 2], |_, _| 2.0 * l))
}

/// `ℓ` of a rank-one Kummer matrix.
pub fn kummer_log(pm: &PeriodMatrix, row: usize) -> Complex64 {
    pm.entries[row][0] / 2.0
}

/// Motive of a triangle with one ideal vertex `x`, given by the five
/// boundary points of its sides: rows `1; 2ℓ₀, 2iπ; 2ℓ_x, 0, 2iπ`.
/// `x` may be `+∞`; the other points must be finite.
pub fn period_matrix_h2_ideal(p: f64, q: f64, r: f64, s: f64, x: f64) -> Result<PeriodMatrix> {
    let pts = [p, q, r, s, x];
    for i in 0..5 {
        for j in (i + 1)..5 {
            if pts[i] == pts[j] {
                return Err(invalid("boundary points must be distinct"));
            }
        }
    }
    if [p, q, r, s].iter().any(|v| !v.is_finite()) || x.is_nan() || x == f64::NEG_INFINITY {
        return Err(invalid("p, q, r, s must be finite; x finite or +inf"));
    }
    let xr = if x.is_infinite() { 1.0 } else { ((x - q) / (x - r)).powi(2) };
    let lx = 0.5 * Complex64::new(xr * (p - r) * (r - s) / ((p - q) * (q - s)), 0.0).ln();
    let l0 = 0.5 * Complex64::new((p - r) * (q - s) / ((p - q) * (r - s)), 0.0).ln();
    Ok(PeriodMatrix::build(vec![0, 2, 2], |i, j| if j == 0 { 2.0 * if i == 1 { l0 } else { lx } } else { Complex64::zero() }))
}

/// Edge `L_ij` (intersection of the facets opposite vertices `i`, `j`) of a
/// tetrahedron, as its pair of vertices.
fn edge_vertices(i: usize, j: usize) -> (usize, usize) {
    let rest: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
    (rest[0], rest[1])
}

fn orient(s: &Simplex) -> Result<f64> {
    match s.sign() {
        0 => Err(Error::Degenerate("degenerate simplex".into())),
        v => Ok(f64::from(v)),
    }
}

/// The 8×8 matrix of a finite tetrahedron: rows `1`, then `2ℓ_ij` for the
/// six edges `L_ij` in lexicographic order, then
/// `i vol, 2πθ_01, ..., 2πθ_23, (2iπ)²`. A negatively oriented simplex has
/// its framed row negated off the diagonal.
pub fn period_matrix_h3(s: &Simplex) -> Result<PeriodMatrix> {
    if s.dim() != 3 || s.ambient() != 3 {
        return Err(invalid("period_matrix_h3 needs a tetrahedron in H^3"));
    }
    if s.ideal_count() > 0 {
        return Err(invalid("simplex has an ideal vertex; use period_matrix_h3_ideal"));
    }
    let sign = orient(s)?;
    let angles = facet_angles(s)?;
    let vol = vol_h3(s)?;
    let pairs = subsets(4, 2);
    let lengths: Vec<f64> = pairs
        .iter()
        .map(|ij| {
            let (a, b) = edge_vertices(ij[0], ij[1]);
            dist(&s.vertices[a], &s.vertices[b])
        })
        .collect::<Result<_>>()?;
    let mut weights = vec![0];
    weights.extend([2; 6]);
    weights.push(4);
    Ok(PeriodMatrix::build(weights, |i, j| match (i, j) {
        (7, 0) => Complex64::new(0.0, vol),
        (7, j) => Complex64::new(sign * 2.0 * PI * angles[pairs[j - 1][0]][pairs[j - 1][1]], 0.0),
        (i, 0) => Complex64::new(2.0 * lengths[i - 1], 0.0),
        _ => Complex64::zero(),
    }))
}

/// Dihedral angles at the three edges through the ideal vertex, in order of
/// the other endpoint.
pub fn ideal_edge_angles(s: &Simplex) -> Result<[f64; 3]> {
    let x = s.ideal_index().filter(|_| s.ideal_count() == 1).ok_or_else(|| invalid("need exactly one ideal vertex"))?;
    let angles = facet_angles(s)?;
    let others: Vec<usize> = (0..4).filter(|&k| k != x).collect();
    Ok([0, 1, 2].map(|t| edge_angle(&angles, x, others[t])))
}

/// Sum of the dihedral angles at the edges through the ideal vertex; the
/// angles of the Euclidean triangle cut out by a horosphere, so π.
pub fn ideal_angle_sum(s: &Simplex) -> Result<f64> {
    Ok(ideal_edge_angles(s)?.iter().sum())
}

/// Regularized lengths `log(-(v_k, x))` of the edges through the ideal
/// vertex `x`, for a horosphere normalization fixed by `x₀ = 1`. Only
/// differences are meaningful.
pub fn regularized_lengths(s: &Simplex) -> Result<[f64; 3]> {
    let x = s.ideal_index().filter(|_| s.ideal_count() == 1).ok_or_else(|| invalid("need exactly one ideal vertex"))?;
    let xv = s.vertices[x].to_hyperboloid();
    let others: Vec<usize> = (0..4).filter(|&k| k != x).collect();
    Ok([0, 1, 2].map(|t| (-minkowski(&s.vertices[others[t]].to_hyperboloid(), &xv)).ln()))
}

/// The 7×7 matrix of a tetrahedron with one ideal vertex `x`: rows `1`, the
/// three finite edges, two classes spanning the edges through `x` modulo
/// the relation `Σ e_F = 0`, and the framed row. With `ℓ'_k` the
/// regularized lengths minus their mean and `θ_k` the angles at the edges
/// through `x`, the two classes carry `2ℓ'_1, 2ℓ'_2` and angles
/// `θ_1 - θ_3, θ_2 - θ_3`.
pub fn period_matrix_h3_ideal(s: &Simplex) -> Result<PeriodMatrix> {
    if s.dim() != 3 || s.ambient() != 3 {
        return Err(invalid("period_matrix_h3_ideal needs a tetrahedron in H^3"));
    }
    let x = s.ideal_index().filter(|_| s.ideal_count() == 1).ok_or_else(|| invalid("need exactly one ideal vertex"))?;
    let sign = orient(s)?;
    let angles = facet_angles(s)?;
    let vol = vol_h3(s)?;
    let finite: Vec<(usize, usize)> = subsets(4, 2)
        .into_iter()
        .filter(|e| !e.contains(&x))
        .map(|e| (e[0], e[1]))
        .collect();
    let mut lengths = Vec::new();
    let mut thetas = Vec::new();
    for &(a, b) in &finite {
        lengths.push(dist(&s.vertices[a], &s.vertices[b])?);
        thetas.push(edge_angle(&angles, a, b));
    }
    let reg = regularized_lengths(s)?;
    let mean = reg.iter().sum::<f64>() / 3.0;
    let th = ideal_edge_angles(s)?;
    lengths.extend([reg[0] - mean, reg[1] - mean]);
    thetas.extend([th[0] - th[2], th[1] - th[2]]);
    let mut weights = vec![0];
    weights.extend([2; 5]);
    weights.push(4);
    Ok(PeriodMatrix::build(weights, |i, j| match (i, j) {
        (6, 0) => Complex64::new(0.0, vol),
        (6, j) => Complex64::new(sign * 2.0 * PI * thetas[j - 1], 0.0),
        (i, 0) => Complex64::new(2.0 * lengths[i - 1], 0.0),
        _ => Complex64::zero(),
    }))
}

/// A 2×2 framed matrix `[[1, 0], [a, 2iπ]]`.
pub type Kummer = [[Complex64; 2]; 2];

fn kummer(a: Complex64) -> Kummer {
    [[Complex64::new(1.0, 0.0), Complex64::zero()], [a, TWO_I_PI]]
}

/// The reduced coproduct of a weight-4 matrix:
/// `Σ [[1,0],[2ℓ_k, 2iπ]] ⊗ [[1,0],[iθ_k, 2iπ]]` over the weight-2 rows,
/// with `θ_k = Re(P_{top,k}) / 2π`. Rational multiples of `2iπ` in the
/// framed row (gauge artifacts) are discarded by taking the real part.
pub fn coproduct_h3(pm: &PeriodMatrix) -> Result<Vec<(Kummer, Kummer)>> {
    if pm.weights[pm.frame_top] != 4 {
        return Err(invalid("coproduct_h3 needs a weight-4 framed matrix"));
    }
    let pm = pm.normalize_gauge(1e-9, 1_000_000)?;
    Ok((1..pm.frame_top)
        .filter(|&k| pm.weights[k] == 2)
        .map(|k| {
            let theta = pm.entries[pm.frame_top][k].re / (2.0 * PI);
            (kummer(pm.entries[k][0]), kummer(Complex64::new(0.0, theta)))
        })
        .collect())
}

/// `(ℓ, θ)` pairs of a coproduct, for comparison with Dehn invariants.
pub fn coproduct_terms(pairs: &[(Kummer, Kummer)]) -> Vec<(f64, f64)> {
    pairs.iter().map(|(a, b)| (a[1][0].re / 2.0, b[1][0].im)).collect()
}

/// Dimensions of the weight-graded pieces of a simplex motive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDims {
    pub dims: Vec<(u32, u64)>,
}

impl GradedDims {
    pub fn total(&self) -> u64 {
        self.dims.iter().map(|d| d.1).sum()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.dims.iter().map(|(w, d)| json!([w, d])).collect())
    }
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Graded dimensions of the motive of an m-simplex, m = 2n - 1 odd:
/// weight `2(n-r)` has dimension `C(m+1, 2r)`, and with an ideal vertex the
/// weight-2 piece drops to `m(m+1)/2 - 1`.
pub fn graded_dims(m: u32, ideal_vertex: bool) -> Result<GradedDims> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(invalid("graded dimensions need odd m (even simplices carry no framing)"));
    }
    if ideal_vertex && m == 1 {
        return Err(invalid("a segment with an ideal endpoint has no framed motive"));
    }
    let n = m.div_ceil(2);
    let mut dims = vec![(0, 1)];
    for w in 1..n {
        let r = n - w;
        let d = if w == 1 && ideal_vertex {
            u64::from(m) * u64::from(m + 1) / 2 - 1
        } else {
            binom(u64::from(m + 1), u64::from(2 * r))
        };
        dims.push((2 * w, d));
    }
    dims.push((2 * n, 1));
    Ok(GradedDims { dims })
}

/// Coboundary matrix from the k-faces to the (k+1)-faces of the simplex on
/// `verts`, with the usual alternating signs.
fn coboundary(verts: &[usize], k: usize) -> Vec<Vec<Rational>> {
    let lower = subsets(verts.len(), k + 1);
    let upper = subsets(verts.len(), k + 2);
    upper
        .iter()
        .map(|u| {
            lower
                .iter()
                .map(|l| match u.iter().position(|v| !l.contains(v)) {
                    Some(pos) if l.iter().all(|v| u.contains(v)) => int(if pos % 2 == 0 { 1 } else { -1 }),
                    _ => int(0),
                })
                .collect()
        })
        .collect()
}

/// Graded dimensions computed from the face complexes: weight 0 is the
/// kernel of the vertex-to-edge coboundary of the simplex, each odd
/// `d`-dimensional face contributes weight `d + 1` (edges through the ideal
/// vertex contribute nothing), and an ideal vertex adds the augmentation
/// kernel of the vertex figure, realized as the image of its edge boundary.
pub fn graded_dims_from_complex(m: u32, ideal_vertex: bool) -> Result<GradedDims> {
    if m == 0 || m.is_multiple_of(2) || (ideal_vertex && m == 1) {
        return Err(invalid("need odd m (and m >= 3 with an ideal vertex)"));
    }
    let m = m as usize;
    let verts: Vec<usize> = (0..=m).collect();
    let d0 = coboundary(&verts, 0);
    let w0 = (m + 1) - linalg::rank_rational(&d0);
    let mut by_weight = std::collections::BTreeMap::new();
    by_weight.insert(0u32, w0 as u64);
    let x = 0;
    for size in (2..=m + 1).step_by(2) {
        for face in subsets(m + 1, size) {
            if ideal_vertex && size == 2 && face.contains(&x) {
                continue;
            }
            *by_weight.entry(size as u32).or_insert(0) += 1;
        }
    }
    if ideal_vertex {
        let figure: Vec<usize> = (1..=m).collect();
        // Boundary of edges of the vertex figure into its vertices.
        let d = coboundary(&figure, 0);
        let transpose: Vec<Vec<Rational>> =
            (0..figure.len()).map(|i| d.iter().map(|row| row[i].clone()).collect()).collect();
        let image = linalg::rank_rational(&transpose);
        let augmentation = vec![vec![int(1); figure.len()]];
        let kernel = figure.len() - linalg::rank_rational(&augmentation);
        if image != kernel {
            return Err(Error::Numeric("vertex-figure section is not injective".into()));
        }
        *by_weight.entry(2).or_insert(0) += kernel as u64;
    }
    Ok(GradedDims { dims: by_weight.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypmodel::HPoint;
    use crate::scissors::dehn3;
    use crate::simplex::boundary_point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tetra(rng: &mut ChaCha8Rng) -> Simplex {
        loop {
            let v: Vec<Vec<f64>> = (0..4)
                .map(|_| loop {
                    let y: Vec<f64> = (0..3).map(|_| rng.random_range(-0.8..0.8)).collect();
                    if y.iter().map(|x| x * x).sum::<f64>() < 0.64 {
                        break y;
                    }
                })
                .collect();
            let s = Simplex::from_klein(v).unwrap();
            if s.det().abs() > 1e-3 {
                return if s.sign() > 0 { s } else { s.negated() };
            }
        }
    }

    fn random_ideal_tetra(rng: &mut ChaCha8Rng) -> Simplex {
        loop {
            let dir: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 0.1 {
                continue;
            }
            let mut verts = vec![HPoint::klein_ideal(dir.iter().map(|x| x / norm).collect())];
            for _ in 0..3 {
                let y: Vec<f64> = (0..3).map(|_| rng.random_range(-0.6..0.6)).collect();
                verts.push(HPoint::klein(y));
            }
            let s = Simplex::new(verts, 1).unwrap();
            if s.det().abs() > 1e-3 {
                return s;
            }
        }
    }

    fn random_unipotent(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Rational>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => Rational::new(rng.random_range(-5i64..=5).into(), rng.random_range(1i64..=4).into()),
                        std::cmp::Ordering::Equal => int(1),
                        std::cmp::Ordering::Greater => int(0),
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn h1_segment() {
        let pm = period_matrix_h1(-0.6, 0.6, -1.0, 1.0).unwrap();
        let l = kummer_log(&pm, 1);
        assert!((l.re - 4.0f64.ln()).abs() < 1e-14);
        let d = dist(&HPoint::klein(vec![-0.6]), &HPoint::klein(vec![0.6])).unwrap();
        assert!((l.re - d).abs() < 1e-12);
        assert_eq!(pm.entries[1][1], TWO_I_PI);
        let swapped = period_matrix_h1(0.6, -0.6, -1.0, 1.0).unwrap();
        assert!((kummer_log(&swapped, 1).re + l.re).abs() < 1e-14);
        let qswap = period_matrix_h1(-0.6, 0.6, 1.0, -1.0).unwrap();
        assert!((kummer_log(&qswap, 1).re + l.re).abs() < 1e-14);
        assert!(period_matrix_h1(0.5, 0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn h2_ideal_triangle() {
        let (t1, t2) = (0.2, 0.65);
        let pm = period_matrix_h2_ideal(0.0, t1, t2, 1.0, f64::INFINITY).unwrap();
        let lx = kummer_log(&pm, 2).re;
        let l0 = kummer_log(&pm, 1).re;
        assert!((2.0 * lx - (t2 * (1.0 - t2) / (t1 * (1.0 - t1))).ln()).abs() < 1e-14);
        assert!((2.0 * l0 - (t2 * (1.0 - t1) / (t1 * (1.0 - t2))).ln()).abs() < 1e-14);
        // ℓ₀ is the length of the side on the semicircle over [0, 1].
        let (y1, y2) = ((t1 * (1.0 - t1)).sqrt(), (t2 * (1.0 - t2)).sqrt());
        let d = (1.0 + ((t2 - t1).powi(2) + (y2 - y1).powi(2)) / (2.0 * y1 * y2)).acosh();
        assert!((l0 - d).abs() < 1e-12);
        // Truncated vertical sides up to a horocycle at height R.
        let truncated = |y: f64, r: f64| {
            let n = 20_000;
            let h = (r - y) / n as f64;
            let f = |t: f64| 1.0 / t;
            let mut acc = f(y) + f(r);
            for k in 1..n {
                acc += f(y + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        for r in [3.0, 10.0] {
            let diff = truncated(y1, r) - truncated(y2, r);
            assert!((diff - lx).abs() < 1e-10, "R = {r}: {diff} vs {lx}");
        }
        let sym = period_matrix_h2_ideal(0.0, 0.3, 0.7, 1.0, f64::INFINITY).unwrap();
        assert!(kummer_log(&sym, 2).re.abs() < 1e-14);
        // Projective invariance: move x to a finite point.
        let g = |z: f64| 1.0 / (z + 2.0);
        let moved = period_matrix_h2_ideal(g(0.0), g(t1), g(t2), g(1.0), 0.0).unwrap();
        assert!((kummer_log(&moved, 2).re - lx).abs() < 1e-12);
        assert!((kummer_log(&moved, 1).re - l0).abs() < 1e-12);
        assert!(period_matrix_h2_ideal(0.0, 0.0, 0.5, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn h3_structure_and_real_period() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let s = random_tetra(&mut rng);
            let pm = period_matrix_h3(&s).unwrap();
            assert_eq!(pm.size(), 8);
            for (k, w) in pm.weights.iter().enumerate() {
                assert_eq!(pm.entries[k][k], diag(*w));
            }
            for k in 2..7 {
                for j in 1..k {
                    assert_eq!(pm.entries[k][j], Complex64::zero());
                }
            }
            let vol = vol_h3(&s).unwrap();
            assert!((pm.real_period() - vol / (2.0 * PI).powi(2)).abs() < 1e-8);
            let neg = period_matrix_h3(&s.negated()).unwrap();
            assert!((neg.real_period() + pm.real_period()).abs() < 1e-12);
        }
    }

    #[test]
    fn coproduct_matches_dehn() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_tetra(&mut rng);
            let mut a = coproduct_terms(&coproduct_h3(&period_matrix_h3(&s).unwrap()).unwrap());
            let mut b = dehn3(&s).unwrap().terms;
            a.sort_by(|x, y| x.0.total_cmp(&y.0));
            b.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (x, y) in a.iter().zip(&b) {
                assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9);
            }
        }
        let a = 0.3;
        let reg = Simplex::from_klein(vec![vec![a, a, a], vec![a, -a, -a], vec![-a, a, -a], vec![-a, -a, a]]).unwrap();
        let reg = if reg.sign() > 0 { reg } else { reg.negated() };
        let t = coproduct_terms(&coproduct_h3(&period_matrix_h3(&reg).unwrap()).unwrap());
        assert!(t.iter().all(|x| (x.1 - t[0].1).abs() < 1e-12));
    }

    #[test]
    fn gauge_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let s = random_tetra(&mut rng);
            let pm = period_matrix_h3(&s).unwrap();
            let g = pm.left_mul(&random_unipotent(8, &mut rng)).unwrap();
            assert!((g.real_period() - pm.real_period()).abs() < 1e-12);
            assert!(framed_equal(&pm, &g, 1e-9, 1000).unwrap());
            let a = coproduct_terms(&coproduct_h3(&pm).unwrap());
            let b = coproduct_terms(&coproduct_h3(&g).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x.1 - y.1).abs() < 1e-9);
                assert!(recognize_rational(2.0 * (x.0 - y.0), 1000, 1e-9).is_some());
            }
            let other = period_matrix_h3(&random_tetra(&mut rng)).unwrap();
            assert!(!framed_equal(&pm, &other, 1e-9, 1000).unwrap());
        }
    }

    #[test]
    fn subdivision_on_realizations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let s = random_tetra(&mut rng);
            let y: Vec<f64> = (0..3).map(|k| (0..4).map(|i| s.klein(i)[k]).sum::<f64>() / 4.0).collect();
            let pieces = s.subdivide(&HPoint::klein(y)).unwrap();
            let whole = period_matrix_h3(&s).unwrap();
            let mut vol = 0.0;
            let mut terms = crate::scissors::DehnSum::default();
            for p in &pieces {
                let pm = period_matrix_h3(p).unwrap();
                vol += pm.real_period();
                terms.terms.extend(coproduct_terms(&coproduct_h3(&pm).unwrap()));
            }
            assert!((vol - whole.real_period()).abs() < 1e-10);
            let diff = crate::scissors::DehnSum::new(coproduct_terms(&coproduct_h3(&whole).unwrap())).minus(&terms);
            assert!(crate::scissors::is_zero_dehn(&diff, 1e-8, 10_000));
        }
    }

    #[test]
    fn ideal_vertex_variant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_ideal_tetra(&mut rng);
            assert!((ideal_angle_sum(&s).unwrap() - PI).abs() < 1e-9);
            let pm = period_matrix_h3_ideal(&s).unwrap();
            assert_eq!(pm.size(), 7);
            assert!((pm.real_period() - vol_h3(&s).unwrap() / (2.0 * PI).powi(2)).abs() < 1e-8);
        }
        let reg = crate::volume::regular_ideal_tetrahedron();
        assert!(period_matrix_h3_ideal(&reg).is_err());
        let one = Simplex::new(
            vec![boundary_point(None), HPoint::klein(vec![0.1, 0.0, 0.0]), HPoint::klein(vec![0.0, 0.2, 0.0]), HPoint::klein(vec![0.0, 0.0, 0.3])],
            1,
        )
        .unwrap();
        assert!(period_matrix_h3(&one).is_err());
    }

    #[test]
    fn regularized_lengths_are_horosphere_independent() {
        // Truncating at a different horosphere shifts every regularized
        // length by the same amount; differences are unchanged under
        // isometries fixing the ideal vertex.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = random_ideal_tetra(&mut rng);
        let r = regularized_lengths(&s).unwrap();
        let x = s.ideal_index().unwrap();
        let others: Vec<usize> = (0..4).filter(|&k| k != x).collect();
        // Moving a finite vertex along its edge towards x by t shortens that
        // regularized length by t.
        let v = s.vertices[others[0]].to_hyperboloid();
        let xv = s.vertices[x].to_hyperboloid();
        let t = 0.7f64;
        let c = -minkowski(&v, &xv);
        let moved: Vec<f64> = v.iter().zip(&xv).map(|(a, b)| a * (-t).exp() + b * (t.sinh() / c)).collect();
        assert!((minkowski(&moved, &moved) + 1.0).abs() < 1e-9);
        let y: Vec<f64> = moved[1..].iter().map(|c| c / moved[0]).collect();
        let mut verts = s.vertices.clone();
        verts[others[0]] = HPoint::klein(y);
        let s2 = Simplex::new(verts, s.orientation).unwrap();
        let r2 = regularized_lengths(&s2).unwrap();
        assert!((r[0] - r2[0] - t).abs() < 1e-9);
        assert!((r[1] - r2[1]).abs() < 1e-12);
    }

    #[test]
    fn graded_dimensions() {
        assert_eq!(graded_dims(3, false).unwrap().dims, vec![(0, 1), (2, 6), (4, 1)]);
        assert_eq!(graded_dims(3, true).unwrap().dims, vec![(0, 1), (2, 5), (4, 1)]);
        assert_eq!(graded_dims(5, false).unwrap().dims, vec![(0, 1), (2, 15), (4, 15), (6, 1)]);
        assert_eq!(graded_dims(1, false).unwrap().dims, vec![(0, 1), (2, 1)]);
        assert!(graded_dims(4, false).is_err());
        assert!(graded_dims(1, true).is_err());
        for m in [1u32, 3, 5, 7, 9] {
            for ideal in [false, true] {
                if ideal && m == 1 {
                    continue;
                }
                assert_eq!(graded_dims(m, ideal).unwrap(), graded_dims_from_complex(m, ideal).unwrap(), "m={m} {ideal}");
            }
            let g = graded_dims(m, false).unwrap();
            let n = u64::from(m.div_ceil(2));
            let expect = 2 + (1..n).map(|r| binom(u64::from(m) + 1, 2 * r)).sum::<u64>();
            assert_eq!(g.total(), expect);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pm = period_matrix_h3(&random_tetra(&mut rng)).unwrap();
        assert_eq!(PeriodMatrix::from_json(&pm.to_json()).unwrap(), pm);
        assert!(PeriodMatrix::from_json(&json!({"weights": [0, 2], "entries": [[[1, 0]]]})).is_err());
    }
}
