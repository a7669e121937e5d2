//! Geodesic simplices, product simplices and the twisted symmetric-group
//! action.
//!
//! Vertices are stored in the Klein model, where a geodesic simplex is the
//! Euclidean convex hull of its vertices. The signed volume of a simplex is
//! `orientation * sign(det) * |vol|`, where `det` is the determinant of the
//! homogeneous vertex matrix with rows `(1, y_i)`.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::hypmodel::{HPoint, Model};
use crate::linalg;
use crate::qfield::{Place, QuadElem};

/// Relative size of the homogeneous determinant below which a top-dimensional
/// simplex counts as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<HPoint>,
    /// Exact Klein coordinates, when the simplex is defined over a field.
    pub exact: Option<Vec<Vec<QuadElem>>>,
    pub orientation: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductSimplex {
    pub factors: Vec<Simplex>,
}

impl Simplex {
    /// Builds a simplex, converting vertices to the Klein model.
    ///
    /// At most one vertex may be ideal, except for all-ideal triangles and
    /// tetrahedra.
    pub fn new(vertices: Vec<HPoint>, orientation: i8) -> Result<Simplex> {
        if orientation != 1 && orientation != -1 {
            return Err(invalid("orientation must be +1 or -1"));
        }
        let Some(first) = vertices.first() else {
            return Err(invalid("simplex needs at least one vertex"));
        };
        let n = first.dim();
        for v in &vertices {
            v.validate()?;
            if v.dim() != n {
                return Err(invalid("vertices live in different dimensions"));
            }
        }
        let m = vertices.len() - 1;
        if m > n {
            return Err(invalid(format!("{} vertices do not span a simplex in H^{n}", m + 1)));
        }
        let ideal = vertices.iter().filter(|v| v.ideal).count();
        let all_ideal_ok = ideal == m + 1 && (m == 2 || m == 3);
        if ideal > 1 && !all_ideal_ok {
            return Err(Error::Unsupported(format!("{ideal} ideal vertices (at most one allowed)")));
        }
        let vertices = vertices
            .into_iter()
            .map(|v| {
                let c = v.convert(Model::Klein);
                HPoint { model: Model::Klein, coords: c.coords, ideal: v.ideal }
            })
            .collect();
        Ok(Simplex { vertices, exact: None, orientation })
    }

    /// Convenience constructor from Klein coordinates.
    pub fn from_klein(coords: Vec<Vec<f64>>) -> Result<Simplex> {
        Simplex::new(coords.into_iter().map(HPoint::klein).collect(), 1)
    }

    /// A simplex with exact Klein coordinates over a common field.
    pub fn from_exact(coords: Vec<Vec<QuadElem>>, orientation: i8) -> Result<Simplex> {
        let d = coords.first().and_then(|c| c.first()).map(QuadElem::d).unwrap_or(1);
        if coords.iter().flatten().any(|x| x.d() != d) {
            return Err(Error::MixedField(d, coords.iter().flatten().find(|x| x.d() != d).unwrap().d()));
        }
        let vertices: Vec<HPoint> = coords
            .iter()
            .map(|c| {
                let mut norm = QuadElem::one(d);
                for x in c {
                    norm = &norm - &(x * x);
                }
                let y = c.iter().map(|x| x.embed(Place::One)).collect();
                HPoint { model: Model::Klein, coords: y, ideal: norm.is_zero() }
            })
            .collect();
        let mut s = Simplex::new(vertices, orientation)?;
        s.exact = Some(coords);
        Ok(s)
    }

    /// Simplex dimension m.
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Ambient dimension n.
    pub fn ambient(&self) -> usize {
        self.vertices[0].coords.len()
    }

    pub fn klein(&self, i: usize) -> &[f64] {
        &self.vertices[i].coords
    }

    pub fn ideal_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.ideal).count()
    }

    pub fn ideal_index(&self) -> Option<usize> {
        self.vertices.iter().position(|v| v.ideal)
    }

    /// Homogeneous matrix with rows `(1, y_i)`.
    pub fn homogeneous(&self) -> linalg::Matrix {
        self.vertices.iter().map(|v| std::iter::once(1.0).chain(v.coords.iter().copied()).collect()).collect()
    }

    /// Determinant of the homogeneous vertex matrix (top-dimensional only).
    pub fn det(&self) -> f64 {
        if self.dim() != self.ambient() {
            return 0.0;
        }
        linalg::det(&self.homogeneous())
    }

    /// Exact sign of the homogeneous determinant, when exact coordinates are
    /// available.
    pub fn exact_det_sign(&self) -> Option<i8> {
        let ex = self.exact.as_ref()?;
        if self.dim() != self.ambient() {
            return Some(0);
        }
        let d = ex[0].first().map_or(1, QuadElem::d);
        let rows: Vec<Vec<QuadElem>> =
            ex.iter().map(|c| std::iter::once(QuadElem::one(d)).chain(c.iter().cloned()).collect()).collect();
        linalg::det_exact(&rows).ok().map(|x| x.sign(Place::One))
    }

    /// Affinely dependent vertices. Decided exactly when possible.
    pub fn is_degenerate(&self) -> bool {
        if let Some(ex) = &self.exact {
            let d = ex[0].first().map_or(1, QuadElem::d);
            let rows: Vec<Vec<QuadElem>> =
                ex.iter().map(|c| std::iter::once(QuadElem::one(d)).chain(c.iter().cloned()).collect()).collect();
            return linalg::rank_exact(&rows).map_or(true, |r| r < self.dim() + 1);
        }
        linalg::rank(&self.homogeneous(), DEGENERATE_TOL) < self.dim() + 1
    }

    /// `orientation * sign(det)`, or 0 when degenerate. Only meaningful for
    /// top-dimensional simplices.
    pub fn sign(&self) -> i8 {
        if self.is_degenerate() {
            return 0;
        }
        let s = self.exact_det_sign().unwrap_or_else(|| if self.det() > 0.0 { 1 } else { -1 });
        self.orientation * s
    }

    pub fn negated(&self) -> Simplex {
        Simplex { orientation: -self.orientation, ..self.clone() }
    }

    /// Replaces vertex `i` by `y`, keeping the orientation.
    fn with_vertex(&self, i: usize, y: &HPoint, exact_y: Option<&[QuadElem]>) -> Simplex {
        let mut s = self.clone();
        s.vertices[i] = y.clone();
        s.exact = match (&self.exact, exact_y) {
            (Some(ex), Some(ey)) => {
                let mut ex = ex.clone();
                ex[i] = ey.to_vec();
                Some(ex)
            }
            _ => None,
        };
        s
    }

    /// The m + 1 simplices obtained by replacing each vertex in turn by `y`.
    ///
    /// As chains they sum to the original simplex, so signed volumes add up
    /// for any finite `y`, inside or not. Pieces may be degenerate.
    pub fn subdivide(&self, y: &HPoint) -> Result<Vec<Simplex>> {
        if y.ideal {
            return Err(invalid("subdivision point must be finite"));
        }
        let y = y.convert(Model::Klein);
        if y.coords.len() != self.ambient() {
            return Err(invalid("subdivision point has the wrong dimension"));
        }
        Ok((0..=self.dim()).map(|i| self.with_vertex(i, &y, None)).collect())
    }

    /// Exact variant of [`Simplex::subdivide`].
    pub fn subdivide_exact(&self, y: &[QuadElem]) -> Result<Vec<Simplex>> {
        let d = y.first().map_or(1, QuadElem::d);
        let mut norm = QuadElem::one(d);
        for x in y {
            norm = norm.checked_sub(&x.checked_mul(x)?)?;
        }
        if norm.sign(Place::One) <= 0 {
            return Err(invalid("subdivision point must be finite"));
        }
        let p = HPoint::klein(y.iter().map(|x| x.embed(Place::One)).collect());
        Ok((0..=self.dim()).map(|i| self.with_vertex(i, &p, Some(y))).collect())
    }

    /// All k-dimensional faces, in lexicographic order of vertex subsets.
    ///
    /// The induced orientation is the sign of the permutation listing the
    /// omitted vertices first, so codimension-one faces carry the boundary
    /// signs `(-1)^i`.
    pub fn faces(&self, k: usize) -> Result<Vec<Simplex>> {
        let m = self.dim();
        if k > m {
            return Err(invalid(format!("face dimension {k} exceeds simplex dimension {m}")));
        }
        Ok(subsets(m + 1, k + 1)
            .into_iter()
            .map(|sub| {
                let mut perm: Vec<usize> = (0..=m).filter(|i| !sub.contains(i)).collect();
                perm.extend(&sub);
                let vertices = sub.iter().map(|&i| self.vertices[i].clone()).collect();
                let exact =
                    self.exact.as_ref().map(|ex| sub.iter().map(|&i| ex[i].clone()).collect());
                Simplex { vertices, exact, orientation: self.orientation * permutation_sign(&perm) }
            })
            .collect())
    }

    /// Galois conjugate of an exactly defined simplex. The float coordinates
    /// are the second embedding of the original ones.
    pub fn conj(&self) -> Result<Simplex> {
        let ex = self.exact.as_ref().ok_or_else(|| invalid("conjugation needs exact coordinates"))?;
        let ex: Vec<Vec<QuadElem>> = ex.iter().map(|c| c.iter().map(QuadElem::conj).collect()).collect();
        let vertices = ex
            .iter()
            .zip(&self.vertices)
            .map(|(c, v)| HPoint {
                model: Model::Klein,
                coords: c.iter().map(|x| x.embed(Place::One)).collect(),
                ideal: v.ideal,
            })
            .collect();
        Ok(Simplex { vertices, exact: Some(ex), orientation: self.orientation })
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "dim": self.dim(),
            "vertices": self.vertices.iter().map(HPoint::to_json).collect::<Vec<_>>(),
            "orientation": self.orientation,
        });
        if let Some(ex) = &self.exact {
            let d = ex[0].first().map_or(1, QuadElem::d);
            v["exact"] = json!({
                "d": d,
                "coords": ex.iter().map(|c| c.iter().map(QuadElem::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Simplex> {
        let orientation = match v.get("orientation") {
            None => 1,
            Some(o) => o.as_i64().ok_or_else(|| invalid("orientation must be an integer"))? as i8,
        };
        let s = if let Some(ex) = v.get("exact") {
            let d = ex.get("d").and_then(Value::as_u64).ok_or_else(|| invalid("exact block needs `d`"))?;
            let rows = ex
                .get("coords")
                .and_then(Value::as_array)
                .ok_or_else(|| invalid("exact block needs `coords`"))?;
            let coords = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| invalid("exact vertex must be an array"))?
                        .iter()
                        .map(|x| QuadElem::from_json(x, d))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Simplex::from_exact(coords, orientation)?
        } else {
            let verts = v
                .get("vertices")
                .and_then(Value::as_array)
                .ok_or_else(|| invalid("simplex needs a `vertices` array"))?;
            let pts = verts.iter().map(HPoint::from_json).collect::<Result<Vec<_>>>()?;
            Simplex::new(pts, orientation)?
        };
        if let Some(dim) = v.get("dim").and_then(Value::as_u64) {
            if dim as usize != s.dim() {
                return Err(invalid(format!("`dim` is {dim} but {} vertices were given", s.vertices.len())));
            }
        }
        Ok(s)
    }
}

impl ProductSimplex {
    pub fn new(factors: Vec<Simplex>) -> ProductSimplex {
        ProductSimplex { factors }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.factors.iter().map(Simplex::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<ProductSimplex> {
        let arr = v.as_array().ok_or_else(|| invalid("product simplex must be an array"))?;
        Ok(ProductSimplex { factors: arr.iter().map(Simplex::from_json).collect::<Result<_>>()? })
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Sign of a permutation given as the image list.
pub fn permutation_sign(p: &[usize]) -> i8 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1i8;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

/// Twisted action of a permutation on a product simplex over a real
/// quadratic field.
///
/// Factor `i` of a product over `(σ1(k), ..., σN(k))` lives in the `i`-th
/// embedding. Output factor `i` is `σ_i σ_{π(i)}^{-1}` applied to input factor
/// `π(i)`; with two embeddings this is the identity when `π(i) = i` and
/// Galois conjugation otherwise.
pub fn twist(perm: &[usize], p: &ProductSimplex) -> Result<ProductSimplex> {
    let n = p.factors.len();
    if perm.len() != n || !is_permutation(perm) {
        return Err(invalid("not a permutation of the factors"));
    }
    if n > 2 {
        return Err(Error::Unsupported("twisted action with more than two factors".into()));
    }
    let mut field = None;
    for f in &p.factors {
        let ex = f.exact.as_ref().ok_or_else(|| invalid("twist needs exactly defined factors"))?;
        let d = ex[0].first().map_or(1, QuadElem::d);
        if *field.get_or_insert(d) != d {
            return Err(Error::MixedField(field.unwrap(), d));
        }
    }
    let dim = p.factors[0].dim();
    if p.factors.iter().any(|f| f.dim() != dim) {
        return Err(invalid("factors of different dimensions"));
    }
    let factors = (0..n)
        .map(|i| {
            let src = &p.factors[perm[i]];
            if perm[i] == i {
                Ok(src.clone())
            } else {
                src.conj()
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductSimplex { factors })
}

/// Stereographic projection of the unit sphere in R³ from the north pole,
/// as homogeneous coordinates on P¹(C).
fn stereographic(y: &[f64]) -> (Complex64, Complex64) {
    let den = 1.0 - y[2];
    if den.abs() < 1e-14 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    (Complex64::new(y[0], y[1]), Complex64::new(den, 0.0))
}

fn pdet(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> Complex64 {
    a.0 * b.1 - a.1 * b.0
}

/// Shape parameter of an all-ideal tetrahedron in H³.
///
/// The vertices are projected to C ∪ {∞}, and the Möbius map sending
/// `v0, v1, v2` to `0, 1, ∞` sends `v3` to `z`. Orientation-preserving
/// isometries leave `z` unchanged. The canonical representative has
/// `Im z >= 0`: when `Im z < 0`, `1/z` (the parameter of the mirrored
/// labelling) is returned instead.
pub fn cross_ratio_parameter(s: &Simplex) -> Result<Complex64> {
    if s.ambient() != 3 || s.dim() != 3 || s.ideal_count() != 4 {
        return Err(invalid("cross ratio needs four ideal vertices in H^3"));
    }
    let w: Vec<_> = s.vertices.iter().map(|v| stereographic(&v.coords)).collect();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (a, b) = (w[i], w[j]);
            let na = a.0.norm() + a.1.norm();
            let nb = b.0.norm() + b.1.norm();
            if pdet(a, b).norm() <= 1e-12 * na * nb {
                return Err(Error::Degenerate("coincident ideal vertices".into()));
            }
        }
    }
    let z = (pdet(w[3], w[0]) * pdet(w[1], w[2])) / (pdet(w[3], w[2]) * pdet(w[1], w[0]));
    Ok(if z.im < 0.0 { z.inv() } else { z })
}

/// Raw shape parameter without canonicalization.
pub fn cross_ratio_raw(points: &[Complex64; 4]) -> Complex64 {
    let [z0, z1, z2, w] = *points;
    (w - z0) * (z1 - z2) / ((w - z2) * (z1 - z0))
}

/// Klein coordinates of a boundary point of upper half-space H³ given by
/// `w ∈ C`, or the designated ideal point when `w` is `None` (infinity).
pub fn boundary_point(w: Option<Complex64>) -> HPoint {
    match w {
        None => HPoint::infinity(3).convert(Model::Klein),
        Some(w) => HPoint::upper_half(vec![w.re, w.im, 0.0]).convert(Model::Klein),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypmodel::{dist, Isometry};
    use crate::qfield::rat;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn q(n: i64, d: i64) -> QuadElem {
        QuadElem::from_rational(rat(n, d), 5).unwrap()
    }

    #[test]
    fn segment_subdivision() {
        let s = Simplex::from_klein(vec![vec![-0.5], vec![0.7]]).unwrap();
        let pieces = s.subdivide(&HPoint::klein(vec![0.2])).unwrap();
        assert_eq!(pieces.len(), 2);
        let len = |t: &Simplex| f64::from(t.sign()) * dist(&t.vertices[0], &t.vertices[1]).unwrap();
        let total: f64 = pieces.iter().map(len).sum();
        assert!((total - len(&s)).abs() < 1e-14);
        assert!(s.subdivide(&HPoint::klein_ideal(vec![1.0])).is_err());
    }

    #[test]
    fn triangle_subdivision_signs() {
        let s = Simplex::from_klein(vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(s.sign(), 1);
        let pieces = s.subdivide(&HPoint::klein(vec![0.1, 0.1])).unwrap();
        assert!(pieces.iter().all(|p| p.sign() == 1));
        let edge = s.subdivide(&HPoint::klein(vec![0.25, 0.0])).unwrap();
        assert_eq!(edge.iter().filter(|p| p.is_degenerate()).count(), 1);
    }

    #[test]
    fn exact_degeneracy_and_subdivision() {
        let s = Simplex::from_exact(
            vec![vec![q(0, 1), q(0, 1)], vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]],
            1,
        )
        .unwrap();
        let pieces = s.subdivide_exact(&[q(1, 4), q(0, 1)]).unwrap();
        assert_eq!(pieces.iter().map(|p| p.sign()).collect::<Vec<_>>(), vec![1, 1, 0]);
        assert!(s.subdivide_exact(&[q(1, 1), q(0, 1)]).is_err());
    }

    #[test]
    fn face_counts_and_signs() {
        let s = Simplex::from_klein(vec![
            vec![0.0, 0.0, 0.0],
            vec![0.3, 0.0, 0.0],
            vec![0.0, 0.3, 0.0],
            vec![0.0, 0.0, 0.3],
        ])
        .unwrap();
        assert_eq!(s.faces(1).unwrap().len(), 6);
        let tri = s.faces(2).unwrap();
        // Lexicographic subsets omit vertices 3, 2, 1, 0 in turn.
        assert_eq!(tri.iter().map(|f| f.orientation).collect::<Vec<_>>(), vec![-1, 1, -1, 1]);
        assert_eq!(s.faces(3).unwrap(), vec![s.clone()]);
        assert!(s.faces(4).is_err());
        for m in 0..6 {
            for k in 0..=m {
                let n = subsets(m + 1, k + 1).len();
                let binom = (0..=k).fold(1usize, |acc, i| acc * (m + 1 - i) / (i + 1));
                assert_eq!(n, binom);
            }
        }
    }

    fn exact_triangle(a: (i64, i64), b: (i64, i64)) -> Simplex {
        let e = |x: i64, y: i64| QuadElem::new(rat(x, 10), rat(y, 10), 5).unwrap();
        Simplex::from_exact(
            vec![vec![e(0, 0), e(0, 0)], vec![e(a.0, a.1), e(0, 0)], vec![e(0, 0), e(b.0, b.1)]],
            1,
        )
        .unwrap()
    }

    #[test]
    fn twist_examples() {
        let d = exact_triangle((1, 1), (2, -1));
        let p = ProductSimplex::new(vec![d.clone(), d.conj().unwrap()]);
        assert_eq!(twist(&[0, 1], &p).unwrap(), p);
        assert_eq!(twist(&[1, 0], &p).unwrap(), p);
        let r = ProductSimplex::new(vec![d.clone(), exact_triangle((3, 0), (1, 1))]);
        assert_eq!(twist(&[1, 0], &twist(&[1, 0], &r).unwrap()).unwrap(), r);
        let bad = ProductSimplex::new(vec![d, Simplex::from_klein(vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.0, 0.1]]).unwrap()]);
        assert!(twist(&[1, 0], &bad).is_err());
    }

    #[test]
    fn cross_ratio_examples() {
        let i = Complex64::new(0.0, 1.0);
        let s = Simplex::new(
            vec![
                boundary_point(Some(Complex64::new(0.0, 0.0))),
                boundary_point(Some(Complex64::new(1.0, 0.0))),
                boundary_point(None),
                boundary_point(Some(i)),
            ],
            1,
        )
        .unwrap();
        let z = cross_ratio_parameter(&s).unwrap();
        assert!((z - i).norm() < 1e-12, "{z}");
        let w = Complex64::from_polar(1.0, PI / 3.0);
        let s = Simplex::new(
            vec![
                boundary_point(Some(Complex64::new(0.0, 0.0))),
                boundary_point(Some(Complex64::new(1.0, 0.0))),
                boundary_point(None),
                boundary_point(Some(w)),
            ],
            1,
        )
        .unwrap();
        assert!((cross_ratio_parameter(&s).unwrap() - w).norm() < 1e-12);
    }

    #[test]
    fn cross_ratio_under_mobius_and_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.3, 0.8),
            Complex64::new(-0.4, 1.7),
        ];
        let z0 = cross_ratio_raw(&base);
        for _ in 0..50 {
            let c = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (a, b, cc, d) = (c(&mut rng), c(&mut rng), c(&mut rng), c(&mut rng));
            if (a * d - b * cc).norm() < 0.1 {
                continue;
            }
            let img = base.map(|w| (a * w + b) / (cc * w + d));
            assert!((cross_ratio_raw(&img) - z0).norm() < 1e-9);
            let s = Simplex::new(img.iter().map(|w| boundary_point(Some(*w))).collect(), 1).unwrap();
            let z = cross_ratio_parameter(&s).unwrap();
            let orbit = [z0, 1.0 / (1.0 - z0), 1.0 - 1.0 / z0, 1.0 / z0, 1.0 - z0, z0 / (z0 - 1.0)];
            assert!(orbit.iter().any(|o| (o - z).norm() < 1e-8));
            let g = Isometry::random(3, 0.8, &mut rng);
            let moved = Simplex::new(s.vertices.iter().map(|v| g.apply(v)).collect(), 1).unwrap();
            assert!((cross_ratio_parameter(&moved).unwrap() - z).norm() < 1e-8);
        }
    }

    #[test]
    fn coincident_vertices_rejected() {
        let p = boundary_point(Some(Complex64::new(0.5, 0.5)));
        let s = Simplex::new(vec![p.clone(), p, boundary_point(None), boundary_point(Some(Complex64::new(1.0, 0.0)))], 1)
            .unwrap();
        assert!(cross_ratio_parameter(&s).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = exact_triangle((1, 1), (2, -1));
        let back = Simplex::from_json(&s.to_json()).unwrap();
        assert_eq!(back.exact, s.exact);
        let f = Simplex::from_klein(vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap().negated();
        assert_eq!(Simplex::from_json(&f.to_json()).unwrap(), f);
    }

    fn perm_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn twist_is_an_action(p in perm_strategy(2), r in perm_strategy(2), a in 0i64..4, b in -3i64..3) {
            let ps = ProductSimplex::new(vec![exact_triangle((a + 1, b), (2, 1)), exact_triangle((3, -b), (1, a))]);
            let lhs = twist(&p, &twist(&r, &ps).unwrap()).unwrap();
            let rp: Vec<usize> = (0..2).map(|i| r[p[i]]).collect();
            prop_assert_eq!(lhs, twist(&rp, &ps).unwrap());
        }

        #[test]
        fn faces_count(m in 1usize..6, k in 0usize..6) {
            prop_assume!(k <= m);
            let mut v = vec![vec![0.0; m]];
            for i in 0..m {
                let mut e = vec![0.0; m];
                e[i] = 0.2;
                v.push(e);
            }
            let s = Simplex::from_klein(v).unwrap();
            let binom = (0..=k).fold(1usize, |acc, i| acc * (m + 1 - i) / (i + 1));
            prop_assert_eq!(s.faces(k).unwrap().len(), binom);
        }
    }
}
