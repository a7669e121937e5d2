//! Excision of overlapping product polytopes, assembly of tilings from
//! product simplices, and sampling checks that a tiling is proper.
//!
//! Polytopes are kept exactly over Q in both halfspace and vertex form.
//! Hyperbolic factors live in the Klein chart, where geodesic polytopes are
//! Euclidean convex polytopes; only their volumes differ.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::{det_rational, kernel_rational, rank_rational, solve_rational};
use crate::qfield::{int, parse_rational, rational_from_f64, rational_to_f64, rational_to_string, QuadElem, Rational};
use crate::simplex::{subsets, ProductSimplex, Simplex};
use crate::volume::{area_h2, length_h1, vol_h3};

type Point = Vec<Rational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Space {
    Euclidean(usize),
    Hyperbolic(usize),
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Euclidean(n) | Space::Hyperbolic(n) => n,
        }
    }

    fn tag(self) -> String {
        match self {
            Space::Euclidean(n) => format!("E{n}"),
            Space::Hyperbolic(n) => format!("H{n}"),
        }
    }

    fn parse(s: &str) -> Result<Space> {
        let bad = || invalid(format!("bad space tag `{s}` (expected E<n> or H<n>)"));
        let (kind, n) = s.split_at(1.min(s.len()));
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match kind {
            "E" => Ok(Space::Euclidean(n)),
            "H" => Ok(Space::Hyperbolic(n)),
            _ => Err(bad()),
        }
    }
}

/// `normal · x <= offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Halfspace {
    pub normal: Point,
    pub offset: Rational,
}

impl Halfspace {
    fn eval(&self, x: &[Rational]) -> Rational {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<Rational>() - &self.offset
    }

    fn flipped(&self) -> Halfspace {
        Halfspace { normal: self.normal.iter().map(|a| -a).collect(), offset: -&self.offset }
    }
}

/// A bounded full-dimensional convex polytope. `halfspaces[k]` supports the
/// facet with vertices `facets[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolytope {
    pub space: Space,
    pub halfspaces: Vec<Halfspace>,
    pub vertices: Vec<Point>,
    pub facets: Vec<Vec<usize>>,
    float_halfspaces: Vec<(Vec<f64>, f64)>,
}

fn sub(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn affine_rank(points: &[&Point]) -> usize {
    match points.split_first() {
        None => 0,
        Some((p0, rest)) => rank_rational(&rest.iter().map(|p| sub(p, p0)).collect::<Vec<_>>()),
    }
}

fn to_f64(p: &[Rational]) -> Vec<f64> {
    p.iter().map(rational_to_f64).collect()
}

impl ConvexPolytope {
    fn assemble(space: Space, vertices: Vec<Point>, candidates: Vec<Halfspace>) -> Option<ConvexPolytope> {
        let n = space.dim();
        let refs: Vec<&Point> = vertices.iter().collect();
        if vertices.len() < n + 1 || affine_rank(&refs) < n {
            return None;
        }
        let mut seen = BTreeSet::new();
        let mut halfspaces = Vec::new();
        let mut facets = Vec::new();
        for h in candidates {
            let tight: Vec<usize> = (0..vertices.len()).filter(|&i| h.eval(&vertices[i]).is_zero()).collect();
            let pts: Vec<&Point> = tight.iter().map(|&i| &vertices[i]).collect();
            if tight.len() >= n && affine_rank(&pts) == n - 1 && seen.insert(tight.clone()) {
                halfspaces.push(h);
                facets.push(tight);
            }
        }
        let float_halfspaces =
            halfspaces.iter().map(|h| (to_f64(&h.normal), rational_to_f64(&h.offset))).collect();
        Some(ConvexPolytope { space, halfspaces, vertices, facets, float_halfspaces })
    }

    /// Intersection of halfspaces; `None` when it has empty interior.
    pub fn from_halfspaces(space: Space, halfspaces: Vec<Halfspace>) -> Result<Option<ConvexPolytope>> {
        let n = space.dim();
        if halfspaces.iter().any(|h| h.normal.len() != n) {
            return Err(invalid("halfspace dimension does not match the space"));
        }
        let verts = feasible_vertices(&halfspaces, n);
        if !verts.is_empty() && !recession_trivial(&halfspaces, n) {
            return Err(invalid("unbounded polytope"));
        }
        if verts.is_empty() {
            // No vertices: empty, or containing a line. Pinning the lineality
            // directions to zero keeps a nonempty set nonempty and gives it a
            // vertex.
            let normals: Vec<Point> = halfspaces.iter().map(|h| h.normal.clone()).collect();
            let mut pinned = halfspaces.clone();
            for k in kernel_rational(&normals, n) {
                pinned.push(Halfspace { normal: k.iter().map(|x| -x).collect(), offset: int(0) });
                pinned.push(Halfspace { normal: k, offset: int(0) });
            }
            if pinned.len() > halfspaces.len() && !feasible_vertices(&pinned, n).is_empty() {
                return Err(invalid("unbounded polytope"));
            }
        }
        let p = ConvexPolytope::assemble(space, verts.into_iter().collect(), halfspaces);
        if let Some(p) = &p {
            p.check_chart()?;
        }
        Ok(p)
    }

    /// Convex hull of a full-dimensional point set.
    pub fn from_vertices(space: Space, points: Vec<Point>) -> Result<ConvexPolytope> {
        let n = space.dim();
        if points.iter().any(|p| p.len() != n) {
            return Err(invalid("vertex dimension does not match the space"));
        }
        let mut candidates = Vec::new();
        for s in subsets(points.len(), n) {
            let Some(h) = hyperplane_through(&s.iter().map(|&i| &points[i]).collect::<Vec<_>>(), n) else {
                continue;
            };
            let signs: Vec<Rational> = points.iter().map(|p| h.eval(p)).collect();
            if signs.iter().all(|v| !v.is_positive()) {
                candidates.push(h);
            } else if signs.iter().all(|v| !v.is_negative()) {
                candidates.push(h.flipped());
            }
        }
        let p = ConvexPolytope::from_halfspaces(space, candidates)?
            .ok_or_else(|| Error::Degenerate("vertices do not span a full-dimensional polytope".into()))?;
        p.check_chart()?;
        Ok(p)
    }

    /// The simplex with the given vertices in order; facet `k` is opposite
    /// vertex `k`.
    pub fn simplex(space: Space, vertices: Vec<Point>) -> Result<ConvexPolytope> {
        let n = space.dim();
        if vertices.len() != n + 1 || vertices.iter().any(|p| p.len() != n) {
            return Err(invalid(format!("a simplex in dimension {n} needs {} vertices", n + 1)));
        }
        let mut hs = Vec::new();
        for k in 0..=n {
            let others: Vec<&Point> = (0..=n).filter(|&i| i != k).map(|i| &vertices[i]).collect();
            let h = hyperplane_through(&others, n).ok_or_else(|| Error::Degenerate("degenerate simplex".into()))?;
            let v = h.eval(&vertices[k]);
            if v.is_zero() {
                return Err(Error::Degenerate("degenerate simplex".into()));
            }
            hs.push(if v.is_positive() { h.flipped() } else { h });
        }
        let facets = (0..=n).map(|k| (0..=n).filter(|&i| i != k).collect()).collect();
        let float_halfspaces = hs.iter().map(|h| (to_f64(&h.normal), rational_to_f64(&h.offset))).collect();
        let p = ConvexPolytope { space, halfspaces: hs, vertices, facets, float_halfspaces };
        p.check_chart()?;
        Ok(p)
    }

    /// A hyperbolic simplex, exact when its coordinates are rational.
    pub fn from_simplex(s: &Simplex) -> Result<ConvexPolytope> {
        let n = s.ambient();
        if s.dim() != n {
            return Err(invalid("tiles must be full-dimensional simplices"));
        }
        let coords = match &s.exact {
            Some(ex) if ex.iter().flatten().all(QuadElem::is_rational) => {
                ex.iter().map(|c| c.iter().map(|x| x.a().clone()).collect()).collect()
            }
            _ => (0..=n).map(|i| s.klein(i).iter().map(|&x| rational_from_f64(x)).collect::<Result<Point>>()).collect::<Result<_>>()?,
        };
        ConvexPolytope::simplex(Space::Hyperbolic(n), coords)
    }

    /// Axis-parallel box `[lo, hi]` in Euclidean space.
    pub fn cuboid(lo: &[Rational], hi: &[Rational]) -> Result<ConvexPolytope> {
        let n = lo.len();
        if hi.len() != n || lo.iter().zip(hi).any(|(a, b)| a >= b) {
            return Err(invalid("box needs lo < hi in every coordinate"));
        }
        let mut hs = Vec::new();
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = int(1);
            hs.push(Halfspace { normal: e.clone(), offset: hi[i].clone() });
            hs.push(Halfspace { normal: e.iter().map(|x| -x).collect(), offset: -&lo[i] });
        }
        Ok(ConvexPolytope::from_halfspaces(Space::Euclidean(n), hs)?.expect("nonempty box"))
    }

    fn check_chart(&self) -> Result<()> {
        if let Space::Hyperbolic(_) = self.space {
            for v in &self.vertices {
                let r2: f64 = to_f64(v).iter().map(|x| x * x).sum();
                if r2 > 1.0 + 1e-12 {
                    return Err(invalid("hyperbolic polytope leaves the Klein ball"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Interior-intersection; `None` when the interiors are disjoint.
    pub fn intersect(&self, other: &ConvexPolytope) -> Result<Option<ConvexPolytope>> {
        if self.space != other.space {
            return Err(invalid("factors live in different spaces"));
        }
        let hs = self.halfspaces.iter().chain(&other.halfspaces).cloned().collect();
        ConvexPolytope::from_halfspaces(self.space, hs)
    }

    pub fn overlaps(&self, other: &ConvexPolytope) -> Result<bool> {
        Ok(self.intersect(other)?.is_some())
    }

    /// Closure of `self \ other` as interior-disjoint convex pieces: piece
    /// `j` satisfies the first `j` halfspaces of `other` and violates the
    /// next one.
    pub fn difference(&self, other: &ConvexPolytope) -> Result<Vec<ConvexPolytope>> {
        if !self.overlaps(other)? {
            return Ok(vec![self.clone()]);
        }
        let mut out = Vec::new();
        for j in 0..other.halfspaces.len() {
            let mut hs = self.halfspaces.clone();
            hs.extend(other.halfspaces[..j].iter().cloned());
            hs.push(other.halfspaces[j].flipped());
            if let Some(p) = ConvexPolytope::from_halfspaces(self.space, hs)? {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Fan triangulation from the lexicographically least vertex, applied
    /// recursively to the facets not containing it. Returns vertex index
    /// lists.
    pub fn triangulate(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        self.fan(&all, self.dim())
    }

    fn fan(&self, face: &[usize], d: usize) -> Vec<Vec<usize>> {
        if face.len() == d + 1 {
            return vec![face.to_vec()];
        }
        let apex = *face.iter().min_by(|&&a, &&b| self.vertices[a].cmp(&self.vertices[b])).unwrap();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for tight in &self.facets {
            let sub: Vec<usize> = face.iter().copied().filter(|i| tight.contains(i)).collect();
            if sub.contains(&apex) || sub.len() < d {
                continue;
            }
            let pts: Vec<&Point> = sub.iter().map(|&i| &self.vertices[i]).collect();
            if affine_rank(&pts) != d - 1 || !seen.insert(sub.clone()) {
                continue;
            }
            for mut s in self.fan(&sub, d - 1) {
                s.insert(0, apex);
                out.push(s);
            }
        }
        out
    }

    /// The simplices of [`Self::triangulate`] as coordinate lists.
    pub fn simplices(&self) -> Vec<Vec<Point>> {
        self.triangulate().into_iter().map(|s| s.into_iter().map(|i| self.vertices[i].clone()).collect()).collect()
    }

    /// Euclidean volume of the polytope in the chart, exactly.
    pub fn chart_volume(&self) -> Rational {
        let n = self.dim();
        let fact: i64 = (1..=n as i64).product();
        self.simplices()
            .iter()
            .map(|s| {
                let m: Vec<Point> = s[1..].iter().map(|p| sub(p, &s[0])).collect();
                det_rational(&m).abs()
            })
            .sum::<Rational>()
            / int(fact)
    }

    /// Volume in the polytope's own geometry.
    pub fn volume(&self) -> Result<f64> {
        match self.space {
            Space::Euclidean(_) => Ok(rational_to_f64(&self.chart_volume())),
            Space::Hyperbolic(n) => {
                let mut total = 0.0;
                for s in self.simplices() {
                    let simplex = exact_simplex(&s)?;
                    total += match n {
                        1 => length_h1(&simplex)?,
                        2 => area_h2(&simplex)?,
                        3 => vol_h3(&simplex)?,
                        _ => return Err(Error::Unsupported(format!("volume of H^{n} polytopes"))),
                    };
                }
                Ok(total)
            }
        }
    }

    /// Strict interior test in floating point.
    pub fn contains_f64(&self, x: &[f64]) -> bool {
        self.float_halfspaces.iter().all(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() < *b)
    }

    pub fn to_json(&self) -> Value {
        let pt = |p: &Point| p.iter().map(rational_to_string).collect::<Vec<_>>();
        json!({
            "space": self.space.tag(),
            "vertices": self.vertices.iter().map(pt).collect::<Vec<_>>(),
            "halfspaces": self.halfspaces.iter()
                .map(|h| json!({"normal": pt(&h.normal), "offset": rational_to_string(&h.offset)}))
                .collect::<Vec<_>>(),
        })
    }

    /// Reads `{"space": "E2", "vertices": [...]}`; coordinates are numbers
    /// or rational strings.
    pub fn from_json(v: &Value) -> Result<ConvexPolytope> {
        let space = Space::parse(v.get("space").and_then(Value::as_str).ok_or_else(|| invalid("missing space"))?)?;
        let verts = v.get("vertices").and_then(Value::as_array).ok_or_else(|| invalid("missing vertices"))?;
        let pts = verts
            .iter()
            .map(|p| p.as_array().ok_or_else(|| invalid("vertex must be an array"))?.iter().map(json_rational).collect())
            .collect::<Result<Vec<Point>>>()?;
        ConvexPolytope::from_vertices(space, pts)
    }
}

/// Points where `n` of the halfspaces are tight and all hold.
fn feasible_vertices(halfspaces: &[Halfspace], n: usize) -> BTreeSet<Point> {
    let mut verts = BTreeSet::new();
    for s in subsets(halfspaces.len(), n) {
        let a: Vec<Point> = s.iter().map(|&i| halfspaces[i].normal.clone()).collect();
        let b: Vec<Rational> = s.iter().map(|&i| halfspaces[i].offset.clone()).collect();
        if let Some(x) = solve_rational(&a, &b) {
            if halfspaces.iter().all(|h| !h.eval(&x).is_positive()) {
                verts.insert(x);
            }
        }
    }
    verts
}

/// A number or a `"p/q"` string as an exact rational.
pub fn json_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(int(i))
            } else {
                rational_from_f64(n.as_f64().ok_or_else(|| invalid("bad number"))?)
            }
        }
        _ => Err(invalid("coordinate must be a number or a rational string")),
    }
}

fn exact_simplex(points: &[Point]) -> Result<Simplex> {
    let coords = points.iter().map(|p| p.iter().map(|x| QuadElem::rational(x.clone())).collect()).collect();
    let s = Simplex::from_exact(coords, 1)?;
    Ok(if s.sign() < 0 { s.negated() } else { s })
}

/// The hyperplane through `n` points in general position, if any.
fn hyperplane_through(points: &[&Point], n: usize) -> Option<Halfspace> {
    let rows: Vec<Point> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let ker = kernel_rational(&rows, n);
    if ker.len() != 1 {
        return None;
    }
    let normal = ker.into_iter().next().unwrap();
    let offset = normal.iter().zip(points[0]).map(|(a, b)| a * b).sum();
    Some(Halfspace { normal, offset })
}

/// True when `{d : A d <= 0}` contains no nonzero direction, for a pointed
/// cone: every extreme ray is cut out by `n - 1` independent rows.
fn recession_trivial(hs: &[Halfspace], n: usize) -> bool {
    if n == 1 {
        let pos = hs.iter().any(|h| h.normal[0].is_positive());
        let neg = hs.iter().any(|h| h.normal[0].is_negative());
        return pos && neg;
    }
    for s in subsets(hs.len(), n - 1) {
        let rows: Vec<Point> = s.iter().map(|&i| hs[i].normal.clone()).collect();
        let ker = kernel_rational(&rows, n);
        if ker.len() != 1 {
            continue;
        }
        for d in [ker[0].clone(), ker[0].iter().map(|x| -x).collect()] {
            if hs.iter().all(|h| !h.normal.iter().zip(&d).map(|(a, b)| a * b).sum::<Rational>().is_positive()) {
                return false;
            }
        }
    }
    true
}

/// A product of convex polytopes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPolytope {
    pub factors: Vec<ConvexPolytope>,
}

impl ProductPolytope {
    pub fn new(factors: Vec<ConvexPolytope>) -> ProductPolytope {
        ProductPolytope { factors }
    }

    pub fn from_product_simplex(p: &ProductSimplex) -> Result<ProductPolytope> {
        Ok(ProductPolytope { factors: p.factors.iter().map(ConvexPolytope::from_simplex).collect::<Result<_>>()? })
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(ConvexPolytope::dim).sum()
    }

    fn check_compatible(&self, other: &ProductPolytope) -> Result<()> {
        if self.factors.len() != other.factors.len()
            || self.factors.iter().zip(&other.factors).any(|(a, b)| a.space != b.space)
        {
            return Err(invalid("product polytopes have mismatched factor spaces"));
        }
        Ok(())
    }

    pub fn overlaps(&self, other: &ProductPolytope) -> Result<bool> {
        self.check_compatible(other)?;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            if !a.overlaps(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn volume(&self) -> Result<f64> {
        self.factors.iter().map(ConvexPolytope::volume).product()
    }

    /// Exact volume when every factor is Euclidean.
    pub fn exact_volume(&self) -> Option<Rational> {
        self.factors
            .iter()
            .map(|f| matches!(f.space, Space::Euclidean(_)).then(|| f.chart_volume()))
            .product()
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        let mut off = 0;
        self.factors.iter().all(|f| {
            let n = f.dim();
            off += n;
            f.contains_f64(&x[off - n..off])
        })
    }

    /// Product of the factor fan triangulations.
    pub fn triangulate(&self) -> Result<Vec<ProductSimplex>> {
        let mut out: Vec<Vec<Simplex>> = vec![vec![]];
        for f in &self.factors {
            if !matches!(f.space, Space::Hyperbolic(_)) {
                return Err(Error::Unsupported("only hyperbolic factors triangulate into product simplices".into()));
            }
            let pieces = f.simplices().iter().map(|s| exact_simplex(s)).collect::<Result<Vec<_>>>()?;
            out = out.into_iter().flat_map(|prefix| pieces.iter().map(move |p| [prefix.clone(), vec![p.clone()]].concat())).collect();
        }
        Ok(out.into_iter().map(ProductSimplex::new).collect())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.factors.iter().map(ConvexPolytope::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<ProductPolytope> {
        let arr = v.as_array().ok_or_else(|| invalid("product polytope must be an array of factors"))?;
        Ok(ProductPolytope { factors: arr.iter().map(ConvexPolytope::from_json).collect::<Result<_>>()? })
    }
}

/// `Π_i (ε_i = 0 ? inter_i : one of comp_i)` over all nonzero `ε`.
fn side_terms(inter: &[ConvexPolytope], comp: &[Vec<ConvexPolytope>]) -> Vec<ProductPolytope> {
    let n = inter.len();
    let mut out = Vec::new();
    for eps in 1u32..(1 << n) {
        let mut acc: Vec<Vec<ConvexPolytope>> = vec![vec![]];
        for i in 0..n {
            let choices: Vec<&ConvexPolytope> =
                if eps >> i & 1 == 1 { comp[i].iter().collect() } else { vec![&inter[i]] };
            acc = acc.into_iter().flat_map(|pre| choices.iter().map(move |c| [pre.clone(), vec![(*c).clone()]].concat())).collect();
        }
        out.extend(acc.into_iter().map(ProductPolytope::new));
    }
    out
}

/// Closure of `p \ q` as interior-disjoint product polytopes.
pub fn subtract(p: &ProductPolytope, q: &ProductPolytope) -> Result<Vec<ProductPolytope>> {
    if !p.overlaps(q)? {
        return Ok(vec![p.clone()]);
    }
    let inter: Vec<ConvexPolytope> =
        p.factors.iter().zip(&q.factors).map(|(a, b)| Ok(a.intersect(b)?.expect("factors overlap"))).collect::<Result<_>>()?;
    let comp: Vec<Vec<ConvexPolytope>> =
        p.factors.iter().zip(&q.factors).map(|(a, b)| a.difference(b)).collect::<Result<_>>()?;
    Ok(side_terms(&inter, &comp))
}

/// Writes `p1 ∪ p2` as the intersection term plus the nonempty
/// `ε`-indexed terms of each side; interior-disjoint inputs come back
/// unchanged.
pub fn excise_pair(p1: &ProductPolytope, p2: &ProductPolytope) -> Result<Vec<ProductPolytope>> {
    if !p1.overlaps(p2)? {
        return Ok(vec![p1.clone(), p2.clone()]);
    }
    let inter: Vec<ConvexPolytope> =
        p1.factors.iter().zip(&p2.factors).map(|(a, b)| Ok(a.intersect(b)?.expect("factors overlap"))).collect::<Result<_>>()?;
    let mut out = vec![ProductPolytope::new(inter.clone())];
    for (x, y) in [(p1, p2), (p2, p1)] {
        let comp: Vec<Vec<ConvexPolytope>> =
            x.factors.iter().zip(&y.factors).map(|(a, b)| a.difference(b)).collect::<Result<_>>()?;
        out.extend(side_terms(&inter, &comp));
    }
    Ok(out)
}

/// Output of [`excise_all`].
#[derive(Clone, Debug)]
pub struct Excision {
    /// Interior-disjoint convex cells covering the union.
    pub cells: Vec<ProductPolytope>,
    /// The cells triangulated into product simplices.
    pub tiles: Vec<ProductSimplex>,
    /// Insertion passes that had to cut against earlier cells.
    pub rounds: usize,
    /// Number of interior-overlapping input pairs; bounds `rounds`.
    pub multiplicity_bound: usize,
    pub overlapping_pairs: Vec<(usize, usize)>,
}

impl Excision {
    pub fn to_json(&self) -> Value {
        json!({
            "tiles": self.tiles.iter().map(ProductSimplex::to_json).collect::<Vec<_>>(),
            "cells": self.cells.iter().map(ProductPolytope::to_json).collect::<Vec<_>>(),
            "rounds": self.rounds,
            "multiplicity_bound": self.multiplicity_bound,
            "overlapping_pairs": self.overlapping_pairs,
        })
    }
}

/// Rewrites a finite list of product polytopes into interior-disjoint cells
/// with the same union (duplicates collapse), inserting one input at a
/// time and cutting it against the cells already placed.
pub fn excise_polytopes(inputs: &[ProductPolytope]) -> Result<(Vec<ProductPolytope>, usize, Vec<(usize, usize)>)> {
    let mut pairs = Vec::new();
    for i in 0..inputs.len() {
        for j in (i + 1)..inputs.len() {
            if inputs[i].overlaps(&inputs[j])? {
                pairs.push((i, j));
            }
        }
    }
    let mut done: Vec<ProductPolytope> = Vec::new();
    let mut rounds = 0;
    for (i, t) in inputs.iter().enumerate() {
        if pairs.iter().any(|&(a, b)| b == i && a < i) {
            rounds += 1;
        }
        let mut pieces = vec![t.clone()];
        for d in &done {
            let mut next = Vec::new();
            for p in pieces {
                next.extend(subtract(&p, d)?);
            }
            pieces = next;
        }
        done.extend(pieces);
    }
    debug_assert!(rounds <= pairs.len());
    Ok((done, rounds, pairs))
}

/// [`excise_polytopes`] on product simplices, with the cells triangulated
/// back into product simplices.
pub fn excise_all(tiles: &[ProductSimplex]) -> Result<Excision> {
    let inputs = tiles.iter().map(ProductPolytope::from_product_simplex).collect::<Result<Vec<_>>>()?;
    if let Some(first) = inputs.first() {
        for p in &inputs[1..] {
            first.check_compatible(p)?;
        }
    }
    let (cells, rounds, pairs) = excise_polytopes(&inputs)?;
    if rounds > pairs.len() {
        return Err(Error::Numeric("excision exceeded its round bound".into()));
    }
    let mut out = Vec::new();
    for c in &cells {
        out.extend(c.triangulate()?);
    }
    Ok(Excision { cells, tiles: out, rounds, multiplicity_bound: pairs.len(), overlapping_pairs: pairs })
}

/// Facet `facet` of tile `tile` glued to facet `.1` of tile `.0`, or to
/// nothing present (a tile removed from a tiling).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glue {
    pub tile: usize,
    pub facet: usize,
    pub other: Option<(usize, usize)>,
}

/// Tiles with optional gluing data.
#[derive(Clone, Debug, Default)]
pub struct Tiling {
    pub tiles: Vec<ProductSimplex>,
    pub gluing: Vec<Glue>,
}

impl Tiling {
    pub fn to_json(&self) -> Value {
        json!({
            "tiles": self.tiles.iter().map(ProductSimplex::to_json).collect::<Vec<_>>(),
            "gluing": self.gluing.iter().map(|g| match g.other {
                Some((t, f)) => json!([g.tile, g.facet, t, f]),
                None => json!([g.tile, g.facet, null, null]),
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Tiling> {
        let tiles = v
            .get("tiles")
            .and_then(Value::as_array)
            .ok_or_else(|| invalid("missing tiles"))?
            .iter()
            .map(ProductSimplex::from_json)
            .collect::<Result<Vec<_>>>()?;
        let mut gluing = Vec::new();
        for g in v.get("gluing").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
            let a = g.as_array().filter(|a| a.len() == 4).ok_or_else(|| invalid("gluing entries are [tile, facet, tile, facet]"))?;
            let idx = |k: usize| a[k].as_u64().map(|x| x as usize);
            let (t, f) = (idx(0).ok_or_else(|| invalid("bad tile index"))?, idx(1).ok_or_else(|| invalid("bad facet index"))?);
            let other = match (idx(2), idx(3)) {
                (Some(t2), Some(f2)) => Some((t2, f2)),
                _ if a[2].is_null() => None,
                _ => return Err(invalid("bad gluing partner")),
            };
            if t >= tiles.len() || other.is_some_and(|(t2, _)| t2 >= tiles.len()) {
                return Err(invalid("gluing refers to a missing tile"));
            }
            gluing.push(Glue { tile: t, facet: f, other });
        }
        Ok(Tiling { tiles, gluing })
    }

    pub fn polytopes(&self) -> Result<Vec<ProductPolytope>> {
        self.tiles.iter().map(ProductPolytope::from_product_simplex).collect()
    }

    /// Drops tile `k`; gluings onto it become dangling.
    pub fn remove_tile(&self, k: usize) -> Tiling {
        let re = |t: usize| if t > k { t - 1 } else { t };
        let tiles = self.tiles.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, t)| t.clone()).collect();
        let gluing = self
            .gluing
            .iter()
            .filter(|g| g.tile != k)
            .map(|g| Glue {
                tile: re(g.tile),
                facet: g.facet,
                other: g.other.and_then(|(t, f)| (t != k).then(|| (re(t), f))),
            })
            .collect();
        Tiling { tiles, gluing }
    }
}

/// `(factor, halfspace)` of a global facet index.
fn facet_location(p: &ProductPolytope, facet: usize) -> Option<(usize, usize)> {
    let mut f = facet;
    for (i, c) in p.factors.iter().enumerate() {
        if f < c.halfspaces.len() {
            return Some((i, f));
        }
        f -= c.halfspaces.len();
    }
    None
}

fn facet_count(p: &ProductPolytope) -> usize {
    p.factors.iter().map(|c| c.halfspaces.len()).sum()
}

fn dirichlet_point(rng: &mut ChaCha8Rng, pts: &[Vec<f64>]) -> Vec<f64> {
    let w: Vec<f64> = pts.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut x = vec![0.0; pts[0].len()];
    for (p, wi) in pts.iter().zip(&w) {
        for (a, b) in x.iter_mut().zip(p) {
            *a += b * wi / total;
        }
    }
    x
}

fn dist_to_plane((a, b): &(Vec<f64>, f64), x: &[f64]) -> f64 {
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    (b - a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>()) / norm
}

/// Per-facet outcome of [`check_proper`].
#[derive(Clone, Debug, PartialEq)]
pub struct FacetCheck {
    pub tile: usize,
    pub facet: usize,
    pub interior: bool,
    /// Sum over tiles of the covered fraction of a small ball around a
    /// random facet point.
    pub coverage: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProperReport {
    pub facets: Vec<FacetCheck>,
    pub interior: usize,
    pub boundary: usize,
    /// Largest `|coverage - 1|` over interior facets.
    pub max_deviation: f64,
}

impl ProperReport {
    pub fn to_json(&self) -> Value {
        let worst = self
            .facets
            .iter()
            .filter(|f| f.interior)
            .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
            .map(|f| json!({"tile": f.tile, "facet": f.facet, "coverage": f.coverage}));
        json!({
            "interior_facets": self.interior,
            "boundary_facets": self.boundary,
            "max_deviation": self.max_deviation,
            "worst": worst,
        })
    }
}

/// Samples one random point on every facet and the ball of radius `r`
/// around it, where `r` is a fifth of the distance to the tile's other
/// facets. A facet is interior when it is glued (dangling gluings count),
/// or, without gluing data, when some sample on its outer side is covered.
/// Interior facets should have total coverage 1.
pub fn check_proper(
    tiles: &[ProductPolytope],
    gluing: Option<&[Glue]>,
    probe_points: usize,
    seed: u64,
    exec: Execution,
) -> Result<ProperReport> {
    if probe_points == 0 {
        return Err(invalid("probe_points must be positive"));
    }
    if let Some(first) = tiles.first() {
        for t in &tiles[1..] {
            first.check_compatible(t)?;
        }
    }
    let jobs: Vec<(usize, usize)> =
        tiles.iter().enumerate().flat_map(|(t, p)| (0..facet_count(p)).map(move |f| (t, f))).collect();
    let results = map_indexed(exec, jobs.len(), |j| {
        let (t, f) = jobs[j];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        probe_facet(tiles, t, f, probe_points, &mut rng)
    });
    let mut facets = Vec::new();
    for ((t, f), (coverage, outside)) in jobs.into_iter().zip(results) {
        let interior = match gluing {
            Some(g) => g.iter().any(|e| (e.tile == t && e.facet == f) || e.other == Some((t, f))),
            None => outside,
        };
        facets.push(FacetCheck { tile: t, facet: f, interior, coverage, deviation: (coverage - 1.0).abs() });
    }
    let interior = facets.iter().filter(|f| f.interior).count();
    let max_deviation = facets.iter().filter(|f| f.interior).map(|f| f.deviation).fold(0.0, f64::max);
    Ok(ProperReport { boundary: facets.len() - interior, interior, max_deviation, facets })
}

/// Coverage of the ball around a random point of facet `f` of tile `t`, and
/// whether any sample beyond the facet was covered.
fn probe_facet(tiles: &[ProductPolytope], t: usize, f: usize, samples: usize, rng: &mut ChaCha8Rng) -> (f64, bool) {
    let tile = &tiles[t];
    let (fi, hi) = facet_location(tile, f).expect("facet index in range");
    let mut x = Vec::new();
    let mut r = f64::INFINITY;
    for (i, c) in tile.factors.iter().enumerate() {
        let pts: Vec<Vec<f64>> = if i == fi {
            c.facets[hi].iter().map(|&k| to_f64(&c.vertices[k])).collect()
        } else {
            c.vertices.iter().map(|v| to_f64(v)).collect()
        };
        let xi = dirichlet_point(rng, &pts);
        for (k, h) in c.float_halfspaces.iter().enumerate() {
            if !(i == fi && k == hi) {
                r = r.min(dist_to_plane(h, &xi));
            }
        }
        x.extend(xi);
    }
    let r = (0.2 * r).min(1e-2);
    let n = x.len();
    let (fa, fb) = &tile.factors[fi].float_halfspaces[hi];
    let off: usize = tile.factors[..fi].iter().map(ConvexPolytope::dim).sum();
    let mut covered = 0usize;
    let mut outside = false;
    let mut y = vec![0.0; n];
    for _ in 0..samples {
        loop {
            for v in y.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            if y.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                break;
            }
        }
        for (v, c) in y.iter_mut().zip(&x) {
            *v = c + r * *v;
        }
        let hits = tiles.iter().filter(|p| p.contains_f64(&y)).count();
        covered += hits;
        let beyond = fa.iter().zip(&y[off..off + fa.len()]).map(|(a, b)| a * b).sum::<f64>() > *fb;
        if beyond && tiles.iter().enumerate().any(|(k, p)| k != t && p.contains_f64(&y)) {
            outside = true;
        }
    }
    (covered as f64 / samples as f64, outside)
}

/// Gluing inferred by sampling: facets with covered outer side, paired with
/// the covering tile's nearest facet.
pub fn infer_gluing(tiles: &[ProductPolytope], seed: u64) -> Vec<Glue> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (t, tile) in tiles.iter().enumerate() {
        for f in 0..facet_count(tile) {
            let (fi, hi) = facet_location(tile, f).unwrap();
            let c = &tile.factors[fi];
            let pts: Vec<Vec<f64>> = c.facets[hi].iter().map(|&k| to_f64(&c.vertices[k])).collect();
            let centre: Vec<f64> = (0..c.dim()).map(|d| pts.iter().map(|p| p[d]).sum::<f64>() / pts.len() as f64).collect();
            let mut x: Vec<f64> = Vec::new();
            for (i, ci) in tile.factors.iter().enumerate() {
                if i == fi {
                    let (a, _) = &ci.float_halfspaces[hi];
                    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let jitter: Vec<Vec<f64>> = pts.clone();
                    let p = dirichlet_point(&mut rng, &jitter);
                    x.extend(p.iter().zip(&centre).zip(a).map(|((p, c), a)| 0.5 * (p + c) + 1e-7 * a / norm));
                } else {
                    let vs: Vec<Vec<f64>> = ci.vertices.iter().map(|v| to_f64(v)).collect();
                    x.extend(dirichlet_point(&mut rng, &vs));
                }
            }
            let partner = tiles.iter().enumerate().find(|(k, p)| *k != t && p.contains_f64(&x)).map(|(k, p)| {
                let off: usize = p.factors[..fi].iter().map(ConvexPolytope::dim).sum();
                let xi = &x[off..off + p.factors[fi].dim()];
                let base: usize = p.factors[..fi].iter().map(|c| c.halfspaces.len()).sum();
                let best = (0..p.factors[fi].halfspaces.len())
                    .min_by(|&a, &b| {
                        let fh = &p.factors[fi].float_halfspaces;
                        dist_to_plane(&fh[a], xi).abs().total_cmp(&dist_to_plane(&fh[b], xi).abs())
                    })
                    .unwrap();
                (k, base + best)
            });
            if let Some(o) = partner {
                out.push(Glue { tile: t, facet: f, other: Some(o) });
            }
        }
    }
    out
}
