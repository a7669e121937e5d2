//! Bugaenko's reflection polytope in H⁵ over Q(√5): exact Gram data and
//! vertices, a fan triangulation, its numeric volume, and a comparison with
//! the L-value class of its covolume.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::hypmodel::{Hyperplane, QuadraticForm};
use crate::lfunc::{covolume_class, CovolumeCase, CovolumeParams, IntPoly, VolumeClass};
use crate::linalg::{rank_exact, solve_exact};
use crate::qfield::{int, rat, recognize_rational, rational_to_string, Place, QuadElem, Rational};
use crate::simplex::{subsets, Simplex};
use crate::volume::{vol_numeric_with, NumericOptions};

const D: u64 = 5;

/// Form, the seven normals `e_i` (hyperplane `L_i = {(e_i, x)_q = 0}`), and
/// signs `s_i` with `P = {x : (s_i e_i, x)_q <= 0, x₀ > 0}`.
#[derive(Clone, Debug)]
pub struct Polytope {
    pub form: QuadraticForm,
    pub hyperplanes: Vec<Hyperplane>,
    pub sides: Vec<i8>,
}

fn q(a: i64) -> QuadElem {
    QuadElem::from_rational(int(a), D).unwrap()
}

/// The seven hyperplanes and the form `-φx₀² + x₁² + ... + x₅²`.
pub fn bugaenko_polytope() -> Polytope {
    let phi = QuadElem::golden();
    let form = QuadraticForm::lorentz(5, phi.clone());
    let z = || QuadElem::zero(D);
    let o = q;
    let diff = |i: usize| {
        let mut v = vec![z(); 6];
        v[i] = o(-1);
        v[i + 1] = o(1);
        v
    };
    let mut normals: Vec<Vec<QuadElem>> = (1..=4).map(diff).collect();
    normals.push(vec![z(), z(), z(), z(), z(), o(1)]);
    normals.push(vec![&phi - &o(1), phi.clone(), z(), z(), z(), z()]);
    let mut l7 = vec![&phi + &o(1)];
    l7.extend(std::iter::repeat_n(phi.clone(), 5));
    normals.push(l7);
    let hyperplanes = normals.into_iter().map(|n| Hyperplane::new(n, form.clone()).expect("space-like normal")).collect();
    Polytope { form, hyperplanes, sides: vec![1, 1, 1, 1, -1, 1, 1] }
}

impl Polytope {
    fn outward(&self, i: usize) -> Vec<QuadElem> {
        let s = q(i64::from(self.sides[i]));
        self.hyperplanes[i].normal.iter().map(|c| c.checked_mul(&s).unwrap()).collect()
    }

    /// `G_ij = (s_i e_i, s_j e_j)_q`.
    pub fn gram(&self) -> Result<Vec<Vec<QuadElem>>> {
        let n: Vec<Vec<QuadElem>> = (0..7).map(|i| self.outward(i)).collect();
        (0..7).map(|i| (0..7).map(|j| self.form.inner(&n[i], &n[j])).collect()).collect()
    }
}

/// Relative position of two walls of the polytope.
#[derive(Clone, Debug, PartialEq)]
pub enum PairClass {
    /// Dihedral angle `π / k`; `cos` is exact when it lies in Q(√5).
    Angle { k: u32, cos2: QuadElem, cos: Option<QuadElem> },
    /// Meeting at an angle that is not a submultiple of π.
    OtherAngle { cos2: QuadElem, angle: f64 },
    Parallel,
    /// Disjoint, with `cosh` of their distance.
    Ultraparallel { cosh2: QuadElem, distance: f64 },
}

/// Classification of one pair `(L_i, L_j)` (1-based labels).
#[derive(Clone, Debug, PartialEq)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub class: PairClass,
}

impl PairReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({"i": self.i, "j": self.j});
        let m = v.as_object_mut().unwrap();
        match &self.class {
            PairClass::Angle { k, cos2, cos } => {
                m.insert("class".into(), json!("angle"));
                m.insert("pi_over".into(), json!(k));
                m.insert("cos2".into(), cos2.to_json());
                m.insert("cos".into(), cos.as_ref().map_or(Value::Null, QuadElem::to_json));
            }
            PairClass::OtherAngle { cos2, angle } => {
                m.insert("class".into(), json!("angle"));
                m.insert("cos2".into(), cos2.to_json());
                m.insert("angle".into(), json!(angle));
            }
            PairClass::Parallel => {
                m.insert("class".into(), json!("parallel"));
            }
            PairClass::Ultraparallel { cosh2, distance } => {
                m.insert("class".into(), json!("ultraparallel"));
                m.insert("cosh2".into(), cosh2.to_json());
                m.insert("distance".into(), json!(distance));
            }
        }
        v
    }
}

/// `cos²(π/k)` in Q(√5) for the Coxeter angles that can occur here.
fn coxeter_cos2(k: u32) -> Option<QuadElem> {
    let phi = QuadElem::golden();
    Some(match k {
        2 => QuadElem::zero(D),
        3 => QuadElem::from_rational(rat(1, 4), D).unwrap(),
        4 => QuadElem::from_rational(rat(1, 2), D).unwrap(),
        // cos(π/5) = φ/2
        5 => (&phi * &phi).scale(&rat(1, 4)),
        6 => QuadElem::from_rational(rat(3, 4), D).unwrap(),
        _ => return None,
    })
}

/// All 21 pairs, classified from exact `cos² = G_ij² / (G_ii G_jj)` and the
/// sign of `-G_ij`.
pub fn gram_report(p: &Polytope) -> Result<Vec<PairReport>> {
    let g = p.gram()?;
    let one = QuadElem::one(D);
    let mut out = Vec::new();
    for i in 0..7 {
        for j in (i + 1)..7 {
            let c2 = (&g[i][j] * &g[i][j]).checked_div(&(&g[i][i] * &g[j][j]))?;
            let excess = &c2 - &one;
            let acute = g[i][j].sign(Place::One) <= 0;
            let class = match excess.sign(Place::One) {
                0 => PairClass::Parallel,
                1 => PairClass::Ultraparallel { distance: c2.embed(Place::One).sqrt().acosh(), cosh2: c2 },
                _ => {
                    let k = (2..=6).find(|&k| acute && coxeter_cos2(k).as_ref() == Some(&c2));
                    match k {
                        Some(k) => PairClass::Angle { k, cos: c2.sqrt(), cos2: c2 },
                        None => {
                            let c = -g[i][j].embed(Place::One)
                                / (g[i][i].embed(Place::One) * g[j][j].embed(Place::One)).sqrt();
                            PairClass::OtherAngle { angle: c.clamp(-1.0, 1.0).acos(), cos2: c2 }
                        }
                    }
                }
            };
            out.push(PairReport { i: i + 1, j: j + 1, class });
        }
    }
    Ok(out)
}

/// A vertex: exact affine coordinates `y` (with `x₀ = 1`), the walls through
/// it (0-based), and `-q(x) = φ - Σ y²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub y: Vec<QuadElem>,
    pub walls: Vec<usize>,
    pub depth: QuadElem,
}

impl Vertex {
    /// Coordinates in the unit Klein ball of the standard form.
    pub fn klein(&self) -> Vec<f64> {
        let s = QuadElem::golden().embed(Place::One).sqrt();
        self.y.iter().map(|c| c.embed(Place::One) / s).collect()
    }
}

/// Vertices from all 5-subsets of walls, kept when they satisfy every side
/// condition and lie strictly inside the quadric, in lexicographic order of
/// their float coordinates.
pub fn vertices(p: &Polytope) -> Result<Vec<Vertex>> {
    let normals: Vec<Vec<QuadElem>> = (0..7).map(|i| p.outward(i)).collect();
    let phi = QuadElem::golden();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in subsets(7, 5) {
        // (e, x)_q = -φ e₀ + Σ e_k y_k = 0.
        let a: Vec<Vec<QuadElem>> = s.iter().map(|&i| normals[i][1..].to_vec()).collect();
        let b: Vec<QuadElem> = s.iter().map(|&i| phi.checked_mul(&normals[i][0])).collect::<Result<_>>()?;
        let y = match solve_exact(&a, &b) {
            Ok(y) => y,
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        let mut x = vec![QuadElem::one(D)];
        x.extend(y.iter().cloned());
        let vals: Vec<QuadElem> = normals.iter().map(|n| p.form.inner(n, &x)).collect::<Result<_>>()?;
        if vals.iter().any(|v| v.sign(Place::One) > 0) {
            continue;
        }
        let depth = -p.form.inner(&x, &x)?;
        if depth.sign(Place::One) <= 0 {
            continue;
        }
        let key: Vec<[num_bigint::BigInt; 4]> = y.iter().map(QuadElem::to_tuple).collect();
        if !seen.insert(key) {
            continue;
        }
        let walls = (0..7).filter(|&i| vals[i].is_zero()).collect();
        out.push(Vertex { y, walls, depth });
    }
    out.sort_by(|a, b| {
        let (ka, kb) = (a.klein(), b.klein());
        ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

fn affine_rank(vs: &[Vertex], idx: &[usize]) -> Result<usize> {
    let Some((&first, rest)) = idx.split_first() else { return Ok(0) };
    let rows: Vec<Vec<QuadElem>> = rest
        .iter()
        .map(|&i| vs[i].y.iter().zip(&vs[first].y).map(|(a, b)| a.checked_sub(b)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    rank_exact(&rows)
}

/// Fan triangulation into 5-simplices: cone from `apex` over the facets
/// missing it, recursing with the least vertex of each face as its apex.
pub fn triangulate(vs: &[Vertex], apex: usize) -> Result<Vec<Vec<usize>>> {
    if apex >= vs.len() {
        return Err(invalid(format!("apex {apex} out of range (0..{})", vs.len())));
    }
    let walls: Vec<Vec<usize>> = (0..7).map(|w| (0..vs.len()).filter(|&i| vs[i].walls.contains(&w)).collect()).collect();
    fn fan(vs: &[Vertex], walls: &[Vec<usize>], face: &[usize], d: usize, apex: usize) -> Result<Vec<Vec<usize>>> {
        if face.len() == d + 1 {
            return Ok(vec![face.to_vec()]);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for w in walls {
            let sub: Vec<usize> = face.iter().copied().filter(|i| w.contains(i)).collect();
            if sub.contains(&apex) || sub.len() < d || affine_rank(vs, &sub)? != d - 1 || !seen.insert(sub.clone()) {
                continue;
            }
            let next = *sub.iter().min().unwrap();
            for mut s in fan(vs, walls, &sub, d - 1, next)? {
                s.insert(0, apex);
                out.push(s);
            }
        }
        Ok(out)
    }
    let all: Vec<usize> = (0..vs.len()).collect();
    fan(vs, &walls, &all, 5, apex)
}

/// Numeric volume with its per-piece breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub err: f64,
    pub apex: usize,
    pub pieces: Vec<(f64, f64)>,
}

/// Sums QMC volumes of the fan pieces from `apex`; piece `k` uses seed
/// `seed + k`.
pub fn bugaenko_volume(samples: usize, seed: u64, apex: usize, exec: Execution) -> Result<VolumeEstimate> {
    if samples < 100_000 {
        return Err(invalid("bugaenko_volume needs at least 1e5 samples"));
    }
    let vs = vertices(&bugaenko_polytope())?;
    let tri = triangulate(&vs, apex)?;
    let simplices: Vec<Simplex> = tri
        .iter()
        .map(|t| Simplex::from_klein(t.iter().map(|&i| vs[i].klein()).collect()))
        .collect::<Result<_>>()?;
    let opts = |k: usize| NumericOptions { samples, seed: seed + k as u64, batches: 16, cusp_substitution: true, exec };
    let pieces: Vec<(f64, f64)> = map_indexed(Execution::Sequential, simplices.len(), |k| {
        vol_numeric_with(&simplices[k], &opts(k)).map(|e| (e.value.abs(), e.err))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(VolumeEstimate {
        value: pieces.iter().map(|p| p.0).sum(),
        err: pieces.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt(),
        apex,
        pieces,
    })
}

/// The covolume class `√|d_{L/k} d_k| L(χ,3) / π³` for `k = Q(√5)`,
/// `L = k(√φ)`.
pub fn bugaenko_class(p_max: u64) -> Result<VolumeClass> {
    let params = CovolumeParams {
        n: 5,
        t: 1,
        r: 2,
        k_poly: Some(IntPoly(vec![-1, -1, 1])),
        l_poly: Some(IntPoly(vec![-1, 0, -1, 0, 1])),
        p_max,
        ..Default::default()
    };
    covolume_class(CovolumeCase::IINonsplit, &params)
}

/// Full pipeline report.
#[derive(Clone, Debug)]
pub struct BugaenkoReport {
    pub vertices: Vec<Vertex>,
    pub gram: Vec<PairReport>,
    pub volume: VolumeEstimate,
    pub class: VolumeClass,
    pub ratio: Option<f64>,
    pub ratio_err: Option<f64>,
    pub recognized: Option<Rational>,
}

impl BugaenkoReport {
    pub fn to_json(&self) -> Value {
        let phi = QuadElem::golden();
        json!({
            "vertex_count": self.vertices.len(),
            "vertices": self.vertices.iter().map(|v| json!({
                "y": v.y.iter().map(QuadElem::to_json).collect::<Vec<_>>(),
                "walls": v.walls.iter().map(|w| w + 1).collect::<Vec<_>>(),
                "depth": v.depth.to_json(),
            })).collect::<Vec<_>>(),
            "all_interior": self.vertices.iter().all(|v| v.depth.sign(Place::One) > 0),
            "form": {"c": phi.to_json(), "dim": 5},
            "gram": self.gram.iter().map(PairReport::to_json).collect::<Vec<_>>(),
            "volume": {"value": self.volume.value, "err": self.volume.err, "apex": self.volume.apex,
                       "pieces": self.volume.pieces.iter().map(|p| json!([p.0, p.1])).collect::<Vec<_>>()},
            "class": self.class.to_json(),
            "ratio": self.ratio,
            "ratio_err": self.ratio_err,
            "recognized": self.recognized.as_ref().map(rational_to_string),
        })
    }
}

/// Runs everything: vertices, Gram classification, volume from the least
/// vertex, the L-value class, and rational recognition of
/// `vol / (√|d| L(χ,3) π⁻³)` at tolerance `10·err`.
pub fn bugaenko_report(samples: usize, seed: u64, p_max: u64, exec: Execution) -> Result<BugaenkoReport> {
    let p = bugaenko_polytope();
    let vs = vertices(&p)?;
    let gram = gram_report(&p)?;
    let volume = bugaenko_volume(samples, seed, 0, exec)?;
    let class = bugaenko_class(p_max)?;
    let (ratio, ratio_err) = match class.numeric {
        Some(c) if c != 0.0 => {
            let r = volume.value / c;
            // The Euler product error is far below the QMC error.
            (Some(r), Some(10.0 * r.abs() * volume.err / volume.value))
        }
        _ => (None, None),
    };
    let recognized = match (ratio, ratio_err) {
        (Some(r), Some(e)) => recognize_rational(r, 1000, e),
        _ => None,
    };
    Ok(BugaenkoReport { vertices: vs, gram, volume, class, ratio, ratio_err, recognized })
}

/// The Coxeter diagram of the polytope, as `(i, j, k)` with
/// angle `π/k`; `k = 0` marks the dashed (ultraparallel) edge. Unlisted
/// pairs are orthogonal.
pub const DIAGRAM: [(usize, usize, u32); 6] = [(1, 6, 5), (1, 2, 3), (2, 3, 3), (3, 4, 3), (4, 5, 4), (5, 7, 0)];

/// Expected classification of a pair under [`DIAGRAM`].
pub fn diagram_label(i: usize, j: usize) -> u32 {
    DIAGRAM.iter().find(|&&(a, b, _)| (a, b) == (i.min(j), i.max(j))).map_or(2, |e| e.2)
}

/// `π / k` for a diagram label.
pub fn label_angle(k: u32) -> Option<f64> {
    (k > 0).then(|| PI / f64::from(k))
}
