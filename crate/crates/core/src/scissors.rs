//! Formal scissors-congruence sums and Dehn invariants with values in
//! `R ⊗ R/πQ`.

use std::f64::consts::PI;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::hypmodel::{dist, HPoint};
use crate::linalg;
use crate::qfield::{rational_to_f64, recognize_rational, Rational};
use crate::simplex::{ProductSimplex, Simplex};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_DEN: u64 = 10_000;

/// Interior dihedral angles of an n-simplex: entry `[k][l]` is the angle
/// between the facets opposite vertices `k` and `l`.
///
/// With `G` the Minkowski Gram matrix of the hyperboloid vertices and
/// `C = G^{-1}`, the vectors `u_k = Σ C_kj v_j` are inward facet normals and
/// `cos θ_kl = -C_kl / √(C_kk C_ll)`.
pub fn facet_angles(s: &Simplex) -> Result<Vec<Vec<f64>>> {
    if s.dim() != s.ambient() {
        return Err(invalid("dihedral angles need a top-dimensional simplex"));
    }
    if s.is_degenerate() {
        return Err(Error::Degenerate("degenerate simplex".into()));
    }
    let v: Vec<Vec<f64>> = s.vertices.iter().map(HPoint::to_hyperboloid).collect();
    let n = v.len();
    let g: linalg::Matrix =
        (0..n).map(|i| (0..n).map(|j| crate::hypmodel::minkowski(&v[i], &v[j])).collect()).collect();
    let mut c = vec![vec![0.0; n]; n];
    for j in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        let col = linalg::solve(&g, &e).ok_or_else(|| Error::Degenerate("singular Gram matrix".into()))?;
        for i in 0..n {
            c[i][j] = col[i];
        }
    }
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    if k == l {
                        0.0
                    } else {
                        (-c[k][l] / (c[k][k] * c[l][l]).sqrt()).clamp(-1.0, 1.0).acos()
                    }
                })
                .collect()
        })
        .collect())
}

/// Dihedral angle of a tetrahedron at edge `(i, j)`.
pub fn edge_angle(angles: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let rest: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
    angles[rest[0]][rest[1]]
}

/// A finite formal sum `Σ ℓ ⊗ θ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DehnSum {
    pub terms: Vec<(f64, f64)>,
}

impl DehnSum {
    pub fn new(terms: Vec<(f64, f64)>) -> DehnSum {
        DehnSum { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn scaled(&self, c: f64) -> DehnSum {
        DehnSum { terms: self.terms.iter().map(|&(l, a)| (c * l, a)).collect() }
    }

    pub fn extend(&mut self, other: &DehnSum) {
        self.terms.extend_from_slice(&other.terms);
    }

    pub fn minus(&self, other: &DehnSum) -> DehnSum {
        let mut out = self.clone();
        out.extend(&other.scaled(-1.0));
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(l, a)| json!([l, a])).collect())
    }

    pub fn from_json(v: &Value) -> Result<DehnSum> {
        let arr = v.as_array().ok_or_else(|| invalid("Dehn sum must be an array of [length, angle]"))?;
        let terms = arr
            .iter()
            .map(|t| match t.as_array().map(Vec::as_slice) {
                Some([l, a]) => match (l.as_f64(), a.as_f64()) {
                    (Some(l), Some(a)) if l.is_finite() && a.is_finite() => Ok((l, a)),
                    _ => Err(invalid("Dehn terms must be finite numbers")),
                },
                _ => Err(invalid("Dehn terms must be [length, angle] pairs")),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DehnSum { terms })
    }
}

/// The six terms `(ℓ_ij, θ_ij)` of a finite tetrahedron in H³, with lengths
/// multiplied by the simplex sign. Degenerate input gives the empty sum.
pub fn dehn3(s: &Simplex) -> Result<DehnSum> {
    if s.dim() != 3 || s.ambient() != 3 {
        return Err(invalid("dehn3 needs a tetrahedron in H^3"));
    }
    if s.ideal_count() > 0 {
        return Err(Error::InfiniteLength);
    }
    let sign = s.sign();
    if sign == 0 {
        return Ok(DehnSum::default());
    }
    let angles = match facet_angles(s) {
        Ok(a) => a,
        Err(Error::Degenerate(_)) => return Ok(DehnSum::default()),
        Err(e) => return Err(e),
    };
    let mut terms = Vec::with_capacity(6);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let l = dist(&s.vertices[i], &s.vertices[j])?;
            terms.push((f64::from(sign) * l, edge_angle(&angles, i, j)));
        }
    }
    Ok(DehnSum { terms })
}

/// The term of [`dehn3`] at edge `(i, j)`.
pub fn dehn3_edge(s: &Simplex, i: usize, j: usize) -> Result<(f64, f64)> {
    let angles = facet_angles(s)?;
    Ok((f64::from(s.sign()) * dist(&s.vertices[i], &s.vertices[j])?, edge_angle(&angles, i, j)))
}

fn in_pi_q(theta: f64, tol: f64, max_den: u64) -> bool {
    recognize_rational(theta / PI, max_den, tol / PI).is_some()
}

/// Angle reduced to `[0, π)`.
fn mod_pi(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

fn normalize(terms: &mut [(f64, f64)]) {
    for t in terms.iter_mut() {
        if t.0 < 0.0 {
            *t = (-t.0, -t.1);
        }
        t.1 = mod_pi(t.1);
    }
}

fn merge_equal_lengths(terms: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (l, a) in terms {
        match out.iter_mut().find(|(m, _)| (m - l).abs() <= tol * l.max(1.0)) {
            Some(t) => t.1 += a,
            None => out.push((l, a)),
        }
    }
    out
}

fn merge_equal_angles(terms: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (l, a) in terms {
        match out.iter_mut().find(|(_, b)| (a - b).abs() <= tol) {
            Some(t) => t.0 += l,
            None => out.push((l, a)),
        }
    }
    out
}

fn merge_angle_classes(terms: Vec<(f64, f64)>, tol: f64, max_den: u64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (l, a) in terms {
        let hit = out.iter_mut().find_map(|t| {
            if in_pi_q(a - t.1, tol, max_den) {
                Some((t, 1.0))
            } else if in_pi_q(a + t.1, tol, max_den) {
                Some((t, -1.0))
            } else {
                None
            }
        });
        match hit {
            Some((t, s)) => t.0 += s * l,
            None => out.push((l, a)),
        }
    }
    out
}

/// Canonical form in `R ⊗ R/πQ`, repeated until nothing changes: lengths
/// made positive, equal angles merged, equal lengths merged by adding
/// angles, angles in πQ dropped, πQ-translates (and reflections) of an
/// angle merged by adding signed lengths, negligible lengths dropped.
///
/// Exact merges run before the πQ test because at `tol = 1e-9` and
/// `max_den = 10⁴` about 2% of unrelated angle pairs pass it by accident.
pub fn reduce(dsum: &DehnSum, tol: f64, max_den: u64) -> DehnSum {
    let mut terms: Vec<(f64, f64)> = dsum.terms.iter().copied().filter(|(l, _)| l.abs() > tol).collect();
    for _ in 0..16 {
        let before = terms.clone();
        normalize(&mut terms);
        terms = merge_equal_angles(terms, tol);
        terms.retain(|&(l, _)| l.abs() > tol);
        normalize(&mut terms);
        terms = merge_equal_lengths(terms, tol);
        normalize(&mut terms);
        terms.retain(|&(_, a)| !in_pi_q(a, tol, max_den));
        terms = merge_angle_classes(terms, tol, max_den);
        terms.retain(|&(l, _)| l.abs() > tol);
        normalize(&mut terms);
        terms.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)));
        if terms.len() == before.len()
            && terms.iter().zip(&before).all(|(x, y)| (x.0 - y.0).abs() <= tol && (x.1 - y.1).abs() <= tol)
        {
            break;
        }
    }
    DehnSum { terms }
}

pub fn is_zero_dehn(dsum: &DehnSum, tol: f64, max_den: u64) -> bool {
    reduce(dsum, tol, max_den).is_empty()
}

/// Formal sum `Σ c_i [P_i]` of product simplices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScissorsSum {
    pub terms: Vec<(Rational, ProductSimplex)>,
}

impl ScissorsSum {
    pub fn new(terms: Vec<(Rational, ProductSimplex)>) -> Result<ScissorsSum> {
        if let Some((_, first)) = terms.first() {
            let sig: Vec<usize> = first.factors.iter().map(Simplex::ambient).collect();
            for (_, p) in &terms {
                if p.factors.iter().map(Simplex::ambient).collect::<Vec<_>>() != sig {
                    return Err(invalid("all terms must share the ambient dimension signature"));
                }
            }
        }
        Ok(ScissorsSum { terms })
    }

    pub fn single(s: Simplex) -> ScissorsSum {
        ScissorsSum { terms: vec![(Rational::from_integer(1.into()), ProductSimplex::new(vec![s]))] }
    }

    /// Dehn invariant of a sum of tetrahedra in H³.
    pub fn dehn(&self) -> Result<DehnSum> {
        let mut out = DehnSum::default();
        for (c, p) in &self.terms {
            if p.factors.len() != 1 {
                return Err(invalid("plain Dehn invariant needs single-factor terms"));
            }
            out.extend(&dehn3(&p.factors[0])?.scaled(rational_to_f64(c)));
        }
        Ok(out)
    }
}

/// One term `(ℓ ⊗ θ) ⊗ [companions]` of a generalized Dehn invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct GenDehnTerm {
    pub length: f64,
    pub angle: f64,
    /// The untouched factors, in their original order.
    pub companions: Vec<Simplex>,
}

fn same_simplex(a: &Simplex, b: &Simplex, tol: f64) -> bool {
    a.vertices.len() == b.vertices.len()
        && a.sign() == b.sign()
        && a.vertices.iter().zip(&b.vertices).all(|(p, q)| {
            p.ideal == q.ideal && p.to_klein().iter().zip(q.to_klein()).all(|(x, y)| (x - y).abs() <= tol)
        })
}

/// Applies [`dehn3`] in factor `factor` of every term, scaling by the
/// coefficient and carrying the other factors along symbolically.
pub fn generalized_dehn(p: &ScissorsSum, factor: usize) -> Result<Vec<GenDehnTerm>> {
    let mut out = Vec::new();
    for (c, ps) in &p.terms {
        let f = ps.factors.get(factor).ok_or_else(|| invalid(format!("no factor {factor}")))?;
        if f.ambient() != 3 {
            return Err(Error::Unsupported(format!("Dehn invariant in dimension {} is not implemented", f.ambient())));
        }
        if c.is_zero() {
            continue;
        }
        let companions: Vec<Simplex> =
            ps.factors.iter().enumerate().filter(|(i, _)| *i != factor).map(|(_, s)| s.clone()).collect();
        for (l, a) in dehn3(f)?.scaled(rational_to_f64(c)).terms {
            out.push(GenDehnTerm { length: l, angle: a, companions: companions.clone() });
        }
    }
    Ok(out)
}

/// Groups generalized terms by companion and reduces each group's Dehn part.
pub fn reduce_generalized(terms: &[GenDehnTerm], tol: f64, max_den: u64) -> Vec<GenDehnTerm> {
    let mut groups: Vec<(Vec<Simplex>, DehnSum)> = Vec::new();
    for t in terms {
        let key = groups.iter_mut().find(|(c, _)| {
            c.len() == t.companions.len() && c.iter().zip(&t.companions).all(|(a, b)| same_simplex(a, b, tol))
        });
        match key {
            Some((_, d)) => d.terms.push((t.length, t.angle)),
            None => groups.push((t.companions.clone(), DehnSum::new(vec![(t.length, t.angle)]))),
        }
    }
    groups
        .into_iter()
        .flat_map(|(c, d)| {
            reduce(&d, tol, max_den)
                .terms
                .into_iter()
                .map(move |(length, angle)| GenDehnTerm { length, angle, companions: c.clone() })
        })
        .collect()
}

/// `k` tetrahedra sharing the edge between `(0,0,-h)` and `(0,0,h)` in the
/// Klein ball, with third and fourth vertices at consecutive random angles
/// around that axis. The dihedral angles at the shared edge (vertices 0 and
/// 1 of every piece) sum to 2π.
pub fn edge_cycle(k: usize, seed: u64) -> Result<Vec<Simplex>> {
    if k < 3 {
        return Err(invalid("an edge cycle needs at least 3 tetrahedra"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 0.4;
    // Random cut points with every gap below π.
    let phis: Vec<f64> = loop {
        let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x *= 2.0 * PI / total);
        if w.iter().all(|&x| x < PI - 0.1) {
            let start = rng.random_range(0.0..2.0 * PI);
            break w
                .iter()
                .scan(start, |acc, x| {
                    let a = *acc;
                    *acc += x;
                    Some(a)
                })
                .collect();
        }
    };
    let pts: Vec<Vec<f64>> = phis
        .iter()
        .map(|&phi| {
            let r = rng.random_range(0.2..0.6);
            let z = rng.random_range(-0.3..0.3);
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    (0..k)
        .map(|i| {
            Simplex::from_klein(vec![
                vec![0.0, 0.0, -h],
                vec![0.0, 0.0, h],
                pts[i].clone(),
                pts[(i + 1) % k].clone(),
            ])
        })
        .collect()
}
