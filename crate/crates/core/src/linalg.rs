//! Small dense linear algebra, in floating point and exactly over a
//! quadratic field.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qfield::{Place, QuadElem, Rational};

pub type Matrix = Vec<Vec<f64>>;

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(m: &Matrix) -> f64 {
    let n = m.len();
    let mut a = m.clone();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

/// Solves `m x = b`; `None` when the pivot falls below `1e-300`.
pub fn solve(m: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = m.len();
    let mut a: Matrix = m.iter().zip(b).map(|(row, &v)| row.iter().copied().chain([v]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Numerical rank with pivots below `tol` (relative to the largest entry)
/// treated as zero.
pub fn rank(rows: &Matrix, tol: f64) -> usize {
    let mut a = rows.clone();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let p = (r..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c].abs() <= tol * scale {
            continue;
        }
        a.swap(p, r);
        for i in (r + 1)..a.len() {
            let f = a[i][c] / a[r][c];
            for k in c..cols {
                a[i][k] -= f * a[r][k];
            }
        }
        r += 1;
    }
    r
}

/// A unit vector orthogonal (Euclidean) to the `n - 1` given rows of length
/// `n`, via cofactor expansion.
pub fn kernel_vector(rows: &Matrix) -> Vec<f64> {
    let n = rows.len() + 1;
    let mut v: Vec<f64> = (0..n)
        .map(|j| {
            let minor: Matrix =
                rows.iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * det(&minor)
        })
        .collect();
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 0.0 {
        v.iter_mut().for_each(|x| *x /= len);
    }
    v
}

/// Exact determinant over a quadratic field.
pub fn det_exact(m: &[Vec<QuadElem>]) -> Result<QuadElem> {
    let n = m.len();
    let d = m.first().and_then(|r| r.first()).map_or(1, QuadElem::d);
    let mut a: Vec<Vec<QuadElem>> = m.to_vec();
    let mut acc = QuadElem::one(d);
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Ok(QuadElem::zero(d));
        };
        if p != c {
            a.swap(p, c);
            acc = -acc;
        }
        acc = acc.checked_mul(&a[c][c])?;
        let inv = a[c][c].inv()?;
        for r in (c + 1)..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].checked_mul(&inv)?;
            for k in c..n {
                let t = f.checked_mul(&a[c][k])?;
                a[r][k] = a[r][k].checked_sub(&t)?;
            }
        }
    }
    Ok(acc)
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref_exact(a: &mut [Vec<QuadElem>]) -> Result<Vec<usize>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].inv()?;
        for k in c..cols {
            a[r][k] = a[r][k].checked_mul(&inv)?;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in c..cols {
                    let t = f.checked_mul(&a[r][k])?;
                    a[i][k] = a[i][k].checked_sub(&t)?;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok(pivots)
}

pub fn rank_exact(m: &[Vec<QuadElem>]) -> Result<usize> {
    let mut a = m.to_vec();
    Ok(rref_exact(&mut a)?.len())
}

/// The unique solution of a square system, or `Degenerate` when singular.
pub fn solve_exact(m: &[Vec<QuadElem>], b: &[QuadElem]) -> Result<Vec<QuadElem>> {
    let n = m.len();
    let mut a: Vec<Vec<QuadElem>> =
        m.iter().zip(b).map(|(row, v)| row.iter().cloned().chain([v.clone()]).collect()).collect();
    let pivots = rref_exact(&mut a)?;
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return Err(Error::Degenerate("singular system".into()));
    }
    Ok(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Reduced row echelon form over Q in place; returns the pivot columns.
pub fn rref_rational(a: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for k in c..cols {
            a[r][k] = &a[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in c..cols {
                    let t = &f * &a[r][k];
                    a[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over Q of an integer or rational matrix.
pub fn rank_rational(m: &[Vec<Rational>]) -> usize {
    let mut a = m.to_vec();
    rref_rational(&mut a).len()
}

/// The unique solution of a square rational system, or `None` if singular.
pub fn solve_rational(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> =
        m.iter().zip(b).map(|(row, v)| row.iter().cloned().chain([v.clone()]).collect()).collect();
    let pivots = rref_rational(&mut a);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// A basis of the right kernel of a rational matrix with `cols` columns.
pub fn kernel_rational(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.to_vec();
    let pivots = rref_rational(&mut a);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::from_integer(1.into());
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][free].clone();
            }
            v
        })
        .collect()
}

/// Exact determinant over Q.
pub fn det_rational(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut acc = Rational::from_integer(1.into());
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            acc = -acc;
        }
        acc *= &a[c][c];
        let inv = a[c][c].recip();
        for r in (c + 1)..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] * &inv;
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    acc
}

/// Float copy of an exact matrix at the first embedding.
pub fn embed_matrix(m: &[Vec<QuadElem>]) -> Matrix {
    m.iter().map(|r| r.iter().map(|x| x.embed(Place::One)).collect()).collect()
}

pub fn is_zero_row(r: &[Rational]) -> bool {
    r.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{int, rat};

    #[test]
    fn float_determinant_and_solve() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        assert!((det(&m) - 18.0).abs() < 1e-12);
        let x = solve(&m, &[3.0, 5.0, 5.0]).unwrap();
        for (a, b) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(rank(&vec![vec![1.0, 2.0], vec![2.0, 4.0]], 1e-12), 1);
    }

    #[test]
    fn kernel_is_orthogonal() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![0.0, 1.0, -1.0]];
        let v = kernel_vector(&rows);
        for r in &rows {
            assert!(r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn exact_over_golden_field() {
        let phi = QuadElem::golden();
        let one = QuadElem::one(5);
        let z = QuadElem::zero(5);
        let m = vec![vec![phi.clone(), one.clone()], vec![one.clone(), z.clone()]];
        assert_eq!(det_exact(&m).unwrap(), -one.clone());
        let x = solve_exact(&m, &[one.clone(), phi.clone()]).unwrap();
        assert_eq!(x[0], phi);
        assert_eq!(&(&phi * &x[0]) + &x[1], one);
        let singular = vec![vec![phi.clone(), one.clone()], vec![&phi * &phi, phi.clone()]];
        assert_eq!(rank_exact(&singular).unwrap(), 1);
        assert!(solve_exact(&singular, &[one.clone(), one]).is_err());
    }

    #[test]
    fn rational_rank() {
        let m = vec![vec![int(1), rat(1, 2)], vec![int(2), int(1)], vec![int(0), int(0)]];
        assert_eq!(rank_rational(&m), 1);
        let k = kernel_rational(&m, m[0].len());
        assert_eq!(k.len(), m[0].len() - 1);
        for v in &k {
            for row in &m {
                assert!(row.iter().zip(v).map(|(a, b)| a * b).sum::<Rational>().is_zero());
            }
        }
    }
}
