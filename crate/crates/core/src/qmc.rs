//! Randomized quasi-Monte Carlo: Halton points with Cranley-Patterson
//! rotations, and maps from the unit cube onto simplices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{map_indexed, Execution};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Van der Corput radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Point `i` of the `dim`-dimensional Halton sequence, shifted modulo 1.
pub fn halton_shifted(i: u64, shift: &[f64], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let v = radical_inverse(i, PRIMES[k]) + shift[k];
        *o = if v >= 1.0 { v - 1.0 } else { v };
    }
}

/// Maps `u ∈ [0,1)^m` to uniform barycentric weights on an m-simplex
/// (m + 1 weights summing to one) by successive Beta splits.
pub fn cube_to_simplex(u: &[f64], bary: &mut [f64]) {
    let m = u.len();
    let mut rem = 1.0;
    for i in 0..m {
        let b = rem * (1.0 - u[i].powf(1.0 / (m - i) as f64));
        bary[i] = b;
        rem -= b;
    }
    bary[m] = rem.max(0.0);
}

/// Mean and standard error of a randomized QMC estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// Averages `f` over `batches` independently shifted copies of the first
/// `points` Halton points in dimension `dim`.
///
/// Batches run through [`map_indexed`], and batch means are combined in
/// index order, so the result does not depend on the execution mode.
pub fn integrate<F>(dim: usize, points: usize, batches: usize, seed: u64, exec: Execution, f: F) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    assert!(dim <= PRIMES.len(), "QMC dimension {dim} too large");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> =
        (0..batches).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let means = map_indexed(exec, batches, |b| {
        let mut u = vec![0.0; dim];
        let mut acc = 0.0;
        for i in 0..points {
            halton_shifted(i as u64 + 1, &shifts[b], &mut u);
            acc += f(&u);
        }
        acc / points as f64
    });
    let nb = batches as f64;
    let mean = means.iter().sum::<f64>() / nb;
    let var = if batches > 1 {
        means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (nb - 1.0)
    } else {
        0.0
    };
    Estimate { value: mean, err: (var / nb).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn simplex_map_is_uniform() {
        // Mean of each barycentric weight on a uniform m-simplex is 1/(m+1).
        let est = integrate(3, 20_000, 8, 1, Execution::Sequential, |u| {
            let mut b = [0.0; 4];
            cube_to_simplex(u, &mut b);
            b[2]
        });
        assert!((est.value - 0.25).abs() < 1e-4);
    }

    #[test]
    fn polynomial_integral_and_modes() {
        let f = |u: &[f64]| u[0] * u[1] * u[1];
        let a = integrate(2, 10_000, 16, 5, Execution::Sequential, f);
        let b = integrate(2, 10_000, 16, 5, Execution::Parallel, f);
        assert_eq!(a, b);
        assert!((a.value - 1.0 / 6.0).abs() < 5.0 * a.err.max(1e-6));
    }
}
