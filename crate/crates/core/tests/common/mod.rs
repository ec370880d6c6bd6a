//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use greenspec::linalg::Matrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficients `c[0..=n]` of `det(x I - M) = sum c[k] x^(n-k)` by the
/// Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        // M_k = M (M_{k-1} + c_{k-1} I)
        let mut prev = mk.clone();
        for i in 0..n {
            prev[(i, i)] += c[k - 1];
        }
        mk = m.matmul(&prev);
        c[k] = -mk.trace() / k as f64;
    }
    c
}

/// All complex roots of a monic polynomial by Durand-Kerner iteration.
pub fn polynomial_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let p = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Smallest worst-case distance over all matchings of two small sets.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    fn go(a: &[Complex64], b: &mut Vec<Complex64>, best: &mut f64, acc: f64) {
        if a.is_empty() {
            *best = best.min(acc);
            return;
        }
        for j in 0..b.len() {
            let d = (a[0] - b[j]).norm();
            let x = b.remove(j);
            go(&a[1..], b, best, acc.max(d));
            b.insert(j, x);
        }
    }
    let mut best = f64::INFINITY;
    go(a, &mut b.to_vec(), &mut best, 0.0);
    best
}

pub fn random_matrices(count: usize, dim: usize, seed: u64) -> Vec<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let data = (0..dim * dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            Matrix::from_row_major(dim, dim, data)
        })
        .collect()
}

/// Last available rate in a list of optional rates.
pub fn last_rate(rates: &[Option<f64>]) -> Option<f64> {
    rates.iter().rev().find_map(|r| *r)
}
