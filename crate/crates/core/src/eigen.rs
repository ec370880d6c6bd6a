//! Dense real eigensolver, companion linearisation of quadratic eigenproblems,
//! eigenpair selection and sup-norm normalisation.
//!
//! The eigensolver balances the matrix, reduces it to upper Hessenberg form by
//! Householder reflections and runs the Francis double-shift QR iteration,
//! accumulating the transformations; eigenvectors are recovered by
//! back-substitution on the quasi-triangular Schur form (the EISPACK
//! `balanc`/`orthes`/`hqr2` sequence).

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{EvalFn, SharedFn};
use crate::linalg::Matrix;

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    /// `||M v - lambda v||_inf / ||v||_inf`.
    pub residual: f64,
}

impl EigenPair {
    /// Real parts of the eigenvector, after scaling its largest entry to 1.
    pub fn real_vector(&self) -> Vec<f64> {
        let pivot = self
            .vector
            .iter()
            .copied()
            .fold(Complex64::new(0.0, 0.0), |best, c| {
                if c.norm() > best.norm() {
                    c
                } else {
                    best
                }
            });
        self.vector.iter().map(|c| (c / pivot).re).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    LargestMagnitude,
    ClosestTo(f64),
}

/// Rule for picking one real eigenvalue out of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selector {
    pub target: Target,
    /// Eigenvalues with `|Im| > imag_tol * |lambda|` are discarded.
    pub imag_tol: f64,
}

impl Selector {
    pub const DEFAULT_IMAG_TOL: f64 = 1e-8;

    pub fn largest() -> Self {
        Selector {
            target: Target::LargestMagnitude,
            imag_tol: Self::DEFAULT_IMAG_TOL,
        }
    }

    pub fn closest_to(target: f64) -> Self {
        Selector {
            target: Target::ClosestTo(target),
            imag_tol: Self::DEFAULT_IMAG_TOL,
        }
    }
}

impl Default for Selector {
    fn default() -> Self {
        Selector::largest()
    }
}

/// Scales rows and columns by powers of two so that their norms are comparable.
/// Returns the diagonal scaling `d` with `balanced = D^-1 A D`.
fn balance(a: &mut [Vec<f64>]) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let mut d = vec![1.0; n];
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                let g = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
        if done {
            return d;
        }
    }
}

/// Householder reduction to upper Hessenberg form; returns the accumulated
/// orthogonal transformation.
fn orthes(h: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    let n = h.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n < 3 {
        return v;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f = (m..=high).rev().map(|i| ort[i] * h[i][j]).sum::<f64>() / hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut() {
            let f = (m..=high).rev().map(|j| ort[j] * row[j]).sum::<f64>() / hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m][m - 1] = scale * g;
    }
    for m in (1..high).rev() {
        if h[m][m - 1] == 0.0 {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[i][m - 1];
        }
        for j in m..=high {
            let mut g: f64 = (m..=high).map(|i| ort[i] * v[i][j]).sum();
            g = (g / ort[m]) / h[m][m - 1];
            for i in m..=high {
                v[i][j] += g * ort[i];
            }
        }
    }
    v
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Francis QR on the Hessenberg matrix `h`, accumulating into `v`, followed by
/// back-substitution for the eigenvectors. Returns real and imaginary parts.
#[allow(clippy::many_single_char_names)]
fn hqr2(h: &mut [Vec<f64>], v: &mut [Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = h.len();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let low: isize = 0;
    let high: isize = nn as isize - 1;
    let mut n: isize = nn as isize - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t, mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[i][j].abs();
        }
    }

    macro_rules! at {
        ($m:expr, $i:expr, $j:expr) => {
            $m[($i) as usize][($j) as usize]
        };
    }

    let max_sweeps = 30 * nn.max(1);
    let mut sweeps = 0usize;
    let mut iter = 0;
    while n >= low {
        let mut l = n;
        while l > low {
            s = at!(h, l - 1, l - 1).abs() + at!(h, l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if at!(h, l, l - 1).abs() <= EPS * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            at!(h, n, n) += exshift;
            d[n as usize] = at!(h, n, n);
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = at!(h, n, n - 1) * at!(h, n - 1, n);
            p = (at!(h, n - 1, n - 1) - at!(h, n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            at!(h, n, n) += exshift;
            at!(h, n - 1, n - 1) += exshift;
            x = at!(h, n, n);

            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != 0.0 {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = 0.0;
                e[n as usize] = 0.0;
                x = at!(h, n, n - 1);
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (n - 1)..nn as isize {
                    z = at!(h, n - 1, j);
                    at!(h, n - 1, j) = q * z + p * at!(h, n, j);
                    at!(h, n, j) = q * at!(h, n, j) - p * z;
                }
                for i in 0..=n {
                    z = at!(h, i, n - 1);
                    at!(h, i, n - 1) = q * z + p * at!(h, i, n);
                    at!(h, i, n) = q * at!(h, i, n) - p * z;
                }
                for i in low..=high {
                    z = at!(v, i, n - 1);
                    at!(v, i, n - 1) = q * z + p * at!(v, i, n);
                    at!(v, i, n) = q * at!(v, i, n) - p * z;
                }
            } else {
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = at!(h, n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = at!(h, n - 1, n - 1);
                w = at!(h, n, n - 1) * at!(h, n - 1, n);
            }

            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    at!(h, i, i) -= x;
                }
                s = at!(h, n, n - 1).abs() + at!(h, n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        at!(h, i, i) -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::NonConvergence(format!(
                    "{sweeps} QR sweeps on a {nn}x{nn} matrix"
                )));
            }

            // look for two consecutive small sub-diagonal elements
            let mut m = n - 2;
            while m >= l {
                z = at!(h, m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at!(h, m + 1, m) + at!(h, m, m + 1);
                q = at!(h, m + 1, m + 1) - z - r - s;
                r = at!(h, m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if at!(h, m, m - 1).abs() * (q.abs() + r.abs())
                    < EPS
                        * (p.abs()
                            * (at!(h, m - 1, m - 1).abs() + z.abs() + at!(h, m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                at!(h, i, i - 2) = 0.0;
                if i > m + 2 {
                    at!(h, i, i - 3) = 0.0;
                }
            }

            // double QR step on rows l..=n and columns m..=n
            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = at!(h, k, k - 1);
                    q = at!(h, k + 1, k - 1);
                    r = if notlast { at!(h, k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        at!(h, k, k - 1) = -s * x;
                    } else if l != m {
                        at!(h, k, k - 1) = -at!(h, k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn as isize {
                        p = at!(h, k, j) + q * at!(h, k + 1, j);
                        if notlast {
                            p += r * at!(h, k + 2, j);
                            at!(h, k + 2, j) -= p * z;
                        }
                        at!(h, k, j) -= p * x;
                        at!(h, k + 1, j) -= p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * at!(h, i, k) + y * at!(h, i, k + 1);
                        if notlast {
                            p += z * at!(h, i, k + 2);
                            at!(h, i, k + 2) -= p * r;
                        }
                        at!(h, i, k) -= p;
                        at!(h, i, k + 1) -= p * q;
                    }
                    for i in low..=high {
                        p = x * at!(v, i, k) + y * at!(v, i, k + 1);
                        if notlast {
                            p += z * at!(v, i, k + 2);
                            at!(v, i, k + 2) -= p * r;
                        }
                        at!(v, i, k) -= p;
                        at!(v, i, k + 1) -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    if norm == 0.0 {
        return Ok((d, e));
    }

    // back-substitute in the Schur form
    for n in (0..nn as isize).rev() {
        p = d[n as usize];
        q = e[n as usize];

        if q == 0.0 {
            let mut l = n;
            at!(h, n, n) = 1.0;
            for i in (0..n).rev() {
                w = at!(h, i, i) - p;
                r = 0.0;
                for j in l..=n {
                    r += at!(h, i, j) * at!(h, j, n);
                }
                if e[i as usize] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        at!(h, i, n) = if w != 0.0 { -r / w } else { -r / (EPS * norm) };
                    } else {
                        x = at!(h, i, i + 1);
                        y = at!(h, i + 1, i);
                        q = (d[i as usize] - p) * (d[i as usize] - p) + e[i as usize] * e[i as usize];
                        t = (x * s - z * r) / q;
                        at!(h, i, n) = t;
                        at!(h, i + 1, n) = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    t = at!(h, i, n).abs();
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            at!(h, j, n) /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            let mut l = n - 1;
            if at!(h, n, n - 1).abs() > at!(h, n - 1, n).abs() {
                at!(h, n - 1, n - 1) = q / at!(h, n, n - 1);
                at!(h, n - 1, n) = -(at!(h, n, n) - p) / at!(h, n, n - 1);
            } else {
                let (cr, ci) = cdiv(0.0, -at!(h, n - 1, n), at!(h, n - 1, n - 1) - p, q);
                at!(h, n - 1, n - 1) = cr;
                at!(h, n - 1, n) = ci;
            }
            at!(h, n, n - 1) = 0.0;
            at!(h, n, n) = 1.0;
            for i in (0..n - 1).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=n {
                    ra += at!(h, i, j) * at!(h, j, n - 1);
                    sa += at!(h, i, j) * at!(h, j, n);
                }
                w = at!(h, i, i) - p;

                if e[i as usize] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        at!(h, i, n - 1) = cr;
                        at!(h, i, n) = ci;
                    } else {
                        x = at!(h, i, i + 1);
                        y = at!(h, i + 1, i);
                        let di = d[i as usize] - p;
                        let mut vr = di * di + e[i as usize] * e[i as usize] - q * q;
                        let vi = di * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = EPS
                                * norm
                                * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(
                            x * r - z * ra + q * sa,
                            x * s - z * sa - q * ra,
                            vr,
                            vi,
                        );
                        at!(h, i, n - 1) = cr;
                        at!(h, i, n) = ci;
                        if x.abs() > z.abs() + q.abs() {
                            at!(h, i + 1, n - 1) =
                                (-ra - w * at!(h, i, n - 1) + q * at!(h, i, n)) / x;
                            at!(h, i + 1, n) = (-sa - w * at!(h, i, n) - q * at!(h, i, n - 1)) / x;
                        } else {
                            let (cr, ci) = cdiv(
                                -r - y * at!(h, i, n - 1),
                                -s - y * at!(h, i, n),
                                z,
                                q,
                            );
                            at!(h, i + 1, n - 1) = cr;
                            at!(h, i + 1, n) = ci;
                        }
                    }
                    t = at!(h, i, n - 1).abs().max(at!(h, i, n).abs());
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            at!(h, j, n - 1) /= t;
                            at!(h, j, n) /= t;
                        }
                    }
                }
            }
        }
    }

    // back-transform to eigenvectors of the original (balanced) matrix
    for j in (low..nn as isize).rev() {
        for i in low..=high {
            z = 0.0;
            for k in low..=j.min(high) {
                z += at!(v, i, k) * at!(h, k, j);
            }
            at!(v, i, j) = z;
        }
    }
    Ok((d, e))
}

fn residual(m: &Matrix, value: Complex64, vector: &[Complex64]) -> f64 {
    let n = m.rows();
    let vnorm = vector.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut acc = -value * vector[i];
        for (j, &a) in m.row(i).iter().enumerate() {
            acc += a * vector[j];
        }
        worst = worst.max(acc.norm());
    }
    worst / vnorm
}

/// All eigenpairs of a real square matrix.
pub fn solve_dense_eigen(m: &Matrix) -> Result<Vec<EigenPair>> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::IndexOutOfRange(format!(
            "eigensolver needs a nonempty square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigensolver input"));
    }
    let n = m.rows();
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let scaling = balance(&mut h);
    let mut v = orthes(&mut h);
    let (re, im) = hqr2(&mut h, &mut v)?;

    let mut pairs = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        let col = |k: usize| -> Vec<f64> { (0..n).map(|i| v[i][k] * scaling[i]).collect() };
        if im[j] == 0.0 {
            let value = Complex64::new(re[j], 0.0);
            let vector: Vec<Complex64> = col(j).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            pairs.push(finish(m, value, vector));
            j += 1;
        } else {
            let (vr, vi) = (col(j), col(j + 1));
            let value = Complex64::new(re[j], im[j]);
            let vector: Vec<Complex64> =
                vr.iter().zip(&vi).map(|(&a, &b)| Complex64::new(a, b)).collect();
            let conj_vector = vector.iter().map(|c| c.conj()).collect();
            pairs.push(finish(m, value, vector));
            pairs.push(finish(m, value.conj(), conj_vector));
            j += 2;
        }
    }
    Ok(pairs)
}

fn finish(m: &Matrix, value: Complex64, mut vector: Vec<Complex64>) -> EigenPair {
    let scale = vector.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        vector.iter_mut().for_each(|c| *c /= scale);
    }
    let residual = residual(m, value, &vector);
    EigenPair {
        value,
        vector,
        residual,
    }
}

/// Picks one eigenpair according to `sel`.
pub fn select_eigenpair(pairs: &[EigenPair], sel: &Selector) -> Result<EigenPair> {
    let admissible = |p: &EigenPair| p.value.im.abs() <= sel.imag_tol * p.value.norm();
    let score = |p: &EigenPair| match sel.target {
        Target::LargestMagnitude => -p.value.norm(),
        Target::ClosestTo(t) => (p.value - t).norm(),
    };
    let mut best: Option<&EigenPair> = None;
    for p in pairs.iter().filter(|p| admissible(p)) {
        best = match best {
            None => Some(p),
            Some(b) => {
                let (sp, sb) = (score(p), score(b));
                if sp < sb || (sp == sb && p.value.re > b.value.re) {
                    Some(p)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.cloned().ok_or(Error::NoRealCandidate)
}

/// Solves `lambda^2 u = lambda A u + C u` through the companion matrix
/// `[[A, C], [I, 0]]` acting on `(lambda u, u)`, and returns the selected
/// eigenvalue with the lower block `u`.
pub fn solve_quadratic_eigen(a: &Matrix, c: &Matrix, sel: &Selector) -> Result<EigenPair> {
    let n = a.rows();
    if !a.is_square() || !c.is_square() || c.rows() != n {
        return Err(Error::IndexOutOfRange(
            "quadratic eigenproblem needs square matrices of equal size".into(),
        ));
    }
    let mut comp = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            comp[(i, j)] = a[(i, j)];
            comp[(i, n + j)] = c[(i, j)];
        }
        comp[(n + i, i)] = 1.0;
    }
    let pairs = solve_dense_eigen(&comp)?;
    let chosen = select_eigenpair(&pairs, sel)?;
    let full = chosen.vector.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let u: Vec<Complex64> = chosen.vector[n..].to_vec();
    let unorm = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if unorm < 1e-12 * full || unorm == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let u: Vec<Complex64> = u.iter().map(|z| z / unorm).collect();
    let lambda = chosen.value;
    let au = complex_matvec(a, &u);
    let cu = complex_matvec(c, &u);
    let res = u
        .iter()
        .zip(au.iter().zip(&cu))
        .map(|(ui, (aui, cui))| (lambda * lambda * ui - lambda * aui - cui).norm())
        .fold(0.0, f64::max);
    Ok(EigenPair {
        value: lambda,
        vector: u,
        residual: res,
    })
}

fn complex_matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .zip(v)
                .map(|(&a, &x)| a * x)
                .sum::<Complex64>()
        })
        .collect()
}

/// Rescales `f` to grid sup-norm one, positive at the first grid maximiser of `|f|`.
pub fn normalize_sup(f: SharedFn, grid: &[f64]) -> Result<SharedFn> {
    let (scale, _) = sup_scale(&f, grid)?;
    Ok(f.scaled(scale))
}

/// The factor `sign / max|f|` applied by [`normalize_sup`], with the maximiser.
pub fn sup_scale(f: &dyn EvalFn, grid: &[f64]) -> Result<(f64, f64)> {
    let mut best = (0.0f64, 0.0f64, f64::NAN);
    for &t in grid {
        let v = f.eval(t);
        if !v.is_finite() {
            return Err(Error::NonFinite("eigenfunction on the evaluation grid"));
        }
        if v.abs() > best.0 {
            best = (v.abs(), v, t);
        }
    }
    if best.0 < 1e-14 {
        return Err(Error::ZeroFunction);
    }
    Ok((best.1.signum() / best.0, best.2))
}
