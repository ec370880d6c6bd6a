//! Local bases of the piecewise polynomial space and the two projections
//! onto it: the L2-orthogonal projection (orthonormal Legendre basis) and
//! interpolation at equidistant nodes (Lagrange nodal basis).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::EvalFn;
use crate::mesh::PolySpace;
use crate::quadrature::QuadRule;

/// Legendre polynomial `L_eta(x)` by the Bonnet recurrence.
pub fn legendre_eval(eta: usize, x: f64) -> f64 {
    match eta {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..eta {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// `(L_n(x), L_n'(x))` for `|x| < 1`.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let p = legendre_eval(n, x);
    if n == 0 {
        return (p, 0.0);
    }
    let q = legendre_eval(n - 1, x);
    (p, n as f64 * (x * p - q) / (x * x - 1.0))
}

/// Fills `out[eta] = L_eta(x)` for `eta < out.len()`.
pub(crate) fn legendre_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Orthonormal basis function `psi_{j,eta}` (one-based panel `j`).
pub fn basis_eval(space: &PolySpace, j: usize, eta: usize, t: f64) -> Result<f64> {
    let n = space.n();
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange(format!("panel {j} not in 1..={n}")));
    }
    if eta > 2 * space.r() {
        return Err(Error::IndexOutOfRange(format!(
            "local degree {eta} exceeds 2r = {}",
            2 * space.r()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain(t));
    }
    if space.mesh().owner_unchecked(t) != j - 1 {
        return Ok(0.0);
    }
    let (a, b) = space.mesh().panel(j - 1);
    let h = b - a;
    Ok(((2 * eta + 1) as f64 / h).sqrt() * legendre_eval(eta, (2.0 * t - a - b) / h))
}

/// Collocation nodes, panel by panel, `2r + 1` per panel (midpoints for r = 0).
///
/// Nodes on shared breakpoints appear once for each adjacent panel.
pub fn lagrange_nodes(space: &PolySpace) -> Vec<f64> {
    let mut out = Vec::with_capacity(space.dim());
    for (a, b) in space.mesh().panels() {
        out.extend(panel_nodes(space.r(), a, b));
    }
    out
}

/// Evaluation grid: `uniform` equispaced points on [0, 1] together with every
/// panel midpoint and collocation node of `space`, sorted and deduplicated.
pub fn standard_grid(space: &PolySpace, uniform: usize) -> Vec<f64> {
    let mut g: Vec<f64> = match uniform {
        0 => Vec::new(),
        1 => vec![0.0],
        m => (0..m).map(|i| i as f64 / (m - 1) as f64).collect(),
    };
    g.extend(space.mesh().panels().map(|(a, b)| 0.5 * (a + b)));
    g.extend(lagrange_nodes(space));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn panel_nodes(r: usize, a: f64, b: f64) -> impl Iterator<Item = f64> {
    let m = 2 * r;
    (0..=m).map(move |i| {
        if r == 0 {
            0.5 * (a + b)
        } else if i == m {
            b
        } else {
            a + i as f64 * (b - a) / m as f64
        }
    })
}

/// Equidistant nodes on [-1, 1] with their barycentric weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct LocalNodes {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl LocalNodes {
    pub(crate) fn new(r: usize) -> Self {
        let m = 2 * r;
        if r == 0 {
            return LocalNodes {
                x: vec![0.0],
                w: vec![1.0],
            };
        }
        let x = (0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect();
        let mut w = Vec::with_capacity(m + 1);
        let mut binom = 1.0;
        for i in 0..=m {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            w.push(sign * binom);
            binom = binom * (m - i) as f64 / (i + 1) as f64;
        }
        LocalNodes { x, w }
    }

    /// Values of all local Lagrange basis functions at `x`.
    pub(crate) fn basis(&self, x: f64, out: &mut [f64]) {
        if self.x.len() == 1 {
            out[0] = 1.0;
            return;
        }
        if let Some(k) = self.x.iter().position(|&xi| xi == x) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[k] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for (i, (&xi, &wi)) in self.x.iter().zip(&self.w).enumerate() {
            let c = wi / (x - xi);
            out[i] = c;
            denom += c;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }

    fn interpolate(&self, x: f64, values: &[f64]) -> f64 {
        if self.x.len() == 1 {
            return values[0];
        }
        let mut num = 0.0;
        let mut denom = 0.0;
        for ((&xi, &wi), &v) in self.x.iter().zip(&self.w).zip(values) {
            if x == xi {
                return v;
            }
            let c = wi / (x - xi);
            num += c * v;
            denom += c;
        }
        num / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Coefficients in the orthonormal Legendre basis `psi_{j,eta}`.
    Legendre,
    /// Values at the collocation nodes.
    Nodal,
}

/// An element of the piecewise polynomial space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFn {
    space: PolySpace,
    coeffs: Vec<f64>,
    repr: Representation,
    nodes: LocalNodes,
}

impl PiecewiseFn {
    pub fn new(space: PolySpace, coeffs: Vec<f64>, repr: Representation) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::IndexOutOfRange(format!(
                "{} coefficients for a space of dimension {}",
                coeffs.len(),
                space.dim()
            )));
        }
        let nodes = LocalNodes::new(space.r());
        Ok(PiecewiseFn {
            space,
            coeffs,
            repr,
            nodes,
        })
    }

    pub fn space(&self) -> &PolySpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Evaluates the polynomial of zero-based panel `j` at `t` (no ownership check).
    pub fn eval_panel(&self, j: usize, t: f64) -> f64 {
        let (a, b) = self.space.mesh().panel(j);
        let h = b - a;
        let x = (2.0 * t - a - b) / h;
        let m = self.space.local_dim();
        let c = &self.coeffs[j * m..(j + 1) * m];
        match self.repr {
            Representation::Legendre => {
                let mut acc = 0.0;
                let (mut p0, mut p1) = (1.0, x);
                for (eta, &ce) in c.iter().enumerate() {
                    let p = match eta {
                        0 => 1.0,
                        1 => x,
                        _ => {
                            let k = (eta - 1) as f64;
                            let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                            p0 = p1;
                            p1 = p2;
                            p2
                        }
                    };
                    acc += ce * ((2 * eta + 1) as f64).sqrt() * p;
                }
                acc / h.sqrt()
            }
            Representation::Nodal => self.nodes.interpolate(x, c),
        }
    }
}

impl EvalFn for PiecewiseFn {
    fn eval(&self, t: f64) -> f64 {
        self.eval_panel(self.space.mesh().owner_unchecked(t), t)
    }

    fn eval_in_panel(&self, t: f64, a: f64, b: f64) -> f64 {
        let j = self.space.mesh().owner_unchecked(0.5 * (a + b));
        self.eval_panel(j, t)
    }
}

/// Checked evaluation honouring the panel ownership convention.
pub fn eval_piecewise(p: &PiecewiseFn, t: f64) -> Result<f64> {
    let j = p.space.mesh().owner(t)?;
    Ok(p.eval_panel(j, t))
}

/// Values of every local basis function of the space at `t`, taken on panel `j`.
pub(crate) fn local_basis(
    space: &PolySpace,
    repr: Representation,
    nodes: &LocalNodes,
    j: usize,
    t: f64,
    out: &mut [f64],
) {
    let (a, b) = space.mesh().panel(j);
    let h = b - a;
    let x = (2.0 * t - a - b) / h;
    match repr {
        Representation::Legendre => {
            legendre_all(x, out);
            for (eta, v) in out.iter_mut().enumerate() {
                *v *= ((2 * eta + 1) as f64 / h).sqrt();
            }
        }
        Representation::Nodal => nodes.basis(x, out),
    }
}

/// L2-orthogonal projection `P_n f`, coefficients by per-panel Gauss quadrature.
pub fn project_orthogonal(space: &PolySpace, f: &dyn EvalFn, quad: &QuadRule) -> PiecewiseFn {
    let m = space.local_dim();
    let mut coeffs = vec![0.0; space.dim()];
    let mut psi = vec![0.0; m];
    let nodes = LocalNodes::new(space.r());
    for (j, (a, b)) in space.mesh().panels().enumerate() {
        for (t, w) in quad.mapped(a, b) {
            let ft = f.eval_in_panel(t, a, b);
            local_basis(space, Representation::Legendre, &nodes, j, t, &mut psi);
            for eta in 0..m {
                coeffs[j * m + eta] += w * ft * psi[eta];
            }
        }
    }
    PiecewiseFn {
        space: space.clone(),
        coeffs,
        repr: Representation::Legendre,
        nodes,
    }
}

/// Interpolatory projection `Q_n f` at the collocation nodes.
pub fn project_interpolatory(space: &PolySpace, f: &dyn EvalFn) -> PiecewiseFn {
    let mut coeffs = Vec::with_capacity(space.dim());
    for (a, b) in space.mesh().panels() {
        coeffs.extend(panel_nodes(space.r(), a, b).map(|t| f.eval_in_panel(t, a, b)));
    }
    PiecewiseFn {
        space: space.clone(),
        coeffs,
        repr: Representation::Nodal,
        nodes: LocalNodes::new(space.r()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_rule;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_eval(0, 0.7), 1.0);
        assert_abs_diff_eq!(legendre_eval(2, 0.5), -0.125, epsilon = 1e-16);
        assert_abs_diff_eq!(legendre_eval(3, 1.0), 1.0, epsilon = 1e-15);
        for eta in 0..12 {
            assert_abs_diff_eq!(legendre_eval(eta, 1.0), 1.0, epsilon = 1e-14);
            let sign = if eta % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(legendre_eval(eta, -1.0), sign, epsilon = 1e-14);
        }
        let mut all = [0.0; 6];
        legendre_all(0.3, &mut all);
        for (eta, v) in all.iter().enumerate() {
            assert_abs_diff_eq!(*v, legendre_eval(eta, 0.3), epsilon = 1e-16);
        }
    }

    #[test]
    fn basis_values() {
        let s = PolySpace::new(2, 0).unwrap();
        assert_abs_diff_eq!(basis_eval(&s, 1, 0, 0.3).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(basis_eval(&s, 1, 0, 0.7).unwrap(), 0.0);
        assert_abs_diff_eq!(basis_eval(&s, 1, 0, 0.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(basis_eval(&s, 0, 0, 0.3).is_err());
        assert!(basis_eval(&s, 3, 0, 0.3).is_err());
        assert!(basis_eval(&s, 1, 1, 0.3).is_err());

        let s = PolySpace::new(3, 1).unwrap();
        // L_2(-1) = 1 at t_0
        assert_abs_diff_eq!(
            basis_eval(&s, 1, 2, 0.0).unwrap(),
            15f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn basis_is_normalized() {
        let q = gauss_rule(10).unwrap();
        let s = PolySpace::new(3, 2).unwrap();
        for j in 1..=3 {
            for eta in 0..=4 {
                let (a, b) = s.mesh().panel(j - 1);
                let v: f64 = q
                    .mapped(a, b)
                    .map(|(t, w)| w * basis_eval(&s, j, eta, t).unwrap().powi(2))
                    .sum();
                assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        let q = gauss_rule(10).unwrap();
        for r in 0..=3 {
            let s = PolySpace::new(3, r).unwrap();
            let dim = s.dim();
            let mut max_dev: f64 = 0.0;
            for p in 0..dim {
                for qq in 0..dim {
                    let (jp, ep) = s.split_index(p);
                    let (jq, eq) = s.split_index(qq);
                    let mut v = 0.0;
                    for (a, b) in s.mesh().panels() {
                        for (t, w) in q.mapped(a, b) {
                            v += w
                                * basis_eval(&s, jp + 1, ep, t).unwrap()
                                * basis_eval(&s, jq + 1, eq, t).unwrap();
                        }
                    }
                    let target = if p == qq { 1.0 } else { 0.0 };
                    max_dev = max_dev.max((v - target).abs());
                }
            }
            assert!(max_dev < 1e-13, "r={r} deviation {max_dev:e}");
        }
    }

    #[test]
    fn collocation_nodes() {
        let s = PolySpace::new(2, 0).unwrap();
        assert_eq!(lagrange_nodes(&s), vec![0.25, 0.75]);
        let s = PolySpace::new(2, 1).unwrap();
        assert_eq!(&lagrange_nodes(&s)[..3], &[0.0, 0.25, 0.5]);
        assert_eq!(&lagrange_nodes(&s)[3..], &[0.5, 0.75, 1.0]);
        let s = PolySpace::new(1, 2).unwrap();
        assert_eq!(lagrange_nodes(&s), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn orthogonal_projection_examples() {
        let q = gauss_rule(10).unwrap();
        let s = PolySpace::new(2, 0).unwrap();
        let p = project_orthogonal(&s, &|t: f64| t, &q);
        assert_abs_diff_eq!(eval_piecewise(&p, 0.1).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_piecewise(&p, 0.9).unwrap(), 0.75, epsilon = 1e-15);

        let p = project_orthogonal(&s, &|t: f64| (PI * t).sin(), &q);
        assert_abs_diff_eq!(eval_piecewise(&p, 0.2).unwrap(), 2.0 / PI, epsilon = 1e-12);
        assert_abs_diff_eq!(eval_piecewise(&p, 0.8).unwrap(), 2.0 / PI, epsilon = 1e-12);

        // functions already in the space are reproduced
        let s = PolySpace::new(3, 1).unwrap();
        let f = |t: f64| if t <= 1.0 / 3.0 { 2.0 * t * t - 1.0 } else { 0.5 - t };
        let p = project_orthogonal(&s, &f, &q);
        for &t in &[0.0, 0.1, 0.3, 1.0 / 3.0, 0.4, 0.77, 1.0] {
            assert_abs_diff_eq!(p.eval(t), f(t), epsilon = 1e-13);
        }
    }

    #[test]
    fn interpolatory_projection_examples() {
        let s = PolySpace::new(2, 0).unwrap();
        let p = project_interpolatory(&s, &|t: f64| t);
        assert_eq!(p.coeffs(), &[0.25, 0.75]);
        assert_eq!(eval_piecewise(&p, 0.0).unwrap(), 0.25);

        let s = PolySpace::new(1, 1).unwrap();
        let p = project_interpolatory(&s, &|t: f64| t * t);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert_abs_diff_eq!(p.eval(t), t * t, epsilon = 1e-14);
        }
    }

    #[test]
    fn piecewise_evaluation() {
        let s = PolySpace::new(2, 0).unwrap();
        let one = PiecewiseFn::new(s.clone(), vec![1.0, 1.0], Representation::Nodal).unwrap();
        assert_eq!(eval_piecewise(&one, 0.37).unwrap(), 1.0);
        let p = PiecewiseFn::new(s.clone(), vec![0.25, 0.75], Representation::Nodal).unwrap();
        assert_eq!(eval_piecewise(&p, 0.5).unwrap(), 0.25);
        assert!(matches!(eval_piecewise(&p, 1.5), Err(Error::OutOfDomain(_))));
        assert!(PiecewiseFn::new(s, vec![1.0], Representation::Nodal).is_err());
    }

    #[test]
    fn idempotence() {
        let q = gauss_rule(10).unwrap();
        let f = |t: f64| (3.0 * t).cos() + t.powi(5);
        for r in 0..=3 {
            let s = PolySpace::new(4, r).unwrap();
            let p = project_orthogonal(&s, &f, &q);
            let pp = project_orthogonal(&s, &p, &q);
            for (a, b) in p.coeffs().iter().zip(pp.coeffs()) {
                assert!((a - b).abs() < 1e-13, "r={r}: {a} vs {b}");
            }
            let i = project_interpolatory(&s, &f);
            let ii = project_interpolatory(&s, &i);
            for (a, b) in i.coeffs().iter().zip(ii.coeffs()) {
                assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0), "r={r}: {a} vs {b}");
            }
        }
    }

    fn sup_error(f: &dyn Fn(f64) -> f64, p: &PiecewiseFn) -> f64 {
        (0..=1000)
            .map(|i| i as f64 / 1000.0)
            .chain(lagrange_nodes(p.space()))
            .map(|t| (f(t) - p.eval(t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn projection_error_rates() {
        let q = gauss_rule(10).unwrap();
        let f = |t: f64| (3.0 * t).cos();
        for r in 0..=2 {
            let target = (2 * r + 1) as f64;
            let mut prev: Option<(f64, f64)> = None;
            for n in [4, 8, 16, 32] {
                let s = PolySpace::new(n, r).unwrap();
                let ep = sup_error(&f, &project_orthogonal(&s, &f, &q));
                let eq = sup_error(&f, &project_interpolatory(&s, &f));
                if let Some((pp, pq)) = prev {
                    if n == 32 {
                        let rp = (pp / ep).log2();
                        let rq = (pq / eq).log2();
                        assert!((rp - target).abs() < 0.15, "r={r} P rate {rp}");
                        assert!((rq - target).abs() < 0.15, "r={r} Q rate {rq}");
                    }
                }
                prev = Some((ep, eq));
            }
        }
    }
}
