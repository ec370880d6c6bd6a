//! Application of the integral operator and its square, and assembly of the
//! projected matrices `A = pi_n K` and `M2 = pi_n K^2` on the piecewise
//! polynomial space.
//!
//! Every quadrature subinterval lies inside one mesh panel and on one side of
//! the diagonal `t = s`, so both the kernel kink and breakpoint jumps of the
//! integrand are respected.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{
    lagrange_nodes, local_basis, project_interpolatory, project_orthogonal, LocalNodes,
    PiecewiseFn, Representation,
};
use crate::error::{Error, Result};
use crate::func::EvalFn;
use crate::kernel::GreenKernel;
use crate::linalg::Matrix;
use crate::mesh::{Mesh, PolySpace};
use crate::quadrature::QuadRule;

/// Which projection defines the discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// L2-orthogonal projection (Galerkin).
    Orthogonal,
    /// Interpolation at collocation nodes (collocation).
    Interpolatory,
}

impl Family {
    pub fn representation(self) -> Representation {
        match self {
            Family::Orthogonal => Representation::Legendre,
            Family::Interpolatory => Representation::Nodal,
        }
    }

    /// `pi_n f`.
    pub fn project(self, space: &PolySpace, f: &dyn EvalFn, quad: &QuadRule) -> PiecewiseFn {
        match self {
            Family::Orthogonal => project_orthogonal(space, f, quad),
            Family::Interpolatory => project_interpolatory(space, f),
        }
    }
}

/// Mapped Gauss nodes of every mesh panel, panel after panel.
#[derive(Debug, Clone)]
pub struct GlobalGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    per_panel: usize,
}

impl GlobalGrid {
    pub fn new(mesh: &Mesh, quad: &QuadRule) -> Self {
        let mut nodes = Vec::with_capacity(mesh.n() * quad.order());
        let mut weights = Vec::with_capacity(mesh.n() * quad.order());
        for (a, b) in mesh.panels() {
            for (t, w) in quad.mapped(a, b) {
                nodes.push(t);
                weights.push(w);
            }
        }
        GlobalGrid {
            nodes,
            weights,
            per_panel: quad.order(),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn panel_range(&self, j: usize) -> std::ops::Range<usize> {
        j * self.per_panel..(j + 1) * self.per_panel
    }
}

/// `(K f)(s)` where `f(t, j)` evaluates the integrand factor on zero-based panel `j`.
pub(crate) fn apply_k_with<F>(k: &GreenKernel, s: f64, quad: &QuadRule, mesh: &Mesh, f: F) -> f64
where
    F: Fn(f64, usize) -> f64,
{
    mesh.panels()
        .enumerate()
        .map(|(j, (a, b))| {
            quad.sum_split(
                a,
                b,
                s,
                |t| k.lower(s, t) * f(t, j),
                |t| k.upper(s, t) * f(t, j),
            )
        })
        .sum()
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `(K f)(s)`, integrating panel by panel with a split at `t = s`.
pub fn apply_k(
    k: &GreenKernel,
    f: &dyn EvalFn,
    s: f64,
    quad: &QuadRule,
    mesh: &Mesh,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfDomain(s));
    }
    let v = apply_k_with(k, s, quad, mesh, |t, j| {
        let (a, b) = mesh.panel(j);
        f.eval_in_panel(t, a, b)
    });
    finite(v, "K f")
}

/// `(K (K f))(s)` by nested quadrature; inner values come from [`apply_k`] at
/// every outer node.
pub fn apply_k2(
    k: &GreenKernel,
    f: &dyn EvalFn,
    s: f64,
    quad: &QuadRule,
    mesh: &Mesh,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfDomain(s));
    }
    let inner = |u: f64| {
        apply_k_with(k, u, quad, mesh, |t, j| {
            let (a, b) = mesh.panel(j);
            f.eval_in_panel(t, a, b)
        })
    };
    let v = apply_k_with(k, s, quad, mesh, |u, _| inner(u));
    finite(v, "K^2 f")
}

/// `(K g)(s)` for a `g` that is smooth on each mesh panel and tabulated on
/// `grid`. The panel containing `s` in its interior is re-integrated on the
/// two sides of `s` using `offgrid(t, j)` for the values there.
pub(crate) fn apply_k_tabulated<G>(
    k: &GreenKernel,
    grid: &GlobalGrid,
    values: &[f64],
    s: f64,
    quad: &QuadRule,
    mesh: &Mesh,
    offgrid: G,
) -> f64
where
    G: Fn(f64, usize) -> f64,
{
    let own = mesh.interior_owner(s);
    let mut acc = 0.0;
    for j in 0..mesh.n() {
        if Some(j) == own {
            let (a, b) = mesh.panel(j);
            acc += quad.sum_split(
                a,
                b,
                s,
                |t| k.lower(s, t) * offgrid(t, j),
                |t| k.upper(s, t) * offgrid(t, j),
            );
            continue;
        }
        for idx in grid.panel_range(j) {
            let u = grid.nodes[idx];
            acc += grid.weights[idx] * k.eval_lossy(s, u) * values[idx];
        }
    }
    acc
}

/// Precomputed local basis data for one space and family.
pub(crate) struct BasisTables<'a> {
    space: &'a PolySpace,
    repr: Representation,
    nodes: LocalNodes,
}

impl<'a> BasisTables<'a> {
    pub(crate) fn new(space: &'a PolySpace, repr: Representation) -> Self {
        BasisTables {
            space,
            repr,
            nodes: LocalNodes::new(space.r()),
        }
    }

    pub(crate) fn values(&self, j: usize, t: f64, out: &mut [f64]) {
        local_basis(self.space, self.repr, &self.nodes, j, t, out);
    }

    /// `out[zeta] = (K phi_{j,zeta})(s)` for the basis functions of panel `j`.
    pub(crate) fn kernel_moments(
        &self,
        k: &GreenKernel,
        quad: &QuadRule,
        s: f64,
        j: usize,
        out: &mut [f64],
    ) {
        let (a, b) = self.space.mesh().panel(j);
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut phi = vec![0.0; out.len()];
        let mut add = |lo: f64, hi: f64, lower: bool| {
            for (t, w) in quad.mapped(lo, hi) {
                let kv = if lower { k.lower(s, t) } else { k.upper(s, t) };
                self.values(j, t, &mut phi);
                for (o, p) in out.iter_mut().zip(&phi) {
                    *o += w * kv * p;
                }
            }
        };
        if s <= a {
            add(a, b, false);
        } else if s >= b {
            add(a, b, true);
        } else {
            add(a, s, true);
            add(s, b, false);
        }
    }

    /// `(K phi_q)(s)` for every global basis index `q`.
    pub(crate) fn kernel_row(&self, k: &GreenKernel, quad: &QuadRule, s: f64) -> Vec<f64> {
        let m = self.space.local_dim();
        let mut row = vec![0.0; self.space.dim()];
        for j in 0..self.space.n() {
            self.kernel_moments(k, quad, s, j, &mut row[j * m..(j + 1) * m]);
        }
        row
    }
}

/// Rows of `pi_n (K applied to something)`: Gauss points of each panel
/// weighted by the orthonormal basis, or the collocation nodes.
fn row_points(space: &PolySpace, family: Family, quad: &QuadRule) -> Vec<f64> {
    match family {
        Family::Orthogonal => GlobalGrid::new(space.mesh(), quad).nodes,
        Family::Interpolatory => lagrange_nodes(space),
    }
}

/// Combines values `vals[point][q]` at the row points into `pi_n` coefficients.
fn reduce_rows(
    space: &PolySpace,
    family: Family,
    quad: &QuadRule,
    vals: Vec<Vec<f64>>,
) -> Matrix {
    let dim = space.dim();
    match family {
        Family::Interpolatory => Matrix::from_rows(&vals),
        Family::Orthogonal => {
            let m = space.local_dim();
            let g = quad.order();
            let tables = BasisTables::new(space, Representation::Legendre);
            let mut out = Matrix::zeros(dim, dim);
            let mut psi = vec![0.0; m];
            for (j, (a, b)) in space.mesh().panels().enumerate() {
                for (i, (s, w)) in quad.mapped(a, b).enumerate() {
                    tables.values(j, s, &mut psi);
                    let row = &vals[j * g + i];
                    for (eta, &pv) in psi.iter().enumerate() {
                        let c = w * pv;
                        let p = j * m + eta;
                        for (q, &v) in row.iter().enumerate() {
                            out[(p, q)] += c * v;
                        }
                    }
                }
            }
            out
        }
    }
}

/// `A[p][q] = <K psi_q, psi_p>` in the orthonormal Legendre basis.
pub fn assemble_galerkin(k: &GreenKernel, space: &PolySpace, quad: &QuadRule) -> Result<Matrix> {
    assemble_first(k, space, quad, Family::Orthogonal)
}

/// `A[p][q] = (K L_q)(tau_p)` in the Lagrange nodal basis.
pub fn assemble_collocation(
    k: &GreenKernel,
    space: &PolySpace,
    quad: &QuadRule,
) -> Result<Matrix> {
    assemble_first(k, space, quad, Family::Interpolatory)
}

fn assemble_first(
    k: &GreenKernel,
    space: &PolySpace,
    quad: &QuadRule,
    family: Family,
) -> Result<Matrix> {
    let tables = BasisTables::new(space, family.representation());
    let vals: Vec<Vec<f64>> = row_points(space, family, quad)
        .par_iter()
        .map(|&s| tables.kernel_row(k, quad, s))
        .collect();
    let a = reduce_rows(space, family, quad, vals);
    if !a.is_finite() {
        return Err(Error::NonFinite("pi_n K matrix"));
    }
    Ok(a)
}

/// `M2 = pi_n K^2` restricted to the space.
///
/// `K phi_q` is tabulated once on the global Gauss grid; only the panel
/// that contains an outer point in its interior is recomputed on the two
/// sides of the kink.
pub fn assemble_second(
    k: &GreenKernel,
    space: &PolySpace,
    quad: &QuadRule,
    family: Family,
) -> Result<Matrix> {
    let mesh = space.mesh();
    let tables = BasisTables::new(space, family.representation());
    let grid = GlobalGrid::new(mesh, quad);
    let dim = space.dim();

    let inner: Vec<Vec<f64>> = grid
        .nodes
        .par_iter()
        .map(|&u| tables.kernel_row(k, quad, u))
        .collect();

    let vals: Vec<Vec<f64>> = row_points(space, family, quad)
        .par_iter()
        .map(|&s| {
            let mut acc = vec![0.0; dim];
            let own = mesh.interior_owner(s);
            for j in 0..mesh.n() {
                if Some(j) == own {
                    let (a, b) = mesh.panel(j);
                    let mut add = |lo: f64, hi: f64, lower: bool| {
                        for (u, w) in quad.mapped(lo, hi) {
                            let kv = if lower { k.lower(s, u) } else { k.upper(s, u) };
                            let row = tables.kernel_row(k, quad, u);
                            for (o, r) in acc.iter_mut().zip(&row) {
                                *o += w * kv * r;
                            }
                        }
                    };
                    add(a, s, true);
                    add(s, b, false);
                    continue;
                }
                for idx in grid.panel_range(j) {
                    let c = grid.weights[idx] * k.eval_lossy(s, grid.nodes[idx]);
                    for (o, r) in acc.iter_mut().zip(&inner[idx]) {
                        *o += c * r;
                    }
                }
            }
            acc
        })
        .collect();

    let m2 = reduce_rows(space, family, quad, vals);
    if !m2.is_finite() {
        return Err(Error::NonFinite("pi_n K^2 matrix"));
    }
    Ok(m2)
}

/// The projected operator for one family, optionally with its second power.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub space: PolySpace,
    pub family: Family,
    pub a: Matrix,
    pub m2: Option<Matrix>,
    pub quad: QuadRule,
}

impl DiscreteOperator {
    pub fn assemble(
        k: &GreenKernel,
        space: &PolySpace,
        quad: &QuadRule,
        family: Family,
        with_second: bool,
    ) -> Result<Self> {
        let a = assemble_first(k, space, quad, family)?;
        let m2 = if with_second {
            Some(assemble_second(k, space, quad, family)?)
        } else {
            None
        };
        Ok(DiscreteOperator {
            space: space.clone(),
            family,
            a,
            m2,
            quad: quad.clone(),
        })
    }

    /// `M2 - A^2`, the matrix of `pi_n K (I - pi_n) K`.
    pub fn quadratic_term(&self) -> Option<Matrix> {
        self.m2.as_ref().map(|m2| m2.sub(&self.a.matmul(&self.a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{greens_laplace, make_kernel, KernelConfig};
    use crate::quadrature::gauss_rule;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn q10() -> QuadRule {
        gauss_rule(10).unwrap()
    }

    #[test]
    fn apply_k_examples() {
        let k = greens_laplace();
        let mesh = Mesh::new(1).unwrap();
        let v = apply_k(&k, &|t: f64| (PI * t).sin(), 0.5, &q10(), &mesh).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (PI * PI), epsilon = 1e-12);
        let v = apply_k(&k, &|_t: f64| 1.0, 0.5, &q10(), &mesh).unwrap();
        assert_abs_diff_eq!(v, 0.125, epsilon = 1e-15);
        let v = apply_k(&k, &|t: f64| t.exp(), 0.0, &q10(), &mesh).unwrap();
        assert_eq!(v, 0.0);
        assert!(apply_k(&k, &|t: f64| t, 1.1, &q10(), &mesh).is_err());
    }

    #[test]
    fn apply_k_symbolic_oracle() {
        // (K 1)(s) = s (1 - s) / 2 for the Laplace Green's kernel
        let k = greens_laplace();
        let mesh = Mesh::new(3).unwrap();
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            let v = apply_k(&k, &|_t: f64| 1.0, s, &q10(), &mesh).unwrap();
            assert_abs_diff_eq!(v, s * (1.0 - s) / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn apply_k2_examples() {
        let k = greens_laplace();
        let mesh = Mesh::new(1).unwrap();
        let v = apply_k2(&k, &|_t: f64| 1.0, 0.5, &q10(), &mesh).unwrap();
        assert_abs_diff_eq!(v, 5.0 / 384.0, epsilon = 1e-15);
        let v = apply_k2(&k, &|t: f64| (PI * t).sin(), 0.5, &q10(), &mesh).unwrap();
        assert_abs_diff_eq!(v, 1.0 / PI.powi(4), epsilon = 1e-12);
        let v = apply_k2(&k, &|t: f64| t, 0.0, &q10(), &mesh).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn galerkin_closed_forms() {
        let k = greens_laplace();
        let a = assemble_galerkin(&k, &PolySpace::new(1, 0).unwrap(), &q10()).unwrap();
        assert_abs_diff_eq!(a[(0, 0)], 1.0 / 12.0, epsilon = 1e-15);

        let a = assemble_galerkin(&k, &PolySpace::new(2, 0).unwrap(), &q10()).unwrap();
        let expected = Matrix::from_rows(&[
            vec![5.0 / 96.0, 1.0 / 32.0],
            vec![1.0 / 32.0, 5.0 / 96.0],
        ]);
        assert!(a.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn collocation_closed_forms() {
        let k = greens_laplace();
        let a = assemble_collocation(&k, &PolySpace::new(1, 0).unwrap(), &q10()).unwrap();
        assert_abs_diff_eq!(a[(0, 0)], 0.125, epsilon = 1e-15);

        let a = assemble_collocation(&k, &PolySpace::new(2, 0).unwrap(), &q10()).unwrap();
        let expected = Matrix::from_rows(&[vec![0.0625, 0.03125], vec![0.03125, 0.0625]]);
        assert!(a.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn second_power_closed_forms() {
        let k = greens_laplace();
        let s = PolySpace::new(1, 0).unwrap();
        let m = assemble_second(&k, &s, &q10(), Family::Orthogonal).unwrap();
        assert_abs_diff_eq!(m[(0, 0)], 1.0 / 120.0, epsilon = 1e-15);
        let m = assemble_second(&k, &s, &q10(), Family::Interpolatory).unwrap();
        assert_abs_diff_eq!(m[(0, 0)], 5.0 / 384.0, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_kernel_gives_symmetric_galerkin_matrices() {
        let k = greens_laplace();
        for r in 0..=2 {
            let s = PolySpace::new(5, r).unwrap();
            let op = DiscreteOperator::assemble(&k, &s, &q10(), Family::Orthogonal, true).unwrap();
            assert!(op.a.asymmetry() < 1e-12);
            assert!(op.m2.as_ref().unwrap().asymmetry() < 1e-12);
        }
    }

    #[test]
    fn collocation_rows_reproduce_k_on_the_space() {
        let k = greens_laplace();
        let q = q10();
        for r in 0..=2 {
            let s = PolySpace::new(3, r).unwrap();
            let a = assemble_collocation(&k, &s, &q).unwrap();
            let f = project_interpolatory(&s, &|t: f64| (2.0 * t).cos() + t);
            let lhs = a.matvec(f.coeffs());
            for (p, &tau) in lagrange_nodes(&s).iter().enumerate() {
                let v = apply_k(&k, &f, tau, &q, s.mesh()).unwrap();
                assert!((lhs[p] - v).abs() < 1e-13, "r={r} p={p}");
            }
        }
    }

    #[test]
    fn composition_matches_matrix_products() {
        // coefficients of P K (P K f) equal A (A c); M2 c is P K K f
        let k = greens_laplace();
        let q = q10();
        let s = PolySpace::new(4, 1).unwrap();
        let op = DiscreteOperator::assemble(&k, &s, &q, Family::Orthogonal, true).unwrap();
        let f = project_orthogonal(&s, &|t: f64| (3.0 * t).sin(), &q);
        let kf = |t: f64| apply_k(&k, &f, t, &q, s.mesh()).unwrap();
        let pkf = project_orthogonal(&s, &kf, &q);
        let kpkf = |t: f64| apply_k(&k, &pkf, t, &q, s.mesh()).unwrap();
        let pkpkf = project_orthogonal(&s, &kpkf, &q);
        let aac = op.a.matvec(&op.a.matvec(f.coeffs()));
        for (x, y) in pkpkf.coeffs().iter().zip(&aac) {
            assert!((x - y).abs() < 1e-12);
        }
        let kkf = |t: f64| apply_k2(&k, &f, t, &q, s.mesh()).unwrap();
        let pkkf = project_orthogonal(&s, &kkf, &q);
        let m2c = op.m2.as_ref().unwrap().matvec(f.coeffs());
        for (x, y) in pkkf.coeffs().iter().zip(&m2c) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_application_matches_direct() {
        let k = make_kernel(&KernelConfig {
            name: "mixed".into(),
            kappa1: "t*(1-s)*exp(s-t)".into(),
            kappa2: "s*(1-t)".into(),
            alpha: None,
            exact: None,
        })
        .unwrap();
        let q = q10();
        let mesh = Mesh::new(6).unwrap();
        let grid = GlobalGrid::new(&mesh, &q);
        let g = |t: f64| (2.0 * t).sin() + t * t;
        let values: Vec<f64> = grid.nodes().iter().map(|&u| g(u)).collect();
        for i in 0..=13 {
            let s = i as f64 / 13.0;
            let v = apply_k_tabulated(&k, &grid, &values, s, &q, &mesh, |t, _| g(t));
            let w = apply_k(&k, &g, s, &q, &mesh).unwrap();
            assert!((v - w).abs() < 1e-15, "s={s}");
        }
    }

    #[test]
    fn eigenfunction_coefficients_nearly_eigenvector() {
        // residual of A c - c / pi^2 for c = P_n sin(pi t) decays like h^2
        let k = greens_laplace();
        let q = q10();
        let mut prev: Option<f64> = None;
        for n in [8, 16, 32] {
            let s = PolySpace::new(n, 0).unwrap();
            let a = assemble_galerkin(&k, &s, &q).unwrap();
            let c = project_orthogonal(&s, &|t: f64| (PI * t).sin(), &q);
            let ac = a.matvec(c.coeffs());
            // coefficients scale like sqrt(h); compare in function values
            let scale = (n as f64).sqrt();
            let res = ac
                .iter()
                .zip(c.coeffs())
                .map(|(x, y)| ((x - y / (PI * PI)) * scale).abs())
                .fold(0.0, f64::max);
            if let Some(p) = prev {
                let rate = (p / res).log2();
                assert!((rate - 2.0).abs() < 0.2, "rate {rate}");
            }
            prev = Some(res);
        }
    }
}
