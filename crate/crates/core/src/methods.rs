//! The eight eigenvalue methods: classical, Sloan-iterated, modified and
//! iterated-modified projection, each with the orthogonal (Galerkin) and the
//! interpolatory (collocation) projection.
//!
//! The modified operator `pi_n K + K pi_n - pi_n K pi_n` is handled through
//! the split `phi = u + w`, `u = pi_n phi`. Its eigenproblem becomes
//! `lambda w = (I - pi_n) K u` together with the quadratic matrix problem
//! `lambda^2 u = lambda A u + (M2 - A^2) u`. Iterated eigenfunctions stay
//! lazy: they are evaluated by quadrature on demand and never re-expanded in
//! the discrete space.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{standard_grid, PiecewiseFn};
use crate::discretize::{apply_k_tabulated, apply_k_with, DiscreteOperator, Family, GlobalGrid};
use crate::eigen::{select_eigenpair, solve_dense_eigen, solve_quadratic_eigen, sup_scale, Selector};
use crate::error::{Error, Result};
use crate::func::{EvalFn, SharedFn};
use crate::kernel::GreenKernel;
use crate::mesh::PolySpace;
use crate::quadrature::{QuadRule, DEFAULT_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Galerkin,
    IteratedGalerkin,
    ModifiedGalerkin,
    IteratedModifiedGalerkin,
    Collocation,
    IteratedCollocation,
    ModifiedCollocation,
    IteratedModifiedCollocation,
}

impl MethodTag {
    pub const ALL: [MethodTag; 8] = [
        MethodTag::Galerkin,
        MethodTag::IteratedGalerkin,
        MethodTag::ModifiedGalerkin,
        MethodTag::IteratedModifiedGalerkin,
        MethodTag::Collocation,
        MethodTag::IteratedCollocation,
        MethodTag::ModifiedCollocation,
        MethodTag::IteratedModifiedCollocation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodTag::Galerkin => "galerkin",
            MethodTag::IteratedGalerkin => "iterated_galerkin",
            MethodTag::ModifiedGalerkin => "modified_galerkin",
            MethodTag::IteratedModifiedGalerkin => "iterated_modified_galerkin",
            MethodTag::Collocation => "collocation",
            MethodTag::IteratedCollocation => "iterated_collocation",
            MethodTag::ModifiedCollocation => "modified_collocation",
            MethodTag::IteratedModifiedCollocation => "iterated_modified_collocation",
        }
    }

    pub fn family(self) -> Family {
        use MethodTag::*;
        match self {
            Galerkin | IteratedGalerkin | ModifiedGalerkin | IteratedModifiedGalerkin => {
                Family::Orthogonal
            }
            _ => Family::Interpolatory,
        }
    }

    pub fn is_modified(self) -> bool {
        use MethodTag::*;
        matches!(
            self,
            ModifiedGalerkin
                | IteratedModifiedGalerkin
                | ModifiedCollocation
                | IteratedModifiedCollocation
        )
    }

    pub fn is_iterated(self) -> bool {
        use MethodTag::*;
        matches!(
            self,
            IteratedGalerkin
                | IteratedModifiedGalerkin
                | IteratedCollocation
                | IteratedModifiedCollocation
        )
    }

    fn compose(family: Family, modified: bool, iterated: bool) -> MethodTag {
        use MethodTag::*;
        match (family, modified, iterated) {
            (Family::Orthogonal, false, false) => Galerkin,
            (Family::Orthogonal, false, true) => IteratedGalerkin,
            (Family::Orthogonal, true, false) => ModifiedGalerkin,
            (Family::Orthogonal, true, true) => IteratedModifiedGalerkin,
            (Family::Interpolatory, false, false) => Collocation,
            (Family::Interpolatory, false, true) => IteratedCollocation,
            (Family::Interpolatory, true, false) => ModifiedCollocation,
            (Family::Interpolatory, true, true) => IteratedModifiedCollocation,
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = MethodTag::ALL.iter().map(|t| t.name()).collect();
                Error::Config(format!(
                    "unknown method `{s}`; valid methods: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// Settings shared by all method drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOptions {
    pub quad: QuadRule,
    /// Picks the classical eigenvalue; modified methods then take the root of
    /// the quadratic problem closest to it.
    pub selector: Selector,
    /// Uniform points of the normalisation grid (see [`standard_grid`]).
    pub grid_points: usize,
}

impl Default for MethodOptions {
    fn default() -> Self {
        MethodOptions {
            quad: QuadRule::gauss(DEFAULT_ORDER).expect("default order is valid"),
            selector: Selector::largest(),
            grid_points: 1001,
        }
    }
}

/// Discrete data behind a computed eigenfunction.
#[derive(Debug, Clone)]
pub struct MethodAux {
    /// The discrete eigenfunction `u` in `X_n`, on the same scale as `phi`.
    /// For classical and iterated methods this is `phi_n` itself.
    pub u: PiecewiseFn,
    /// `pi_n K u` (modified methods only).
    pub pi_k_u: Option<PiecewiseFn>,
    /// Classical eigenvalue used to anchor the modified selection.
    pub classical_lambda: Option<f64>,
    /// Residual of the matrix eigenproblem that produced `lambda`.
    pub matrix_residual: f64,
}

impl MethodAux {
    pub fn coeffs(&self) -> &[f64] {
        self.u.coeffs()
    }
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub tag: MethodTag,
    pub n: usize,
    pub r: usize,
    pub lambda: f64,
    /// Sup-normalised approximate eigenfunction.
    pub phi: SharedFn,
    pub aux: MethodAux,
}

impl MethodResult {
    pub fn space(&self) -> &PolySpace {
        self.aux.u.space()
    }
}

/// `scale * (K f)(s)` for a piecewise polynomial `f`.
#[derive(Debug, Clone)]
struct KernelImage {
    kernel: Arc<GreenKernel>,
    f: PiecewiseFn,
    quad: QuadRule,
    scale: f64,
}

impl EvalFn for KernelImage {
    fn eval(&self, s: f64) -> f64 {
        let mesh = self.f.space().mesh();
        self.scale
            * apply_k_with(&self.kernel, s, &self.quad, mesh, |t, j| {
                self.f.eval_panel(j, t)
            })
    }
}

/// `u + (1/lambda) (K u - v)` with `v = pi_n K u`.
#[derive(Debug, Clone)]
struct ModifiedFn {
    u: PiecewiseFn,
    v: PiecewiseFn,
    ku: KernelImage,
    inv_lambda: f64,
}

impl ModifiedFn {
    fn eval_panel(&self, j: usize, t: f64) -> f64 {
        self.u.eval_panel(j, t) + self.inv_lambda * (self.ku.eval(t) - self.v.eval_panel(j, t))
    }
}

impl EvalFn for ModifiedFn {
    fn eval(&self, s: f64) -> f64 {
        self.u.eval(s) + self.inv_lambda * (self.ku.eval(s) - self.v.eval(s))
    }

    fn eval_in_panel(&self, t: f64, a: f64, b: f64) -> f64 {
        self.u.eval_in_panel(t, a, b)
            + self.inv_lambda * (self.ku.eval(t) - self.v.eval_in_panel(t, a, b))
    }
}

/// `scale * (K g)(s)` for `g` a [`ModifiedFn`], tabulated once on the global
/// Gauss grid of its mesh.
#[derive(Debug, Clone)]
struct IteratedModifiedFn {
    kernel: Arc<GreenKernel>,
    g: ModifiedFn,
    grid: Arc<GlobalGrid>,
    table: Arc<Vec<f64>>,
    quad: QuadRule,
    scale: f64,
}

impl IteratedModifiedFn {
    fn new(kernel: Arc<GreenKernel>, g: ModifiedFn, quad: QuadRule, scale: f64) -> Self {
        let mesh = g.u.space().mesh();
        let grid = GlobalGrid::new(mesh, &quad);
        let per_panel = quad.order();
        let table = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &t)| g.eval_panel(i / per_panel, t))
            .collect();
        IteratedModifiedFn {
            kernel,
            g,
            grid: Arc::new(grid),
            table: Arc::new(table),
            quad,
            scale,
        }
    }
}

impl EvalFn for IteratedModifiedFn {
    fn eval(&self, s: f64) -> f64 {
        let mesh = self.g.u.space().mesh();
        self.scale
            * apply_k_tabulated(
                &self.kernel,
                &self.grid,
                &self.table,
                s,
                &self.quad,
                mesh,
                |t, j| self.g.eval_panel(j, t),
            )
    }
}

fn scaled_piecewise(f: &PiecewiseFn, factor: f64) -> Result<PiecewiseFn> {
    let coeffs = f.coeffs().iter().map(|c| c * factor).collect();
    PiecewiseFn::new(f.space().clone(), coeffs, f.representation())
}

fn check_domain(n: usize, r: usize) -> Result<PolySpace> {
    PolySpace::new(n, r)
}

/// Classical projection method `pi_n K phi_n = lambda_n phi_n`.
pub fn solve_projection(
    family: Family,
    k: &GreenKernel,
    n: usize,
    r: usize,
    opts: &MethodOptions,
) -> Result<MethodResult> {
    let space = check_domain(n, r)?;
    let op = DiscreteOperator::assemble(k, &space, &opts.quad, family, false)?;
    let pair = select_eigenpair(&solve_dense_eigen(&op.a)?, &opts.selector)?;
    let raw = PiecewiseFn::new(space.clone(), pair.real_vector(), family.representation())?;
    let grid = standard_grid(&space, opts.grid_points);
    let (scale, _) = sup_scale(&raw, &grid)?;
    let u = scaled_piecewise(&raw, scale)?;
    Ok(MethodResult {
        tag: MethodTag::compose(family, false, false),
        n,
        r,
        lambda: pair.value.re,
        phi: SharedFn::new(u.clone()),
        aux: MethodAux {
            u,
            pi_k_u: None,
            classical_lambda: None,
            matrix_residual: pair.residual,
        },
    })
}

/// Sloan iterate `phi^S = (1/lambda) K phi_n`, sup-normalised.
pub fn iterate_sloan(
    res: &MethodResult,
    k: &GreenKernel,
    quad: &QuadRule,
    grid_points: usize,
) -> Result<MethodResult> {
    if res.tag.is_modified() || res.tag.is_iterated() {
        return Err(Error::Config(format!(
            "Sloan iteration applies to classical results, not {}",
            res.tag
        )));
    }
    if res.lambda == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    let mut image = KernelImage {
        kernel: Arc::new(k.clone()),
        f: res.aux.u.clone(),
        quad: quad.clone(),
        scale: 1.0 / res.lambda,
    };
    let grid = standard_grid(res.space(), grid_points);
    let (scale, _) = sup_scale(&image, &grid)?;
    image.scale *= scale;
    Ok(MethodResult {
        tag: MethodTag::compose(res.tag.family(), false, true),
        phi: SharedFn::new(image),
        ..res.clone()
    })
}

/// Modified projection method with the eigenfunction
/// `phi^M = u + (1/lambda) (K u - pi_n K u)`, sup-normalised.
pub fn solve_modified(
    family: Family,
    k: &GreenKernel,
    n: usize,
    r: usize,
    opts: &MethodOptions,
) -> Result<MethodResult> {
    let space = check_domain(n, r)?;
    let op = DiscreteOperator::assemble(k, &space, &opts.quad, family, true)?;
    let classical = select_eigenpair(&solve_dense_eigen(&op.a)?, &opts.selector)?;
    let classical_lambda = classical.value.re;
    let c = op.quadratic_term().expect("assembled with the second power");
    let pair = solve_quadratic_eigen(&op.a, &c, &Selector::closest_to(classical_lambda))?;
    let lambda = pair.value.re;
    if lambda == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }

    let u = pair.real_vector();
    let v = op.a.matvec(&u);
    let repr = family.representation();
    let kernel = Arc::new(k.clone());
    let build = |u: Vec<f64>, v: Vec<f64>| -> Result<ModifiedFn> {
        let u = PiecewiseFn::new(space.clone(), u, repr)?;
        Ok(ModifiedFn {
            ku: KernelImage {
                kernel: kernel.clone(),
                f: u.clone(),
                quad: opts.quad.clone(),
                scale: 1.0,
            },
            v: PiecewiseFn::new(space.clone(), v, repr)?,
            u,
            inv_lambda: 1.0 / lambda,
        })
    };
    let raw = build(u.clone(), v.clone())?;
    let grid = standard_grid(&space, opts.grid_points);
    let (scale, _) = sup_scale(&raw, &grid)?;
    let phi = build(
        u.iter().map(|x| x * scale).collect(),
        v.iter().map(|x| x * scale).collect(),
    )?;
    Ok(MethodResult {
        tag: MethodTag::compose(family, true, false),
        n,
        r,
        lambda,
        aux: MethodAux {
            u: phi.u.clone(),
            pi_k_u: Some(phi.v.clone()),
            classical_lambda: Some(classical_lambda),
            matrix_residual: pair.residual,
        },
        phi: SharedFn::new(phi),
    })
}

/// Iterated modified eigenfunction `(1/lambda) K phi^M`, sup-normalised.
pub fn iterate_modified(
    res: &MethodResult,
    k: &GreenKernel,
    quad: &QuadRule,
    grid_points: usize,
) -> Result<MethodResult> {
    let v = match (&res.aux.pi_k_u, res.tag.is_modified() && !res.tag.is_iterated()) {
        (Some(v), true) => v.clone(),
        _ => {
            return Err(Error::Config(format!(
                "modified iteration applies to modified results, not {}",
                res.tag
            )))
        }
    };
    if res.lambda == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    let kernel = Arc::new(k.clone());
    let g = ModifiedFn {
        ku: KernelImage {
            kernel: kernel.clone(),
            f: res.aux.u.clone(),
            quad: quad.clone(),
            scale: 1.0,
        },
        u: res.aux.u.clone(),
        v,
        inv_lambda: 1.0 / res.lambda,
    };
    let mut phi = IteratedModifiedFn::new(kernel, g, quad.clone(), 1.0 / res.lambda);
    let grid = standard_grid(res.space(), grid_points);
    let (scale, _) = sup_scale(&phi, &grid)?;
    phi.scale *= scale;
    Ok(MethodResult {
        tag: MethodTag::compose(res.tag.family(), true, true),
        phi: SharedFn::new(phi),
        ..res.clone()
    })
}

/// Runs the method named by `tag`.
pub fn run_method(
    tag: MethodTag,
    k: &GreenKernel,
    n: usize,
    r: usize,
    opts: &MethodOptions,
) -> Result<MethodResult> {
    let family = tag.family();
    let base = if tag.is_modified() {
        solve_modified(family, k, n, r, opts)?
    } else {
        solve_projection(family, k, n, r, opts)?
    };
    match (tag.is_modified(), tag.is_iterated()) {
        (_, false) => Ok(base),
        (false, true) => iterate_sloan(&base, k, &opts.quad, opts.grid_points),
        (true, true) => iterate_modified(&base, k, &opts.quad, opts.grid_points),
    }
}
