//! Error functionals, experimental orders of convergence, refinement studies
//! and the residual-rate diagnostic `sup |K (I - pi_n) x|`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::standard_grid;
use crate::discretize::{apply_k_tabulated, Family, GlobalGrid};
use crate::eigen::{sup_scale, Selector};
use crate::error::{Error, Result};
use crate::func::{EvalFn, SharedFn};
use crate::kernel::GreenKernel;
use crate::mesh::{Mesh, PolySpace};
use crate::methods::{run_method, MethodOptions, MethodTag};
use crate::quadrature::QuadRule;

/// Errors below this are excluded from rate computations.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Panels of the composite rule used for reference inner products.
const REFERENCE_PANELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    Exact,
    FineMesh,
}

/// Eigenpair against which errors are measured, with the left eigenfunction
/// scaled so that `<phi_ref, phi_dual> = 1`. Together they define the rank-one
/// spectral projection `E x = <x, phi_dual> phi_ref`.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub lambda_ref: f64,
    pub phi_ref: SharedFn,
    pub phi_dual: SharedFn,
    pub source: ReferenceSource,
}

impl ReferenceSolution {
    /// `<phi_ref, phi_dual>` by composite Gauss quadrature on `mesh`.
    pub fn biorthogonality(&self, mesh: &Mesh, quad: &QuadRule) -> f64 {
        inner(&self.phi_ref, &self.phi_dual, mesh, quad)
    }
}

/// `int_0^1 f g` by composite Gauss quadrature on the panels of `mesh`.
pub fn inner(f: &dyn EvalFn, g: &dyn EvalFn, mesh: &Mesh, quad: &QuadRule) -> f64 {
    mesh.panels()
        .map(|(a, b)| {
            quad.mapped(a, b)
                .map(|(t, w)| w * f.eval_in_panel(t, a, b) * g.eval_in_panel(t, a, b))
                .sum::<f64>()
        })
        .sum()
}

fn uniform_grid(points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

/// Reference eigenpair for `k`: the kernel's exact data when present,
/// otherwise an iterated modified collocation solution at
/// `(fallback_n, fallback_r)`. Left eigenfunctions of non-symmetric kernels
/// come from the same method applied to the transposed kernel.
pub fn make_reference(
    k: &GreenKernel,
    fallback_n: usize,
    fallback_r: usize,
    opts: &MethodOptions,
) -> Result<ReferenceSolution> {
    let fine = |kernel: &GreenKernel, sel: Selector| {
        let o = MethodOptions {
            selector: sel,
            ..opts.clone()
        };
        run_method(
            MethodTag::IteratedModifiedCollocation,
            kernel,
            fallback_n,
            fallback_r,
            &o,
        )
    };

    let (lambda_ref, phi_ref, source, ip_mesh) = match k.exact() {
        Some(exact) => {
            let e = exact.clone();
            let f = SharedFn::new(move |x: f64| e.eval(x));
            let (scale, _) = sup_scale(&f, &uniform_grid(opts.grid_points))?;
            (
                exact.eigenvalue,
                f.scaled(scale),
                ReferenceSource::Exact,
                Mesh::new(REFERENCE_PANELS)?,
            )
        }
        None => {
            let res = fine(k, opts.selector)?;
            let mesh = res.space().mesh().clone();
            (res.lambda, res.phi, ReferenceSource::FineMesh, mesh)
        }
    };

    let dual = if k.is_symmetric(1e-12) {
        phi_ref.clone()
    } else {
        let t = k.transpose();
        fine(&t, Selector::closest_to(lambda_ref))?.phi
    };
    let norm = inner(&phi_ref, &dual, &ip_mesh, &opts.quad);
    if norm.abs() < 1e-12 {
        return Err(Error::DegenerateVector);
    }
    Ok(ReferenceSolution {
        lambda_ref,
        phi_dual: dual.scaled(1.0 / norm),
        phi_ref,
        source,
    })
}

pub fn eigenvalue_error(lambda: f64, reference: &ReferenceSolution) -> f64 {
    (lambda - reference.lambda_ref).abs()
}

/// `sup_grid |phi - E phi|` with `E` the spectral projection of `reference`.
/// The coefficient `<phi, phi_dual>` is integrated on the panels of `mesh`.
pub fn vector_error(
    phi: &dyn EvalFn,
    reference: &ReferenceSolution,
    grid: &[f64],
    mesh: &Mesh,
    quad: &QuadRule,
) -> f64 {
    let c = inner(phi, &reference.phi_dual, mesh, quad);
    grid.iter()
        .map(|&s| (phi.eval(s) - c * reference.phi_ref.eval(s)).abs())
        .fold(0.0, f64::max)
}

/// `log2(E_i / E_{i+1})` for consecutive errors on doubled meshes.
pub fn eoc(errors: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = errors.iter().find(|e| e.is_nan() || **e <= 0.0) {
        return Err(Error::NonPositiveError(bad));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Rates with errors below `floor` left out; entry `i` relates `n_{i-1}` to `n_i`.
fn floored_rates(errors: &[f64], floor: f64) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for i in 1..errors.len() {
        let (a, b) = (errors[i - 1], errors[i]);
        if a >= floor && b >= floor {
            out[i] = Some((a / b).log2());
        }
    }
    out
}

fn check_doubling(n_list: &[usize]) -> Result<()> {
    let ok = !n_list.is_empty()
        && n_list[0] >= 1
        && n_list.windows(2).all(|w| w[1] == 2 * w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::NonDoubling(n_list.to_vec()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    #[serde(skip)]
    pub method: MethodOptions,
    /// Worker threads; `None` reads `GREENSPEC_THREADS`, then uses the default pool.
    pub threads: Option<usize>,
    /// Mesh used for the reference when the kernel has no exact data.
    pub reference_n: usize,
    pub reference_r: usize,
    pub floor: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            method: MethodOptions::default(),
            threads: None,
            reference_n: 128,
            reference_r: 1,
            floor: ERROR_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub n: usize,
    pub lambda: f64,
    pub lambda_error: f64,
    pub vector_error: f64,
    pub eoc_lambda: Option<f64>,
    pub eoc_vector: Option<f64>,
    /// Set when `lambda_error` is below the floor.
    pub lambda_floor: bool,
    pub vector_floor: bool,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub kernel: String,
    pub method: MethodTag,
    pub r: usize,
    pub n_list: Vec<usize>,
    pub records: Vec<StudyRecord>,
    pub grid_points: usize,
    pub quad_order: usize,
    pub selector: Selector,
    pub reference: ReferenceSource,
    pub floor: f64,
}

fn thread_count(opts: &StudyOptions) -> Option<usize> {
    opts.threads.or_else(|| {
        std::env::var("GREENSPEC_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t > 0)
    })
}

/// Runs `tag` for every `n` in a doubling list and collects both errors and
/// their rates. Each `n` is independent and runs in parallel.
pub fn run_study(
    k: &GreenKernel,
    tag: MethodTag,
    r: usize,
    n_list: &[usize],
    opts: &StudyOptions,
) -> Result<StudyReport> {
    check_doubling(n_list)?;
    let reference = make_reference(k, opts.reference_n, opts.reference_r, &opts.method)?;
    let mopts = &opts.method;

    let one = |n: usize| -> Result<(f64, f64, f64, f64)> {
        let start = Instant::now();
        let res = run_method(tag, k, n, r, mopts)?;
        let grid = standard_grid(res.space(), mopts.grid_points);
        let ve = vector_error(&res.phi, &reference, &grid, res.space().mesh(), &mopts.quad);
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        Ok((res.lambda, eigenvalue_error(res.lambda, &reference), ve, elapsed))
    };
    let run_all = || n_list.par_iter().map(|&n| one(n)).collect::<Result<Vec<_>>>();
    let rows = match thread_count(opts) {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run_all)?,
        None => run_all()?,
    };

    let le: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ve: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let rl = floored_rates(&le, opts.floor);
    let rv = floored_rates(&ve, opts.floor);
    let records = n_list
        .iter()
        .zip(&rows)
        .enumerate()
        .map(|(i, (&n, &(lambda, lambda_error, vector_error, wall_time_ms)))| StudyRecord {
            n,
            lambda,
            lambda_error,
            vector_error,
            eoc_lambda: rl[i],
            eoc_vector: rv[i],
            lambda_floor: lambda_error < opts.floor,
            vector_floor: vector_error < opts.floor,
            wall_time_ms,
        })
        .collect();

    Ok(StudyReport {
        kernel: k.name().to_string(),
        method: tag,
        r,
        n_list: n_list.to_vec(),
        records,
        grid_points: mopts.grid_points,
        quad_order: mopts.quad.order(),
        selector: mopts.selector,
        reference: reference.source,
        floor: opts.floor,
    })
}

/// Result of [`residual_rate_diagnostic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDiagnostic {
    pub n_list: Vec<usize>,
    pub errors: Vec<f64>,
    /// `rates[i]` compares `n_list[i]` with `n_list[i + 1]`; `None` below the floor.
    pub rates: Vec<Option<f64>>,
}

/// `sup_grid |K (I - pi_n) x|` for each `n`, with the observed rates.
pub fn residual_rate_diagnostic(
    k: &GreenKernel,
    x: &dyn EvalFn,
    family: Family,
    r: usize,
    n_list: &[usize],
    quad: &QuadRule,
    grid_points: usize,
) -> Result<RateDiagnostic> {
    check_doubling(n_list)?;
    let errors = n_list
        .par_iter()
        .map(|&n| {
            let space = PolySpace::new(n, r)?;
            let mesh = space.mesh();
            let p = family.project(&space, x, quad);
            let diff = |t: f64, j: usize| {
                let (a, b) = mesh.panel(j);
                x.eval_in_panel(t, a, b) - p.eval_panel(j, t)
            };
            let grid = GlobalGrid::new(mesh, quad);
            let per_panel = quad.order();
            let table: Vec<f64> = grid
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, &t)| diff(t, i / per_panel))
                .collect();
            let worst = standard_grid(&space, grid_points)
                .iter()
                .map(|&s| apply_k_tabulated(k, &grid, &table, s, quad, mesh, diff).abs())
                .fold(0.0, f64::max);
            if worst.is_finite() {
                Ok(worst)
            } else {
                Err(Error::NonFinite("K (I - pi_n) x"))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let rates = floored_rates(&errors, ERROR_FLOOR).into_iter().skip(1).collect();
    Ok(RateDiagnostic {
        n_list: n_list.to_vec(),
        errors,
        rates,
    })
}
