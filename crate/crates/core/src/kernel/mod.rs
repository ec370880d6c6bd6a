//! Green's-function-type kernels.
//!
//! A kernel is given by two pieces: `k1(s, t)` on the triangle `t <= s` and
//! `k2(s, t)` on `s <= t`. The pieces must agree on the diagonal, but the
//! kernel is in general not differentiable there.

mod expr;

pub use expr::{eval_expr, parse_expr, BinOp, Expr, Func, Var};

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DIAGONAL_SAMPLES: usize = 101;
const CONTINUITY_TOL: f64 = 1e-10;
const TRIANGLE_SAMPLES: usize = 21;

/// One smooth piece of a kernel.
#[derive(Clone)]
pub struct KernelPiece {
    source: String,
    imp: PieceImpl,
}

#[derive(Clone)]
enum PieceImpl {
    Expr(Expr),
    Native(fn(f64, f64) -> f64),
}

impl KernelPiece {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(KernelPiece {
            source: text.to_string(),
            imp: PieceImpl::Expr(parse_expr(text)?),
        })
    }

    pub fn native(source: &str, f: fn(f64, f64) -> f64) -> Self {
        KernelPiece {
            source: source.to_string(),
            imp: PieceImpl::Native(f),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        match &self.imp {
            PieceImpl::Expr(e) => e.eval(s, t),
            PieceImpl::Native(f) => Ok(f(s, t)),
        }
    }

    /// Domain errors come back as NaN.
    #[inline]
    pub(crate) fn eval_lossy(&self, s: f64, t: f64) -> f64 {
        match &self.imp {
            PieceImpl::Expr(e) => e.eval(s, t).unwrap_or(f64::NAN),
            PieceImpl::Native(f) => f(s, t),
        }
    }

    /// The same piece with its arguments swapped.
    fn swapped(&self) -> KernelPiece {
        let imp = match &self.imp {
            PieceImpl::Expr(e) => PieceImpl::Expr(swap_vars(e)),
            PieceImpl::Native(_) => PieceImpl::Expr(
                // native pieces must carry a parseable source
                parse_expr(&swap_source(&self.source)).expect("native piece source parses"),
            ),
        };
        KernelPiece {
            source: swap_source(&self.source),
            imp,
        }
    }
}

impl fmt::Debug for KernelPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelPiece({:?})", self.source)
    }
}

fn swap_vars(e: &Expr) -> Expr {
    match e {
        Expr::Var(Var::S) => Expr::Var(Var::T),
        Expr::Var(Var::T) => Expr::Var(Var::S),
        Expr::Neg(a) => Expr::Neg(Box::new(swap_vars(a))),
        Expr::Binary(op, l, r) => Expr::Binary(*op, Box::new(swap_vars(l)), Box::new(swap_vars(r))),
        Expr::Call(f, a) => Expr::Call(*f, Box::new(swap_vars(a))),
        other => other.clone(),
    }
}

fn swap_source(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    let bytes = src.as_bytes();
    for (i, c) in src.char_indices() {
        let alone = |j: usize| {
            let before = j == 0 || !(bytes[j - 1].is_ascii_alphanumeric() || bytes[j - 1] == b'_');
            let after = j + 1 >= bytes.len()
                || !(bytes[j + 1].is_ascii_alphanumeric() || bytes[j + 1] == b'_');
            before && after
        };
        match c {
            's' if alone(i) => out.push('t'),
            't' if alone(i) => out.push('s'),
            _ => out.push(c),
        }
    }
    out
}

/// Known dominant eigenpair of a kernel.
#[derive(Debug, Clone)]
pub struct ExactPair {
    pub eigenvalue: f64,
    /// Eigenfunction as an expression; both `s` and `t` are bound to the argument.
    pub eigenfunction: Expr,
    pub eigenfunction_source: String,
}

impl ExactPair {
    pub fn eval(&self, x: f64) -> f64 {
        self.eigenfunction.eval(x, x).unwrap_or(f64::NAN)
    }
}

/// A validated Green's-function-type kernel.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    name: String,
    kappa1: KernelPiece,
    kappa2: KernelPiece,
    alpha: Option<u32>,
    exact: Option<ExactPair>,
}

/// On-disk kernel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub name: String,
    pub kappa1: String,
    pub kappa2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub eigenvalue: f64,
    pub eigenfunction: String,
}

impl KernelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("kernel config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

impl GreenKernel {
    /// Validates the pieces and builds the kernel.
    pub fn new(
        name: impl Into<String>,
        kappa1: KernelPiece,
        kappa2: KernelPiece,
        alpha: Option<u32>,
        exact: Option<ExactPair>,
    ) -> Result<Self> {
        let k = GreenKernel {
            name: name.into(),
            kappa1,
            kappa2,
            alpha,
            exact,
        };
        k.check_triangles()?;
        k.check_diagonal()?;
        Ok(k)
    }

    fn check_triangles(&self) -> Result<()> {
        let m = TRIANGLE_SAMPLES - 1;
        for i in 0..=m {
            let s = i as f64 / m as f64;
            for j in 0..=m {
                let t = j as f64 / m as f64;
                let (piece, which) = if t <= s {
                    (&self.kappa1, "kappa1")
                } else {
                    (&self.kappa2, "kappa2")
                };
                match piece.eval(s, t) {
                    Ok(v) if v.is_finite() => {}
                    Ok(v) => {
                        return Err(Error::Domain(format!(
                            "{which} evaluates to {v} at (s, t) = ({s}, {t})"
                        )))
                    }
                    Err(Error::Domain(msg)) => {
                        return Err(Error::Domain(format!(
                            "{which} at (s, t) = ({s}, {t}): {msg}"
                        )))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(())
    }

    fn check_diagonal(&self) -> Result<()> {
        let mut worst = (0.0, 0.0);
        for i in 0..DIAGONAL_SAMPLES {
            let s = i as f64 / (DIAGONAL_SAMPLES - 1) as f64;
            let gap = (self.kappa1.eval(s, s)? - self.kappa2.eval(s, s)?).abs();
            if gap > worst.1 || gap.is_nan() {
                worst = (s, gap);
            }
        }
        if worst.1 > CONTINUITY_TOL || worst.1.is_nan() {
            return Err(Error::Continuity {
                s: worst.0,
                mismatch: worst.1,
            });
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kappa1(&self) -> &KernelPiece {
        &self.kappa1
    }

    pub fn kappa2(&self) -> &KernelPiece {
        &self.kappa2
    }

    pub fn alpha(&self) -> Option<u32> {
        self.alpha
    }

    pub fn exact(&self) -> Option<&ExactPair> {
        self.exact.as_ref()
    }

    /// Checked evaluation on the unit square.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::OutOfDomain(s));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        if t <= s {
            self.kappa1.eval(s, t)
        } else {
            self.kappa2.eval(s, t)
        }
    }

    #[inline]
    pub(crate) fn lower(&self, s: f64, t: f64) -> f64 {
        self.kappa1.eval_lossy(s, t)
    }

    #[inline]
    pub(crate) fn upper(&self, s: f64, t: f64) -> f64 {
        self.kappa2.eval_lossy(s, t)
    }

    #[inline]
    pub(crate) fn eval_lossy(&self, s: f64, t: f64) -> f64 {
        if t <= s {
            self.lower(s, t)
        } else {
            self.upper(s, t)
        }
    }

    /// Kernel of the adjoint operator, `(s, t) -> k(t, s)`.
    pub fn transpose(&self) -> GreenKernel {
        GreenKernel {
            name: format!("{}^T", self.name),
            kappa1: self.kappa2.swapped(),
            kappa2: self.kappa1.swapped(),
            alpha: self.alpha,
            exact: None,
        }
    }

    /// `k(s, t) == k(t, s)` on a 41 x 41 grid up to `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = 40;
        (0..=m).all(|i| {
            (0..=m).all(|j| {
                let s = i as f64 / m as f64;
                let t = j as f64 / m as f64;
                (self.eval_lossy(s, t) - self.eval_lossy(t, s)).abs() <= tol
            })
        })
    }

    /// A message when the requested degree exceeds the declared smoothness.
    pub fn smoothness_warning(&self, r: usize) -> Option<String> {
        let alpha = self.alpha?;
        (r as u64 >= alpha as u64).then(|| {
            format!(
                "kernel `{}` declares smoothness alpha = {alpha}; r = {r} may not reach the nominal rates",
                self.name
            )
        })
    }
}

/// Builds and validates a kernel from its configuration.
pub fn make_kernel(config: &KernelConfig) -> Result<GreenKernel> {
    let exact = config
        .exact
        .as_ref()
        .map(|e| -> Result<ExactPair> {
            Ok(ExactPair {
                eigenvalue: e.eigenvalue,
                eigenfunction: parse_expr(&e.eigenfunction)?,
                eigenfunction_source: e.eigenfunction.clone(),
            })
        })
        .transpose()?;
    GreenKernel::new(
        config.name.clone(),
        KernelPiece::parse(&config.kappa1)?,
        KernelPiece::parse(&config.kappa2)?,
        config.alpha,
        exact,
    )
}

/// `k(s, t)` with the piece chosen by `t <= s`.
pub fn kernel_eval(k: &GreenKernel, s: f64, t: f64) -> Result<f64> {
    k.eval(s, t)
}

pub const BUILTIN_NAMES: &[&str] = &["greens_laplace"];

/// Kernels shipped with the library.
pub fn builtin(name: &str) -> Option<GreenKernel> {
    match name {
        "greens_laplace" => Some(greens_laplace()),
        _ => None,
    }
}

/// Green's function of `-u'' = f`, `u(0) = u(1) = 0`.
///
/// Largest eigenvalue `1/pi^2` with eigenfunction `sin(pi s)`.
pub fn greens_laplace() -> GreenKernel {
    let eigenfunction_source = "sin(pi*s)".to_string();
    GreenKernel::new(
        "greens_laplace",
        KernelPiece::native("t*(1-s)", |s, t| t * (1.0 - s)),
        KernelPiece::native("s*(1-t)", |s, t| s * (1.0 - t)),
        None,
        Some(ExactPair {
            eigenvalue: 1.0 / (std::f64::consts::PI * std::f64::consts::PI),
            eigenfunction: parse_expr(&eigenfunction_source).expect("builtin expression"),
            eigenfunction_source,
        }),
    )
    .expect("builtin kernel is valid")
}

/// Resolves a builtin name or a path to a JSON kernel file.
pub fn resolve_kernel(source: &str) -> Result<GreenKernel> {
    if let Some(k) = builtin(source) {
        return Ok(k);
    }
    let path = Path::new(source);
    if path.exists() {
        return make_kernel(&KernelConfig::load(path)?);
    }
    Err(Error::UnknownKernel {
        name: source.to_string(),
        available: BUILTIN_NAMES.join(", "),
    })
}
