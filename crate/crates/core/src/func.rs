//! Evaluable real functions on [0, 1].

use std::fmt;
use std::sync::Arc;

/// Anything that can be evaluated pointwise on [0, 1].
///
/// Implementations must be pure: the same `t` always gives the same value.
pub trait EvalFn: Send + Sync {
    fn eval(&self, t: f64) -> f64;

    /// Value at `t` seen from inside the panel `[a, b]`.
    ///
    /// Differs from [`EvalFn::eval`] only for functions that jump at `t`,
    /// where it returns the one-sided limit from the panel's side.
    fn eval_in_panel(&self, t: f64, _a: f64, _b: f64) -> f64 {
        self.eval(t)
    }
}

impl<F> EvalFn for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Reference-counted, type-erased function handle.
#[derive(Clone)]
pub struct SharedFn(Arc<dyn EvalFn>);

impl SharedFn {
    pub fn new<F: EvalFn + 'static>(f: F) -> Self {
        SharedFn(Arc::new(f))
    }

    pub fn from_arc(f: Arc<dyn EvalFn>) -> Self {
        SharedFn(f)
    }

    /// `t -> factor * self(t)`.
    pub fn scaled(&self, factor: f64) -> SharedFn {
        SharedFn::new(Scaled {
            inner: self.clone(),
            factor,
        })
    }
}

impl EvalFn for SharedFn {
    fn eval(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    fn eval_in_panel(&self, t: f64, a: f64, b: f64) -> f64 {
        self.0.eval_in_panel(t, a, b)
    }
}

struct Scaled {
    inner: SharedFn,
    factor: f64,
}

impl EvalFn for Scaled {
    fn eval(&self, t: f64) -> f64 {
        self.factor * self.inner.eval(t)
    }

    fn eval_in_panel(&self, t: f64, a: f64, b: f64) -> f64 {
        self.factor * self.inner.eval_in_panel(t, a, b)
    }
}

impl fmt::Debug for SharedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SharedFn(..)")
    }
}
