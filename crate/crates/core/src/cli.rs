//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the numerics fail (no convergence, no
//! real eigenvalue, ...), 2 for usage and configuration errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{residual_rate_diagnostic, run_study, StudyOptions};
use crate::basis::standard_grid;
use crate::eigen::Selector;
use crate::error::{Error, Result};
use crate::func::EvalFn;
use crate::kernel::{
    eval_expr, make_kernel, parse_expr, resolve_kernel, KernelConfig, BUILTIN_NAMES,
};
use crate::methods::{run_method, MethodOptions, MethodTag};
use crate::quadrature::QuadRule;
use crate::report::{render_report, Format};

#[derive(Debug, Parser)]
#[command(
    name = "greenspec",
    version,
    about = "Eigenvalue approximation for integral operators with Green's-function-type kernels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for one eigenpair on a single mesh.
    Solve(SolveArgs),
    /// Run a mesh-refinement study over a doubling list of n.
    Study(StudyArgs),
    /// Measure the decay of sup |K (I - pi_n) x| under refinement.
    Rates(RatesArgs),
    /// Inspect kernels.
    #[command(subcommand)]
    Kernel(KernelCommand),
}

#[derive(Debug, Subcommand)]
pub enum KernelCommand {
    /// Check a kernel configuration file.
    Validate { path: PathBuf },
    /// List the builtin kernels.
    List,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Builtin kernel name or path to a kernel JSON file.
    #[arg(long, default_value = "greens_laplace")]
    pub kernel: String,
    /// Polynomial degree parameter: the space holds degree <= 2r on each panel.
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    /// Gauss-Legendre points per quadrature panel.
    #[arg(long = "quad", default_value_t = 10)]
    pub quad: usize,
    /// Uniform points of the evaluation grid.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "galerkin")]
    pub method: String,
    #[arg(long)]
    pub n: usize,
    /// `largest` or `closest:<value>`.
    #[arg(long = "select", default_value = "largest")]
    pub select: String,
    /// Comma-separated points at which to print the eigenfunction.
    #[arg(long, value_delimiter = ',')]
    pub eval: Vec<f64>,
    /// `text` or `json`.
    #[arg(long, default_value = "text")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "galerkin")]
    pub method: String,
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = [2usize, 4, 8, 16, 32, 64])]
    pub n_list: Vec<usize>,
    #[arg(long = "select", default_value = "largest")]
    pub select: String,
    /// `md`, `csv` or `json`.
    #[arg(long, default_value = "md")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Any method of the desired family; only its projection is used.
    #[arg(long, default_value = "galerkin")]
    pub method: String,
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = [4usize, 8, 16, 32])]
    pub n_list: Vec<usize>,
    /// Test function of `t`.
    #[arg(long, default_value = "cos(3*t)")]
    pub x: String,
    /// `text` or `json`.
    #[arg(long, default_value = "text")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_selector(text: &str) -> Result<Selector> {
    if text == "largest" {
        return Ok(Selector::largest());
    }
    if let Some(v) = text.strip_prefix("closest:") {
        let target: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad selector target `{v}`")))?;
        if target.is_finite() {
            return Ok(Selector::closest_to(target));
        }
    }
    Err(Error::Config(format!(
        "unknown selector `{text}`; use `largest` or `closest:<value>`"
    )))
}

fn method_options(common: &CommonArgs, select: &str) -> Result<MethodOptions> {
    if !(2..=64).contains(&common.quad) {
        return Err(Error::Config(format!(
            "--quad must lie in 2..=64, got {}",
            common.quad
        )));
    }
    if common.r > 3 {
        return Err(Error::Config(format!("--r must lie in 0..=3, got {}", common.r)));
    }
    if common.grid < 2 {
        return Err(Error::Config("--grid needs at least 2 points".into()));
    }
    Ok(MethodOptions {
        quad: QuadRule::gauss(common.quad)?,
        selector: parse_selector(select)?,
        grid_points: common.grid,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// `v` rounded to 15 significant digits, printed in shortest form.
fn trimmed(v: f64) -> String {
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    format!("{rounded}")
}

#[derive(Serialize)]
struct SolveOutput {
    kernel: String,
    method: MethodTag,
    n: usize,
    r: usize,
    lambda: f64,
    classical_lambda: Option<f64>,
    lambda_error: Option<f64>,
    matrix_residual: f64,
    eval: Vec<(f64, f64)>,
}

fn solve(args: &SolveArgs) -> Result<String> {
    let kernel = resolve_kernel(&args.common.kernel)?;
    let tag: MethodTag = args.method.parse()?;
    let opts = method_options(&args.common, &args.select)?;
    if let Some(&bad) = args.eval.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Config(format!("--eval point {bad} lies outside [0, 1]")));
    }
    let res = run_method(tag, &kernel, args.n, args.common.r, &opts)?;
    let out = SolveOutput {
        kernel: kernel.name().to_string(),
        method: tag,
        n: res.n,
        r: res.r,
        lambda: res.lambda,
        classical_lambda: res.aux.classical_lambda,
        lambda_error: kernel.exact().map(|e| (res.lambda - e.eigenvalue).abs()),
        matrix_residual: res.aux.matrix_residual,
        eval: args.eval.iter().map(|&s| (s, res.phi.eval(s))).collect(),
    };
    match args.format.as_str() {
        "json" => Ok(serde_json::to_string_pretty(&out).expect("serialisable") + "\n"),
        "text" => {
            let mut text = format!("lambda {}\n", trimmed(out.lambda));
            if let Some(e) = out.lambda_error {
                text += &format!("lambda_error {e:.3e}\n");
            }
            if let Some(c) = out.classical_lambda {
                text += &format!("classical_lambda {}\n", trimmed(c));
            }
            for (s, v) in &out.eval {
                text += &format!("phi({s}) {}\n", trimmed(*v));
            }
            Ok(text)
        }
        other => Err(Error::Config(format!(
            "unknown format `{other}` for solve; valid formats: text, json"
        ))),
    }
}

fn study(args: &StudyArgs) -> Result<String> {
    let kernel = resolve_kernel(&args.common.kernel)?;
    let tag: MethodTag = args.method.parse()?;
    let format: Format = args.format.parse()?;
    let opts = StudyOptions {
        method: method_options(&args.common, &args.select)?,
        ..StudyOptions::default()
    };
    if let Some(w) = kernel.smoothness_warning(args.common.r) {
        eprintln!("warning: {w}");
    }
    let report = run_study(&kernel, tag, args.common.r, &args.n_list, &opts)?;
    Ok(render_report(&report, format))
}

fn rates(args: &RatesArgs) -> Result<String> {
    let kernel = resolve_kernel(&args.common.kernel)?;
    let tag: MethodTag = args.method.parse()?;
    let opts = method_options(&args.common, "largest")?;
    let expr = parse_expr(&args.x)?;
    // probe once so that domain errors surface as configuration errors
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        eval_expr(&expr, t, t)?;
    }
    let x = move |t: f64| eval_expr(&expr, t, t).unwrap_or(f64::NAN);
    let diag = residual_rate_diagnostic(
        &kernel,
        &x,
        tag.family(),
        args.common.r,
        &args.n_list,
        &opts.quad,
        opts.grid_points,
    )?;
    match args.format.as_str() {
        "json" => Ok(serde_json::to_string_pretty(&diag).expect("serialisable") + "\n"),
        "text" => {
            let mut text = String::from("n error rate\n");
            for (i, (n, e)) in diag.n_list.iter().zip(&diag.errors).enumerate() {
                let rate = match i.checked_sub(1).map(|j| diag.rates[j]) {
                    None => String::new(),
                    Some(Some(v)) => format!("{v:.2}"),
                    Some(None) => "floor".to_string(),
                };
                text += format!("{n} {e:.3e} {rate}").trim_end();
                text.push('\n');
            }
            Ok(text)
        }
        other => Err(Error::Config(format!(
            "unknown format `{other}` for rates; valid formats: text, json"
        ))),
    }
}

fn kernel_command(cmd: &KernelCommand) -> Result<String> {
    match cmd {
        KernelCommand::List => Ok(BUILTIN_NAMES.iter().map(|n| format!("{n}\n")).collect()),
        KernelCommand::Validate { path } => {
            let config = KernelConfig::load(path)?;
            let k = make_kernel(&config)?;
            let mut text = format!("ok {}\n", k.name());
            text += &format!("symmetric {}\n", k.is_symmetric(1e-12));
            text += &format!("exact {}\n", k.exact().is_some());
            if let Some(exact) = k.exact() {
                // grid check of the advertised eigenpair: K phi = lambda phi
                let space = crate::mesh::PolySpace::new(32, 0)?;
                let q = QuadRule::gauss(10)?;
                let phi = |s: f64| exact.eval(s);
                let worst = standard_grid(&space, 101)
                    .iter()
                    .map(|&s| {
                        crate::discretize::apply_k(&k, &phi, s, &q, space.mesh())
                            .map(|v| (v - exact.eigenvalue * phi(s)).abs())
                    })
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                text += &format!("exact_residual {worst:.3e}\n");
            }
            Ok(text)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(String, Option<PathBuf>)> {
    Ok(match &cli.command {
        Command::Solve(a) => (solve(a)?, a.out.clone()),
        Command::Study(a) => (study(a)?, a.out.clone()),
        Command::Rates(a) => (rates(a)?, a.out.clone()),
        Command::Kernel(c) => (kernel_command(c)?, None),
    })
}

/// Exit code for an error: 1 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        1
    } else {
        2
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli).and_then(|(text, out)| emit(out.as_deref(), &text)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(parse_selector("largest").unwrap(), Selector::largest());
        assert_eq!(
            parse_selector("closest:0.25").unwrap(),
            Selector::closest_to(0.25)
        );
        assert!(parse_selector("closest:x").is_err());
        assert!(parse_selector("smallest").is_err());
    }

    #[test]
    fn trimming() {
        assert_eq!(trimmed(0.125), "0.125");
        assert_eq!(trimmed(0.1 + 0.2), "0.3");
        assert_eq!(trimmed(1.0 / 12.0), "0.0833333333333333");
    }

    #[test]
    fn parse_study_flags() {
        let cli = Cli::try_parse_from([
            "greenspec", "study", "--kernel", "greens_laplace", "--method", "galerkin", "--r",
            "0", "--n-list", "2,4,8,16,32,64", "--format", "md",
        ])
        .unwrap();
        match cli.command {
            Command::Study(a) => {
                assert_eq!(a.n_list, vec![2, 4, 8, 16, 32, 64]);
                assert_eq!(a.common.quad, 10);
                assert_eq!(a.common.grid, 1001);
            }
            _ => panic!("expected study"),
        }
    }

    #[test]
    fn option_validation() {
        let mut common = CommonArgs {
            kernel: "greens_laplace".into(),
            r: 0,
            quad: 1,
            grid: 1001,
        };
        assert!(method_options(&common, "largest").is_err());
        common.quad = 10;
        common.r = 4;
        assert!(method_options(&common, "largest").is_err());
        common.r = 3;
        assert!(method_options(&common, "largest").is_ok());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NonDoubling(vec![3, 5])), 2);
        assert_eq!(exit_code(&Error::NoRealCandidate), 1);
        assert_eq!(exit_code(&Error::NonConvergence("x".into())), 1);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
    }
}
