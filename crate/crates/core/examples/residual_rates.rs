//! How fast `K (I - pi_n) x` vanishes for a smooth test function, for both
//! projection families and two polynomial degrees.
use greenspec::analysis::residual_rate_diagnostic;
use greenspec::discretize::Family;
use greenspec::func::SharedFn;
use greenspec::kernel::greens_laplace;
use greenspec::quadrature::QuadRule;

fn main() -> greenspec::Result<()> {
    let k = greens_laplace();
    let x = SharedFn::new(|t: f64| (3.0 * t).cos());
    let quad = QuadRule::gauss(10)?;
    for family in [Family::Orthogonal, Family::Interpolatory] {
        for r in [0, 1] {
            let d = residual_rate_diagnostic(&k, &x, family, r, &[4, 8, 16, 32], &quad, 1001)?;
            let rates: Vec<String> = d
                .rates
                .iter()
                .map(|r| r.map_or("floor".into(), |v| format!("{v:.2}")))
                .collect();
            println!("{family:?} r={r}: rates {}", rates.join(" "));
        }
    }
    Ok(())
}
