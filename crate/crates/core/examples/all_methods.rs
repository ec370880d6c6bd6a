//! Runs every projection method once on the builtin Green's kernel and prints
//! the eigenvalue error against 1/pi^2.
use greenspec::kernel::greens_laplace;
use greenspec::methods::{run_method, MethodOptions, MethodTag};
use std::f64::consts::PI;

fn main() -> greenspec::Result<()> {
    let k = greens_laplace();
    let opts = MethodOptions::default();
    let exact = 1.0 / (PI * PI);
    let n = 8;
    println!("{:<32} {:>18} {:>10}", "method", "lambda", "error");
    for tag in MethodTag::ALL {
        let res = run_method(tag, &k, n, 0, &opts)?;
        println!("{:<32} {:>18.15} {:>10.2e}", tag.name(), res.lambda, (res.lambda - exact).abs());
    }
    Ok(())
}
