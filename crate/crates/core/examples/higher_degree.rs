//! Piecewise quadratics (r = 1): eigenvalue errors for the four classical and
//! modified methods.
use greenspec::analysis::{run_study, StudyOptions};
use greenspec::kernel::greens_laplace;
use greenspec::methods::MethodTag;

fn main() -> greenspec::Result<()> {
    let k = greens_laplace();
    let n_list = [2, 4, 8, 16];
    for tag in [
        MethodTag::Galerkin,
        MethodTag::ModifiedGalerkin,
        MethodTag::Collocation,
        MethodTag::ModifiedCollocation,
    ] {
        let report = run_study(&k, tag, 1, &n_list, &StudyOptions::default())?;
        print!("{:<22}", tag.name());
        for rec in &report.records {
            let rate = match rec.eoc_lambda {
                Some(r) => format!(" ({r:.2})"),
                None if rec.lambda_floor => " (floor)".into(),
                None => String::new(),
            };
            print!(" {:.2e}{rate}", rec.lambda_error);
        }
        println!();
    }
    Ok(())
}
