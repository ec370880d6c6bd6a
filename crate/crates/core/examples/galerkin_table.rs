//! Eigenvalue convergence of Galerkin and modified Galerkin on piecewise
//! constants, printed as markdown tables.
use greenspec::analysis::{run_study, StudyOptions};
use greenspec::kernel::greens_laplace;
use greenspec::methods::MethodTag;
use greenspec::report::{render_report, Format};

fn main() -> greenspec::Result<()> {
    let k = greens_laplace();
    let n_list = [2, 4, 8, 16, 32, 64, 128];
    for tag in [MethodTag::Galerkin, MethodTag::ModifiedGalerkin] {
        let report = run_study(&k, tag, 0, &n_list, &StudyOptions::default())?;
        println!("{}", render_report(&report, Format::Md));
    }
    Ok(())
}
