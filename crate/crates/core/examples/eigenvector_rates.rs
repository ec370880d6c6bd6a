//! Eigenvector errors of the classical, modified and iterated variants.
use greenspec::analysis::{run_study, StudyOptions};
use greenspec::kernel::greens_laplace;
use greenspec::methods::MethodTag;

fn main() -> greenspec::Result<()> {
    let k = greens_laplace();
    let n_list = [4, 8, 16, 32, 64];
    let opts = StudyOptions::default();
    for tag in MethodTag::ALL {
        let report = run_study(&k, tag, 0, &n_list, &opts)?;
        let last = report.records.last().unwrap();
        println!(
            "{:<32} error(n={}) = {:.2e}  rate = {}",
            tag.name(),
            last.n,
            last.vector_error,
            last.eoc_vector.map_or("floor".into(), |r| format!("{r:.2}")),
        );
    }
    Ok(())
}
