//! Collocation at panel midpoints against its modified variant, as CSV.
use greenspec::analysis::{run_study, StudyOptions};
use greenspec::kernel::greens_laplace;
use greenspec::methods::MethodTag;
use greenspec::report::{render_report, Format};

fn main() -> greenspec::Result<()> {
    let k = greens_laplace();
    let n_list = [4, 8, 16, 32, 64, 128];
    for tag in [MethodTag::Collocation, MethodTag::ModifiedCollocation] {
        let report = run_study(&k, tag, 0, &n_list, &StudyOptions::default())?;
        println!("# {tag}");
        print!("{}", render_report(&report, Format::Csv));
    }
    Ok(())
}
