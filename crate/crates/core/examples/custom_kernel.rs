//! A non-symmetric kernel defined in JSON. Without exact data the study uses a
//! fine-mesh reference and a dual eigenfunction from the transposed kernel.
use greenspec::analysis::{run_study, StudyOptions};
use greenspec::kernel::{make_kernel, KernelConfig};
use greenspec::methods::MethodTag;
use greenspec::report::{render_report, Format};

const CONFIG: &str = r#"{
    "name": "weighted_laplace",
    "kappa1": "t*(1-s)*exp(s)",
    "kappa2": "s*(1-t)*exp(s)"
}"#;

fn main() -> greenspec::Result<()> {
    let k = make_kernel(&KernelConfig::from_json(CONFIG)?)?;
    println!("symmetric: {}", k.is_symmetric(1e-12));
    let report = run_study(&k, MethodTag::ModifiedGalerkin, 0, &[4, 8, 16, 32], &StudyOptions::default())?;
    println!("{}", render_report(&report, Format::Md));
    Ok(())
}
