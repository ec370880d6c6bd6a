//! Assembles the projected matrices by hand and solves the quadratic
//! eigenproblem `lambda^2 u = lambda A u + (M2 - A^2) u` behind the modified
//! Galerkin method.
use greenspec::discretize::{assemble_galerkin, assemble_second, Family};
use greenspec::eigen::{select_eigenpair, solve_dense_eigen, solve_quadratic_eigen, Selector};
use greenspec::kernel::greens_laplace;
use greenspec::mesh::PolySpace;
use greenspec::quadrature::QuadRule;

fn main() -> greenspec::Result<()> {
    let k = greens_laplace();
    let quad = QuadRule::gauss(10)?;
    let space = PolySpace::new(4, 0)?;

    let a = assemble_galerkin(&k, &space, &quad)?;
    let m2 = assemble_second(&k, &space, &quad, Family::Orthogonal)?;
    let classical = select_eigenpair(&solve_dense_eigen(&a)?, &Selector::largest())?;
    let c = m2.sub(&a.matmul(&a));
    let modified = solve_quadratic_eigen(&a, &c, &Selector::closest_to(classical.value.re))?;

    println!("classical {:.12}", classical.value.re);
    println!("modified  {:.12} (residual {:.1e})", modified.value.re, modified.residual);
    println!("exact     {:.12}", 1.0 / std::f64::consts::PI.powi(2));
    Ok(())
}
