//! Galerkin index form on the static sphere: index and nullity on H0 and H*
//! across sigma, the epsilon invariant and the Riemannian reduction.

use std::f64::consts::PI;

use morse_sturm::generators::static_constant_curvature_problem;
use morse_sturm::index_form::{
    constraint_kernel, epsilon_invariant, index_and_nullity, kernels_coincide, riemannian_reduction_index, SpaceKind,
};

fn main() -> morse_sturm::Result<()> {
    let p = static_constant_curvature_problem((1.5 * PI).powi(2));
    let mesh = 128;
    let z = constraint_kernel(&p, 1.0, mesh, SpaceKind::H0)?;
    println!("{} degrees of freedom, constrained space of dimension {}", z.space.dof_count, z.kernel_basis.ncols());
    for sigma in [0.3, 0.6, 2.0 / 3.0, 0.7, 1.0] {
        let h0 = index_and_nullity(&p, sigma, mesh, SpaceKind::H0)?;
        let hs = index_and_nullity(&p, sigma, mesh, SpaceKind::HStar)?;
        println!(
            "sigma {sigma:.4}: H0 index {} nullity {} (min |eig| {:.2e}); H* index {}",
            h0.n_minus, h0.nullity, h0.smallest_abs_eigenvalue, hs.n_minus
        );
    }
    println!("kernels of H0 and H* coincide at 1: {}", kernels_coincide(&p, 1.0, 64)?);
    println!("epsilon = {}", epsilon_invariant(&p, mesh)?);
    let riem = riemannian_reduction_index(&p, &[0], 1.0, mesh)?;
    println!("Riemannian reduction: index {} nullity {}", riem.n_minus, riem.nullity);
    Ok(())
}
