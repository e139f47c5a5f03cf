//! Two-endpoint index with the final subspace Q = span{e_2} on the static
//! sphere, split into the fixed-endpoint index and the endpoint correction.

use std::f64::consts::PI;

use morse_sturm::generators::static_constant_curvature_problem;
use morse_sturm::index_form::{index_and_nullity, two_endpoint_index, SpaceKind};
use morse_sturm::SubspaceBasis;
use nalgebra::{dvector, DMatrix};

fn main() -> morse_sturm::Result<()> {
    let q = SubspaceBasis::from_vectors(3, &[dvector![0.0, 0.0, 1.0]])?;
    for root in [1.25, 1.5] {
        let p = static_constant_curvature_problem((root * PI).powi(2)).with_q(q.clone(), DMatrix::zeros(1, 1))?;
        let r = two_endpoint_index(&p, 128)?;
        let mu0 = index_and_nullity(&p, 1.0, 128, SpaceKind::H0)?.n_minus;
        println!("k = ({root} pi)^2: Q inside J[1]: {}", r.decomposition_valid);
        println!("  correction inertia {:?} on a space of dimension {}", r.correction, r.j_q_dim);
        println!("  total index {} (nullity {}) vs {mu0} + {}", r.total.n_minus, r.total.nullity, r.correction.n_minus);
    }
    Ok(())
}
