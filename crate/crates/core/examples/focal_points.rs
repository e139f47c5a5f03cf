//! Focal instants along a horizontal geodesic of a static product with a
//! round factor of curvature k: they sit at multiples of pi / sqrt(k).

use std::f64::consts::PI;

use morse_sturm::generators::static_constant_curvature_problem;
use morse_sturm::jacobi::{focal_instants, jacobi_value_spaces, DEFAULT_T_LO};

fn main() -> morse_sturm::Result<()> {
    for root in [0.8, 1.25, 1.5, 2.25, 3.2] {
        let k = (root * PI).powi(2);
        let p = static_constant_curvature_problem(k);
        let report = focal_instants(&p, DEFAULT_T_LO)?;
        let expected: Vec<f64> = (1..).map(|m| m as f64 / root).take_while(|t| *t < 1.0).collect();
        println!("k = ({root} pi)^2");
        for inst in &report.instants {
            println!("  t0 = {:.10}  multiplicity {}  residual {:.1e}", inst.t0, inst.multiplicity, inst.residual);
        }
        println!("  expected {expected:?}");
    }

    let p = static_constant_curvature_problem((1.5 * PI).powi(2));
    for t in [0.5, 2.0 / 3.0] {
        let (j, j_star) = jacobi_value_spaces(&p, t)?;
        println!("t = {t:.4}: dim J = {}, dim J* = {}", j.dim(), j_star.dim());
    }
    Ok(())
}
