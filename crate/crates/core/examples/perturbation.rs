//! Making a timelike Jacobi field admissible by adding (a + b t) times the
//! geodesic direction, and the reverse operation of projecting it out.

use morse_sturm::generators::flat_problem;
use morse_sturm::generators::PChoice;
use morse_sturm::problem::SearchRange;
use morse_sturm::VectorCurve;
use nalgebra::dvector;

fn main() -> morse_sturm::Result<()> {
    let p = flat_problem(3, PChoice::Point);
    let gamma_dot = VectorCurve::constant(&dvector![0.0, 1.0, 0.0]);
    println!("before: {:?}", p.classify_y()?.kind);
    let window = SearchRange::new(-0.5, 0.5, 21);
    let (a, b, q) = p.perturb_to_admissible(&gamma_dot, window, window)?;
    let c = q.classify_y()?;
    println!("a = {a}, b = {b}: {:?}, |m(Y)(0)| = {:.3}", c.kind, c.m_at_zero_norm);
    println!("regime after perturbation: {:?}", q.validate().regime);
    let back = q.orthogonalize_y(&gamma_dot)?;
    println!("after projecting out the geodesic direction: {:?}", back.classify_y()?.kind);
    Ok(())
}
