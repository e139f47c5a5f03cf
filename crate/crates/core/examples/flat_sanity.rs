//! Minkowski space with R = 0: no focal points and a positive index form.

use morse_sturm::generators::{flat_problem, PChoice};
use morse_sturm::index_form::{index_and_nullity, SpaceKind};
use morse_sturm::jacobi::{focal_instants, DEFAULT_T_LO};
use morse_sturm::pseudo::pseudo_focal_instants;

fn main() -> morse_sturm::Result<()> {
    for choice in [PChoice::Point, PChoice::Spacelike(2)] {
        let p = flat_problem(4, choice);
        let report = p.validate();
        println!("P = {choice:?}: valid {}, regime {:?}", report.valid, report.regime);
        println!("  focal instants: {}", focal_instants(&p, DEFAULT_T_LO)?.instants.len());
        println!("  pseudo-focal instants: {}", pseudo_focal_instants(&p, DEFAULT_T_LO)?.instants.len());
        for sigma in [0.25, 0.5, 1.0] {
            let h0 = index_and_nullity(&p, sigma, 64, SpaceKind::H0)?;
            let hs = index_and_nullity(&p, sigma, 64, SpaceKind::HStar)?;
            println!("  sigma {sigma}: H0 ({}, {}), H* ({}, {})", h0.n_minus, h0.nullity, hs.n_minus, hs.nullity);
        }
    }
    Ok(())
}
