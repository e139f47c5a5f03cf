//! Pseudo-Jacobi fields on a random problem: the space, its constraint and
//! the instants where a nonzero pseudo-Jacobi field vanishes.

use morse_sturm::generators::random_problem;
use morse_sturm::jacobi::{focal_instants, DEFAULT_T_LO};
use morse_sturm::pseudo::{max_m_y_pairing, pseudo_basis, pseudo_focal_instants};

fn main() -> morse_sturm::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let p = random_problem(seed, 2, 20.0)?;
    println!("seed {seed}: regime {:?}, dim P = {}", p.validate().regime, p.p.dim());
    println!("max |g(m(Y), Y)| = {:.2e}", max_m_y_pairing(&p, 257)?);

    let basis = pseudo_basis(&p)?;
    println!("pseudo-Jacobi space: {:?}", basis.info);
    for f in &basis.fields {
        println!("  lambda = {:+.4}  C_V = {:+.2e}  drift {:.1e}", f.lambda, f.solution.c_v, f.solution.c_drift);
    }
    for inst in pseudo_focal_instants(&p, DEFAULT_T_LO)?.instants {
        println!("pseudo-focal t0 = {:.8} (multiplicity {})", inst.t0, inst.multiplicity);
    }
    for inst in focal_instants(&p, DEFAULT_T_LO)?.instants {
        println!("focal        t0 = {:.8} (multiplicity {})", inst.t0, inst.multiplicity);
    }
    Ok(())
}
