//! Index on H0 at sigma = 1 against the pseudo-focal count for seeded random
//! problems. Usage: random_crosscheck [seeds] [mesh]

use morse_sturm::generators::random_problem;
use morse_sturm::index_form::{epsilon_invariant, index_and_nullity, SpaceKind};
use morse_sturm::jacobi::DEFAULT_T_LO;
use morse_sturm::pseudo::pseudo_focal_instants;

fn main() -> morse_sturm::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let seeds = args.next().unwrap_or(20);
    let mesh = args.next().unwrap_or(128) as usize;
    let mut mismatches = 0;
    println!("seed  regime                 mu0(1)  nullity  pseudo-focal  epsilon");
    for seed in 0..seeds {
        let p = random_problem(seed, 2, 20.0)?;
        let regime = p.validate().regime;
        let r = index_and_nullity(&p, 1.0, mesh, SpaceKind::H0)?;
        let count = pseudo_focal_instants(&p, DEFAULT_T_LO)?.count_before(1.0, 1e-8);
        let eps = epsilon_invariant(&p, mesh)?;
        if r.nullity == 0 && r.n_minus != count {
            mismatches += 1;
        }
        println!("{seed:>4}  {:<22} {:>6}  {:>7}  {count:>12}  {eps:>7}", format!("{regime:?}"), r.n_minus, r.nullity);
    }
    println!("{mismatches} mismatches");
    Ok(())
}
