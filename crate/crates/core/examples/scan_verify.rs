//! Index functions along sigma and the full verification report.
//! Usage: scan_verify [grid] [mesh]

use std::f64::consts::PI;

use morse_sturm::generators::static_constant_curvature_problem;
use morse_sturm::scan::{scan, verify};

fn main() -> morse_sturm::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let grid = args.next().unwrap_or(25);
    let mesh = args.next().unwrap_or(64);
    let p = static_constant_curvature_problem((2.25 * PI).powi(2));

    let sc = scan(&p, grid, mesh)?;
    print!("{}", sc.to_csv());
    let report = verify(&p, grid, mesh)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
