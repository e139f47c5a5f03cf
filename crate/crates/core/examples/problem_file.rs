//! Writing a problem to JSON, reading it back and validating it.

use morse_sturm::generators::random_problem;
use morse_sturm::MorseSturmProblem;

fn main() -> morse_sturm::Result<()> {
    let p = random_problem(4, 2, 20.0)?;
    let path = std::env::temp_dir().join("morse_sturm_problem.json");
    p.save(&path)?;
    let back = MorseSturmProblem::load(&path)?;
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("identical after round trip: {}", back.to_json() == p.to_json());
    let report = back.validate();
    for check in &report.checks {
        println!("  [{}] {}: {}", if check.pass { "ok" } else { "fail" }, check.name, check.detail);
    }
    println!("regime {:?}, notes {:?}", report.regime, report.notes);
    Ok(())
}
