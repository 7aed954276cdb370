//! Runs the full verification suite on a chosen preset and prints each
//! report as JSON. Usage: `check_suite [hardy|bergman|dirichlet] [d]`.

use shiftlab::checks::{run_suite, Sampling, Suite};
use shiftlab::{make_space, WeightKind};

fn main() -> shiftlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        Some("bergman") => WeightKind::Bergman,
        Some("dirichlet") => WeightKind::Dirichlet,
        _ => WeightKind::Hardy,
    };
    let d = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let model = make_space(kind, d, 256, 1e-10)?;
    let reports = run_suite(&model, Suite::All, Sampling::default());
    for r in &reports {
        println!("{:<5} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
    }
    println!("{}", serde_json::to_string_pretty(&reports)?);
    Ok(())
}
