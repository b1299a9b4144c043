//! Run the oracle validation suites in-process: determinant lemmas against
//! dense factorization, moment closed forms against Monte-Carlo importance
//! sampling, prior factors against fine quadrature, planar closed forms
//! against the general engine, and the s = 1/2 stationarity of the linear
//! bounds.
//!
//! The same suites back the `wwbkit validate` subcommand.
//!
//! Run with: cargo run --release --example oracle_checks

use wwbkit::validate::{run_suite, SUITES};

fn main() -> wwbkit::Result<()> {
    let seed = 20260811;
    let mut all = true;
    for suite in SUITES {
        let t0 = std::time::Instant::now();
        let report = run_suite(suite, seed)?.remove(0);
        let ok = report.passed();
        all &= ok;
        println!(
            "[{}] {:<20} {:>4} checks, max deviation {:9.3e}, {:.2}s",
            if ok { "PASS" } else { "FAIL" },
            report.suite,
            report.checks.len(),
            report.max_deviation(),
            t0.elapsed().as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
    Ok(())
}
