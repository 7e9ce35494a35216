//! Acceptance criteria: one PASS/FAIL line per criterion. Exits nonzero if
//! any criterion fails.

use firey_core::acceptance::{run_criterion, CRITERIA};

const SEED: u64 = 20240611;

fn main() {
    let mut failed = Vec::new();
    for &(id, _, _) in CRITERIA.iter() {
        let r = run_criterion(id, SEED);
        println!("{}", r.line());
        if !r.pass {
            failed.push(id);
        }
    }
    println!();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", CRITERIA.len());
    } else {
        println!(
            "acceptance: {} of {} criteria pass; failing: {failed:?}",
            CRITERIA.len() - failed.len(),
            CRITERIA.len()
        );
        std::process::exit(1);
    }
}
