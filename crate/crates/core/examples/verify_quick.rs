//! Run the quick property suite, then again with injected faults.

use fracheat::verify::{run_suite, VerifyOptions};

fn main() {
    let report = run_suite(VerifyOptions { quick: true, fault_seed: None });
    for line in report.lines() {
        println!("{line}");
    }
    let faulty = run_suite(VerifyOptions { quick: true, fault_seed: Some(7) });
    let flagged = faulty.checks.iter().filter(|c| !c.passed).count();
    println!("with faults injected: {flagged} of {} checks fail", faulty.checks.len());
}
