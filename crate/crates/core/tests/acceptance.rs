//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::process::ExitCode;

use rocover::checks::{run_check, CHECK_NAMES};

const SEED: u64 = 1;

fn main() -> ExitCode {
    let mut failed = 0;
    for (i, name) in CHECK_NAMES.iter().enumerate() {
        match run_check(name, SEED) {
            Ok(report) => {
                println!("[{}] {}", i + 1, report.line());
                failed += usize::from(!report.passed);
            }
            Err(e) => {
                println!("[{}] FAIL {name}: error: {e}", i + 1);
                failed += 1;
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", CHECK_NAMES.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
