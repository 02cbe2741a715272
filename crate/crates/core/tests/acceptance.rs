//! One line per acceptance criterion. Thresholds live in `antipt_core::validation`.

use std::process::ExitCode;

use antipt_core::validation::{ValidationOptions, Validator, CRITERIA};

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let validator = Validator::new(ValidationOptions::default());
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        if !filter.is_empty() && !filter.iter().any(|f| id.eq_ignore_ascii_case(f)) {
            continue;
        }
        let report = validator.run(id).expect("known criterion");
        println!("{report}");
        if !report.passed() {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
