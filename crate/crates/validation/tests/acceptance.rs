//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use negent_validation as selftest;

fn main() {
    let outcomes = selftest::run_all();
    for o in &outcomes {
        println!("{}", o.timed_line());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
