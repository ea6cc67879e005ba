//! One PASS/FAIL line per acceptance criterion, each followed by its rows.
//!
//! Runs without the libtest harness so the table is printed on success too.

use fraclab_core::suite::{failing_criteria, mutation_check, run_suite, SuiteOptions, CRITERIA};

fn main() {
    let opts = SuiteOptions::default();
    let rows = run_suite(&opts).expect("suite runs");
    let mutation = mutation_check(&opts, 1.01, 3).expect("mutated suite runs");

    let failing = failing_criteria(&rows);
    let mut lines = vec![];
    for (i, name) in CRITERIA.iter().enumerate() {
        let c = i as u32 + 1;
        let mut pass = !failing.contains(&c);
        if c == 9 {
            pass &= mutation.pass;
        }
        lines.push(format!("{} criterion {c}: {name}", if pass { "PASS" } else { "FAIL" }));
        for r in rows.iter().filter(|r| r.criterion == c) {
            lines.push(format!("    {}  {}", r.report.line(), r.report.detail));
        }
        if c == 9 {
            lines.push(format!("    {}  {}", mutation.line(), mutation.detail));
        }
    }
    println!("{}", lines.join("\n"));
    if !failing.is_empty() || !mutation.pass {
        eprintln!("acceptance failed: criteria {failing:?}, mutation: {}", mutation.detail);
        std::process::exit(1);
    }
}
