//! Runs every acceptance criterion and prints one line per criterion.
mod common;

use std::process::ExitCode;
use std::time::Instant;

type Criterion = (&'static str, fn() -> common::Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("pushout worked example", common::worked_example),
        ("generator and coface tables", common::generator_tables),
        ("coglobular identities", common::coglobular_identities),
        ("monad laws on random diagrams", || {
            common::monad_laws(500, 2024)
        }),
        ("tree calculus", || common::tree_calculus(3, 6)),
        ("strict collapse", common::strict_collapse),
        ("contraction saturation audit", common::saturation_audit),
        ("composition system", common::composition_system),
        ("contraction lifting", common::contraction_lifting),
        ("magmatic instances", common::magmatic_instances),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
