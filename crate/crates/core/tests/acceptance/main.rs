//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p weld --test acceptance`. A subset can be chosen
//! by passing criterion numbers: `cargo test -p weld --test acceptance -- 1 3`.

mod alignment;
mod full_scale;
mod oracles;
mod synthetic_runs;

use std::process::ExitCode;
use std::time::{Duration, Instant};

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "pair-loss gradient check",
            budget: Duration::from_secs(10),
            run: oracles::criterion_1,
        },
        Criterion {
            id: 2,
            name: "JSD oracle",
            budget: Duration::from_secs(5),
            run: oracles::criterion_2,
        },
        Criterion {
            id: 3,
            name: "UPGMA oracle",
            budget: Duration::from_secs(30),
            run: oracles::criterion_3,
        },
        Criterion {
            id: 4,
            name: "EM alignment",
            budget: Duration::from_secs(60),
            run: alignment::criterion_4,
        },
        Criterion {
            id: 5,
            name: "self-divergence and separation",
            budget: Duration::from_secs(300),
            run: synthetic_runs::criterion_5,
        },
        Criterion {
            id: 6,
            name: "genome tokenizer counts",
            budget: Duration::from_secs(10),
            run: oracles::criterion_6,
        },
        Criterion {
            id: 7,
            name: "subsampling statistics",
            budget: Duration::from_secs(60),
            run: oracles::criterion_7,
        },
        Criterion {
            id: 8,
            name: "desk-scale family recovery",
            budget: Duration::from_secs(900),
            run: synthetic_runs::criterion_8,
        },
        Criterion {
            id: 9,
            name: "full-scale harness and coding-region counts",
            budget: Duration::from_secs(300),
            run: full_scale::criterion_9,
        },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= c.budget;
        let pass = outcome.pass && in_budget;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {}: {} ({}; {:.2}s of {}s budget)",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            outcome.detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
