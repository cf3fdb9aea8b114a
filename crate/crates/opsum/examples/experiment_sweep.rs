//! Runs a reduced version of every experiment (E1–E5) in one go and prints
//! the aggregates; the `opsum experiment` subcommand runs the full presets
//! and writes JSON/CSV reports.
//!
//! Run with `cargo run --release --example experiment_sweep`.

use opsum::experiments::{run, ExperimentConfig, ExperimentId};

fn main() {
    for id in [
        ExperimentId::E1,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
    ] {
        let mut cfg = ExperimentConfig::default_for(id);
        cfg.samples = match id {
            ExperimentId::E1 => 50,
            ExperimentId::E2 => 1,
            ExperimentId::E3 => 10,
            ExperimentId::E4 => 5,
            ExperimentId::E5 => 20,
        };
        let t0 = std::time::Instant::now();
        let report = run(&cfg).unwrap();
        println!(
            "{}: {:?} — {} records, {} failures, {} indeterminate, stats {:?} ({:.1?})",
            id,
            report.aggregate.outcome,
            report.aggregate.total,
            report.aggregate.failures,
            report.aggregate.indeterminates,
            report.aggregate.stats,
            t0.elapsed()
        );
    }
}
