//! Pass-rate filtering with the stub solvers. Deterministic solvers are
//! always all-right or all-wrong, so only the coin flip retains anything.
//!
//! cargo run --release --example filter -- [tasks] [attempts]

use tabula::filter::{filter_stream, CoinSolver, Decision, FilterTask, OracleSolver, SolverAdapter, WrongSolver};
use tabula::synth::{demo_corpus, synthesize, DimensionMix, SynthConfig};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().ok());
    let count = args.next().flatten().unwrap_or(300);
    let n = args.next().flatten().unwrap_or(8) as u32;
    let corpus = demo_corpus(1, 80);
    let config = SynthConfig::default();
    let tasks: Vec<FilterTask> = synthesize(&config, DimensionMix::default(), &corpus, 3, count)
        .unwrap()
        .filter_map(|(_, r)| r.ok())
        .map(|i| FilterTask::new(&i.id, &i.context, &i.question, &i.sql, &i.answer).unwrap())
        .collect();

    let expected = 1.0 - 2.0 * 0.5f64.powi(n as i32);
    let solvers: [&dyn SolverAdapter; 3] = [&OracleSolver, &WrongSolver, &CoinSolver::default()];
    for s in solvers {
        let out = filter_stream(&tasks, s, n, 11).unwrap();
        println!(
            "{:>7}: retain {:>4}  noise {:>4}  trivial {:>4}",
            s.name(),
            out.count(Decision::Retain),
            out.count(Decision::DiscardNoise),
            out.count(Decision::DiscardTrivial)
        );
    }
    println!("coin retention expected {expected:.5} per task with N = {n}");
}
