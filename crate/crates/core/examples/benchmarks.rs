//! Synthetic benchmark instances checked against the exact solvers.

use prefdb::exact::{bipartite_solver, oracle_marginal};
use prefdb::patterns::classify;
use prefdb::workbench::{generate_benchmark, generate_polls, BenchmarkSpec, Family, PollsSpec};

fn main() -> prefdb::Result<()> {
    for family in [Family::A, Family::B, Family::C, Family::D] {
        println!("{family}: {} instances", BenchmarkSpec::default_for(family)?.instance_count());
    }

    let spec = BenchmarkSpec {
        items: vec![7],
        patterns: vec![2],
        labels: vec![2, 3],
        items_per_label: vec![2],
        instances: 2,
        ..BenchmarkSpec::default_for(Family::C)?
    };
    for inst in generate_benchmark(&spec, 11)? {
        let exact = bipartite_solver(&inst.union, &inst.model)?.probability;
        let oracle = oracle_marginal(&inst.union, &inst.model)?;
        println!("{} ({}): {exact:.8} vs oracle {oracle:.8}", inst.name, classify(&inst.union));
    }

    let polls = generate_polls(&PollsSpec { voters: 50, ..PollsSpec::default() }, 3)?;
    println!("polls: {} items, {} sessions", polls.items().len(), polls.sessions().len());
    Ok(())
}
