//! Exact marginals of a pattern union with every solver.

use prefdb::exact::{
    bipartite_solver, general_solver, oracle_marginal, two_label_solver, upper_bound_solver, EdgeBudget,
    ExactConfig,
};
use prefdb::models::{LabeledModel, MallowsModel};
use prefdb::patterns::PatternUnion;
use prefdb::rankings::{LabelingFunction, Ranking};

fn main() -> prefdb::Result<()> {
    let sigma = Ranking::new(["a", "b", "c", "d", "e", "f"])?;
    let lam = LabelingFunction::new()
        .with("a", ["x"])
        .with("b", ["y"])
        .with("c", ["x", "z"])
        .with("d", ["y"])
        .with("e", ["z"])
        .with("f", ["x"]);
    let model = LabeledModel::new(MallowsModel::new(sigma, 0.4)?, lam);

    let two: PatternUnion = "y>x\nz>x".parse()?;
    println!("oracle    {:.10}", oracle_marginal(&two, &model)?);
    println!("two-label {:.10}", two_label_solver(&two, &model)?.probability);

    let bip: PatternUnion = "y>x & z>x\nz>y".parse()?;
    let exact = bipartite_solver(&bip, &model)?;
    println!("bipartite {:.10} ({} states)", exact.probability, exact.states_explored);
    for budget in [EdgeBudget::One, EdgeBudget::Two] {
        println!("  {budget}-edge bound {:.10}", upper_bound_solver(&bip, &model, budget)?.probability);
    }

    let general = general_solver(&bip, &model, &ExactConfig::default())?;
    println!("general   {:.10}", general.probability);
    for term in &general.terms {
        println!("  {:+} Pr({:?}) = {:.10} via {}", term.sign, term.subset, term.probability, term.backend);
    }
    Ok(())
}
