//! Identical session requests share one solver call.

use std::sync::Arc;

use prefdb::models::MallowsModel;
use prefdb::patterns::PatternUnion;
use prefdb::query::{solve_requests, Request, SolverConfig};
use prefdb::rankings::{LabelingFunction, Ranking};

fn main() -> prefdb::Result<()> {
    let lam = Arc::new(LabelingFunction::identity(Ranking::new(["a", "b", "c", "d", "e"])?.items()));
    let union: PatternUnion = "e>a\nd>b".parse()?;
    let models: Vec<Arc<MallowsModel>> = [0.2, 0.5, 0.8]
        .into_iter()
        .map(|phi| Ok(Arc::new(MallowsModel::new(Ranking::new(["a", "b", "c", "d", "e"])?, phi)?)))
        .collect::<prefdb::Result<_>>()?;
    let requests: Vec<Request> = (0..3000)
        .map(|k| Request {
            session: format!("voter{k}"),
            model: Arc::clone(&models[k % models.len()]),
            union: union.clone(),
            lam: Arc::clone(&lam),
        })
        .collect();

    let config = SolverConfig::default();
    let grouped = solve_requests(&requests, &config, true)?;
    let plain = solve_requests(&requests, &config, false)?;
    println!("{} requests: {} calls grouped, {} ungrouped", requests.len(), grouped.solver_calls, plain.solver_calls);
    println!("answers identical: {}", grouped.probabilities == plain.probabilities);
    for (model, p) in models.iter().zip(&grouped.probabilities) {
        println!("  φ = {}: {p:.6}", model.phi());
    }
    Ok(())
}
