//! Rankings, partial orders, labels and pattern matching.

use prefdb::patterns::{classify, PatternUnion};
use prefdb::rankings::{is_consistent, kendall_tau, matches, LabelingFunction, PartialOrder, Ranking};

fn main() -> prefdb::Result<()> {
    let sigma = Ranking::new(["a", "b", "c", "d"])?;
    let tau = Ranking::new(["c", "a", "d", "b"])?;
    println!("σ = {sigma}, τ = {tau}, Kendall distance {}", kendall_tau(&sigma, &tau)?);

    let u = PartialOrder::new([("a", "b"), ("c", "d")])?;
    let extensions = u.linear_extensions()?;
    println!("{} linear extensions of a>b, c>d", extensions.len());
    println!("τ consistent with a>b, c>d: {}", is_consistent(&tau, &u)?);

    let lam = LabelingFunction::new()
        .with("a", ["dem"])
        .with("b", ["rep"])
        .with("c", ["dem", "female"])
        .with("d", ["rep", "female"]);
    let g: PatternUnion = "{dem,female}>rep\nrep>dem".parse()?;
    println!("{}-pattern union, {}", g.len(), classify(&g));
    for (k, pattern) in g.patterns().iter().enumerate() {
        println!("  g{} = {pattern}: σ matches {}, τ matches {}", k + 1, matches(&sigma, &lam, pattern), matches(&tau, &lam, pattern));
    }
    Ok(())
}
