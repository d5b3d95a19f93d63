//! Mallows and RIM models: probabilities, sampling and AMP.

use std::collections::HashMap;

use prefdb::models::{exact_distribution, MallowsModel, RankingModel};
use prefdb::rankings::{PartialOrder, Ranking};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> prefdb::Result<()> {
    let mal = MallowsModel::new(Ranking::new(["a", "b", "c", "d"])?, 0.5)?;
    let rim = mal.to_rim();
    let t = Ranking::new(["b", "a", "d", "c"])?;
    println!("Pr({t}) = {:.6} (Mallows) = {:.6} (RIM)", mal.prob(&t)?, rim.prob(&t)?);

    let dist = exact_distribution(&RankingModel::Mallows(mal.clone()))?;
    println!("{} rankings, total mass {:.12}", dist.len(), dist.values().sum::<f64>());

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 20_000;
    let mut counts: HashMap<Ranking, usize> = HashMap::new();
    for _ in 0..n {
        *counts.entry(mal.sample(&mut rng)).or_default() += 1;
    }
    let tv: f64 = dist.iter().map(|(r, p)| (p - counts.get(r).copied().unwrap_or(0) as f64 / n as f64).abs()).sum::<f64>() / 2.0;
    println!("total variation of {n} samples: {tv:.4}");

    let u = PartialOrder::new([("d", "a")])?;
    for _ in 0..3 {
        let (tau, q) = mal.amp_sample(&u, &mut rng)?;
        println!("AMP sample under d>a: {tau} (proposal probability {q:.4})");
    }
    Ok(())
}
