//! Rare-event estimation: rejection, IS-AMP, MIS-AMP and its lite and
//! adaptive variants against the exact value.

use prefdb::approx::{
    greedy_modals, is_amp_estimate, mis_amp_adaptive, mis_amp_estimate, mis_amp_lite, rejection_estimate,
    AdaptiveConfig, Proposal,
};
use prefdb::exact::oracle_marginal;
use prefdb::models::{LabeledModel, MallowsModel};
use prefdb::patterns::PatternUnion;
use prefdb::rankings::Ranking;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> prefdb::Result<()> {
    let mal = MallowsModel::new(Ranking::new(["s1", "s2", "s3", "s4", "s5", "s6"])?, 0.1)?;
    let psi = Ranking::new(["s6", "s1"])?;
    let g: PatternUnion = "s6>s1".parse()?;
    let model = LabeledModel::with_identity_labels(mal.clone());
    let exact = oracle_marginal(&g, &model)?;
    println!("exact            {exact:.4e}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 5000;
    let rs = rejection_estimate(&g, &model, n, &mut rng)?;
    println!("rejection        {:.4e} ± {:.1e}", rs.value, rs.std_error);
    let is = is_amp_estimate(&psi, &mal, n, &mut rng)?;
    println!("IS-AMP           {:.4e} ± {:.1e}", is.value, is.std_error);

    let modals = greedy_modals(&psi, mal.sigma())?;
    let proposals = modals
        .iter()
        .map(|c| Proposal::new(c.clone(), mal.phi(), psi.clone()))
        .collect::<prefdb::Result<Vec<_>>>()?;
    let mis = mis_amp_estimate(&proposals, &mal, n / proposals.len(), &mut rng)?;
    println!("MIS-AMP ({} modals) {:.4e} ± {:.1e}", proposals.len(), mis.value, mis.std_error);

    for d in [1, 3] {
        let lite = mis_amp_lite(&g, &model, d, n, &mut rng)?;
        println!("lite d={d}         {:.4e} (raw {:.4e}, compensation {:?})", lite.value, lite.raw, lite.compensation);
    }
    let adaptive = mis_amp_adaptive(&g, &model, &AdaptiveConfig::default(), &mut rng)?;
    println!("adaptive         {:.4e} with {} proposals", adaptive.value, adaptive.proposals_used);
    Ok(())
}
