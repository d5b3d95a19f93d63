//! Sampling estimators for pattern-union marginals: rejection sampling,
//! importance sampling over AMP proposals, and the multi-proposal variants.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{AmpSampler, LabeledModel, MallowsModel};
use crate::patterns::{decompose_to_subrankings, DecompositionLimits, PatternUnion, UnionMatcher};
use crate::rankings::{count_inversions, PartialOrder, Ranking, SubRanking};

/// Default cap on the number of greedy completions kept per step.
pub const DEFAULT_MODAL_CAP: usize = 4096;
/// Modal pool cap in MIS-AMP-lite, as a multiple of the proposal budget.
pub const MODAL_POOL_FACTOR: usize = 64;

/// An AMP proposal: Mallows centered at a modal, conditioned on a
/// sub-ranking.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub center: Ranking,
    pub phi: f64,
    pub condition: SubRanking,
    /// `cᵢ = nᵢ / N`.
    pub weight_share: f64,
}

impl Proposal {
    pub fn new(center: Ranking, phi: f64, condition: SubRanking) -> Result<Self> {
        if !(phi > 0.0 && phi <= 1.0) {
            return Err(Error::InvalidModel(format!("proposal phi = {phi} outside (0, 1]")));
        }
        let po = PartialOrder::from_subranking(&condition);
        if !crate::rankings::is_consistent(&center, &po)? {
            return Err(Error::InvalidArgument(format!(
                "proposal center {center:?} violates {condition:?}"
            )));
        }
        Ok(Proposal {
            center,
            phi,
            condition,
            weight_share: 1.0,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    /// Final estimate, compensated when applicable.
    pub value: f64,
    /// Estimate before compensation.
    pub raw: f64,
    /// Standard error of the raw estimate.
    pub std_error: f64,
    pub samples_used: usize,
    pub proposals_used: usize,
    /// `(c_ψ, c_r)`.
    pub compensation: (f64, f64),
}

impl Estimate {
    fn uncompensated(raw: f64, std_error: f64, samples: usize, proposals: usize) -> Self {
        Estimate {
            value: raw,
            raw,
            std_error,
            samples_used: samples,
            proposals_used: proposals,
            compensation: (1.0, 1.0),
        }
    }

    fn zero() -> Self {
        Estimate::uncompensated(0.0, 0.0, 0, 0)
    }
}

/// Fraction of `n` forward samples that match `G`.
pub fn rejection_estimate<R: Rng + ?Sized>(
    union: &PatternUnion,
    model: &LabeledModel,
    n: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("rejection sampling needs n >= 1".into()));
    }
    let matcher = UnionMatcher::new(union, model.items(), model.lam());
    if !matcher.satisfiable() {
        return Ok(Estimate::uncompensated(0.0, 0.0, n, 0));
    }
    let mut pos_of = vec![0; model.len()];
    let mut hits = 0usize;
    for _ in 0..n {
        let perm = model.model().sample_indices(rng);
        for (p, &k) in perm.iter().enumerate() {
            pos_of[k] = p;
        }
        if matcher.matches(&pos_of) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    Ok(Estimate::uncompensated(p, (p * (1.0 - p) / n as f64).sqrt(), n, 0))
}

/// σ-indices of `psi`'s items, in `psi`'s order.
fn psi_indices(psi: &SubRanking, sigma: &Ranking) -> Result<Vec<usize>> {
    psi.items()
        .iter()
        .map(|x| {
            sigma
                .rank_of(x)
                .map(|r| r - 1)
                .ok_or_else(|| Error::UnknownItem(x.to_string()))
        })
        .collect()
}

/// Greedy completion of a σ-index sequence: every missing σᵢ is inserted,
/// in σ order, at the positions adding the fewest discordant pairs.
/// Returns completions with their Kendall-tau distance to σ.
fn greedy_complete(psi: &[usize], m: usize, all_ties: bool, cap: usize) -> Vec<(Vec<usize>, usize)> {
    let mut present = vec![false; m];
    for &k in psi {
        present[k] = true;
    }
    let mut current = vec![(psi.to_vec(), count_inversions(psi))];
    for i in (0..m).filter(|&i| !present[i]) {
        let mut next: Vec<(Vec<usize>, usize)> = Vec::new();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for (seq, dist) in &current {
            // cost of inserting before seq[j]: later items of σ placed
            // before it plus earlier items placed after it
            let mut cost = seq.iter().filter(|&&k| k < i).count();
            let mut best = cost;
            let mut ties = vec![0];
            for (j, &k) in seq.iter().enumerate() {
                if k < i {
                    cost -= 1;
                } else {
                    cost += 1;
                }
                if cost < best {
                    best = cost;
                    ties.clear();
                    ties.push(j + 1);
                } else if cost == best && all_ties {
                    ties.push(j + 1);
                }
            }
            for &j in &ties {
                let mut s = seq.clone();
                s.insert(j, i);
                if seen.insert(s.clone()) {
                    next.push((s, dist + best));
                }
            }
        }
        if next.len() > cap {
            next.sort_by_key(|(_, d)| *d);
            next.truncate(cap);
        }
        current = next;
    }
    current
}

/// Greedy modals of `σ` conditioned on `psi`.
pub fn greedy_modals(psi: &SubRanking, sigma: &Ranking) -> Result<Vec<Ranking>> {
    greedy_modals_capped(psi, sigma, DEFAULT_MODAL_CAP)
}

pub fn greedy_modals_capped(psi: &SubRanking, sigma: &Ranking, cap: usize) -> Result<Vec<Ranking>> {
    let idx = psi_indices(psi, sigma)?;
    Ok(greedy_complete(&idx, sigma.len(), true, cap.max(1))
        .into_iter()
        .map(|(seq, _)| Ranking::from_indices(sigma.items(), &seq))
        .collect())
}

/// Distance from σ of a single greedy completion of `psi` (smallest tied
/// position at each step).
pub fn approximate_distance(psi: &SubRanking, sigma: &Ranking) -> Result<usize> {
    let idx = psi_indices(psi, sigma)?;
    Ok(greedy_complete(&idx, sigma.len(), false, 1)[0].1)
}

struct CompiledProposal {
    amp: AmpSampler,
    to_local: Vec<usize>,
    to_global: Vec<usize>,
}

impl CompiledProposal {
    fn new(p: &Proposal, sigma: &Ranking) -> Result<Self> {
        let center = MallowsModel::new(p.center.clone(), p.phi)?;
        let amp = AmpSampler::new(&center, &PartialOrder::from_subranking(&p.condition))?;
        let to_global = p.center.indices_in(sigma)?;
        if to_global.len() != sigma.len() {
            return Err(Error::ItemMismatch(format!("{:?} vs {sigma:?}", p.center)));
        }
        let mut to_local = vec![0; to_global.len()];
        for (local, &global) in to_global.iter().enumerate() {
            to_local[global] = local;
        }
        Ok(CompiledProposal {
            amp,
            to_local,
            to_global,
        })
    }

    fn log_q(&self, x: &[usize]) -> f64 {
        let local: Vec<usize> = x.iter().map(|&k| self.to_local[k]).collect();
        self.amp.log_prob(&local)
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Log importance weights of `n` draws from each proposal, with
/// balance-heuristic mixture denominators.
fn mis_log_weights<R: Rng + ?Sized>(
    proposals: &[Proposal],
    mal: &MallowsModel,
    n: usize,
    rng: &mut R,
    check: Option<&UnionMatcher>,
) -> Result<Vec<f64>> {
    let compiled: Vec<CompiledProposal> = proposals
        .iter()
        .map(|p| CompiledProposal::new(p, mal.sigma()))
        .collect::<Result<_>>()?;
    let d = compiled.len();
    let log_d = (d as f64).ln();
    let log_z = mal.log_normalizer();
    let seeds: Vec<u64> = (0..d).map(|_| rng.gen()).collect();
    let per_proposal: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds[t]);
            let mut out = Vec::with_capacity(n);
            let mut log_q = vec![0.0; d];
            let mut pos_of = vec![0; mal.len()];
            for _ in 0..n {
                let (local, lq) = compiled[t].amp.sample(&mut rng);
                let x: Vec<usize> = local.iter().map(|&k| compiled[t].to_global[k]).collect();
                for (s, c) in compiled.iter().enumerate() {
                    log_q[s] = if s == t { lq } else { c.log_q(&x) };
                }
                let denom = log_sum_exp(&log_q);
                if cfg!(debug_assertions) {
                    let total: f64 = log_q.iter().map(|lq| (lq - denom).exp()).sum();
                    debug_assert!((total - 1.0).abs() < 1e-12, "balance weights sum to {total}");
                    if let Some(matcher) = check {
                        for (p, &k) in x.iter().enumerate() {
                            pos_of[k] = p;
                        }
                        debug_assert!(matcher.matches(&pos_of), "proposal sample outside G");
                    }
                }
                let log_p = crate::models::log_pow(mal.phi(), count_inversions(&x)) - log_z;
                out.push(log_p - (denom - log_d));
            }
            out
        })
        .collect();
    Ok(per_proposal.into_iter().flatten().collect())
}

/// Mean and standard error from log weights.
fn summarize(log_w: &[f64]) -> (f64, f64) {
    let n = log_w.len() as f64;
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    let scaled: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / n;
    let var = if log_w.len() > 1 {
        scaled.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let scale = max.exp();
    (mean * scale, (var / n).sqrt() * scale)
}

/// Multiple importance sampling over AMP proposals with equal sample
/// counts and balance-heuristic weights.
pub fn mis_amp_estimate<R: Rng + ?Sized>(
    proposals: &[Proposal],
    mal: &MallowsModel,
    n: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if proposals.is_empty() || n == 0 {
        return Err(Error::InvalidArgument("MIS-AMP needs d >= 1 proposals and n >= 1".into()));
    }
    let log_w = mis_log_weights(proposals, mal, n, rng, None)?;
    let (mean, se) = summarize(&log_w);
    Ok(Estimate::uncompensated(mean, se, log_w.len(), proposals.len()))
}

/// Importance sampling with AMP centered at σ itself.
pub fn is_amp_estimate<R: Rng + ?Sized>(
    psi: &SubRanking,
    mal: &MallowsModel,
    n: usize,
    rng: &mut R,
) -> Result<Estimate> {
    mis_amp_estimate(&[sigma_proposal(psi, mal)], mal, n, rng)
}

/// The individual IS-AMP importance weights, for variance studies.
pub fn is_amp_weights<R: Rng + ?Sized>(
    psi: &SubRanking,
    mal: &MallowsModel,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let log_w = mis_log_weights(&[sigma_proposal(psi, mal)], mal, n, rng, None)?;
    Ok(log_w.into_iter().map(f64::exp).collect())
}

// σ need not satisfy ψ, so this bypasses `Proposal::new`
/// Balance-heuristic weights `wᵢ(τ) = qᵢ(τ) / Σₜ qₜ(τ)` under equal shares.
/// All zero when no proposal supports `τ`.
pub fn balance_weights(proposals: &[Proposal], mal: &MallowsModel, tau: &Ranking) -> Result<Vec<f64>> {
    let log_q = proposal_log_probs(proposals, mal, tau)?;
    let denom = log_sum_exp(&log_q);
    if denom == f64::NEG_INFINITY {
        return Ok(vec![0.0; log_q.len()]);
    }
    Ok(log_q.iter().map(|lq| (lq - denom).exp()).collect())
}

/// MIS importance ratio `p(τ) / ((1/d) Σₜ qₜ(τ))`; zero outside every
/// proposal's support.
pub fn importance_weight(proposals: &[Proposal], mal: &MallowsModel, tau: &Ranking) -> Result<f64> {
    let log_q = proposal_log_probs(proposals, mal, tau)?;
    let denom = log_sum_exp(&log_q);
    if denom == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((mal.log_prob(tau)? - denom + (log_q.len() as f64).ln()).exp())
}

fn proposal_log_probs(proposals: &[Proposal], mal: &MallowsModel, tau: &Ranking) -> Result<Vec<f64>> {
    if proposals.is_empty() {
        return Err(Error::InvalidArgument("at least one proposal required".into()));
    }
    let x = tau.indices_in(mal.sigma())?;
    if x.len() != mal.len() {
        return Err(Error::ItemMismatch(format!("{tau:?} vs {:?}", mal.sigma())));
    }
    proposals
        .iter()
        .map(|p| Ok(CompiledProposal::new(p, mal.sigma())?.log_q(&x)))
        .collect()
}

fn sigma_proposal(psi: &SubRanking, mal: &MallowsModel) -> Proposal {
    Proposal {
        center: mal.sigma().clone(),
        phi: mal.phi(),
        condition: psi.clone(),
        weight_share: 1.0,
    }
}

/// Sub-rankings of `G` sorted by approximate distance, reusable across
/// proposal budgets.
pub struct LitePlan {
    mal: MallowsModel,
    matcher: UnionMatcher,
    /// `(ψ as σ-indices, approximate distance)`, ascending by distance.
    subrankings: Vec<(Vec<usize>, usize)>,
}

impl LitePlan {
    pub fn new(union: &PatternUnion, model: &LabeledModel, limits: &DecompositionLimits) -> Result<Self> {
        let mal = model
            .model()
            .as_mallows()
            .cloned()
            .ok_or_else(|| Error::InvalidModel("MIS-AMP requires a Mallows model".into()))?;
        if !(mal.phi() > 0.0) {
            return Err(Error::InvalidModel("MIS-AMP requires phi > 0".into()));
        }
        let subs = decompose_to_subrankings(union, model.lam(), model.items(), limits)?;
        let mut subrankings: Vec<(Vec<usize>, usize)> = subs
            .iter()
            .map(|psi| {
                let idx = psi_indices(psi, mal.sigma())?;
                let dist = greedy_complete(&idx, mal.len(), false, 1)[0].1;
                Ok((idx, dist))
            })
            .collect::<Result<_>>()?;
        subrankings.sort_by_key(|(_, d)| *d);
        let matcher = UnionMatcher::new(union, model.items(), model.lam());
        Ok(LitePlan {
            mal,
            matcher,
            subrankings,
        })
    }

    pub fn subranking_count(&self) -> usize {
        self.subrankings.len()
    }

    /// MIS-AMP-lite with `d` proposals and `n` samples each.
    pub fn estimate<R: Rng + ?Sized>(&self, d: usize, n: usize, rng: &mut R) -> Result<Estimate> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidArgument("MIS-AMP-lite needs d >= 1 and n >= 1".into()));
        }
        if self.subrankings.is_empty() {
            return Ok(Estimate::zero());
        }
        let m = self.mal.len();
        let cap = MODAL_POOL_FACTOR * d;
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        // (modal, distance, condition index)
        let mut pool: Vec<(Vec<usize>, usize, usize)> = Vec::new();
        let mut selected = 0;
        for (s, (psi, _)) in self.subrankings.iter().enumerate() {
            if pool.len() >= d {
                break;
            }
            selected = s + 1;
            for (modal, dist) in greedy_complete(psi, m, true, cap) {
                if seen.insert(modal.clone()) {
                    pool.push((modal, dist, s));
                }
            }
        }
        pool.sort_by_key(|(_, dist, _)| *dist);
        pool.truncate(cap);

        let log_phi = self.mal.phi().ln();
        let mass = |dists: &mut dyn Iterator<Item = usize>| {
            let xs: Vec<f64> = dists.map(|k| k as f64 * log_phi).collect();
            log_sum_exp(&xs)
        };
        let c_psi = (mass(&mut self.subrankings.iter().map(|(_, k)| *k))
            - mass(&mut self.subrankings[..selected].iter().map(|(_, k)| *k)))
        .exp();
        let chosen = &pool[..d.min(pool.len())];
        let c_r = (mass(&mut pool.iter().map(|(_, k, _)| *k)) - mass(&mut chosen.iter().map(|(_, k, _)| *k)))
            .exp();

        let sigma = self.mal.sigma();
        let share = 1.0 / chosen.len() as f64;
        let proposals: Vec<Proposal> = chosen
            .iter()
            .map(|(modal, _, s)| Proposal {
                center: Ranking::from_indices(sigma.items(), modal),
                phi: self.mal.phi(),
                condition: Ranking::from_indices(sigma.items(), &self.subrankings[*s].0),
                weight_share: share,
            })
            .collect();
        let log_w = mis_log_weights(&proposals, &self.mal, n, rng, Some(&self.matcher))?;
        let (raw, se) = summarize(&log_w);
        Ok(Estimate {
            value: raw * c_psi * c_r,
            raw,
            std_error: se,
            samples_used: log_w.len(),
            proposals_used: proposals.len(),
            compensation: (c_psi, c_r),
        })
    }
}

/// MIS-AMP-lite: `d` proposals at the modals closest to σ, compensated
/// for pruned sub-rankings and modals.
pub fn mis_amp_lite<R: Rng + ?Sized>(
    union: &PatternUnion,
    model: &LabeledModel,
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<Estimate> {
    LitePlan::new(union, model, &DecompositionLimits::default())?.estimate(d, n, rng)
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveConfig {
    pub delta_d: usize,
    pub epsilon: f64,
    pub samples_per_proposal: usize,
    /// Hard stop on the proposal budget.
    pub max_proposals: usize,
    pub limits: DecompositionLimits,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            delta_d: 2,
            epsilon: 0.05,
            samples_per_proposal: 2000,
            max_proposals: 256,
            limits: DecompositionLimits::default(),
        }
    }
}

/// Grows the proposal budget by `Δd` until consecutive estimates differ by
/// less than `ε` relatively, or no new proposals become available.
pub fn mis_amp_adaptive<R: Rng + ?Sized>(
    union: &PatternUnion,
    model: &LabeledModel,
    config: &AdaptiveConfig,
    rng: &mut R,
) -> Result<Estimate> {
    if config.delta_d == 0 || !(config.epsilon > 0.0) {
        return Err(Error::InvalidArgument("adaptive needs delta_d >= 1 and epsilon > 0".into()));
    }
    let plan = LitePlan::new(union, model, &config.limits)?;
    let mut previous = 0.0;
    let mut previous_proposals = 0;
    let mut d = config.delta_d;
    loop {
        let est = plan.estimate(d, config.samples_per_proposal, rng)?;
        let change = (est.value - previous).abs() / est.value.max(1e-300);
        let exhausted = est.proposals_used <= previous_proposals;
        if change < config.epsilon || exhausted || d >= config.max_proposals {
            return Ok(est);
        }
        previous = est.value;
        previous_proposals = est.proposals_used;
        d += config.delta_d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Ranking {
        Ranking::new(s.split(',')).unwrap()
    }

    fn seeded(k: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(k)
    }

    #[test]
    fn greedy_modals_example() {
        let mut modals = greedy_modals(&r("s3,s1"), &r("s1,s2,s3")).unwrap();
        modals.sort();
        assert_eq!(modals, vec![r("s2,s3,s1"), r("s3,s1,s2")]);
        assert_eq!(greedy_modals(&r("b,a,c"), &r("a,b,c")).unwrap(), vec![r("b,a,c")]);
        assert_eq!(greedy_modals(&Ranking::empty(), &r("a,b,c")).unwrap(), vec![r("a,b,c")]);
        assert!(greedy_modals(&r("z"), &r("a,b")).is_err());
    }

    #[test]
    fn approximate_distance_examples() {
        let sigma = r("s1,s2,s3");
        assert_eq!(approximate_distance(&r("s3,s1"), &sigma).unwrap(), 2);
        assert_eq!(approximate_distance(&sigma, &sigma).unwrap(), 0);
        assert_eq!(approximate_distance(&r("s3,s2,s1"), &sigma).unwrap(), 3);
    }

    #[test]
    fn greedy_completion_distances_are_exact() {
        let sigma = r("a,b,c,d,e,f");
        for modal in greedy_modals(&r("e,b,f,a"), &sigma).unwrap() {
            let d = crate::rankings::kendall_tau(&modal, &sigma).unwrap();
            assert_eq!(d, approximate_distance(&r("e,b,f,a"), &sigma).unwrap());
        }
    }

    #[test]
    fn full_ranking_is_exact_under_is_amp() {
        let mal = MallowsModel::new(r("a,b,c,d"), 0.3).unwrap();
        let psi = r("c,a,d,b");
        let est = is_amp_estimate(&psi, &mal, 50, &mut seeded(1)).unwrap();
        assert!((est.value - mal.prob(&psi).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn single_proposal_mis_is_is_amp() {
        let mal = MallowsModel::new(r("a,b,c,d,e"), 0.4).unwrap();
        let psi = r("e,a");
        let is = is_amp_estimate(&psi, &mal, 300, &mut seeded(5)).unwrap();
        let p = Proposal {
            center: mal.sigma().clone(),
            phi: mal.phi(),
            condition: psi.clone(),
            weight_share: 1.0,
        };
        let mis = mis_amp_estimate(&[p], &mal, 300, &mut seeded(5)).unwrap();
        assert_eq!(is, mis);
    }

    #[test]
    fn rejection_trivial_cases() {
        let model = LabeledModel::with_identity_labels(MallowsModel::new(r("a,b,c"), 1.0).unwrap());
        let g: PatternUnion = "a>b".parse().unwrap();
        let est = rejection_estimate(&g, &model, 100_000, &mut seeded(2)).unwrap();
        assert!((est.value - 0.5).abs() < 3.0 * est.std_error.max(1e-3));
        let never: PatternUnion = "a>nothing".parse().unwrap();
        assert_eq!(rejection_estimate(&never, &model, 10, &mut seeded(2)).unwrap().value, 0.0);
    }

    #[test]
    fn lite_without_pruning_has_unit_compensation() {
        let model = LabeledModel::with_identity_labels(MallowsModel::new(r("a,b,c,d"), 0.5).unwrap());
        let g: PatternUnion = "d>a".parse().unwrap();
        let est = mis_amp_lite(&g, &model, 64, 200, &mut seeded(3)).unwrap();
        assert_eq!(est.compensation, (1.0, 1.0));
        assert_eq!(est.value, est.raw);
    }

    #[test]
    fn lite_is_deterministic() {
        let model = LabeledModel::with_identity_labels(MallowsModel::new(r("a,b,c,d,e"), 0.3).unwrap());
        let g: PatternUnion = "e>a\nd>b & c>a".parse().unwrap();
        let a = mis_amp_lite(&g, &model, 2, 100, &mut seeded(9)).unwrap();
        let b = mis_amp_lite(&g, &model, 2, 100, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adaptive_stops_when_pool_is_exhausted() {
        let model = LabeledModel::with_identity_labels(MallowsModel::new(r("a,b,c"), 0.5).unwrap());
        let g: PatternUnion = "a>b>c".parse().unwrap();
        let config = AdaptiveConfig {
            delta_d: 1,
            epsilon: 1e-12,
            samples_per_proposal: 50,
            ..AdaptiveConfig::default()
        };
        let est = mis_amp_adaptive(&g, &model, &config, &mut seeded(4)).unwrap();
        assert_eq!(est.proposals_used, 1);
        let once = AdaptiveConfig {
            epsilon: f64::INFINITY,
            ..config
        };
        let a = mis_amp_adaptive(&g, &model, &once, &mut seeded(4)).unwrap();
        let b = mis_amp_lite(&g, &model, 1, 50, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
    }
}
