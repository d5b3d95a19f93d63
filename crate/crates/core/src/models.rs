//! Repeated-insertion ranking distributions: RIM, Mallows, and the
//! constrained AMP sampler.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rankings::{ItemId, LabelingFunction, PartialOrder, Ranking, SubRanking};

const ROW_TOLERANCE: f64 = 1e-12;

/// Lower-triangular insertion probabilities: row `i` (1-based) holds
/// `Π(i, 1..=i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InsertionMatrix {
    rows: Vec<Vec<f64>>,
}

impl InsertionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(Error::InvalidModel(format!(
                    "row {} has {} entries, expected {}",
                    k + 1,
                    row.len(),
                    k + 1
                )));
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidModel(format!("row {} has a negative entry", k + 1)));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidModel(format!("row {} sums to {sum}", k + 1)));
            }
        }
        Ok(InsertionMatrix { rows })
    }

    /// `Π(i, j) = φ^{i−j} / (1 + φ + … + φ^{i−1})`.
    pub fn mallows(m: usize, phi: f64) -> Self {
        let rows = (1..=m)
            .map(|i| {
                if phi == 0.0 {
                    return (1..=i).map(|j| if j == i { 1.0 } else { 0.0 }).collect();
                }
                let w: Vec<f64> = (1..=i).map(|j| phi.powi((i - j) as i32)).collect();
                let z: f64 = w.iter().sum();
                w.into_iter().map(|x| x / z).collect()
            })
            .collect();
        InsertionMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// `Π(i, j)`, both 1-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i - 1][j - 1]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i - 1]
    }
}

/// `RIM(σ, Π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RimModel {
    sigma: Ranking,
    pi: InsertionMatrix,
}

impl RimModel {
    pub fn new(sigma: Ranking, pi: InsertionMatrix) -> Result<Self> {
        if pi.dim() != sigma.len() {
            return Err(Error::InvalidModel(format!(
                "insertion matrix has dimension {} but sigma has {} items",
                pi.dim(),
                sigma.len()
            )));
        }
        Ok(RimModel { sigma, pi })
    }

    pub fn sigma(&self) -> &Ranking {
        &self.sigma
    }

    pub fn pi(&self) -> &InsertionMatrix {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        Ranking::from_indices(self.sigma.items(), &self.sample_indices(rng))
    }

    /// A sample as σ-indices (0-based) in ranked order.
    pub(crate) fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut tau = Vec::with_capacity(self.len());
        for i in 1..=self.len() {
            let j = sample_categorical(self.pi.row(i), rng);
            tau.insert(j, i - 1);
        }
        tau
    }

    pub fn prob(&self, t: &Ranking) -> Result<f64> {
        Ok(self.log_prob(t)?.exp())
    }

    pub fn log_prob(&self, t: &Ranking) -> Result<f64> {
        let perm = sigma_indices(&self.sigma, t)?;
        let ranks = insertion_ranks(&perm);
        Ok(ranks
            .iter()
            .enumerate()
            .map(|(k, &j)| self.pi.get(k + 1, j).ln())
            .sum())
    }
}

/// `MAL(σ, φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MallowsModel {
    sigma: Ranking,
    phi: f64,
}

impl MallowsModel {
    pub fn new(sigma: Ranking, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::InvalidModel(format!("phi = {phi} outside [0, 1]")));
        }
        Ok(MallowsModel { sigma, phi })
    }

    pub fn sigma(&self) -> &Ranking {
        &self.sigma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn to_rim(&self) -> RimModel {
        mallows_to_rim(self)
    }

    /// `ln Z = Σᵢ ln(1 + φ + … + φ^{i−1})`.
    pub fn log_normalizer(&self) -> f64 {
        (1..=self.len()).map(|i| log_geometric(self.phi, i)).sum()
    }

    /// `φ^d / Z`, evaluated directly when representable and in log space
    /// otherwise.
    pub fn prob(&self, t: &Ranking) -> Result<f64> {
        let perm = sigma_indices(&self.sigma, t)?;
        let d = crate::rankings::count_inversions(&perm);
        let z: f64 = (1..=self.len())
            .map(|i| (0..i).map(|j| self.phi.powi(j as i32)).sum::<f64>())
            .product();
        let direct = i32::try_from(d).map(|d| self.phi.powi(d) / z).unwrap_or(0.0);
        if direct.is_normal() {
            Ok(direct)
        } else {
            Ok(self.log_prob_indices(&perm).exp())
        }
    }

    pub fn log_prob(&self, t: &Ranking) -> Result<f64> {
        let perm = sigma_indices(&self.sigma, t)?;
        Ok(self.log_prob_indices(&perm))
    }

    pub(crate) fn log_prob_indices(&self, perm: &[usize]) -> f64 {
        log_pow(self.phi, crate::rankings::count_inversions(perm)) - self.log_normalizer()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        Ranking::from_indices(self.sigma.items(), &self.sample_indices(rng))
    }

    pub(crate) fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut tau = Vec::with_capacity(self.len());
        for i in 1..=self.len() {
            let j = sample_geometric_position(self.phi, 1, i, rng);
            tau.insert(j - 1, i - 1);
        }
        tau
    }

    /// Draws from AMP conditioned on `u`; returns the ranking and its
    /// proposal probability.
    pub fn amp_sample<R: Rng + ?Sized>(&self, u: &PartialOrder, rng: &mut R) -> Result<(Ranking, f64)> {
        let amp = AmpSampler::new(self, u)?;
        let (perm, logq) = amp.sample(rng);
        Ok((Ranking::from_indices(self.sigma.items(), &perm), logq.exp()))
    }

    pub fn amp_prob(&self, u: &PartialOrder, t: &Ranking) -> Result<f64> {
        Ok(self.amp_log_prob(u, t)?.exp())
    }

    pub fn amp_log_prob(&self, u: &PartialOrder, t: &Ranking) -> Result<f64> {
        let perm = sigma_indices(&self.sigma, t)?;
        let amp = AmpSampler::with_phi(self, u, self.phi)?;
        Ok(amp.log_prob(&perm))
    }

    /// AMP conditioned on the consecutive pairs of a sub-ranking.
    pub fn amp_sample_subranking<R: Rng + ?Sized>(
        &self,
        psi: &SubRanking,
        rng: &mut R,
    ) -> Result<(Ranking, f64)> {
        self.amp_sample(&PartialOrder::from_subranking(psi), rng)
    }
}

pub fn mallows_to_rim(mal: &MallowsModel) -> RimModel {
    RimModel {
        sigma: mal.sigma.clone(),
        pi: InsertionMatrix::mallows(mal.len(), mal.phi),
    }
}

/// Either parameterization of a repeated-insertion model.
#[derive(Clone, Debug, PartialEq)]
pub enum RankingModel {
    Rim(RimModel),
    Mallows(MallowsModel),
}

impl RankingModel {
    pub fn sigma(&self) -> &Ranking {
        match self {
            RankingModel::Rim(r) => r.sigma(),
            RankingModel::Mallows(m) => m.sigma(),
        }
    }

    pub fn to_rim(&self) -> RimModel {
        match self {
            RankingModel::Rim(r) => r.clone(),
            RankingModel::Mallows(m) => m.to_rim(),
        }
    }

    pub fn as_mallows(&self) -> Option<&MallowsModel> {
        match self {
            RankingModel::Mallows(m) => Some(m),
            RankingModel::Rim(_) => None,
        }
    }

    pub fn prob(&self, t: &Ranking) -> Result<f64> {
        match self {
            RankingModel::Rim(r) => r.prob(t),
            RankingModel::Mallows(m) => m.prob(t),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        match self {
            RankingModel::Rim(r) => r.sample(rng),
            RankingModel::Mallows(m) => m.sample(rng),
        }
    }

    pub(crate) fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match self {
            RankingModel::Rim(r) => r.sample_indices(rng),
            RankingModel::Mallows(m) => m.sample_indices(rng),
        }
    }
}

impl From<RimModel> for RankingModel {
    fn from(r: RimModel) -> Self {
        RankingModel::Rim(r)
    }
}

impl From<MallowsModel> for RankingModel {
    fn from(m: MallowsModel) -> Self {
        RankingModel::Mallows(m)
    }
}

/// A ranking model together with item labels.
#[derive(Clone, Debug)]
pub struct LabeledModel {
    model: RankingModel,
    lam: LabelingFunction,
}

impl LabeledModel {
    pub fn new(model: impl Into<RankingModel>, lam: LabelingFunction) -> Self {
        LabeledModel {
            model: model.into(),
            lam,
        }
    }

    /// Every item labeled by its own identifier.
    pub fn with_identity_labels(model: impl Into<RankingModel>) -> Self {
        let model = model.into();
        let lam = LabelingFunction::identity(model.sigma().items());
        LabeledModel { model, lam }
    }

    pub fn model(&self) -> &RankingModel {
        &self.model
    }

    pub fn lam(&self) -> &LabelingFunction {
        &self.lam
    }

    pub fn sigma(&self) -> &Ranking {
        self.model.sigma()
    }

    pub fn items(&self) -> &[ItemId] {
        self.model.sigma().items()
    }

    pub fn len(&self) -> usize {
        self.items().len()
    }

    pub fn is_empty(&self) -> bool {
        self.items().is_empty()
    }
}

/// AMP compiled against a Mallows reference ranking. Works on σ-indices.
#[derive(Clone, Debug)]
pub(crate) struct AmpSampler {
    phi: f64,
    // closure predecessors / successors with smaller σ-index
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl AmpSampler {
    pub(crate) fn new(mal: &MallowsModel, u: &PartialOrder) -> Result<Self> {
        if mal.phi == 0.0 {
            return Err(Error::InvalidModel("AMP sampling requires phi > 0".into()));
        }
        Self::with_phi(mal, u, mal.phi)
    }

    fn with_phi(mal: &MallowsModel, u: &PartialOrder, phi: f64) -> Result<Self> {
        let m = mal.len();
        let tc = u.transitive_closure();
        let index = |x: &ItemId| {
            mal.sigma
                .rank_of(x)
                .map(|r| r - 1)
                .ok_or_else(|| Error::UnknownItem(x.to_string()))
        };
        let mut preds = vec![Vec::new(); m];
        let mut succs = vec![Vec::new(); m];
        for (a, b) in tc.pairs() {
            let (a, b) = (index(a)?, index(b)?);
            if a < b {
                preds[b].push(a);
            } else {
                succs[a].push(b);
            }
        }
        Ok(AmpSampler { phi, preds, succs })
    }

    /// Constrained insertion range `[lo, hi]` (1-based) for item `i`
    /// (0-based σ-index) given the 1-based positions of inserted items.
    fn range(&self, i: usize, pos: impl Fn(usize) -> usize) -> (usize, usize) {
        let lo = self.preds[i].iter().map(|&p| pos(p)).max().map_or(1, |p| p + 1);
        let hi = self.succs[i].iter().map(|&s| pos(s)).min().unwrap_or(i + 1);
        (lo, hi)
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<usize>, f64) {
        let m = self.preds.len();
        let mut tau: Vec<usize> = Vec::with_capacity(m);
        let mut pos = vec![0usize; m];
        let mut logq = 0.0;
        for i in 0..m {
            let (lo, hi) = self.range(i, |k| pos[k]);
            debug_assert!(lo <= hi, "empty AMP insertion range");
            let j = sample_geometric_position(self.phi, lo, hi, rng);
            logq += log_pow(self.phi, i + 1 - j) - log_geometric_range(self.phi, lo, hi, i + 1);
            tau.insert(j - 1, i);
            for (p, &k) in tau.iter().enumerate().skip(j - 1) {
                pos[k] = p + 1;
            }
        }
        (tau, logq)
    }

    /// `ln q(perm)`, `-inf` outside the support.
    pub(crate) fn log_prob(&self, perm: &[usize]) -> f64 {
        let m = perm.len();
        let mut at = vec![0usize; m];
        for (p, &k) in perm.iter().enumerate() {
            at[k] = p;
        }
        // positions of σ-indices 0..i in the ranking restricted to them
        let mut sorted: Vec<usize> = Vec::with_capacity(m);
        let mut logq = 0.0;
        for i in 0..m {
            let rank_before = |k: usize| sorted.partition_point(|&x| x < at[k]) + 1;
            let (lo, hi) = self.range(i, rank_before);
            let j = sorted.partition_point(|&x| x < at[i]) + 1;
            if j < lo || j > hi {
                return f64::NEG_INFINITY;
            }
            logq += log_pow(self.phi, i + 1 - j) - log_geometric_range(self.phi, lo, hi, i + 1);
            sorted.insert(j - 1, at[i]);
        }
        logq
    }
}

/// σ-indices (0-based) of the items of `t`, in `t`'s order.
pub(crate) fn sigma_indices(sigma: &Ranking, t: &Ranking) -> Result<Vec<usize>> {
    if !sigma.same_items(t) {
        return Err(Error::ItemMismatch(format!("{t:?} is not a ranking of {sigma:?}")));
    }
    t.indices_in(sigma)
}

/// For each σ-index `i`, the 1-based rank of item `i` within the
/// ranking restricted to items `0..=i`.
pub(crate) fn insertion_ranks(perm: &[usize]) -> Vec<usize> {
    let m = perm.len();
    let mut at = vec![0usize; m];
    for (p, &k) in perm.iter().enumerate() {
        at[k] = p;
    }
    let mut sorted: Vec<usize> = Vec::with_capacity(m);
    let mut ranks = Vec::with_capacity(m);
    for &a in &at {
        let j = sorted.partition_point(|&x| x < a);
        sorted.insert(j, a);
        ranks.push(j + 1);
    }
    ranks
}

/// `ln φ^k` with `0^0 = 1`.
pub(crate) fn log_pow(phi: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * phi.ln()
    }
}

/// `ln(1 + φ + … + φ^{n−1})`.
pub(crate) fn log_geometric(phi: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    if phi == 1.0 {
        (n as f64).ln()
    } else if phi == 0.0 {
        0.0
    } else {
        (-(phi.powi(n as i32))).ln_1p() - (-phi).ln_1p()
    }
}

/// `ln Σ_{j=lo..=hi} φ^{i−j}`.
fn log_geometric_range(phi: f64, lo: usize, hi: usize, i: usize) -> f64 {
    log_pow(phi, i - hi) + log_geometric(phi, hi - lo + 1)
}

/// Draws `j ∈ [lo, hi]` with probability `∝ φ^{i−j}`.
fn sample_geometric_position<R: Rng + ?Sized>(
    phi: f64,
    lo: usize,
    hi: usize,
    rng: &mut R,
) -> usize {
    if phi == 0.0 || lo == hi {
        return hi;
    }
    // relative weights φ^{hi−j}, walking down from hi
    let total = log_geometric(phi, hi - lo + 1).exp();
    let mut r = rng.gen::<f64>() * total;
    let mut w = 1.0;
    let mut j = hi;
    while j > lo {
        if r < w {
            return j;
        }
        r -= w;
        w *= phi;
        j -= 1;
    }
    lo
}

fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let mut r = rng.gen::<f64>() * weights.iter().sum::<f64>();
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if r < w {
                return k;
            }
            r -= w;
            last = k;
        }
    }
    last
}

/// Every permutation of `0..m` in lexicographic order.
pub(crate) fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        out.push(perm.clone());
        let Some(k) = (0..m.saturating_sub(1)).rev().find(|&k| perm[k] < perm[k + 1]) else {
            break;
        };
        let l = (k + 1..m).rev().find(|&l| perm[k] < perm[l]).unwrap();
        perm.swap(k, l);
        perm[k + 1..].reverse();
    }
    out
}

/// Exact distribution of a model over all `m!` rankings, keyed by ranking.
pub fn exact_distribution(model: &RankingModel) -> Result<HashMap<Ranking, f64>> {
    let rim = model.to_rim();
    let items = rim.sigma().items();
    all_permutations(items.len())
        .into_iter()
        .map(|perm| {
            let t = Ranking::from_indices(items, &perm);
            let p = rim.prob(&t)?;
            Ok((t, p))
        })
        .collect()
}
