use std::collections::HashMap;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ast::Query;
use super::database::PreferenceDatabase;
use super::reduce::{Reducer, DEFAULT_GROUNDING_GUARD};
use crate::approx::{mis_amp_adaptive, mis_amp_lite, rejection_estimate, AdaptiveConfig};
use crate::error::{Error, Result};
use crate::exact::{
    bipartite_solver, general_solver, oracle_marginal_with_guard, two_label_solver,
    upper_bound_solver, EdgeBudget, ExactConfig,
};
use crate::models::{LabeledModel, MallowsModel};
use crate::patterns::{classify, PatternClass, PatternUnion};
use crate::rankings::LabelingFunction;

/// Two-label DP budget on `m·u`.
pub const AUTO_TWO_LABEL_BUDGET: f64 = 1e7;
/// Bipartite DP budget on the estimated state count `m^(q·u)`.
pub const AUTO_BIPARTITE_BUDGET: f64 = 1e8;
/// Largest union handed to inclusion–exclusion by `auto`.
pub const AUTO_GENERAL_MAX_UNION: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    Auto,
    Oracle,
    TwoLabel,
    Bipartite,
    General,
    Rejection,
    MisAmpLite,
    MisAmpAdaptive,
}

impl SolverChoice {
    pub fn is_exact(self) -> bool {
        !matches!(
            self,
            SolverChoice::Rejection | SolverChoice::MisAmpLite | SolverChoice::MisAmpAdaptive
        )
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Auto => "auto",
            SolverChoice::Oracle => "oracle",
            SolverChoice::TwoLabel => "two-label",
            SolverChoice::Bipartite => "bipartite",
            SolverChoice::General => "general",
            SolverChoice::Rejection => "rejection",
            SolverChoice::MisAmpLite => "mis-amp-lite",
            SolverChoice::MisAmpAdaptive => "mis-amp-adaptive",
        })
    }
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => SolverChoice::Auto,
            "oracle" => SolverChoice::Oracle,
            "two-label" => SolverChoice::TwoLabel,
            "bipartite" => SolverChoice::Bipartite,
            "general" => SolverChoice::General,
            "rejection" => SolverChoice::Rejection,
            "mis-amp-lite" => SolverChoice::MisAmpLite,
            "mis-amp-adaptive" => SolverChoice::MisAmpAdaptive,
            other => return Err(Error::InvalidArgument(format!("unknown solver `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub solver: SolverChoice,
    pub seed: u64,
    /// Samples for rejection; samples per proposal for MIS-AMP.
    pub samples: usize,
    /// Proposal count for MIS-AMP-lite.
    pub proposals: usize,
    pub epsilon: f64,
    pub exact: ExactConfig,
    pub grounding_guard: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            solver: SolverChoice::Auto,
            seed: 0,
            samples: 2000,
            proposals: 10,
            epsilon: 0.05,
            exact: ExactConfig::default(),
            grounding_guard: DEFAULT_GROUNDING_GUARD,
        }
    }
}

/// The solver `auto` picks for a union over `m` items.
pub fn auto_solver(union: &PatternUnion, m: usize, exact: &ExactConfig) -> SolverChoice {
    let u = union.len();
    let q = union.patterns().iter().map(|g| g.size()).max().unwrap_or(0);
    let class = classify(union);
    if class == PatternClass::TwoLabel && (m * u) as f64 <= AUTO_TWO_LABEL_BUDGET {
        return SolverChoice::TwoLabel;
    }
    if class != PatternClass::General && (m as f64).powi((q * u) as i32) <= AUTO_BIPARTITE_BUDGET {
        return SolverChoice::Bipartite;
    }
    if u <= AUTO_GENERAL_MAX_UNION && m <= exact.oracle_max_items {
        return SolverChoice::General;
    }
    SolverChoice::MisAmpAdaptive
}

/// Marginal of `union`, with the concrete solver that produced it.
pub fn solve_union(
    union: &PatternUnion,
    model: &LabeledModel,
    config: &SolverConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, SolverChoice)> {
    let choice = match config.solver {
        SolverChoice::Auto => auto_solver(union, model.len(), &config.exact),
        c => c,
    };
    let mallows = || {
        model
            .model()
            .as_mallows()
            .ok_or_else(|| Error::InvalidModel("sampling solvers need a Mallows model".into()))
    };
    let p = match choice {
        SolverChoice::Auto => unreachable!(),
        SolverChoice::Oracle => oracle_marginal_with_guard(union, model, config.exact.oracle_max_items)?,
        SolverChoice::TwoLabel => two_label_solver(union, model)?.probability,
        SolverChoice::Bipartite => bipartite_solver(union, model)?.probability,
        SolverChoice::General => general_solver(union, model, &config.exact)?.probability,
        SolverChoice::Rejection => rejection_estimate(union, model, config.samples, rng)?.value,
        SolverChoice::MisAmpLite => {
            mallows()?;
            mis_amp_lite(union, model, config.proposals, config.samples, rng)?.value
        }
        SolverChoice::MisAmpAdaptive => {
            mallows()?;
            let adaptive = AdaptiveConfig {
                epsilon: config.epsilon,
                samples_per_proposal: config.samples,
                ..AdaptiveConfig::default()
            };
            mis_amp_adaptive(union, model, &adaptive, rng)?.value
        }
    };
    Ok((p.clamp(0.0, 1.0), choice))
}

/// Exact solver for the top-k operator: the configured one if exact,
/// otherwise the cheapest applicable DP.
fn solve_exact_for(
    union: &PatternUnion,
    model: &LabeledModel,
    config: &SolverConfig,
) -> Result<(f64, SolverChoice)> {
    let mut exact = *config;
    if !config.solver.is_exact() || config.solver == SolverChoice::Auto {
        exact.solver = match classify(union) {
            PatternClass::TwoLabel => SolverChoice::TwoLabel,
            PatternClass::Bipartite => SolverChoice::Bipartite,
            PatternClass::General => SolverChoice::General,
        };
    }
    solve_union(union, model, &exact, &mut ChaCha8Rng::seed_from_u64(config.seed))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionAnswer {
    pub session: String,
    pub probability: f64,
    /// Solver tag, `none` when the query cannot hold in the session.
    pub solver: String,
    /// `false` when `probability` is an upper bound.
    pub exact: bool,
}

/// One inference request: a session's model and pattern union.
#[derive(Clone, Debug)]
pub struct Request {
    pub session: String,
    pub model: Arc<MallowsModel>,
    pub union: PatternUnion,
    pub lam: Arc<LabelingFunction>,
}

/// Requests sharing (σ, φ, union), answered by one solver call.
#[derive(Clone, Debug)]
pub struct Batch {
    pub representative: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq)]
struct GroupKey {
    sigma: crate::rankings::Ranking,
    phi: u64,
    union: PatternUnion,
    lam: Arc<LabelingFunction>,
}

impl Hash for GroupKey {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.sigma.hash(h);
        self.phi.hash(h);
        self.union.hash(h);
    }
}

impl GroupKey {
    fn of(r: &Request) -> Self {
        GroupKey {
            sigma: r.model.sigma().clone(),
            phi: r.model.phi().to_bits(),
            union: r.union.clone(),
            lam: r.lam.clone(),
        }
    }

    fn stream(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

/// Collapses requests with identical (σ, φ, union), in first-seen order.
pub fn group_sessions(requests: &[Request]) -> Vec<Batch> {
    let mut index: HashMap<GroupKey, usize> = HashMap::new();
    let mut batches: Vec<Batch> = Vec::new();
    for (k, r) in requests.iter().enumerate() {
        let slot = *index.entry(GroupKey::of(r)).or_insert_with(|| {
            batches.push(Batch {
                representative: k,
                members: Vec::new(),
            });
            batches.len() - 1
        });
        batches[slot].members.push(k);
    }
    batches
}

/// Per-request answers plus the number of solver invocations.
#[derive(Clone, Debug)]
pub struct BatchResult {
    pub probabilities: Vec<f64>,
    pub solvers: Vec<SolverChoice>,
    pub solver_calls: usize,
}

/// Solves every request, sharing one call per group when `grouped`. A
/// sampling solver is seeded from the request content, so grouping never
/// changes an answer.
pub fn solve_requests(requests: &[Request], config: &SolverConfig, grouped: bool) -> Result<BatchResult> {
    let batches = if grouped {
        group_sessions(requests)
    } else {
        (0..requests.len())
            .map(|k| Batch {
                representative: k,
                members: vec![k],
            })
            .collect()
    };
    let calls = AtomicUsize::new(0);
    let solved: Vec<(f64, SolverChoice)> = with_pool(|| {
        batches
            .par_iter()
            .map(|b| {
                let r = &requests[b.representative];
                let model = LabeledModel::new((*r.model).clone(), (*r.lam).clone());
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(GroupKey::of(r).stream());
                calls.fetch_add(1, Ordering::Relaxed);
                solve_union(&r.union, &model, config, &mut rng).map_err(|e| Error::Session {
                    session: r.session.clone(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut probabilities = vec![0.0; requests.len()];
    let mut solvers = vec![SolverChoice::Auto; requests.len()];
    for (b, (p, s)) in batches.iter().zip(solved) {
        for &k in &b.members {
            probabilities[k] = p;
            solvers[k] = s;
        }
    }
    Ok(BatchResult {
        probabilities,
        solvers,
        solver_calls: calls.into_inner(),
    })
}

/// Runs `f` on a pool sized by `PREFDB_THREADS` when set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("PREFDB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    /// `1 − ∏(1 − pᵢ)` over sessions.
    pub probability: f64,
    /// `Σ pᵢ`, the expected number of satisfying sessions.
    pub expected_count: f64,
    pub answers: Vec<SessionAnswer>,
    pub solver_calls: usize,
}

/// Builds one request per session where the query can hold; the second
/// vector maps requests back to session indices.
pub fn session_requests(
    q: &Query,
    db: &PreferenceDatabase,
    config: &SolverConfig,
) -> Result<(Vec<Request>, Vec<usize>)> {
    let mut reducer = Reducer::new(q, db, config.grounding_guard)?;
    let mut lams: HashMap<PatternUnion, Arc<LabelingFunction>> = HashMap::new();
    let mut requests = Vec::new();
    let mut owners = Vec::new();
    for (k, s) in db.sessions().iter().enumerate() {
        let Some(union) = reducer.union_for(s) else { continue };
        let lam = lams
            .entry(union.clone())
            .or_insert_with(|| Arc::new(reducer.labels.labeling(&union)))
            .clone();
        requests.push(Request {
            session: s.id(),
            model: s.model.clone(),
            union,
            lam,
        });
        owners.push(k);
    }
    Ok((requests, owners))
}

/// `Pr(Q | D)` under session independence, with per-session answers.
pub fn evaluate(q: &Query, db: &PreferenceDatabase, config: &SolverConfig) -> Result<Evaluation> {
    let (requests, owners) = session_requests(q, db, config)?;
    let solved = solve_requests(&requests, config, true)?;
    let mut answers: Vec<SessionAnswer> = db
        .sessions()
        .iter()
        .map(|s| SessionAnswer {
            session: s.id(),
            probability: 0.0,
            solver: "none".into(),
            exact: true,
        })
        .collect();
    for (k, &owner) in owners.iter().enumerate() {
        answers[owner].probability = solved.probabilities[k];
        answers[owner].solver = solved.solvers[k].to_string();
        answers[owner].exact = solved.solvers[k].is_exact();
    }
    let probs: Vec<f64> = answers.iter().map(|a| a.probability).collect();
    Ok(Evaluation {
        probability: aggregate_independent(&probs),
        expected_count: compensated_sum(&probs),
        answers,
        solver_calls: solved.solver_calls,
    })
}

/// Expected number of sessions satisfying `q`.
pub fn count_session(q: &Query, db: &PreferenceDatabase, config: &SolverConfig) -> Result<f64> {
    Ok(evaluate(q, db, config)?.expected_count)
}

/// `1 − ∏(1 − pᵢ)`.
pub fn aggregate_independent(probs: &[f64]) -> f64 {
    1.0 - probs.iter().map(|p| 1.0 - p).product::<f64>()
}

/// Neumaier summation.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopKStrategy {
    Full,
    OneEdge,
    TwoEdge,
}

impl FromStr for TopKStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "full" => TopKStrategy::Full,
            "1-edge" => TopKStrategy::OneEdge,
            "2-edge" => TopKStrategy::TwoEdge,
            other => return Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct TopK {
    pub answers: Vec<SessionAnswer>,
    pub exact_calls: usize,
    pub bound_calls: usize,
}

/// Resolution below which two session probabilities rank as equal.
pub const TOPK_TIE: f64 = 1e-12;

/// The `k` sessions most likely to satisfy `q`. Bound strategies compute
/// upper bounds first and resolve exact values in descending bound order
/// until `k` exact values dominate every unresolved bound.
pub fn most_probable_session(
    q: &Query,
    db: &PreferenceDatabase,
    k: usize,
    strategy: TopKStrategy,
    config: &SolverConfig,
) -> Result<TopK> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let (requests, owners) = session_requests(q, db, config)?;
    let sessions = db.sessions();
    let mut request_of = vec![None; sessions.len()];
    for (r, &s) in owners.iter().enumerate() {
        request_of[s] = Some(r);
    }
    let labeled = |r: &Request| LabeledModel::new((*r.model).clone(), (*r.lam).clone());
    let wrap = |s: usize| {
        let id = sessions[s].id();
        move |e: Error| Error::Session {
            session: id,
            source: Box::new(e),
        }
    };
    let mut exact_calls = 0;
    let exact = |s: usize, exact_calls: &mut usize| -> Result<(f64, String)> {
        match request_of[s] {
            None => Ok((0.0, "none".into())),
            Some(r) => {
                *exact_calls += 1;
                let (p, c) = solve_exact_for(&requests[r].union, &labeled(&requests[r]), config)
                    .map_err(wrap(s))?;
                Ok((p, c.to_string()))
            }
        }
    };
    let mut resolved: Vec<(usize, f64, String)> = Vec::new();
    let mut bound_calls = 0;
    match strategy {
        TopKStrategy::Full => {
            for s in 0..sessions.len() {
                let (p, tag) = exact(s, &mut exact_calls)?;
                resolved.push((s, p, tag));
            }
        }
        TopKStrategy::OneEdge | TopKStrategy::TwoEdge => {
            let budget = if strategy == TopKStrategy::OneEdge {
                EdgeBudget::One
            } else {
                EdgeBudget::Two
            };
            let mut bounds = vec![0.0; sessions.len()];
            for (s, b) in bounds.iter_mut().enumerate() {
                if let Some(r) = request_of[s] {
                    bound_calls += 1;
                    *b = upper_bound_solver(&requests[r].union, &labeled(&requests[r]), budget)
                        .map_err(wrap(s))?
                        .probability;
                }
            }
            let mut order: Vec<usize> = (0..sessions.len()).collect();
            order.sort_by(|&a, &b| bounds[b].total_cmp(&bounds[a]).then(a.cmp(&b)));
            for s in order {
                let dominated = resolved.iter().filter(|(_, p, _)| *p >= bounds[s] + TOPK_TIE).count();
                if dominated >= k {
                    break;
                }
                let (p, tag) = exact(s, &mut exact_calls)?;
                resolved.push((s, p, tag));
            }
        }
    }
    // Values within `TOPK_TIE` are ties, broken by session order.
    let key = |p: f64| (p / TOPK_TIE).round() as i64;
    resolved.sort_by(|a, b| key(b.1).cmp(&key(a.1)).then(a.0.cmp(&b.0)));
    resolved.truncate(k);
    Ok(TopK {
        answers: resolved
            .into_iter()
            .map(|(s, p, tag)| SessionAnswer {
                session: sessions[s].id(),
                probability: p,
                solver: tag,
                exact: true,
            })
            .collect(),
        exact_calls,
        bound_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{election_database, parse_query};

    #[test]
    fn aggregation_examples() {
        assert_eq!(aggregate_independent(&[0.5, 0.5]), 0.75);
        assert!((aggregate_independent(&[0.3]) - 0.3).abs() < 1e-15);
        assert_eq!(aggregate_independent(&[0.2, 1.0, 0.1]), 1.0);
        assert_eq!(compensated_sum(&[0.5, 0.5, 0.0]), 1.0);
        assert_eq!(compensated_sum(&[0.0; 4]), 0.0);
    }

    #[test]
    fn q0_matches_oracle_on_ann() {
        let db = election_database();
        let q = parse_query("Q() <- P('Ann','5/5';'Trump';'Clinton'), P('Ann','5/5';'Trump';'Rubio')").unwrap();
        let ev = evaluate(&q, &db, &SolverConfig::default()).unwrap();
        assert_eq!(ev.answers[1].probability, 0.0);
        assert_eq!(ev.answers[2].probability, 0.0);
        let model = LabeledModel::with_identity_labels((*db.sessions()[0].model).clone());
        let g: PatternUnion = "Trump>Clinton & Trump>Rubio".parse().unwrap();
        let oracle = crate::exact::oracle_marginal(&g, &model).unwrap();
        assert!((ev.probability - oracle).abs() < 1e-12);
    }

    #[test]
    fn q2_auto_picks_two_label() {
        let db = election_database();
        let q = parse_query("Q() <- P(_,_;c1;c2), C(c1,'D',_,_,e,_), C(c2,'R',_,_,e,_)").unwrap();
        let ev = evaluate(&q, &db, &SolverConfig::default()).unwrap();
        assert!(ev.answers.iter().all(|a| a.solver == "two-label"));
        let oracle = SolverConfig {
            solver: SolverChoice::Oracle,
            ..SolverConfig::default()
        };
        let check = evaluate(&q, &db, &oracle).unwrap();
        for (a, b) in ev.answers.iter().zip(&check.answers) {
            assert!((a.probability - b.probability).abs() < 1e-12);
        }
        assert_eq!(ev.solver_calls, 3);
    }

    #[test]
    fn session_constants_filter_sessions() {
        let db = election_database();
        let q = parse_query("Q() <- P(v, d; a; b), C(a,_,'F',_,_,_), C(b,_,'M',_,_,_), d = '6/5'").unwrap();
        let ev = evaluate(&q, &db, &SolverConfig::default()).unwrap();
        assert_eq!(ev.answers[0].probability, 0.0);
        assert!(ev.answers[2].probability > 0.0);
        assert_eq!(ev.solver_calls, 1);
    }

    #[test]
    fn topk_stopping_rule_resolves_only_what_it_must() {
        let db = election_database();
        let q = parse_query("Q() <- P(_,_;c1;c2), C(c1,_,'F',_,_,_), C(c2,_,'M',_,_,_)").unwrap();
        let full = most_probable_session(&q, &db, 1, TopKStrategy::Full, &SolverConfig::default()).unwrap();
        let fast = most_probable_session(&q, &db, 1, TopKStrategy::OneEdge, &SolverConfig::default()).unwrap();
        assert_eq!(full.answers[0].session, fast.answers[0].session);
        assert_eq!(full.exact_calls, 3);
        assert!(fast.exact_calls <= full.exact_calls);
        let all = most_probable_session(&q, &db, 10, TopKStrategy::TwoEdge, &SolverConfig::default()).unwrap();
        assert_eq!(all.answers.len(), 3);
    }
}
