//! Exact marginal probability of a pattern union over a labeled RIM.
//!
//! The DP solvers track, per pattern node, the minimum position of a
//! matching item (`α`, for nodes on the left of an edge) or the maximum
//! position (`β`, for nodes on the right) while items of σ are inserted.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, DefaultHasher};
use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::models::{all_permutations, insertion_ranks, LabeledModel, RimModel};
use crate::patterns::{classify, conjoin, LabelPattern, PatternClass, PatternUnion, UnionMatcher};

/// Default largest `m` for brute-force enumeration.
pub const DEFAULT_ORACLE_GUARD: usize = 8;
/// Default largest union size for inclusion–exclusion.
pub const DEFAULT_UNION_GUARD: usize = 12;
/// The DP encodes item sets and edge sets as 64-bit masks.
pub const DP_MAX_ITEMS: usize = 64;
const DP_MAX_EDGES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Oracle,
    General,
    TwoLabel,
    Bipartite,
    BipartiteBasic,
    UpperBound(EdgeBudget),
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverKind::Oracle => f.write_str("oracle"),
            SolverKind::General => f.write_str("general"),
            SolverKind::TwoLabel => f.write_str("two-label"),
            SolverKind::Bipartite => f.write_str("bipartite"),
            SolverKind::BipartiteBasic => f.write_str("bipartite-basic"),
            SolverKind::UpperBound(k) => write!(f, "upper-bound-{k}"),
        }
    }
}

/// Edges kept per pattern by the upper-bound solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeBudget {
    One,
    Two,
    All,
}

impl EdgeBudget {
    fn limit(self) -> usize {
        match self {
            EdgeBudget::One => 1,
            EdgeBudget::Two => 2,
            EdgeBudget::All => usize::MAX,
        }
    }
}

impl fmt::Display for EdgeBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeBudget::One => f.write_str("1"),
            EdgeBudget::Two => f.write_str("2"),
            EdgeBudget::All => f.write_str("all"),
        }
    }
}

/// One term of the inclusion–exclusion expansion.
#[derive(Clone, Debug)]
pub struct ConjunctionTerm {
    /// Indices of the conjoined patterns.
    pub subset: Vec<usize>,
    pub sign: i8,
    pub probability: f64,
    pub backend: SolverKind,
}

#[derive(Clone, Debug)]
pub struct MarginalResult {
    pub probability: f64,
    pub solver: SolverKind,
    pub states_explored: u64,
    pub wall_time: Duration,
    /// Populated by the general solver only.
    pub terms: Vec<ConjunctionTerm>,
}

impl MarginalResult {
    fn new(probability: f64, solver: SolverKind, states: u64, start: Instant) -> Self {
        MarginalResult {
            probability,
            solver,
            states_explored: states,
            wall_time: start.elapsed(),
            terms: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExactConfig {
    pub oracle_max_items: usize,
    pub max_union_size: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            oracle_max_items: DEFAULT_ORACLE_GUARD,
            max_union_size: DEFAULT_UNION_GUARD,
        }
    }
}

/// `Σ Pr(t)` over every ranking `t` matching `G`.
pub fn oracle_marginal(union: &PatternUnion, model: &LabeledModel) -> Result<f64> {
    oracle_marginal_with_guard(union, model, DEFAULT_ORACLE_GUARD)
}

pub fn oracle_marginal_with_guard(
    union: &PatternUnion,
    model: &LabeledModel,
    max_items: usize,
) -> Result<f64> {
    let m = model.len();
    if m > max_items {
        return Err(Error::GuardExceeded {
            what: "oracle item count",
            limit: max_items,
            actual: m,
        });
    }
    let matcher = UnionMatcher::new(union, model.items(), model.lam());
    if !matcher.satisfiable() {
        return Ok(0.0);
    }
    let rim = model.model().to_rim();
    let mut pos_of = vec![0; m];
    let mut total = 0.0;
    for perm in all_permutations(m) {
        for (p, &k) in perm.iter().enumerate() {
            pos_of[k] = p;
        }
        if matcher.matches(&pos_of) {
            total += rim_prob_indices(&rim, &perm);
        }
    }
    Ok(total)
}

fn rim_prob_indices(rim: &RimModel, perm: &[usize]) -> f64 {
    insertion_ranks(perm)
        .iter()
        .enumerate()
        .map(|(k, &j)| rim.pi().get(k + 1, j))
        .product()
}

/// Exact marginal using the cheapest applicable solver.
pub fn solve_exact(union: &PatternUnion, model: &LabeledModel) -> Result<MarginalResult> {
    match classify(union) {
        PatternClass::TwoLabel => two_label_solver(union, model),
        PatternClass::Bipartite => bipartite_solver(union, model),
        PatternClass::General => general_solver(union, model, &ExactConfig::default()),
    }
}

/// Inclusion–exclusion over conjunctions of non-empty subsets of `G`.
pub fn general_solver(
    union: &PatternUnion,
    model: &LabeledModel,
    config: &ExactConfig,
) -> Result<MarginalResult> {
    let start = Instant::now();
    let u = union.len();
    if u > config.max_union_size {
        return Err(Error::GuardExceeded {
            what: "inclusion-exclusion union size",
            limit: config.max_union_size,
            actual: u,
        });
    }
    let mut terms = Vec::with_capacity((1usize << u) - 1);
    let mut states = 0;
    let mut total = 0.0;
    for subset in 1u32..(1u32 << u) {
        let members: Vec<usize> = (0..u).filter(|&k| subset & (1 << k) != 0).collect();
        let parts: Vec<LabelPattern> = members
            .iter()
            .map(|&k| union.patterns()[k].clone())
            .collect();
        let conj = conjoin(&parts);
        let (p, backend) = if conj.is_bipartite() {
            let cu = ConstraintUnion::from_patterns(std::slice::from_ref(&conj), model)?;
            let (p, s) = cu.solve_pruned();
            states += s;
            (p, SolverKind::Bipartite)
        } else if model.len() <= config.oracle_max_items {
            let single = PatternUnion::single(conj);
            let p = oracle_marginal_with_guard(&single, model, config.oracle_max_items)?;
            (p, SolverKind::Oracle)
        } else {
            return Err(Error::NoBackend {
                items: model.len(),
                limit: config.oracle_max_items,
            });
        };
        let sign: i8 = if members.len() % 2 == 1 { 1 } else { -1 };
        total += f64::from(sign) * p;
        terms.push(ConjunctionTerm {
            subset: members,
            sign,
            probability: p,
            backend,
        });
    }
    let mut result = MarginalResult::new(total.clamp(0.0, 1.0), SolverKind::General, states, start);
    result.terms = terms;
    Ok(result)
}

/// Complement-tracking DP for unions of single-edge patterns.
pub fn two_label_solver(union: &PatternUnion, model: &LabeledModel) -> Result<MarginalResult> {
    let start = Instant::now();
    if classify(union) != PatternClass::TwoLabel {
        return Err(Error::ClassificationMismatch { expected: "two-label" });
    }
    let cu = ConstraintUnion::from_patterns(union.patterns(), model)?;
    let (p, states) = cu.solve_complement();
    Ok(MarginalResult::new(p, SolverKind::TwoLabel, states, start))
}

/// DP over min/max positions that prunes decided edges and patterns.
pub fn bipartite_solver(union: &PatternUnion, model: &LabeledModel) -> Result<MarginalResult> {
    let start = Instant::now();
    if classify(union) == PatternClass::General {
        return Err(Error::ClassificationMismatch { expected: "bipartite" });
    }
    let cu = ConstraintUnion::from_patterns(union.patterns(), model)?;
    let (p, states) = cu.solve_pruned();
    Ok(MarginalResult::new(p, SolverKind::Bipartite, states, start))
}

/// The same DP without pruning: every node is tracked to the end.
pub fn bipartite_solver_basic(
    union: &PatternUnion,
    model: &LabeledModel,
) -> Result<MarginalResult> {
    let start = Instant::now();
    if classify(union) == PatternClass::General {
        return Err(Error::ClassificationMismatch { expected: "bipartite" });
    }
    let cu = ConstraintUnion::from_patterns(union.patterns(), model)?;
    let (p, states) = cu.solve_basic();
    Ok(MarginalResult::new(p, SolverKind::BipartiteBasic, states, start))
}

/// `ease(l, l′ | σ) = β(l′|σ) − α(l|σ)`, using 1-based σ positions of the
/// matching items. `None` when either node has no item.
pub fn ease(g: &LabelPattern, edge: (usize, usize), model: &LabeledModel) -> Option<i64> {
    let positions = |node: usize| {
        let labels = g.nodes()[node].labels();
        model
            .items()
            .iter()
            .enumerate()
            .filter(move |(_, x)| model.lam().carries(x, labels))
            .map(|(k, _)| k as i64 + 1)
    };
    let alpha = positions(edge.0).min()?;
    let beta = positions(edge.1).max()?;
    Some(beta - alpha)
}

/// Closure edges of `g` ordered by ease, ties by node-id pair.
pub fn edges_by_ease(g: &LabelPattern, model: &LabeledModel) -> Vec<(usize, usize)> {
    let mut edges: Vec<((usize, usize), i64)> = g
        .closure_edges()
        .into_iter()
        .map(|e| (e, ease(g, e, model).unwrap_or(i64::MIN)))
        .collect();
    edges.sort_by_key(|&(e, x)| (x, e));
    edges.into_iter().map(|(e, _)| e).collect()
}

/// Relaxes every pattern to `α(l) < β(r)` constraints over its easiest
/// closure edges. Returns an upper bound on `Pr(G)`.
pub fn upper_bound_solver(
    union: &PatternUnion,
    model: &LabeledModel,
    budget: EdgeBudget,
) -> Result<MarginalResult> {
    let start = Instant::now();
    let relaxed: Vec<LabelPattern> = union
        .patterns()
        .iter()
        .map(|g| relax(g, model, budget))
        .collect();
    let cu = ConstraintUnion::from_patterns(&relaxed, model)?;
    let all_single = relaxed.iter().all(LabelPattern::is_two_label);
    let (p, states) = if all_single {
        cu.solve_complement()
    } else {
        cu.solve_pruned()
    };
    Ok(MarginalResult::new(p, SolverKind::UpperBound(budget), states, start))
}

/// Keeps only the selected closure edges and their endpoints.
fn relax(g: &LabelPattern, model: &LabeledModel, budget: EdgeBudget) -> LabelPattern {
    let unmatched = g.nodes().iter().any(|n| {
        !model
            .items()
            .iter()
            .any(|x| model.lam().carries(x, n.labels()))
    });
    if unmatched {
        // contributes nothing either way
        return g.clone();
    }
    let edges: Vec<(usize, usize)> = edges_by_ease(g, model)
        .into_iter()
        .take(budget.limit())
        .collect();
    let mut used: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    used.sort_unstable();
    used.dedup();
    let remap: HashMap<usize, usize> = used.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let nodes = used.iter().map(|&v| g.nodes()[v].clone()).collect();
    let edges = edges.iter().map(|&(a, b)| (remap[&a], remap[&b])).collect();
    LabelPattern::new(nodes, edges).expect("closure edges of a DAG form a DAG")
}

/// A tracked min/max over the items of `mask`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Quantity {
    mask: u64,
    is_max: bool,
}

/// Each pattern is a conjunction of `α(L) < β(R)` constraints; the union
/// holds when any pattern holds.
#[derive(Clone, Debug)]
struct ConstraintUnion {
    m: usize,
    quantities: Vec<Quantity>,
    edges: Vec<Edge>,
    pattern_bits: Vec<u64>,
    always: bool,
    pi_table: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    left: usize,
    right: usize,
    pattern: usize,
    last: usize,
}

const UNSET_MIN: u8 = u8::MAX;
const UNSET_MAX: u8 = 0;

type StateKey = (u64, Box<[u8]>);
/// Fixed-seed hasher: reproducible summation order.
type StateMap<K> = HashMap<K, f64, BuildHasherDefault<DefaultHasher>>;

enum Outcome {
    Satisfied,
    Dead,
    Alive(StateKey),
}

impl ConstraintUnion {
    fn from_patterns(patterns: &[LabelPattern], model: &LabeledModel) -> Result<Self> {
        let m = model.len();
        if m > DP_MAX_ITEMS {
            return Err(Error::GuardExceeded {
                what: "DP item count",
                limit: DP_MAX_ITEMS,
                actual: m,
            });
        }
        let mut cu = ConstraintUnion {
            m,
            quantities: Vec::new(),
            edges: Vec::new(),
            pattern_bits: Vec::new(),
            always: false,
            pi_table: Vec::new(),
        };
        let rim = model.model().to_rim();
        cu.pi_table = (1..=m).map(|i| rim.pi().row(i).to_vec()).collect();
        for g in patterns {
            let masks: Vec<u64> = g
                .nodes()
                .iter()
                .map(|n| {
                    model
                        .items()
                        .iter()
                        .enumerate()
                        .filter(|(_, x)| model.lam().carries(x, n.labels()))
                        .fold(0u64, |acc, (k, _)| acc | (1 << k))
                })
                .collect();
            if masks.contains(&0) {
                continue;
            }
            if g.edges().is_empty() {
                cu.always = true;
                continue;
            }
            let pattern = cu.pattern_bits.len();
            let mut bits = 0u64;
            for &(a, b) in g.edges() {
                let left = cu.quantity(Quantity { mask: masks[a], is_max: false });
                let right = cu.quantity(Quantity { mask: masks[b], is_max: true });
                let span = masks[a] | masks[b];
                let last = 64 - span.leading_zeros() as usize;
                if cu.edges.len() == DP_MAX_EDGES {
                    return Err(Error::GuardExceeded {
                        what: "DP edge count",
                        limit: DP_MAX_EDGES,
                        actual: DP_MAX_EDGES + 1,
                    });
                }
                bits |= 1 << cu.edges.len();
                cu.edges.push(Edge { left, right, pattern, last });
            }
            cu.pattern_bits.push(bits);
        }
        Ok(cu)
    }

    fn quantity(&mut self, q: Quantity) -> usize {
        match self.quantities.iter().position(|&x| x == q) {
            Some(k) => k,
            None => {
                self.quantities.push(q);
                self.quantities.len() - 1
            }
        }
    }

    fn all_edges(&self) -> u64 {
        self.pattern_bits.iter().fold(0, |a, &b| a | b)
    }

    fn initial_values(&self, tracked: impl Fn(usize) -> bool) -> Box<[u8]> {
        self.quantities
            .iter()
            .enumerate()
            .map(|(k, q)| match (tracked(k), q.is_max) {
                (false, _) => 0,
                (true, false) => UNSET_MIN,
                (true, true) => UNSET_MAX,
            })
            .collect()
    }

    /// Inserts item `item` (σ-index) at 1-based position `j`.
    fn shift(&self, values: &mut [u8], item: usize, j: u8, tracked: impl Fn(usize) -> bool) {
        for (k, q) in self.quantities.iter().enumerate() {
            if !tracked(k) {
                continue;
            }
            let v = &mut values[k];
            let set = if q.is_max { *v != UNSET_MAX } else { *v != UNSET_MIN };
            if set && *v >= j {
                *v += 1;
            }
            if q.mask & (1 << item) != 0 {
                *v = if q.is_max { (*v).max(j) } else { (*v).min(j) };
            }
        }
    }

    fn tracked_by(&self, live: u64) -> Vec<bool> {
        let mut tracked = vec![false; self.quantities.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            if live & (1 << e) != 0 {
                tracked[edge.left] = true;
                tracked[edge.right] = true;
            }
        }
        tracked
    }

    fn edge_satisfied(&self, values: &[u8], e: &Edge) -> bool {
        let a = values[e.left];
        let b = values[e.right];
        a != UNSET_MIN && b != UNSET_MAX && a < b
    }

    /// Successor of `(live, values)` after inserting σ-index `item` at `j`.
    fn transition(&self, live: u64, values: &[u8], item: usize, j: u8) -> Outcome {
        let tracked = self.tracked_by(live);
        let mut next = values.to_vec();
        self.shift(&mut next, item, j, |k| tracked[k]);
        let step = item + 1;
        let mut new_live = live;
        for (p, &bits) in self.pattern_bits.iter().enumerate() {
            let open = live & bits;
            if open == 0 {
                continue;
            }
            let mut remaining = open;
            let mut violated = false;
            for (e, edge) in self.edges.iter().enumerate() {
                if open & (1 << e) == 0 {
                    continue;
                }
                debug_assert_eq!(edge.pattern, p);
                if self.edge_satisfied(&next, edge) {
                    remaining &= !(1 << e);
                } else if step >= edge.last {
                    violated = true;
                    break;
                }
            }
            if violated {
                new_live &= !bits;
            } else if remaining == 0 {
                return Outcome::Satisfied;
            } else {
                new_live = (new_live & !bits) | remaining;
            }
        }
        if new_live == 0 {
            return Outcome::Dead;
        }
        let keep = self.tracked_by(new_live);
        for (k, v) in next.iter_mut().enumerate() {
            if !keep[k] {
                *v = 0;
            }
        }
        Outcome::Alive((new_live, next.into_boxed_slice()))
    }

    /// Probability and number of states generated.
    fn solve_pruned(&self) -> (f64, u64) {
        if self.always {
            return (1.0, 0);
        }
        let live = self.all_edges();
        if live == 0 {
            return (0.0, 0);
        }
        let tracked = self.tracked_by(live);
        let mut states: StateMap<StateKey> = StateMap::default();
        states.insert((live, self.initial_values(|k| tracked[k])), 1.0);
        let mut prob = 0.0;
        let mut explored = 0u64;
        for i in 1..=self.m {
            let mut next: StateMap<StateKey> =
                StateMap::with_capacity_and_hasher(states.len() * 2, Default::default());
            for ((live, values), q) in &states {
                for j in 1..=i {
                    let p = q * self.pi(i, j);
                    if p == 0.0 {
                        continue;
                    }
                    match self.transition(*live, values, i - 1, j as u8) {
                        Outcome::Satisfied => prob += p,
                        Outcome::Dead => {}
                        Outcome::Alive(key) => *next.entry(key).or_insert(0.0) += p,
                    }
                }
            }
            explored += next.len() as u64;
            states = next;
        }
        (prob.min(1.0), explored)
    }

    /// Tracks only assignments violating every pattern; `1 − Σ` at the end.
    fn solve_complement(&self) -> (f64, u64) {
        if self.always {
            return (1.0, 0);
        }
        if self.edges.is_empty() {
            return (0.0, 0);
        }
        let mut states: StateMap<Box<[u8]>> = StateMap::default();
        states.insert(self.initial_values(|_| true), 1.0);
        let mut explored = 0u64;
        for i in 1..=self.m {
            let mut next: StateMap<Box<[u8]>> =
                StateMap::with_capacity_and_hasher(states.len() * 2, Default::default());
            for (values, q) in &states {
                for j in 1..=i {
                    let p = q * self.pi(i, j);
                    if p == 0.0 {
                        continue;
                    }
                    let mut v = values.to_vec();
                    self.shift(&mut v, i - 1, j as u8, |_| true);
                    if self.any_pattern_satisfied(&v) {
                        continue;
                    }
                    *next.entry(v.into_boxed_slice()).or_insert(0.0) += p;
                }
            }
            explored += next.len() as u64;
            states = next;
        }
        let violating: f64 = states.values().sum();
        ((1.0 - violating).clamp(0.0, 1.0), explored)
    }

    /// Tracks every quantity through all steps and tests at the end.
    fn solve_basic(&self) -> (f64, u64) {
        if self.always {
            return (1.0, 0);
        }
        let mut states: StateMap<Box<[u8]>> = StateMap::default();
        states.insert(self.initial_values(|_| true), 1.0);
        let mut explored = 0u64;
        for i in 1..=self.m {
            let mut next: StateMap<Box<[u8]>> =
                StateMap::with_capacity_and_hasher(states.len() * 2, Default::default());
            for (values, q) in &states {
                for j in 1..=i {
                    let p = q * self.pi(i, j);
                    if p == 0.0 {
                        continue;
                    }
                    let mut v = values.to_vec();
                    self.shift(&mut v, i - 1, j as u8, |_| true);
                    *next.entry(v.into_boxed_slice()).or_insert(0.0) += p;
                }
            }
            explored += next.len() as u64;
            states = next;
        }
        let p = states
            .iter()
            .filter(|(v, _)| self.any_pattern_satisfied(v))
            .map(|(_, q)| q)
            .sum::<f64>();
        (p.min(1.0), explored)
    }

    fn any_pattern_satisfied(&self, values: &[u8]) -> bool {
        self.pattern_bits.iter().any(|&bits| {
            self.edges
                .iter()
                .enumerate()
                .filter(|(e, _)| bits & (1 << e) != 0)
                .all(|(_, edge)| self.edge_satisfied(values, edge))
        })
    }

    fn pi(&self, i: usize, j: usize) -> f64 {
        self.pi_table[i - 1][j - 1]
    }
}
