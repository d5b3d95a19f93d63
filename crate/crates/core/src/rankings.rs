//! Order types over item identifiers: rankings, sub-rankings, partial orders,
//! labels, and the label-embedding matcher.
//!
//! Ranks and positions are 1-based throughout.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{LabelPattern, PatternMatcher};

/// Default cap on `|A(u)|` for linear-extension enumeration.
pub const DEFAULT_EXTENSION_GUARD: usize = 12;

/// Opaque item identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(Arc<str>);

impl ItemId {
    pub fn new(id: impl AsRef<str>) -> Self {
        ItemId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        ItemId::new(s)
    }
}

impl From<&String> for ItemId {
    fn from(s: &String) -> Self {
        ItemId::new(s)
    }
}

impl From<String> for ItemId {
    fn from(s: String) -> Self {
        ItemId(Arc::from(s))
    }
}

/// A total order over a set of distinct items, stored with its inverse index.
#[derive(Clone)]
pub struct Ranking {
    order: Vec<ItemId>,
    index: HashMap<ItemId, usize>,
}

/// A ranking over a subset of the item universe.
pub type SubRanking = Ranking;

impl Ranking {
    pub fn new<I, T>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<ItemId>,
    {
        let order: Vec<ItemId> = items.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(order.len());
        for (i, item) in order.iter().enumerate() {
            if index.insert(item.clone(), i).is_some() {
                return Err(Error::DuplicateItem(item.to_string()));
            }
        }
        Ok(Ranking { order, index })
    }

    pub fn empty() -> Self {
        Ranking {
            order: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Builds the ranking `base[perm[0]], base[perm[1]], ...`.
    pub(crate) fn from_indices(base: &[ItemId], perm: &[usize]) -> Self {
        let order: Vec<ItemId> = perm.iter().map(|&i| base[i].clone()).collect();
        let index = order
            .iter()
            .enumerate()
            .map(|(i, item)| (item.clone(), i))
            .collect();
        Ranking { order, index }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn items(&self) -> &[ItemId] {
        &self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = &ItemId> {
        self.order.iter()
    }

    /// `τ(rank)`, 1-based.
    pub fn item_at(&self, rank: usize) -> Option<&ItemId> {
        rank.checked_sub(1).and_then(|i| self.order.get(i))
    }

    /// `τ⁻¹(item)`, 1-based.
    pub fn rank_of(&self, item: &ItemId) -> Option<usize> {
        self.index.get(item).map(|i| i + 1)
    }

    pub fn contains(&self, item: &ItemId) -> bool {
        self.index.contains_key(item)
    }

    /// The first `k` entries.
    pub fn truncate(&self, k: usize) -> Ranking {
        Ranking::from_indices(&self.order, &(0..k.min(self.len())).collect::<Vec<_>>())
    }

    /// True iff `a` precedes `b`. Both must be present.
    pub fn prefers(&self, a: &ItemId, b: &ItemId) -> Option<bool> {
        Some(self.index.get(a)? < self.index.get(b)?)
    }

    pub fn same_items(&self, other: &Ranking) -> bool {
        self.len() == other.len() && self.order.iter().all(|x| other.contains(x))
    }

    /// The order restricted to the items of `keep`, in this ranking's order.
    pub fn restrict_to(&self, keep: &Ranking) -> Ranking {
        Ranking::new(self.order.iter().filter(|x| keep.contains(x)).cloned())
            .expect("restriction of a ranking is a ranking")
    }

    /// Positions (0-based) of every item of `self` inside `reference`.
    pub(crate) fn indices_in(&self, reference: &Ranking) -> Result<Vec<usize>> {
        self.order
            .iter()
            .map(|x| {
                reference
                    .index
                    .get(x)
                    .copied()
                    .ok_or_else(|| Error::UnknownItem(x.to_string()))
            })
            .collect()
    }
}

impl PartialEq for Ranking {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
    }
}

impl Eq for Ranking {}

impl std::hash::Hash for Ranking {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.order.hash(state);
    }
}

impl PartialOrd for Ranking {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranking {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order.cmp(&other.order)
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, x) in self.order.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ">")
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.order.iter().enumerate() {
            if i > 0 {
                write!(f, ">")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Number of item pairs ordered differently by `a` and `b`.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<usize> {
    if !a.same_items(b) {
        return Err(Error::ItemMismatch(format!("{a:?} vs {b:?}")));
    }
    let positions = a.indices_in(b)?;
    Ok(count_inversions(&positions))
}

/// Inversions of a sequence of distinct integers.
pub(crate) fn count_inversions(seq: &[usize]) -> usize {
    let mut n = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                n += 1;
            }
        }
    }
    n
}

/// A strict partial order given by generating pairs `a ≻ b`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartialOrder {
    pairs: BTreeSet<(ItemId, ItemId)>,
}

impl PartialOrder {
    pub fn new<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<ItemId>,
        B: Into<ItemId>,
    {
        let pairs: BTreeSet<(ItemId, ItemId)> = pairs
            .into_iter()
            .map(|(a, b)| (a.into(), b.into()))
            .collect();
        let po = PartialOrder { pairs };
        po.check_acyclic()?;
        Ok(po)
    }

    /// Consecutive pairs of a sub-ranking.
    pub fn from_subranking(psi: &SubRanking) -> Self {
        let pairs = psi
            .items()
            .windows(2)
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect();
        PartialOrder { pairs }
    }

    pub fn pairs(&self) -> &BTreeSet<(ItemId, ItemId)> {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `A(u)`: items mentioned by some pair, sorted.
    pub fn items(&self) -> Vec<ItemId> {
        let set: BTreeSet<&ItemId> = self.pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        set.into_iter().cloned().collect()
    }

    fn adjacency(&self) -> (Vec<ItemId>, Vec<Vec<usize>>) {
        let items = self.items();
        let idx: BTreeMap<&ItemId, usize> = items.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut adj = vec![Vec::new(); items.len()];
        for (a, b) in &self.pairs {
            adj[idx[a]].push(idx[b]);
        }
        (items, adj)
    }

    fn check_acyclic(&self) -> Result<()> {
        let (items, adj) = self.adjacency();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; items.len()];
        fn visit(v: usize, adj: &[Vec<usize>], mark: &mut [u8]) -> Option<usize> {
            mark[v] = 1;
            for &w in &adj[v] {
                match mark[w] {
                    1 => return Some(w),
                    0 => {
                        if let Some(c) = visit(w, adj, mark) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            mark[v] = 2;
            None
        }
        for v in 0..items.len() {
            if mark[v] == 0 {
                if let Some(c) = visit(v, &adj, &mut mark) {
                    return Err(Error::Cycle(items[c].to_string()));
                }
            }
        }
        Ok(())
    }

    /// Smallest transitively closed superset.
    pub fn transitive_closure(&self) -> PartialOrder {
        let (items, adj) = self.adjacency();
        let n = items.len();
        let mut reach = vec![vec![false; n]; n];
        for (a, succ) in adj.iter().enumerate() {
            for &b in succ {
                reach[a][b] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut pairs = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if reach[i][j] {
                    pairs.insert((items[i].clone(), items[j].clone()));
                }
            }
        }
        PartialOrder { pairs }
    }

    /// Every total order over `A(u)` consistent with `u`, with the default guard.
    pub fn linear_extensions(&self) -> Result<Vec<SubRanking>> {
        self.linear_extensions_with_guard(DEFAULT_EXTENSION_GUARD)
    }

    pub fn linear_extensions_with_guard(&self, max_items: usize) -> Result<Vec<SubRanking>> {
        let (items, adj) = self.adjacency();
        if items.len() > max_items {
            return Err(Error::GuardExceeded {
                what: "linear extension item count",
                limit: max_items,
                actual: items.len(),
            });
        }
        let mut indegree = vec![0usize; items.len()];
        for succ in &adj {
            for &b in succ {
                indegree[b] += 1;
            }
        }
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(items.len());
        let mut used = vec![false; items.len()];
        extend(&adj, &mut indegree, &mut used, &mut prefix, &mut out);
        Ok(out
            .into_iter()
            .map(|perm| Ranking::from_indices(&items, &perm))
            .collect())
    }
}

fn extend(
    adj: &[Vec<usize>],
    indegree: &mut [usize],
    used: &mut [bool],
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == adj.len() {
        out.push(prefix.clone());
        return;
    }
    for v in 0..adj.len() {
        if used[v] || indegree[v] != 0 {
            continue;
        }
        used[v] = true;
        prefix.push(v);
        for &w in &adj[v] {
            indegree[w] -= 1;
        }
        extend(adj, indegree, used, prefix, out);
        for &w in &adj[v] {
            indegree[w] += 1;
        }
        prefix.pop();
        used[v] = false;
    }
}

impl fmt::Debug for PartialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}>{b}")?;
        }
        write!(f, "}}")
    }
}

/// True iff every pair of `u` holds in `t`.
pub fn is_consistent(t: &Ranking, u: &PartialOrder) -> Result<bool> {
    for (a, b) in u.pairs() {
        match t.prefers(a, b) {
            Some(true) => {}
            Some(false) => return Ok(false),
            None => {
                let missing = if t.contains(a) { b } else { a };
                return Err(Error::UnknownItem(missing.to_string()));
            }
        }
    }
    Ok(true)
}

/// An atomic label, e.g. an attribute value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: impl AsRef<str>) -> Self {
        Label(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

/// λ: item → set of labels. Items without an entry carry no labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelingFunction {
    assignment: HashMap<ItemId, BTreeSet<Label>>,
}

static NO_LABELS: BTreeSet<Label> = BTreeSet::new();

impl LabelingFunction {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every item labeled by its own identifier.
    pub fn identity<'a>(items: impl IntoIterator<Item = &'a ItemId>) -> Self {
        let mut lam = Self::new();
        for x in items {
            lam.add(x.clone(), Label::new(x.as_str()));
        }
        lam
    }

    pub fn add(&mut self, item: ItemId, label: Label) {
        self.assignment.entry(item).or_default().insert(label);
    }

    pub fn with<I, L>(mut self, item: impl Into<ItemId>, labels: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        let entry = self.assignment.entry(item.into()).or_default();
        entry.extend(labels.into_iter().map(Into::into));
        self
    }

    pub fn labels_of(&self, item: &ItemId) -> &BTreeSet<Label> {
        self.assignment.get(item).unwrap_or(&NO_LABELS)
    }

    /// True iff `labels ⊆ λ(item)`.
    pub fn carries(&self, item: &ItemId, labels: &BTreeSet<Label>) -> bool {
        let own = self.labels_of(item);
        labels.iter().all(|l| own.contains(l))
    }

    pub fn items(&self) -> impl Iterator<Item = (&ItemId, &BTreeSet<Label>)> {
        self.assignment.iter()
    }

    /// Merges another labeling into this one.
    pub fn extend_from(&mut self, other: &LabelingFunction) {
        for (item, labels) in &other.assignment {
            self.assignment
                .entry(item.clone())
                .or_default()
                .extend(labels.iter().cloned());
        }
    }
}

/// Searches for an embedding of `g` into `t`; returns `δ` as 1-based
/// positions indexed by pattern node.
pub fn embed(t: &Ranking, lam: &LabelingFunction, g: &LabelPattern) -> Option<Vec<usize>> {
    let matcher = PatternMatcher::new(g, t.items(), lam);
    let identity: Vec<usize> = (0..t.len()).collect();
    matcher
        .witness(&identity)
        .map(|w| w.into_iter().map(|p| p + 1).collect())
}

/// `(t, λ) ⊨ g`.
pub fn matches(t: &Ranking, lam: &LabelingFunction, g: &LabelPattern) -> bool {
    embed(t, lam, g).is_some()
}
