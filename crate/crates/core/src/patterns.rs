//! Label patterns, pattern unions, their classification, conjunction and
//! decomposition into partial orders and sub-rankings.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rankings::{ItemId, Label, LabelingFunction, PartialOrder, Ranking, SubRanking};

/// A pattern node; an item matches it iff it carries every label in the set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternNode {
    labels: BTreeSet<Label>,
}

impl PatternNode {
    pub fn new<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        let labels: BTreeSet<Label> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidPattern("node with no labels".into()));
        }
        Ok(PatternNode { labels })
    }

    pub fn single(label: impl Into<Label>) -> Self {
        PatternNode {
            labels: BTreeSet::from([label.into()]),
        }
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }
}

impl fmt::Debug for PatternNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PatternNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.labels.len() == 1 {
            return write!(f, "{}", self.labels.iter().next().unwrap());
        }
        write!(f, "{{")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Role of a node inside one pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    /// Only outgoing edges (L-type).
    Source,
    /// Only incoming edges (R-type).
    Target,
    Isolated,
    Both,
}

/// A DAG over label-set nodes. Edges `(l, r)` read "l ≻ r".
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabelPattern {
    nodes: Vec<PatternNode>,
    edges: Vec<(usize, usize)>,
}

impl LabelPattern {
    pub fn new(nodes: Vec<PatternNode>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut dedup = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::InvalidPattern(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidPattern(format!("self-loop on node {a}")));
            }
            if seen.insert((a, b)) {
                dedup.push((a, b));
            }
        }
        let g = LabelPattern { nodes, edges: dedup };
        if g.has_cycle() {
            return Err(Error::Cycle("label pattern".into()));
        }
        Ok(g)
    }

    /// Single edge `l ≻ r` over singleton label nodes.
    pub fn edge(l: impl Into<Label>, r: impl Into<Label>) -> Self {
        LabelPattern {
            nodes: vec![PatternNode::single(l), PatternNode::single(r)],
            edges: vec![(0, 1)],
        }
    }

    /// `l₀ ≻ l₁ ≻ … ≻ lₖ` over singleton label nodes.
    pub fn chain<L: Into<Label>>(labels: impl IntoIterator<Item = L>) -> Self {
        let nodes: Vec<PatternNode> = labels.into_iter().map(PatternNode::single).collect();
        let edges = (1..nodes.len()).map(|i| (i - 1, i)).collect();
        LabelPattern { nodes, edges }
    }

    pub fn nodes(&self) -> &[PatternNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Pattern size `q`.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    fn has_cycle(&self) -> bool {
        let n = self.nodes.len();
        let mut indeg = vec![0; n];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &(a, b) in &self.edges {
                if a == v {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        stack.push(b);
                    }
                }
            }
        }
        seen != n
    }

    pub fn roles(&self) -> Vec<NodeRole> {
        let mut out = vec![false; self.nodes.len()];
        let mut inc = vec![false; self.nodes.len()];
        for &(a, b) in &self.edges {
            out[a] = true;
            inc[b] = true;
        }
        out.iter()
            .zip(&inc)
            .map(|(&o, &i)| match (o, i) {
                (true, false) => NodeRole::Source,
                (false, true) => NodeRole::Target,
                (false, false) => NodeRole::Isolated,
                (true, true) => NodeRole::Both,
            })
            .collect()
    }

    pub fn is_two_label(&self) -> bool {
        self.nodes.len() == 2 && self.edges.len() == 1
    }

    pub fn is_bipartite(&self) -> bool {
        !self.roles().contains(&NodeRole::Both)
    }

    /// Edges of the transitive closure over nodes, sorted by node-id pair.
    pub fn closure_edges(&self) -> Vec<(usize, usize)> {
        let n = self.nodes.len();
        let mut reach = vec![vec![false; n]; n];
        for &(a, b) in &self.edges {
            reach[a][b] = true;
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
        let mut out = Vec::new();
        for (i, row) in reach.iter().enumerate() {
            for (j, &r) in row.iter().enumerate() {
                if r {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

impl fmt::Debug for LabelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LabelPattern {
    /// Text form: `{M,JD}>BS & F>M`. Isolated nodes are listed alone.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .edges
            .iter()
            .map(|&(a, b)| format!("{}>{}", self.nodes[a], self.nodes[b]))
            .collect();
        for (i, role) in self.roles().iter().enumerate() {
            if *role == NodeRole::Isolated {
                parts.push(self.nodes[i].to_string());
            }
        }
        write!(f, "{}", parts.join(" & "))
    }
}

/// `G = g₁ ∪ … ∪ gᵤ`, u ≥ 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PatternUnion {
    patterns: Vec<LabelPattern>,
}

impl PatternUnion {
    pub fn new(patterns: Vec<LabelPattern>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::InvalidPattern("empty pattern union".into()));
        }
        Ok(PatternUnion { patterns })
    }

    pub fn single(g: LabelPattern) -> Self {
        PatternUnion { patterns: vec![g] }
    }

    pub fn patterns(&self) -> &[LabelPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

impl fmt::Debug for PatternUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PatternUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.patterns.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for PatternUnion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_pattern_union(s)
    }
}

/// Parses the line-oriented pattern-union text format. One pattern per line,
/// edges within a pattern joined by `&`, node label sets in braces (braces
/// optional for a single label). Blank lines and `#` comments are skipped.
pub fn parse_pattern_union(text: &str) -> Result<PatternUnion> {
    let mut patterns = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        patterns.push(parse_pattern_line(line, lineno + 1)?);
    }
    PatternUnion::new(patterns)
}

fn parse_pattern_line(line: &str, lineno: usize) -> Result<LabelPattern> {
    let err = |msg: String| Error::Parse {
        line: lineno,
        column: 1,
        message: msg,
    };
    let mut nodes: Vec<PatternNode> = Vec::new();
    let mut edges = Vec::new();
    let node_id = |node: PatternNode, nodes: &mut Vec<PatternNode>| -> usize {
        match nodes.iter().position(|n| *n == node) {
            Some(i) => i,
            None => {
                nodes.push(node);
                nodes.len() - 1
            }
        }
    };
    for part in line.split('&') {
        let chain: Vec<&str> = part.split('>').map(str::trim).collect();
        let mut prev = None;
        for spec in chain {
            let labels: Vec<&str> = if let Some(inner) = spec.strip_prefix('{') {
                let inner = inner
                    .strip_suffix('}')
                    .ok_or_else(|| err(format!("unclosed brace in `{spec}`")))?;
                inner.split(',').map(str::trim).collect()
            } else {
                vec![spec]
            };
            if labels.iter().any(|l| l.is_empty() || l.contains(['{', '}', ','])) {
                return Err(err(format!("bad node `{spec}`")));
            }
            let node = PatternNode::new(labels.into_iter().map(Label::new))?;
            let id = node_id(node, &mut nodes);
            if let Some(p) = prev {
                edges.push((p, id));
            }
            prev = Some(id);
        }
    }
    LabelPattern::new(nodes, edges).map_err(|e| err(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternClass {
    TwoLabel,
    Bipartite,
    General,
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternClass::TwoLabel => "two-label",
            PatternClass::Bipartite => "bipartite",
            PatternClass::General => "general",
        })
    }
}

pub fn classify(union: &PatternUnion) -> PatternClass {
    if union.patterns.iter().all(LabelPattern::is_two_label) {
        PatternClass::TwoLabel
    } else if union.patterns.iter().all(LabelPattern::is_bipartite) {
        PatternClass::Bipartite
    } else {
        PatternClass::General
    }
}

/// Disjoint union of nodes and edges; nodes are never merged.
pub fn conjoin(patterns: &[LabelPattern]) -> LabelPattern {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for g in patterns {
        let offset = nodes.len();
        nodes.extend(g.nodes.iter().cloned());
        edges.extend(g.edges.iter().map(|&(a, b)| (a + offset, b + offset)));
    }
    LabelPattern { nodes, edges }
}

/// Caps on decomposition output sizes.
#[derive(Clone, Copy, Debug)]
pub struct DecompositionLimits {
    pub max_partial_orders: usize,
    pub max_subrankings: usize,
    pub max_extension_items: usize,
}

impl Default for DecompositionLimits {
    fn default() -> Self {
        DecompositionLimits {
            max_partial_orders: 100_000,
            max_subrankings: 100_000,
            max_extension_items: crate::rankings::DEFAULT_EXTENSION_GUARD,
        }
    }
}

/// `Δ(g, λ)`: one item-level partial order per valid embedding of the edge
/// nodes, deduplicated by transitive closure. Returned orders are closed.
pub fn decompose_to_partial_orders(
    g: &LabelPattern,
    lam: &LabelingFunction,
    items: &[ItemId],
    limits: &DecompositionLimits,
) -> Result<Vec<PartialOrder>> {
    let candidates: Vec<Vec<usize>> = g
        .nodes
        .iter()
        .map(|n| {
            (0..items.len())
                .filter(|&i| lam.carries(&items[i], &n.labels))
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }
    let roles = g.roles();
    let active: Vec<usize> = (0..g.size())
        .filter(|&v| roles[v] != NodeRole::Isolated)
        .collect();
    if active.is_empty() {
        return Ok(vec![PartialOrder::default()]);
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut assignment = vec![usize::MAX; g.size()];
    let mut explored = 0usize;
    enumerate_assignments(
        g,
        &active,
        0,
        &candidates,
        &mut assignment,
        &mut |assignment| {
            explored += 1;
            if explored > limits.max_partial_orders {
                return Err(Error::GuardExceeded {
                    what: "partial-order decomposition",
                    limit: limits.max_partial_orders,
                    actual: explored,
                });
            }
            let pairs = g
                .edges
                .iter()
                .map(|&(a, b)| (items[assignment[a]].clone(), items[assignment[b]].clone()));
            if let Ok(po) = PartialOrder::new(pairs) {
                let closed = po.transitive_closure();
                if seen.insert(closed.clone()) {
                    out.push(closed);
                }
            }
            Ok(())
        },
    )?;
    Ok(out)
}

fn enumerate_assignments(
    g: &LabelPattern,
    active: &[usize],
    depth: usize,
    candidates: &[Vec<usize>],
    assignment: &mut [usize],
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if depth == active.len() {
        return visit(assignment);
    }
    let v = active[depth];
    for &item in &candidates[v] {
        // edge endpoints must be distinct items
        let clash = g.edges.iter().any(|&(a, b)| {
            (a == v && assignment[b] == item) || (b == v && assignment[a] == item)
        });
        if clash {
            continue;
        }
        assignment[v] = item;
        enumerate_assignments(g, active, depth + 1, candidates, assignment, visit)?;
    }
    assignment[v] = usize::MAX;
    Ok(())
}

/// `G` as a deduplicated union of sub-rankings (first-seen order).
pub fn decompose_to_subrankings(
    union: &PatternUnion,
    lam: &LabelingFunction,
    items: &[ItemId],
    limits: &DecompositionLimits,
) -> Result<Vec<SubRanking>> {
    let mut seen: HashSet<SubRanking> = HashSet::new();
    let mut out = Vec::new();
    for g in &union.patterns {
        for po in decompose_to_partial_orders(g, lam, items, limits)? {
            for psi in po.linear_extensions_with_guard(limits.max_extension_items)? {
                if seen.insert(psi.clone()) {
                    out.push(psi);
                    if out.len() > limits.max_subrankings {
                        return Err(Error::GuardExceeded {
                            what: "sub-ranking decomposition",
                            limit: limits.max_subrankings,
                            actual: out.len(),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `∃ g ∈ G: (t, λ) ⊨ g`.
pub fn matches_union(t: &Ranking, lam: &LabelingFunction, union: &PatternUnion) -> bool {
    let identity: Vec<usize> = (0..t.len()).collect();
    UnionMatcher::new(union, t.items(), lam).matches(&identity)
}

/// A pattern compiled against a fixed item list: node candidates are indices
/// into that list. Rankings are then given as `pos_of[item index]`.
#[derive(Clone, Debug)]
pub struct PatternMatcher {
    candidates: Vec<Vec<usize>>,
    order: Vec<usize>,
    // for each node, edges (other node, node_is_source)
    adjacent: Vec<Vec<(usize, bool)>>,
}

impl PatternMatcher {
    pub fn new(g: &LabelPattern, items: &[ItemId], lam: &LabelingFunction) -> Self {
        let candidates: Vec<Vec<usize>> = g
            .nodes
            .iter()
            .map(|n| {
                (0..items.len())
                    .filter(|&i| lam.carries(&items[i], &n.labels))
                    .collect()
            })
            .collect();
        let mut order: Vec<usize> = (0..g.size()).collect();
        order.sort_by_key(|&v| (candidates[v].len(), v));
        let mut adjacent = vec![Vec::new(); g.size()];
        for &(a, b) in &g.edges {
            adjacent[a].push((b, true));
            adjacent[b].push((a, false));
        }
        PatternMatcher {
            candidates,
            order,
            adjacent,
        }
    }

    pub fn satisfiable(&self) -> bool {
        self.candidates.iter().all(|c| !c.is_empty())
    }

    /// Returns 0-based positions per node when an embedding exists.
    pub fn witness(&self, pos_of: &[usize]) -> Option<Vec<usize>> {
        if !self.satisfiable() {
            return None;
        }
        let mut delta = vec![usize::MAX; self.candidates.len()];
        if self.search(0, pos_of, &mut delta) {
            Some(delta)
        } else {
            None
        }
    }

    pub fn matches(&self, pos_of: &[usize]) -> bool {
        self.witness(pos_of).is_some()
    }

    fn search(&self, depth: usize, pos_of: &[usize], delta: &mut [usize]) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        'cand: for &item in &self.candidates[v] {
            let p = pos_of[item];
            for &(w, v_is_source) in &self.adjacent[v] {
                let q = delta[w];
                if q == usize::MAX {
                    continue;
                }
                if (v_is_source && p >= q) || (!v_is_source && q >= p) {
                    continue 'cand;
                }
            }
            delta[v] = p;
            if self.search(depth + 1, pos_of, delta) {
                return true;
            }
        }
        delta[v] = usize::MAX;
        false
    }
}

/// Disjunction of compiled patterns.
#[derive(Clone, Debug)]
pub struct UnionMatcher {
    patterns: Vec<PatternMatcher>,
}

impl UnionMatcher {
    pub fn new(union: &PatternUnion, items: &[ItemId], lam: &LabelingFunction) -> Self {
        UnionMatcher {
            patterns: union
                .patterns
                .iter()
                .map(|g| PatternMatcher::new(g, items, lam))
                .filter(PatternMatcher::satisfiable)
                .collect(),
        }
    }

    pub fn satisfiable(&self) -> bool {
        !self.patterns.is_empty()
    }

    pub fn matches(&self, pos_of: &[usize]) -> bool {
        self.patterns.iter().any(|p| p.matches(pos_of))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankings::{matches, embed};

    fn r(s: &str) -> Ranking {
        Ranking::new(s.split(',')).unwrap()
    }

    fn candidate_labels() -> LabelingFunction {
        LabelingFunction::new()
            .with("Trump", ["R", "M", "BS"])
            .with("Clinton", ["D", "F", "JD"])
            .with("Sanders", ["D", "M", "BS"])
            .with("Rubio", ["R", "M", "JD"])
    }

    #[test]
    fn embedding_of_female_over_male() {
        let t = r("Trump,Clinton,Sanders,Rubio");
        let g = LabelPattern::edge("F", "M");
        assert_eq!(embed(&t, &candidate_labels(), &g), Some(vec![2, 3]));
    }

    #[test]
    fn empty_pattern_always_matches() {
        let g = LabelPattern::new(vec![], vec![]).unwrap();
        assert!(matches(&r("a,b"), &LabelingFunction::new(), &g));
    }

    #[test]
    fn chain_needs_one_middle_item() {
        let lam = LabelingFunction::new()
            .with("a", ["la"])
            .with("b1", ["lb"])
            .with("b2", ["lb"])
            .with("c", ["lc"]);
        let g = LabelPattern::chain(["la", "lb", "lc"]);
        assert!(!matches(&r("b1,a,c,b2"), &lam, &g));
        assert!(matches(&r("a,b1,c,b2"), &lam, &g));
    }

    #[test]
    fn unconnected_nodes_may_share_an_item() {
        let lam = LabelingFunction::new().with("a", ["x", "y"]);
        let g = LabelPattern::new(
            vec![PatternNode::single("x"), PatternNode::single("y")],
            vec![],
        )
        .unwrap();
        assert!(matches(&r("a"), &lam, &g));
    }

    #[test]
    fn classify_examples() {
        let g1 = LabelPattern::new(
            vec![
                PatternNode::new(["D", "BS"]).unwrap(),
                PatternNode::new(["R", "BS"]).unwrap(),
            ],
            vec![(0, 1)],
        )
        .unwrap();
        let g2 = LabelPattern::new(
            vec![
                PatternNode::new(["D", "JD"]).unwrap(),
                PatternNode::new(["R", "JD"]).unwrap(),
            ],
            vec![(0, 1)],
        )
        .unwrap();
        assert_eq!(
            classify(&PatternUnion::new(vec![g1, g2]).unwrap()),
            PatternClass::TwoLabel
        );
        let bip: PatternUnion = "A>C & A>D & B>D".parse().unwrap();
        assert_eq!(classify(&bip), PatternClass::Bipartite);
        let chain: PatternUnion = "la>lb>lc".parse().unwrap();
        assert_eq!(classify(&chain), PatternClass::General);
    }

    #[test]
    fn conjoin_is_disjoint() {
        let g1 = LabelPattern::edge("l1", "l2");
        let g2 = LabelPattern::edge("l3", "l4");
        let g3 = conjoin(&[g1.clone(), g2]);
        assert_eq!(g3.size(), 4);
        assert_eq!(g3.edges(), &[(0, 1), (2, 3)]);
        assert_eq!(conjoin(std::slice::from_ref(&g1)), g1);
        assert_eq!(conjoin(&[g1.clone(), g1.clone()]).size(), 4);
    }

    #[test]
    fn text_format_round_trip() {
        let text = "{JD,M}>BS & F>M\nA>C & A>D & B>D";
        let union: PatternUnion = text.parse().unwrap();
        assert_eq!(union.len(), 2);
        assert_eq!(union.patterns()[0].size(), 4);
        assert_eq!(union.patterns()[0].edges().len(), 2);
        assert_eq!(union.to_string().parse::<PatternUnion>().unwrap(), union);
        assert!("{a,b>c".parse::<PatternUnion>().is_err());
        assert!("a>b & b>a".parse::<PatternUnion>().is_err());
        assert!("".parse::<PatternUnion>().is_err());
    }

    fn two_pattern_instance() -> (PatternUnion, LabelingFunction, Vec<ItemId>) {
        let union: PatternUnion = "A>C & B>C\nD>E & D>F".parse().unwrap();
        let lam = LabelingFunction::new()
            .with("a", ["A"])
            .with("b", ["B"])
            .with("c", ["C"])
            .with("d", ["D"])
            .with("e1", ["E"])
            .with("e2", ["E"])
            .with("f", ["F"]);
        let items = ["a", "b", "c", "d", "e1", "e2", "f"].map(ItemId::new).to_vec();
        (union, lam, items)
    }

    #[test]
    fn decomposition_counts() {
        let (union, lam, items) = two_pattern_instance();
        let limits = DecompositionLimits::default();
        let orders: usize = union
            .patterns()
            .iter()
            .map(|g| decompose_to_partial_orders(g, &lam, &items, &limits).unwrap().len())
            .sum();
        assert_eq!(orders, 3);
        let subs = decompose_to_subrankings(&union, &lam, &items, &limits).unwrap();
        assert_eq!(subs.len(), 6);
    }

    #[test]
    fn decomposition_edge_cases() {
        let limits = DecompositionLimits::default();
        let lam = LabelingFunction::new().with("a", ["A"]).with("b", ["B"]);
        let items = vec![ItemId::new("a"), ItemId::new("b")];
        let missing = LabelPattern::edge("A", "Z");
        assert!(decompose_to_partial_orders(&missing, &lam, &items, &limits)
            .unwrap()
            .is_empty());
        let single = LabelPattern::edge("A", "B");
        let orders = decompose_to_partial_orders(&single, &lam, &items, &limits).unwrap();
        assert_eq!(orders, vec![PartialOrder::new([("a", "b")]).unwrap()]);
        let subs =
            decompose_to_subrankings(&PatternUnion::single(missing), &lam, &items, &limits)
                .unwrap();
        assert!(subs.is_empty());
    }

    #[test]
    fn both_q2_instantiations_hold_together() {
        let lam = candidate_labels();
        let t = r("Sanders,Trump,Clinton,Rubio");
        let bs: PatternUnion = "{D,BS}>{R,BS}".parse().unwrap();
        let jd: PatternUnion = "{D,JD}>{R,JD}".parse().unwrap();
        assert!(matches_union(&t, &lam, &bs));
        assert!(matches_union(&t, &lam, &jd));
        let none: PatternUnion = "{R,JD}>{D,JD}".parse().unwrap();
        assert!(!matches_union(&t, &lam, &none));
    }
}
