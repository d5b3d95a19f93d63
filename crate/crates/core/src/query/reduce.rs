use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::ast::{compare_values, Comparison, OAtom, Query, Term};
use super::database::{PreferenceDatabase, Session};
use crate::error::{Error, Result};
use crate::patterns::{LabelPattern, PatternNode, PatternUnion};
use crate::rankings::{ItemId, Label, LabelingFunction};

/// Default cap on the number of grounded instantiations.
pub const DEFAULT_GROUNDING_GUARD: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryClass {
    Itemwise,
    NonItemwise,
}

/// Variable roles of a sessionwise query.
#[derive(Clone, Debug)]
pub struct QueryShape {
    /// Unified term per session position; `None` where every atom has `_`.
    pub session: Vec<Option<Term>>,
    pub session_vars: BTreeSet<String>,
    pub item_vars: BTreeSet<String>,
    /// Variables that must be grounded before the query reduces to one
    /// label pattern per session.
    pub grounded: BTreeSet<String>,
}

impl QueryShape {
    pub fn class(&self) -> QueryClass {
        if self.grounded.is_empty() {
            QueryClass::Itemwise
        } else {
            QueryClass::NonItemwise
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Group {
    Global,
    Session,
    Item(usize),
}

fn atom_vars(a: &OAtom) -> impl Iterator<Item = &str> {
    a.terms.iter().filter_map(Term::as_var)
}

fn atom_item<'q>(a: &'q OAtom, item_vars: &[&str]) -> Option<&'q str> {
    atom_vars(a).find(|v| item_vars.contains(v))
}

/// Computes the session unification and the variables to ground.
pub fn analyze_query(q: &Query) -> Result<QueryShape> {
    let first = q
        .p_atoms
        .first()
        .ok_or_else(|| Error::Unsupported("query has no preference atom".into()))?;
    let width = first.session.len();
    let mut session: Vec<Option<Term>> = vec![None; width];
    for a in &q.p_atoms {
        if a.relation != first.relation {
            return Err(Error::Unsupported(format!(
                "preference atoms over {} and {}",
                first.relation, a.relation
            )));
        }
        if a.session.len() != width {
            return Err(Error::Arity(format!(
                "{}: session terms of differing length",
                a.relation
            )));
        }
        for (slot, t) in session.iter_mut().zip(&a.session) {
            if t.is_wildcard() {
                continue;
            }
            match slot {
                None => *slot = Some(t.clone()),
                Some(prev) if prev == t => {}
                Some(prev @ Term::Var(_)) if matches!(t, Term::Const(_)) => *prev = t.clone(),
                Some(Term::Const(_)) if matches!(t, Term::Var(_)) => {}
                Some(prev) => {
                    return Err(Error::NonSessionwise(format!(
                        "session position holds both {prev} and {t}"
                    )))
                }
            }
        }
    }
    let mut session_vars = BTreeSet::new();
    for a in &q.p_atoms {
        for t in &a.session {
            if let Term::Var(v) = t {
                if !t.is_wildcard() {
                    session_vars.insert(v.clone());
                }
            }
        }
    }
    let item_vars: BTreeSet<String> = q
        .item_terms()
        .iter()
        .filter_map(|t| t.as_var().map(str::to_string))
        .collect();
    if let Some(v) = item_vars.intersection(&session_vars).next() {
        return Err(Error::Unsupported(format!("`{v}` is both a session and an item variable")));
    }
    let item_index: HashMap<&str, usize> =
        item_vars.iter().enumerate().map(|(k, v)| (v.as_str(), k)).collect();

    let mut groups: BTreeMap<&str, BTreeSet<Group>> = BTreeMap::new();
    for a in &q.o_atoms {
        let items: BTreeSet<usize> = atom_vars(a).filter_map(|v| item_index.get(v).copied()).collect();
        let group = match items.len() {
            0 if atom_vars(a).any(|v| session_vars.contains(v)) => Group::Session,
            0 => Group::Global,
            1 => Group::Item(*items.iter().next().unwrap()),
            _ => {
                return Err(Error::Unsupported(format!(
                    "atom {}(...) relates two item variables",
                    a.relation
                )))
            }
        };
        for v in atom_vars(a) {
            groups.entry(v).or_default().insert(group);
        }
    }
    for c in &q.comparisons {
        if let Term::Var(v) = &c.term {
            if !groups.contains_key(v.as_str()) && !item_vars.contains(v) && !session_vars.contains(v) {
                return Err(Error::InvalidArgument(format!(
                    "variable `{v}` appears only in a comparison"
                )));
            }
        }
    }
    let grounded = groups
        .into_iter()
        .filter(|(v, g)| g.len() >= 2 && !item_vars.contains(*v) && !session_vars.contains(*v))
        .map(|(v, _)| v.to_string())
        .collect();
    Ok(QueryShape {
        session,
        session_vars,
        item_vars,
        grounded,
    })
}

/// Itemwise iff no variable needs grounding.
pub fn classify_query(q: &Query) -> Result<QueryClass> {
    Ok(analyze_query(q)?.class())
}

/// Checks relation names and arities against the database schema.
pub fn check_query(q: &Query, db: &PreferenceDatabase) -> Result<()> {
    for a in &q.p_atoms {
        if a.relation != db.p_relation() {
            return Err(Error::Arity(format!("unknown preference relation {}", a.relation)));
        }
        if a.session.len() != db.session_columns().len() {
            return Err(Error::Arity(format!(
                "{} takes {} session terms, found {}",
                a.relation,
                db.session_columns().len(),
                a.session.len()
            )));
        }
    }
    for a in &q.o_atoms {
        if a.relation == db.p_relation() {
            return Err(Error::Arity(format!("{} is a preference relation", a.relation)));
        }
        let rel = db
            .relation(&a.relation)
            .ok_or_else(|| Error::Arity(format!("unknown relation {}", a.relation)))?;
        if rel.arity() != a.terms.len() {
            return Err(Error::Arity(format!(
                "{} has arity {}, found {} terms",
                a.relation,
                rel.arity(),
                a.terms.len()
            )));
        }
    }
    Ok(())
}

/// Active domain of `v`: values present in every column it occupies,
/// filtered by its comparisons.
fn active_domain(q: &Query, db: &PreferenceDatabase, v: &str) -> BTreeSet<String> {
    let mut domain: Option<BTreeSet<String>> = None;
    for a in &q.o_atoms {
        let Some(rel) = db.relation(&a.relation) else { continue };
        for (col, t) in a.terms.iter().enumerate() {
            if t.as_var() == Some(v) {
                let values: BTreeSet<String> = rel.column_values(col).map(str::to_string).collect();
                domain = Some(match domain {
                    None => values,
                    Some(d) => d.intersection(&values).cloned().collect(),
                });
            }
        }
    }
    let mut domain = domain.unwrap_or_default();
    for c in q.comparisons.iter().filter(|c| c.term.as_var() == Some(v)) {
        domain.retain(|x| c.op.holds(x, &c.value));
    }
    domain
}

/// Grounds the variables that block pattern reduction over their active
/// domains. An itemwise query decomposes to itself.
pub fn decompose_query(q: &Query, db: &PreferenceDatabase, guard: usize) -> Result<Vec<Query>> {
    let shape = analyze_query(q)?;
    let vars: Vec<&String> = shape.grounded.iter().collect();
    let domains: Vec<Vec<String>> = vars
        .iter()
        .map(|v| {
            let mut d: Vec<String> = active_domain(q, db, v).into_iter().collect();
            d.sort_by(|a, b| compare_values(a, b));
            d
        })
        .collect();
    let total = domains
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(d.len()))
        .unwrap_or(usize::MAX);
    if total > guard {
        return Err(Error::GuardExceeded {
            what: "grounded instantiations",
            limit: guard,
            actual: total,
        });
    }
    let mut out = Vec::with_capacity(total);
    let mut counter = vec![0usize; vars.len()];
    for _ in 0..total {
        let binding: BTreeMap<String, String> = vars
            .iter()
            .zip(&counter)
            .zip(&domains)
            .map(|((v, &k), d)| ((*v).clone(), d[k].clone()))
            .collect();
        out.push(q.substitute(&binding));
        for (c, d) in counter.iter_mut().zip(&domains).rev() {
            *c += 1;
            if *c < d.len() {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}

/// Backtracking join: is there an extension of `binding` satisfying every
/// atom and comparison?
fn satisfiable(
    db: &PreferenceDatabase,
    atoms: &[&OAtom],
    comps: &[&Comparison],
    binding: &mut BTreeMap<String, String>,
) -> bool {
    if comps.iter().any(|c| c.check(binding) == Some(false)) {
        return false;
    }
    let Some((atom, rest)) = atoms.split_first() else {
        return comps.iter().all(|c| c.check(binding) == Some(true));
    };
    let Some(rel) = db.relation(&atom.relation) else {
        return false;
    };
    let key = match atom.terms[0].substitute(binding) {
        Term::Const(c) => Some(c),
        Term::Var(_) => None,
    };
    let rows: Box<dyn Iterator<Item = &Vec<String>>> = match &key {
        Some(k) => Box::new(rel.rows_with_key(k)),
        None => Box::new(rel.rows().iter()),
    };
    for row in rows {
        let mut fresh = Vec::new();
        let mut ok = true;
        for (t, value) in atom.terms.iter().zip(row) {
            match t.substitute(binding) {
                Term::Const(c) => {
                    if c != *value {
                        ok = false;
                        break;
                    }
                }
                Term::Var(v) => {
                    binding.insert(v.clone(), value.clone());
                    fresh.push(v);
                }
            }
        }
        if ok && satisfiable(db, rest, comps, binding) {
            return true;
        }
        for v in fresh {
            binding.remove(&v);
        }
    }
    false
}

/// Interns candidate sets as synthetic labels, shared by every session of
/// one evaluation so identical sets get identical labels.
#[derive(Debug, Default)]
pub(crate) struct LabelTable {
    by_set: HashMap<(String, Arc<[ItemId]>), Label>,
    extension: HashMap<Label, Arc<[ItemId]>>,
}

impl LabelTable {
    fn intern(&mut self, term: &str, set: Arc<[ItemId]>) -> Label {
        if let Some(l) = self.by_set.get(&(term.to_string(), set.clone())) {
            return l.clone();
        }
        let label = Label::new(format!("{term}@{}", self.by_set.len()));
        self.by_set.insert((term.to_string(), set.clone()), label.clone());
        self.extension.insert(label.clone(), set);
        label
    }

    /// Labeling restricted to the labels in `union`; item names label
    /// themselves.
    pub(crate) fn labeling(&self, union: &PatternUnion) -> LabelingFunction {
        let mut lam = LabelingFunction::new();
        for g in union.patterns() {
            for node in g.nodes() {
                for l in node.labels() {
                    match self.extension.get(l) {
                        Some(items) => {
                            for x in items.iter() {
                                lam.add(x.clone(), l.clone());
                            }
                        }
                        None => lam.add(ItemId::new(l.as_str()), l.clone()),
                    }
                }
            }
        }
        lam
    }
}

/// Pattern union of a query for each session, built once per query.
pub(crate) struct Reducer<'a> {
    db: &'a PreferenceDatabase,
    query: Query,
    shape: QueryShape,
    instances: Vec<Query>,
    session_dependent: bool,
    cache: HashMap<Vec<String>, Option<PatternUnion>>,
    pub(crate) labels: LabelTable,
}

impl<'a> Reducer<'a> {
    pub(crate) fn new(q: &Query, db: &'a PreferenceDatabase, guard: usize) -> Result<Self> {
        check_query(q, db)?;
        let shape = analyze_query(q)?;
        let instances = decompose_query(q, db, guard)?;
        let session_dependent = q
            .o_atoms
            .iter()
            .flat_map(|a| a.terms.iter())
            .chain(q.comparisons.iter().map(|c| &c.term))
            .filter_map(Term::as_var)
            .any(|v| shape.session_vars.contains(v));
        Ok(Reducer {
            db,
            query: q.clone(),
            shape,
            instances,
            session_dependent,
            cache: HashMap::new(),
            labels: LabelTable::default(),
        })
    }

    /// Binds session variables to the session's key; `None` if the
    /// session's key contradicts a constant.
    fn session_binding(&self, s: &Session) -> Option<BTreeMap<String, String>> {
        let mut binding = BTreeMap::new();
        for slot in self.shape.session.iter().zip(&s.key) {
            if let (Some(Term::Const(c)), value) = slot {
                if c != value {
                    return None;
                }
            }
        }
        for a in &self.query.p_atoms {
            for (t, value) in a.session.iter().zip(&s.key) {
                if let Term::Var(v) = t {
                    if self.shape.session_vars.contains(v) {
                        binding.insert(v.clone(), value.clone());
                    }
                }
            }
        }
        Some(binding)
    }

    /// The session's pattern union, or `None` when no instantiation can be
    /// satisfied.
    pub(crate) fn union_for(&mut self, s: &Session) -> Option<PatternUnion> {
        let binding = self.session_binding(s)?;
        let key: Vec<String> = if self.session_dependent {
            binding.values().cloned().collect()
        } else {
            Vec::new()
        };
        if let Some(u) = self.cache.get(&key) {
            return u.clone();
        }
        let mut patterns = Vec::new();
        for k in 0..self.instances.len() {
            let q = self.instances[k].substitute(&binding);
            if let Some(g) = self.reduce(&q) {
                if !patterns.contains(&g) {
                    patterns.push(g);
                }
            }
        }
        let union = PatternUnion::new(patterns).ok();
        self.cache.insert(key, union.clone());
        union
    }

    /// One label pattern for a ground-free, session-bound instance.
    fn reduce(&mut self, q: &Query) -> Option<LabelPattern> {
        let terms = q.item_terms();
        let item_vars: Vec<&str> = terms.iter().filter_map(Term::as_var).collect();
        let atom_item = |a| atom_item(a, &item_vars);
        let global_atoms: Vec<&OAtom> = q.o_atoms.iter().filter(|a| atom_item(a).is_none()).collect();
        let item_owned = |c: &Comparison| {
            c.term.as_var().is_some_and(|v| {
                item_vars.contains(&v)
                    || q.o_atoms.iter().any(|a| atom_item(a).is_some() && atom_vars(a).any(|w| w == v))
            })
        };
        let global_comps: Vec<&Comparison> = q.comparisons.iter().filter(|c| !item_owned(c)).collect();
        if !satisfiable(self.db, &global_atoms, &global_comps, &mut BTreeMap::new()) {
            return None;
        }
        let mut nodes = Vec::with_capacity(terms.len());
        for t in &terms {
            let label = match t {
                Term::Const(c) => {
                    let x = ItemId::new(c);
                    if !self.db.items().contains(&x) {
                        return None;
                    }
                    Label::new(c)
                }
                Term::Var(v) => {
                    let atoms: Vec<&OAtom> =
                        q.o_atoms.iter().filter(|a| atom_item(a) == Some(v.as_str())).collect();
                    let comps: Vec<&Comparison> = q
                        .comparisons
                        .iter()
                        .filter(|c| {
                            c.term.as_var().is_some_and(|w| {
                                w == v || atoms.iter().any(|a| atom_vars(a).any(|u| u == w))
                            })
                        })
                        .collect();
                    let set: Vec<ItemId> = self
                        .db
                        .items()
                        .iter()
                        .filter(|x| {
                            let mut binding = BTreeMap::from([(v.clone(), x.as_str().to_string())]);
                            satisfiable(self.db, &atoms, &comps, &mut binding)
                        })
                        .cloned()
                        .collect();
                    if set.is_empty() {
                        return None;
                    }
                    self.labels.intern(v, set.into())
                }
            };
            nodes.push(PatternNode::single(label));
        }
        let edges = q
            .p_atoms
            .iter()
            .map(|a| {
                let l = terms.iter().position(|t| *t == a.left).unwrap();
                let r = terms.iter().position(|t| *t == a.right).unwrap();
                (l, r)
            })
            .collect();
        LabelPattern::new(nodes, edges).ok()
    }
}

/// Label pattern of an itemwise query on one session, with the labeling
/// that gives its synthetic labels their extensions. `None` means the
/// query cannot hold in this session (empty candidates or cyclic
/// preferences).
pub fn query_to_pattern(
    q: &Query,
    db: &PreferenceDatabase,
    session: &Session,
) -> Result<Option<(LabelPattern, LabelingFunction)>> {
    if classify_query(q)? != QueryClass::Itemwise {
        return Err(Error::InvalidArgument("query_to_pattern needs an itemwise query".into()));
    }
    let mut reducer = Reducer::new(q, db, 1)?;
    Ok(reducer.union_for(session).map(|u| {
        let lam = reducer.labels.labeling(&u);
        (u.patterns()[0].clone(), lam)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn class(text: &str) -> QueryClass {
        classify_query(&parse_query(text).unwrap()).unwrap()
    }

    fn grounded(text: &str) -> Vec<String> {
        analyze_query(&parse_query(text).unwrap())
            .unwrap()
            .grounded
            .into_iter()
            .collect()
    }

    #[test]
    fn classifies_worked_queries() {
        assert_eq!(class("Q() <- P('Ann','5/5';'Trump';'Clinton'), P('Ann','5/5';'Trump';'Rubio')"), QueryClass::Itemwise);
        assert_eq!(class("Q() <- P(_,_;c1;c2), C(c1,_,'F',_,_,_), C(c2,_,'M',_,_,_)"), QueryClass::Itemwise);
        assert_eq!(grounded("Q() <- P(_,_;c1;c2), C(c1,'D',_,_,e,_), C(c2,'R',_,_,e,_)"), vec!["e"]);
    }

    #[test]
    fn session_attribute_join_needs_grounding() {
        let q = "Q() <- P(v; m1; m2), V(v, sex, age), M(m1, _, sex, _), M(m2, _, _, age)";
        assert_eq!(grounded(q), vec!["age", "sex"]);
        let local = "Q() <- P(v; m1; m2), V(v, sex, age), M(m1, _, _, _)";
        assert!(grounded(local).is_empty());
    }

    #[test]
    fn distinct_session_constants_are_rejected() {
        let q = parse_query("Q() <- P('Ann';a;b), P('Bob';b;c)").unwrap();
        assert!(matches!(classify_query(&q), Err(Error::NonSessionwise(_))));
        let q = parse_query("Q() <- P(v;a;b), P(w;b;c)").unwrap();
        assert!(matches!(classify_query(&q), Err(Error::NonSessionwise(_))));
        let q = parse_query("Q() <- P(_;a;b), P('Ann';b;c), P(v;c;d)").unwrap();
        let shape = analyze_query(&q).unwrap();
        assert_eq!(shape.session, vec![Some(Term::constant("Ann"))]);
    }
}
