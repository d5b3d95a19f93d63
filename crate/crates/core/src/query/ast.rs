use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A query term. Wildcards are parsed into fresh variables named `_1`,
/// `_2`, ...; user identifiers cannot start with `_`, so these never clash.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(value: impl Into<String>) -> Self {
        Term::Const(value.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Term::Var(v) if v.starts_with('_'))
    }

    /// Replaces a bound variable by its value.
    pub fn substitute(&self, binding: &BTreeMap<String, String>) -> Term {
        match self {
            Term::Var(v) => match binding.get(v) {
                Some(value) => Term::Const(value.clone()),
                None => self.clone(),
            },
            c => c.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) if v.starts_with('_') => f.write_str("_"),
            Term::Var(v) => f.write_str(v),
            Term::Const(c) if is_number(c) => f.write_str(c),
            Term::Const(c) => write!(f, "'{c}'"),
        }
    }
}

/// An atom over the preference relation: `P(session; left; right)`, read
/// "left is preferred to right in the session".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAtom {
    pub relation: String,
    pub session: Vec<Term>,
    pub left: Term,
    pub right: Term,
}

/// An atom over an ordinary relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OAtom {
    pub relation: String,
    pub terms: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, lhs: &str, rhs: &str) -> bool {
        let ord = compare_values(lhs, rhs);
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

/// `term op constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub term: Term,
    pub op: CmpOp,
    pub value: String,
}

impl Comparison {
    /// `None` while the term is an unbound variable.
    pub fn check(&self, binding: &BTreeMap<String, String>) -> Option<bool> {
        match self.term.substitute(binding) {
            Term::Const(c) => Some(self.op.holds(&c, &self.value)),
            Term::Var(_) => None,
        }
    }
}

/// A Boolean conjunctive query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub head: String,
    pub p_atoms: Vec<PAtom>,
    pub o_atoms: Vec<OAtom>,
    pub comparisons: Vec<Comparison>,
}

impl Query {
    /// Distinct terms in item slots of preference atoms, in first-seen order.
    pub fn item_terms(&self) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        for a in &self.p_atoms {
            for t in [&a.left, &a.right] {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let p_terms = self
            .p_atoms
            .iter()
            .flat_map(|a| a.session.iter().chain([&a.left, &a.right]));
        let o_terms = self.o_atoms.iter().flat_map(|a| a.terms.iter());
        let c_terms = self.comparisons.iter().map(|c| &c.term);
        for t in p_terms.chain(o_terms).chain(c_terms) {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
        out
    }

    /// Instantiates the query by a partial variable assignment.
    pub fn substitute(&self, binding: &BTreeMap<String, String>) -> Query {
        let sub = |ts: &[Term]| ts.iter().map(|t| t.substitute(binding)).collect();
        Query {
            head: self.head.clone(),
            p_atoms: self
                .p_atoms
                .iter()
                .map(|a| PAtom {
                    relation: a.relation.clone(),
                    session: sub(&a.session),
                    left: a.left.substitute(binding),
                    right: a.right.substitute(binding),
                })
                .collect(),
            o_atoms: self
                .o_atoms
                .iter()
                .map(|a| OAtom {
                    relation: a.relation.clone(),
                    terms: sub(&a.terms),
                })
                .collect(),
            comparisons: self
                .comparisons
                .iter()
                .map(|c| Comparison {
                    term: c.term.substitute(binding),
                    op: c.op,
                    value: c.value.clone(),
                })
                .collect(),
        }
    }
}

fn join_terms(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}() <- ", self.head)?;
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if !std::mem::take(&mut first) {
                f.write_str(", ")?;
            }
            Ok::<(), fmt::Error>(())
        };
        for a in &self.p_atoms {
            sep(f)?;
            write!(f, "{}(", a.relation)?;
            join_terms(f, &a.session)?;
            write!(f, ";{};{})", a.left, a.right)?;
        }
        for a in &self.o_atoms {
            sep(f)?;
            write!(f, "{}(", a.relation)?;
            join_terms(f, &a.terms)?;
            f.write_str(")")?;
        }
        for c in &self.comparisons {
            sep(f)?;
            let value = Term::Const(c.value.clone());
            write!(f, "{} {} {value}", c.term, c.op)?;
        }
        Ok(())
    }
}

pub(crate) fn is_number(s: &str) -> bool {
    s.parse::<f64>().is_ok_and(f64::is_finite)
}

/// Numeric order when both sides parse as numbers, string order otherwise.
pub fn compare_values(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons_are_numeric_when_possible() {
        assert!(CmpOp::Lt.holds("9", "10"));
        assert!(CmpOp::Gt.holds("b", "a"));
        assert!(CmpOp::Ge.holds("1990", "1990.0"));
        assert!(CmpOp::Eq.holds("5/5", "5/5"));
    }

    #[test]
    fn substitution_binds_only_named_variables() {
        let binding = BTreeMap::from([("e".to_string(), "BS".to_string())]);
        assert_eq!(Term::var("e").substitute(&binding), Term::constant("BS"));
        assert_eq!(Term::var("x").substitute(&binding), Term::var("x"));
        assert_eq!(Term::constant("e").substitute(&binding), Term::constant("e"));
    }
}
