use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::MallowsModel;
use crate::rankings::{ItemId, Label, LabelingFunction};

/// A named table of string tuples, indexed on its first column.
#[derive(Clone, Debug)]
pub struct Relation {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    index: HashMap<String, Vec<usize>>,
}

impl Relation {
    pub fn new(name: impl Into<String>, columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        let name = name.into();
        if columns.is_empty() {
            return Err(Error::Load(format!("relation {name} has no columns")));
        }
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        for (k, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::Load(format!(
                    "relation {name}: row {} has {} values, expected {}",
                    k + 1,
                    row.len(),
                    columns.len()
                )));
            }
            index.entry(row[0].clone()).or_default().push(k);
        }
        Ok(Relation {
            name,
            columns,
            rows,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Rows whose first column equals `key`.
    pub fn rows_with_key<'a>(&'a self, key: &str) -> impl Iterator<Item = &'a Vec<String>> + 'a {
        self.index
            .get(key)
            .into_iter()
            .flatten()
            .map(move |&k| &self.rows[k])
    }

    pub fn column_values(&self, col: usize) -> impl Iterator<Item = &str> {
        self.rows.iter().map(move |r| r[col].as_str())
    }
}

/// One row of the preference relation.
#[derive(Clone, Debug)]
pub struct Session {
    pub key: Vec<String>,
    pub model: Arc<MallowsModel>,
}

impl Session {
    pub fn id(&self) -> String {
        self.key.join(",")
    }
}

/// Ordinary relations plus one preference relation whose sessions carry
/// independent Mallows models over the item universe.
#[derive(Clone, Debug)]
pub struct PreferenceDatabase {
    relations: BTreeMap<String, Relation>,
    p_name: String,
    session_columns: Vec<String>,
    sessions: Vec<Session>,
    item_relation: String,
    items: Vec<ItemId>,
    lam: LabelingFunction,
}

impl PreferenceDatabase {
    /// Items are the first-column values of `item_relation`.
    pub fn new(
        p_name: impl Into<String>,
        session_columns: Vec<String>,
        item_relation: Relation,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut items = Vec::new();
        for v in item_relation.column_values(0) {
            if !seen.insert(v) {
                return Err(Error::Load(format!(
                    "item relation {} repeats key `{v}`",
                    item_relation.name()
                )));
            }
            items.push(ItemId::new(v));
        }
        let lam = LabelingFunction::identity(&items);
        let name = item_relation.name().to_string();
        Ok(PreferenceDatabase {
            relations: BTreeMap::from([(name.clone(), item_relation)]),
            p_name: p_name.into(),
            session_columns,
            sessions: Vec::new(),
            item_relation: name,
            items,
            lam,
        })
    }

    pub fn add_relation(&mut self, rel: Relation) -> Result<()> {
        if rel.name() == self.p_name || self.relations.contains_key(rel.name()) {
            return Err(Error::Load(format!("relation {} defined twice", rel.name())));
        }
        self.relations.insert(rel.name().to_string(), rel);
        Ok(())
    }

    /// Adds label `attr=value` to every item for each listed attribute of
    /// the item relation.
    pub fn derive_labels(&mut self, attributes: &[String]) -> Result<()> {
        let rel = &self.relations[&self.item_relation];
        for attr in attributes {
            let col = rel.columns().iter().position(|c| c == attr).ok_or_else(|| {
                Error::Load(format!("item relation {} has no attribute {attr}", rel.name()))
            })?;
            for row in rel.rows() {
                self.lam
                    .add(ItemId::new(&row[0]), Label::new(format!("{attr}={}", row[col])));
            }
        }
        Ok(())
    }

    pub fn add_session(&mut self, key: Vec<String>, model: MallowsModel) -> Result<()> {
        if key.len() != self.session_columns.len() {
            return Err(Error::Load(format!(
                "session key {key:?} has {} values, expected {}",
                key.len(),
                self.session_columns.len()
            )));
        }
        if self.sessions.iter().any(|s| s.key == key) {
            return Err(Error::Load(format!("duplicate session `{}`", key.join(","))));
        }
        let sigma = model.sigma();
        if sigma.len() != self.items.len() {
            return Err(Error::ItemMismatch(format!(
                "session `{}` ranks {} items, the universe has {}",
                key.join(","),
                sigma.len(),
                self.items.len()
            )));
        }
        if let Some(x) = self.items.iter().find(|x| !sigma.contains(x)) {
            return Err(Error::ItemMismatch(format!(
                "session `{}` does not rank `{x}`",
                key.join(",")
            )));
        }
        self.sessions.push(Session {
            key,
            model: Arc::new(model),
        });
        Ok(())
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn p_relation(&self) -> &str {
        &self.p_name
    }

    pub fn session_columns(&self) -> &[String] {
        &self.session_columns
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn item_relation(&self) -> &Relation {
        &self.relations[&self.item_relation]
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn lam(&self) -> &LabelingFunction {
        &self.lam
    }
}

/// The three-relation election instance: Candidates `C`, Voters `V` and
/// Polls `P` keyed by (voter, date).
pub fn election_database() -> PreferenceDatabase {
    let rows = |xs: &[&[&str]]| -> Vec<Vec<String>> {
        xs.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
    };
    let cols = |xs: &[&str]| -> Vec<String> { xs.iter().map(|s| s.to_string()).collect() };
    let candidates = Relation::new(
        "C",
        cols(&["candidate", "party", "sex", "age", "edu", "reg"]),
        rows(&[
            &["Trump", "R", "M", "70", "BS", "NE"],
            &["Clinton", "D", "F", "69", "JD", "NE"],
            &["Sanders", "D", "M", "75", "BS", "NE"],
            &["Rubio", "R", "M", "45", "JD", "S"],
        ]),
    )
    .expect("static relation");
    let voters = Relation::new(
        "V",
        cols(&["voter", "sex", "age", "edu"]),
        rows(&[
            &["Ann", "F", "20", "BS"],
            &["Bob", "M", "30", "BS"],
            &["Dave", "M", "50", "MS"],
        ]),
    )
    .expect("static relation");
    let mut db = PreferenceDatabase::new("P", cols(&["voter", "date"]), candidates).expect("static");
    db.add_relation(voters).expect("static");
    db.derive_labels(&cols(&["party", "sex", "edu"])).expect("static");
    let sessions = [
        ("Ann", "5/5", ["Clinton", "Sanders", "Rubio", "Trump"], 0.3),
        ("Bob", "5/5", ["Trump", "Rubio", "Sanders", "Clinton"], 0.3),
        ("Dave", "6/5", ["Clinton", "Sanders", "Rubio", "Trump"], 0.5),
    ];
    for (voter, date, sigma, phi) in sessions {
        let model = MallowsModel::new(crate::rankings::Ranking::new(sigma).expect("static"), phi)
            .expect("static");
        db.add_session(cols(&[voter, date]), model).expect("static");
    }
    db
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankings::Ranking;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn db() -> PreferenceDatabase {
        let items = Relation::new(
            "C",
            strings(&["name", "sex"]),
            vec![strings(&["a", "F"]), strings(&["b", "M"])],
        )
        .unwrap();
        PreferenceDatabase::new("P", strings(&["voter"]), items).unwrap()
    }

    #[test]
    fn labels_are_attribute_value_pairs() {
        let mut d = db();
        d.derive_labels(&strings(&["sex"])).unwrap();
        let labels = d.lam().labels_of(&ItemId::new("a"));
        assert!(labels.contains(&Label::new("sex=F")));
        assert!(labels.contains(&Label::new("a")));
        assert!(d.derive_labels(&strings(&["age"])).is_err());
    }

    #[test]
    fn sessions_must_rank_the_universe() {
        let mut d = db();
        let ok = MallowsModel::new(Ranking::new(["b", "a"]).unwrap(), 0.5).unwrap();
        d.add_session(strings(&["Ann"]), ok.clone()).unwrap();
        assert!(d.add_session(strings(&["Ann"]), ok).is_err());
        let bad = MallowsModel::new(Ranking::new(["a", "z"]).unwrap(), 0.5).unwrap();
        assert!(matches!(d.add_session(strings(&["Bob"]), bad), Err(Error::ItemMismatch(_))));
    }

    #[test]
    fn election_instance_shape() {
        let d = election_database();
        assert_eq!(d.items().len(), 4);
        assert_eq!(d.sessions().len(), 3);
        assert_eq!(d.sessions()[0].id(), "Ann,5/5");
        assert!(d.lam().carries(&ItemId::new("Rubio"), &[Label::new("edu=JD")].into()));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(Relation::new("R", strings(&["a", "b"]), vec![strings(&["x"])]).is_err());
    }
}
