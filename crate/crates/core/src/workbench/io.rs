use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{InsertionMatrix, LabeledModel, MallowsModel, RankingModel, RimModel};
use crate::patterns::PatternUnion;
use crate::query::{PreferenceDatabase, Relation};
use crate::rankings::{ItemId, Label, LabelingFunction, PartialOrder, Ranking};

/// File naming the database layout inside a database directory.
pub const MANIFEST: &str = "prefdb.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub p_relation: String,
    pub session_keys: Vec<String>,
    pub item_relation: String,
    #[serde(default)]
    pub label_attributes: Vec<String>,
    /// Model file, relative to the directory.
    pub models: String,
}

fn load_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Load(format!("{}: {e}", path.display()))
}

/// Reads a comma-separated file with a header row; the relation is named
/// after the file stem.
pub fn read_relation(path: &Path) -> Result<Relation> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| load_err(path, "bad file name"))?
        .to_string();
    let (columns, rows) = read_csv(path)?;
    Relation::new(name, columns, rows)
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| load_err(path, e))?;
    let columns = reader
        .headers()
        .map_err(|e| load_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| load_err(path, e))?;
    Ok((columns, rows))
}

pub fn write_relation(rel: &Relation, dir: &Path) -> Result<()> {
    let path = dir.join(format!("{}.csv", rel.name()));
    let mut w = csv::Writer::from_path(&path).map_err(|e| load_err(&path, e))?;
    w.write_record(rel.columns()).map_err(|e| load_err(&path, e))?;
    for row in rel.rows() {
        w.write_record(row).map_err(|e| load_err(&path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// `a>b>c` as a ranking.
pub fn parse_chain(text: &str) -> Result<Ranking> {
    Ranking::new(text.split('>').map(str::trim))
}

fn chain_text(r: &Ranking) -> String {
    r.items().iter().map(ItemId::as_str).collect::<Vec<_>>().join(">")
}

/// Loads a database directory: the manifest, one CSV file per relation
/// and the model file with columns `<session keys>, phi, sigma`.
pub fn load_database(dir: &Path) -> Result<PreferenceDatabase> {
    let manifest_path = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path).map_err(|e| load_err(&manifest_path, e))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| load_err(&manifest_path, e))?;
    let models_path = dir.join(&manifest.models);
    let mut relations = BTreeMap::new();
    let mut entries: Vec<_> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.extension().and_then(|e| e.to_str()) != Some("csv") || path == models_path {
            continue;
        }
        let rel = read_relation(&path)?;
        relations.insert(rel.name().to_string(), rel);
    }
    let items = relations.remove(&manifest.item_relation).ok_or_else(|| {
        Error::Load(format!("item relation {} has no file", manifest.item_relation))
    })?;
    let mut db = PreferenceDatabase::new(&manifest.p_relation, manifest.session_keys.clone(), items)?;
    for rel in relations.into_values() {
        db.add_relation(rel)?;
    }
    db.derive_labels(&manifest.label_attributes)?;

    let (columns, rows) = read_csv(&models_path)?;
    let keys = manifest.session_keys.len();
    let expected: Vec<String> = manifest
        .session_keys
        .iter()
        .cloned()
        .chain(["phi".to_string(), "sigma".to_string()])
        .collect();
    if columns != expected {
        return Err(load_err(&models_path, format!("header must be {}", expected.join(","))));
    }
    for row in rows {
        let phi: f64 = row[keys]
            .parse()
            .map_err(|_| load_err(&models_path, format!("bad phi `{}`", row[keys])))?;
        let sigma = parse_chain(&row[keys + 1])?;
        db.add_session(row[..keys].to_vec(), MallowsModel::new(sigma, phi)?)?;
    }
    Ok(db)
}

/// Writes a database in the layout `load_database` reads.
pub fn write_database(db: &PreferenceDatabase, dir: &Path, label_attributes: &[String]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let models = format!("{}.csv", db.p_relation());
    let manifest = Manifest {
        p_relation: db.p_relation().to_string(),
        session_keys: db.session_columns().to_vec(),
        item_relation: db.item_relation().name().to_string(),
        label_attributes: label_attributes.to_vec(),
        models: models.clone(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Load(e.to_string()))?;
    fs::write(dir.join(MANIFEST), text)?;
    for rel in db.relations() {
        write_relation(rel, dir)?;
    }
    let path = dir.join(models);
    let mut w = csv::Writer::from_path(&path).map_err(|e| load_err(&path, e))?;
    let mut header = db.session_columns().to_vec();
    header.extend(["phi".to_string(), "sigma".to_string()]);
    w.write_record(&header).map_err(|e| load_err(&path, e))?;
    for s in db.sessions() {
        let mut row = s.key.clone();
        row.push(s.model.phi().to_string());
        row.push(chain_text(s.model.sigma()));
        w.write_record(&row).map_err(|e| load_err(&path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// A labeled model on disk. Exactly one of `phi` (Mallows) and `pi`
/// (RIM insertion rows) is given; every item also labels itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub sigma: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
}

impl ModelFile {
    pub fn from_model(model: &LabeledModel) -> Self {
        let sigma = model.items().iter().map(|x| x.as_str().to_string()).collect();
        let (phi, pi) = match model.model() {
            RankingModel::Mallows(m) => (Some(m.phi()), None),
            RankingModel::Rim(r) => {
                let rows = (1..=r.len()).map(|i| r.pi().row(i).to_vec()).collect();
                (None, Some(rows))
            }
        };
        let mut labels = BTreeMap::new();
        for (x, ls) in model.lam().items() {
            let own: Vec<String> = ls
                .iter()
                .filter(|l| l.as_str() != x.as_str())
                .map(|l| l.as_str().to_string())
                .collect();
            if !own.is_empty() {
                labels.insert(x.as_str().to_string(), own);
            }
        }
        ModelFile { sigma, phi, pi, labels }
    }

    pub fn to_model(&self) -> Result<LabeledModel> {
        let sigma = Ranking::new(&self.sigma)?;
        let model: RankingModel = match (self.phi, &self.pi) {
            (Some(phi), None) => MallowsModel::new(sigma.clone(), phi)?.into(),
            (None, Some(rows)) => RimModel::new(sigma.clone(), InsertionMatrix::new(rows.clone())?)?.into(),
            _ => return Err(Error::Load("model file needs exactly one of phi and pi".into())),
        };
        let mut lam = LabelingFunction::identity(sigma.items());
        for (x, ls) in &self.labels {
            let item = ItemId::new(x);
            if !sigma.contains(&item) {
                return Err(Error::UnknownItem(x.clone()));
            }
            for l in ls {
                lam.add(item.clone(), Label::new(l));
            }
        }
        Ok(LabeledModel::new(model, lam))
    }
}

pub fn read_model(path: &Path) -> Result<LabeledModel> {
    let text = fs::read_to_string(path).map_err(|e| load_err(path, e))?;
    let file: ModelFile = toml::from_str(&text).map_err(|e| load_err(path, e))?;
    file.to_model()
}

pub fn write_model(model: &LabeledModel, path: &Path) -> Result<()> {
    let text = toml::to_string(&ModelFile::from_model(model)).map_err(|e| Error::Load(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_patterns(path: &Path) -> Result<PatternUnion> {
    fs::read_to_string(path).map_err(|e| load_err(path, e))?.parse()
}

/// A partial order given as `a>b>c` chains, one per line.
pub fn read_condition(path: &Path) -> Result<PartialOrder> {
    let text = fs::read_to_string(path).map_err(|e| load_err(path, e))?;
    let mut pairs = Vec::new();
    for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()) {
        if line.is_empty() {
            continue;
        }
        let chain = parse_chain(line)?;
        for w in chain.items().windows(2) {
            pairs.push((w[0].clone(), w[1].clone()));
        }
    }
    PartialOrder::new(pairs)
}
