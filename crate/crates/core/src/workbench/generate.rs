use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::io::{write_database, write_model};
use crate::error::{Error, Result};
use crate::models::{LabeledModel, MallowsModel};
use crate::patterns::{LabelPattern, PatternNode, PatternUnion};
use crate::query::{PreferenceDatabase, Relation};
use crate::rankings::{ItemId, Label, LabelingFunction, Ranking};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    Polls,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "a" => Family::A,
            "b" => Family::B,
            "c" => Family::C,
            "d" => Family::D,
            "polls" => Family::Polls,
            other => return Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::Polls => "polls",
        })
    }
}

/// Parameter grid of a synthetic pattern-union family. Every combination
/// gets `instances` random instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkSpec {
    pub family: Family,
    pub items: Vec<usize>,
    pub phi: f64,
    pub patterns: Vec<usize>,
    pub labels: Vec<usize>,
    pub items_per_label: Vec<usize>,
    pub instances: usize,
}

impl BenchmarkSpec {
    /// The published grid of each family. Benchmark-A fixes m = 15, the
    /// universe implied by its `(16 − i)^1.5` weights.
    pub fn default_for(family: Family) -> Result<Self> {
        let spec = |items: Vec<usize>, phi, patterns, labels, ipl, instances| BenchmarkSpec {
            family,
            items,
            phi,
            patterns,
            labels,
            items_per_label: ipl,
            instances,
        };
        Ok(match family {
            Family::A => spec(vec![15], 0.1, vec![3], vec![4], vec![3], 33),
            Family::B => spec(vec![20, 50, 100, 200], 0.1, vec![1, 2, 3], vec![3, 4, 5], vec![3, 5, 7], 10),
            Family::C => spec(vec![10, 12, 14, 16], 0.1, vec![1, 2, 3], vec![2, 3, 4], vec![1, 3, 5], 10),
            Family::D => spec(vec![20, 30, 40, 50, 60], 0.5, vec![2, 3, 4, 5], vec![2], vec![3, 5, 7], 10),
            Family::Polls => {
                return Err(Error::InvalidArgument("Polls is a database family; see PollsSpec".into()))
            }
        })
    }

    pub fn instance_count(&self) -> usize {
        self.items.len() * self.patterns.len() * self.labels.len() * self.items_per_label.len() * self.instances
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return bad(format!("phi = {} outside (0, 1]", self.phi));
        }
        let fixed = match self.family {
            Family::A => Some((3, 4)),
            Family::D => Some((0, 2)),
            _ => None,
        };
        if let Some((u, l)) = fixed {
            if (u > 0 && self.patterns != [u]) || self.labels != [l] {
                return bad(format!("family {} has a fixed pattern shape", self.family));
            }
        }
        let min_labels = if self.family == Family::C { 2 } else { 1 };
        if self.labels.iter().any(|&l| l < min_labels) || self.patterns.contains(&0) {
            return bad("each union needs at least one pattern with enough labels".into());
        }
        for &m in &self.items {
            if let Some(&k) = self.items_per_label.iter().find(|&&k| k == 0 || k > m) {
                return bad(format!("{k} items per label with m = {m}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceParams {
    pub m: usize,
    pub patterns: usize,
    pub labels: usize,
    pub items_per_label: usize,
    pub replicate: usize,
}

#[derive(Clone, Debug)]
pub struct BenchmarkInstance {
    pub name: String,
    pub params: InstanceParams,
    pub model: LabeledModel,
    pub union: PatternUnion,
}

fn sigma(m: usize) -> Ranking {
    Ranking::new((1..=m).map(|i| format!("s{i}"))).expect("distinct names")
}

/// `k` distinct positions of σ drawn with weights `w`.
fn weighted_without_replacement(w: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut w = w.to_vec();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let dist = WeightedIndex::new(&w).expect("positive weight remains");
        let i = rng.sample(dist);
        out.push(i);
        w[i] = 0.0;
    }
    out
}

fn uniform_items(m: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    rand::seq::index::sample(rng, m, k).into_vec()
}

/// Shared edge set of B: a random DAG over `l` labels along a random
/// topological order, at least one edge.
fn random_dag(l: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..l).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..l {
        for b in a + 1..l {
            if rng.gen_bool(0.5) {
                edges.push((order[a], order[b]));
            }
        }
    }
    if edges.is_empty() && l >= 2 {
        edges.push((order[0], order[1]));
    }
    edges
}

/// Shared edge set of C: a random bipartite digraph with every label on
/// some edge.
fn random_bipartite(l: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut ids: Vec<usize> = (0..l).collect();
    ids.shuffle(rng);
    let split = rng.gen_range(1..l);
    let (left, right) = ids.split_at(split);
    let mut edges = Vec::new();
    for &a in left {
        for &b in right {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    for &a in left {
        if !edges.iter().any(|e| e.0 == a) {
            edges.push((a, *right.choose(rng).unwrap()));
        }
    }
    for &b in right {
        if !edges.iter().any(|e| e.1 == b) {
            edges.push((*left.choose(rng).unwrap(), b));
        }
    }
    edges
}

fn pattern(labels: &[String], edges: &[(usize, usize)]) -> LabelPattern {
    let nodes = labels.iter().map(|l| PatternNode::single(l.as_str())).collect();
    LabelPattern::new(nodes, edges.to_vec()).expect("generated pattern is acyclic")
}

fn assign(lam: &mut LabelingFunction, sigma: &Ranking, label: &str, positions: &[usize]) {
    for &i in positions {
        lam.add(sigma.items()[i].clone(), Label::new(label));
    }
}

fn generate_one(spec: &BenchmarkSpec, p: &InstanceParams, rng: &mut ChaCha8Rng) -> Result<(LabeledModel, PatternUnion)> {
    let s = sigma(p.m);
    let mut lam = LabelingFunction::identity(s.items());
    let k = p.items_per_label;
    let patterns = match spec.family {
        Family::A => {
            let inc: Vec<f64> = (1..=p.m).map(|i| (i as f64).powf(1.5)).collect();
            let dec: Vec<f64> = (1..=p.m).map(|i| ((p.m + 1 - i) as f64).powf(1.5)).collect();
            assign(&mut lam, &s, "B", &weighted_without_replacement(&inc, k, rng));
            assign(&mut lam, &s, "D", &weighted_without_replacement(&dec, k, rng));
            (0..p.patterns)
                .map(|g| {
                    let a = format!("A{g}");
                    let c = format!("C{g}");
                    assign(&mut lam, &s, &a, &weighted_without_replacement(&inc, k, rng));
                    assign(&mut lam, &s, &c, &weighted_without_replacement(&dec, k, rng));
                    pattern(&[a, "B".into(), c, "D".into()], &[(0, 2), (0, 3), (1, 3)])
                })
                .collect()
        }
        Family::B | Family::C => {
            let edges = if spec.family == Family::B {
                random_dag(p.labels, rng)
            } else {
                random_bipartite(p.labels, rng)
            };
            (0..p.patterns)
                .map(|g| {
                    let names: Vec<String> = (0..p.labels).map(|j| format!("L{g}_{j}")).collect();
                    for name in &names {
                        assign(&mut lam, &s, name, &uniform_items(p.m, k, rng));
                    }
                    pattern(&names, &edges)
                })
                .collect()
        }
        Family::D => (0..p.patterns)
            .map(|g| {
                let names = [format!("L{g}"), format!("R{g}")];
                for name in &names {
                    assign(&mut lam, &s, name, &uniform_items(p.m, k, rng));
                }
                pattern(&names, &[(0, 1)])
            })
            .collect(),
        Family::Polls => unreachable!(),
    };
    let model = LabeledModel::new(MallowsModel::new(s, spec.phi)?, lam);
    Ok((model, PatternUnion::new(patterns)?))
}

/// All instances of the grid, deterministic in `seed`. Instance `n` draws
/// from its own ChaCha stream, so each instance is independent of the
/// others' parameters.
pub fn generate_benchmark(spec: &BenchmarkSpec, seed: u64) -> Result<Vec<BenchmarkInstance>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.instance_count());
    for &m in &spec.items {
        for &u in &spec.patterns {
            for &l in &spec.labels {
                for &k in &spec.items_per_label {
                    for replicate in 0..spec.instances {
                        let params = InstanceParams {
                            m,
                            patterns: u,
                            labels: l,
                            items_per_label: k,
                            replicate,
                        };
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(out.len() as u64);
                        let (model, union) = generate_one(spec, &params, &mut rng)?;
                        out.push(BenchmarkInstance {
                            name: format!("{}-{:04}", spec.family, out.len()),
                            params,
                            model,
                            union,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Writes `<name>/model.toml` and `<name>/patterns.txt` per instance plus
/// an `instances.csv` index.
pub fn write_benchmark(instances: &[BenchmarkInstance], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut index = String::from("name,m,patterns,labels,items_per_label,replicate\n");
    for inst in instances {
        let sub = dir.join(&inst.name);
        fs::create_dir_all(&sub)?;
        write_model(&inst.model, &sub.join("model.toml"))?;
        fs::write(sub.join("patterns.txt"), format!("{}\n", inst.union))?;
        let p = &inst.params;
        index.push_str(&format!(
            "{},{},{},{},{},{}\n",
            inst.name, p.m, p.patterns, p.labels, p.items_per_label, p.replicate
        ));
    }
    fs::write(dir.join("instances.csv"), index)?;
    Ok(())
}

/// The synthetic election database.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PollsSpec {
    pub candidates: usize,
    pub voters: usize,
    pub rankings_per_group: usize,
    pub phis: Vec<f64>,
    pub dates: Vec<String>,
}

impl Default for PollsSpec {
    fn default() -> Self {
        PollsSpec {
            candidates: 16,
            voters: 1000,
            rankings_per_group: 3,
            phis: vec![0.2, 0.5, 0.8],
            dates: vec!["5/5".into(), "6/5".into()],
        }
    }
}

pub const POLLS_PARTIES: [&str; 2] = ["D", "R"];
pub const POLLS_SEXES: [&str; 2] = ["F", "M"];
pub const POLLS_AGES: [&str; 6] = ["20", "30", "40", "50", "60", "70"];
pub const POLLS_EDUS: [&str; 6] = ["HS", "BA", "BS", "MS", "JD", "PhD"];
pub const POLLS_REGIONS: [&str; 6] = ["NE", "MW", "S", "W", "SW", "NW"];
/// Attributes of Candidates that become item labels.
pub const POLLS_LABEL_ATTRIBUTES: [&str; 5] = ["party", "sex", "age", "edu", "reg"];

/// Candidates `C`, Voters `V` and Polls `P`. Voters fall into
/// sex × age × edu = 72 demographic groups; each group owns
/// `rankings_per_group × |phis|` Mallows models and each voter takes one
/// of its group's models and a poll date at random.
pub fn generate_polls(spec: &PollsSpec, seed: u64) -> Result<PreferenceDatabase> {
    if spec.candidates == 0 || spec.rankings_per_group == 0 || spec.phis.is_empty() || spec.dates.is_empty() {
        return Err(Error::InvalidArgument("empty Polls parameter".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, xs: &[&str]| xs[rng.gen_range(0..xs.len())].to_string();
    let names: Vec<String> = (1..=spec.candidates).map(|i| format!("c{i}")).collect();
    let candidates: Vec<Vec<String>> = names
        .iter()
        .map(|n| {
            vec![
                n.clone(),
                pick(&mut rng, &POLLS_PARTIES),
                pick(&mut rng, &POLLS_SEXES),
                pick(&mut rng, &POLLS_AGES),
                pick(&mut rng, &POLLS_EDUS),
                pick(&mut rng, &POLLS_REGIONS),
            ]
        })
        .collect();
    let cols = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let c = Relation::new("C", cols(&["candidate", "party", "sex", "age", "edu", "reg"]), candidates)?;
    let mut groups: Vec<Vec<MallowsModel>> = Vec::new();
    for _ in 0..POLLS_SEXES.len() * POLLS_AGES.len() * POLLS_EDUS.len() {
        let mut models = Vec::new();
        for _ in 0..spec.rankings_per_group {
            let mut order = names.clone();
            order.shuffle(&mut rng);
            for &phi in &spec.phis {
                models.push(MallowsModel::new(Ranking::new(&order)?, phi)?);
            }
        }
        groups.push(models);
    }
    let mut voters = Vec::new();
    let mut sessions = Vec::new();
    for v in 1..=spec.voters {
        let (s, a, e) = (
            rng.gen_range(0..POLLS_SEXES.len()),
            rng.gen_range(0..POLLS_AGES.len()),
            rng.gen_range(0..POLLS_EDUS.len()),
        );
        let id = format!("v{v}");
        voters.push(vec![id.clone(), POLLS_SEXES[s].into(), POLLS_AGES[a].into(), POLLS_EDUS[e].into()]);
        let group = &groups[(s * POLLS_AGES.len() + a) * POLLS_EDUS.len() + e];
        let model = group.choose(&mut rng).unwrap().clone();
        let date = spec.dates.choose(&mut rng).unwrap().clone();
        sessions.push((vec![id, date], model));
    }
    let mut db = PreferenceDatabase::new("P", cols(&["voter", "date"]), c)?;
    db.add_relation(Relation::new("V", cols(&["voter", "sex", "age", "edu"]), voters)?)?;
    db.derive_labels(&cols(&POLLS_LABEL_ATTRIBUTES))?;
    for (key, model) in sessions {
        db.add_session(key, model)?;
    }
    Ok(db)
}

pub fn write_polls(db: &PreferenceDatabase, dir: &Path) -> Result<()> {
    let attrs: Vec<String> = POLLS_LABEL_ATTRIBUTES.iter().map(|s| s.to_string()).collect();
    write_database(db, dir, &attrs)
}

/// Items carrying `label` in `model`.
pub fn label_items(model: &LabeledModel, label: &str) -> Vec<ItemId> {
    let l = Label::new(label);
    model
        .items()
        .iter()
        .filter(|x| model.lam().labels_of(x).contains(&l))
        .cloned()
        .collect()
}
