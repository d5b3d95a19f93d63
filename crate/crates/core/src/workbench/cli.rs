use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::generate::{generate_benchmark, generate_polls, write_benchmark, write_polls, BenchmarkSpec, Family, PollsSpec};
use super::io::{load_database, read_condition, read_model, read_patterns};
use crate::error::Error;
use crate::exact::{general_solver, oracle_marginal_with_guard, DEFAULT_ORACLE_GUARD};
use crate::query::{
    evaluate, most_probable_session, parse_query, solve_union, Evaluation, SolverChoice, SolverConfig,
    TopKStrategy,
};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GUARD: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "prefdb", version, about = "Query evaluation over probabilistic preference databases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// auto, oracle, two-label, bipartite, general, rejection, mis-amp-lite, mis-amp-adaptive
    #[arg(long, default_value = "auto")]
    solver: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples (per proposal for MIS-AMP).
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Proposal count for MIS-AMP-lite.
    #[arg(long, default_value_t = 10)]
    proposals: usize,
    /// Convergence threshold for MIS-AMP-adaptive.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Error> {
        Ok(SolverConfig {
            solver: self.solver.parse()?,
            seed: self.seed,
            samples: self.samples,
            proposals: self.proposals,
            epsilon: self.epsilon,
            ..SolverConfig::default()
        })
    }
}

#[derive(Args, Debug, Clone)]
struct QueryArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    query: PathBuf,
}

#[derive(Args, Debug, Clone, Copy)]
struct OutputArgs {
    /// One JSON record per answer.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Probability that a Boolean query holds.
    Eval {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Expected number of sessions satisfying a query.
    Count {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The k sessions most likely to satisfy a query.
    Topk {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long)]
        k: usize,
        /// full, 1-edge or 2-edge
        #[arg(long, default_value = "2-edge")]
        strategy: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Marginal probability of a pattern union under a model.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        patterns: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Brute-force marginal by enumerating every ranking.
    Oracle {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_GUARD)]
        max_items: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Writes a synthetic benchmark or the Polls database.
    Gen {
        /// A, B, C, D or polls
        #[arg(long)]
        family: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Item counts, comma-separated.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        patterns: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        items_per_label: Option<Vec<usize>>,
        /// Instances per grid point.
        #[arg(long)]
        instances: Option<usize>,
        /// Polls: number of candidates.
        #[arg(long)]
        candidates: Option<usize>,
        /// Polls: number of voters.
        #[arg(long)]
        voters: Option<usize>,
    },
    /// Draws rankings from a Mallows model, optionally conditioned on a
    /// partial order by AMP.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'n', default_value_t = 10)]
        n: usize,
        #[arg(long)]
        condition: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Error paired with the exit code it maps to.
struct Failure {
    code: i32,
    error: Error,
}

fn usage(error: Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error,
    }
}

fn solving(error: Error) -> Failure {
    let code = if error.is_guard() { EXIT_GUARD } else { EXIT_SOLVER };
    Failure { code, error }
}

/// Probabilities print with 12 significant digits.
pub fn format_probability(p: f64) -> String {
    if p == 0.0 || !p.is_finite() {
        return format!("{p}");
    }
    let exp = p.abs().log10().floor() as i32;
    if !(-4..12).contains(&exp) {
        return format!("{p:.11e}");
    }
    format!("{p:.*}", (11 - exp).max(0) as usize)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.error);
            f.code
        }
    }
}

fn load_query(args: &QueryArgs) -> Result<(crate::query::PreferenceDatabase, crate::query::Query), Failure> {
    let db = load_database(&args.db).map_err(usage)?;
    let text = fs::read_to_string(&args.query).map_err(|e| usage(e.into()))?;
    let q = parse_query(&text).map_err(usage)?;
    crate::query::check_query(&q, &db).map_err(usage)?;
    Ok((db, q))
}

fn io(e: std::io::Error) -> Failure {
    usage(e.into())
}

fn print_evaluation(ev: &Evaluation, headline: (&str, f64), o: OutputArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if o.json {
        for a in &ev.answers {
            let rec = json!({"session": a.session, "probability": a.probability, "solver": a.solver, "exact": a.exact});
            writeln!(out, "{rec}").map_err(io)?;
        }
        let rec = json!({headline.0: headline.1, "sessions": ev.answers.len(), "solver_calls": ev.solver_calls});
        writeln!(out, "{rec}").map_err(io)?;
        return Ok(());
    }
    writeln!(out, "{} {}", headline.0, format_probability(headline.1)).map_err(io)?;
    for a in &ev.answers {
        writeln!(out, "{}\t{}\t{}", a.session, format_probability(a.probability), a.solver).map_err(io)?;
    }
    if o.verbose {
        writeln!(out, "solver calls {}", ev.solver_calls).map_err(io)?;
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Eval { query, solver, out: o } => {
            let (db, q) = load_query(&query)?;
            let config = solver.config().map_err(usage)?;
            let ev = evaluate(&q, &db, &config).map_err(solving)?;
            print_evaluation(&ev, ("probability", ev.probability), o, out)
        }
        Command::Count { query, solver, out: o } => {
            let (db, q) = load_query(&query)?;
            let config = solver.config().map_err(usage)?;
            let ev = evaluate(&q, &db, &config).map_err(solving)?;
            print_evaluation(&ev, ("expected_count", ev.expected_count), o, out)
        }
        Command::Topk {
            query,
            k,
            strategy,
            solver,
            out: o,
        } => {
            let (db, q) = load_query(&query)?;
            let config = solver.config().map_err(usage)?;
            let strategy: TopKStrategy = strategy.parse().map_err(usage)?;
            let top = most_probable_session(&q, &db, k, strategy, &config).map_err(|e| match e {
                Error::InvalidArgument(_) => usage(e),
                e => solving(e),
            })?;
            for (rank, a) in top.answers.iter().enumerate() {
                if o.json {
                    let rec = json!({"rank": rank + 1, "session": a.session, "probability": a.probability, "solver": a.solver});
                    writeln!(out, "{rec}").map_err(io)?;
                } else {
                    writeln!(out, "{}\t{}\t{}", rank + 1, a.session, format_probability(a.probability)).map_err(io)?;
                }
            }
            if o.verbose {
                writeln!(out, "exact calls {}, bound calls {}", top.exact_calls, top.bound_calls).map_err(io)?;
            }
            Ok(())
        }
        Command::Infer {
            model,
            patterns,
            solver,
            out: o,
        } => {
            let model = read_model(&model).map_err(usage)?;
            let union = read_patterns(&patterns).map_err(usage)?;
            let config = solver.config().map_err(usage)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let (p, used) = solve_union(&union, &model, &config, &mut rng).map_err(solving)?;
            if o.json {
                writeln!(out, "{}", json!({"probability": p, "solver": used.to_string()})).map_err(io)?;
            } else {
                writeln!(out, "probability {}", format_probability(p)).map_err(io)?;
                if o.verbose {
                    writeln!(out, "solver {used}").map_err(io)?;
                }
            }
            if o.verbose && used == SolverChoice::General {
                let res = general_solver(&union, &model, &config.exact).map_err(solving)?;
                for t in &res.terms {
                    let subset: Vec<String> = t.subset.iter().map(|k| format!("g{}", k + 1)).collect();
                    let sign = if t.sign > 0 { '+' } else { '-' };
                    writeln!(
                        out,
                        "{sign} Pr({}) = {} [{}]",
                        subset.join(" & "),
                        format_probability(t.probability),
                        t.backend
                    )
                    .map_err(io)?;
                }
            }
            Ok(())
        }
        Command::Oracle {
            model,
            patterns,
            max_items,
            out: o,
        } => {
            let model = read_model(&model).map_err(usage)?;
            let union = read_patterns(&patterns).map_err(usage)?;
            let p = oracle_marginal_with_guard(&union, &model, max_items).map_err(solving)?;
            if o.json {
                writeln!(out, "{}", json!({"probability": p, "solver": "oracle"})).map_err(io)?;
            } else {
                writeln!(out, "probability {}", format_probability(p)).map_err(io)?;
            }
            Ok(())
        }
        Command::Gen {
            family,
            out: dir,
            seed,
            m,
            phi,
            patterns,
            labels,
            items_per_label,
            instances,
            candidates,
            voters,
        } => {
            let family: Family = family.parse().map_err(usage)?;
            if family == Family::Polls {
                let mut spec = PollsSpec::default();
                if let Some(c) = candidates {
                    spec.candidates = c;
                }
                if let Some(v) = voters {
                    spec.voters = v;
                }
                if let Some(p) = phi {
                    spec.phis = vec![p];
                }
                let db = generate_polls(&spec, seed).map_err(usage)?;
                write_polls(&db, &dir).map_err(usage)?;
                writeln!(out, "wrote {} sessions to {}", db.sessions().len(), dir.display()).map_err(io)?;
                return Ok(());
            }
            let mut spec = BenchmarkSpec::default_for(family).map_err(usage)?;
            spec.items = m.unwrap_or(spec.items);
            spec.phi = phi.unwrap_or(spec.phi);
            spec.patterns = patterns.unwrap_or(spec.patterns);
            spec.labels = labels.unwrap_or(spec.labels);
            spec.items_per_label = items_per_label.unwrap_or(spec.items_per_label);
            spec.instances = instances.unwrap_or(spec.instances);
            let xs = generate_benchmark(&spec, seed).map_err(usage)?;
            write_benchmark(&xs, &dir).map_err(usage)?;
            writeln!(out, "wrote {} instances to {}", xs.len(), dir.display()).map_err(io)?;
            Ok(())
        }
        Command::Sample {
            model,
            n,
            condition,
            seed,
        } => {
            let model = read_model(&model).map_err(usage)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let condition = condition.map(|p| read_condition(&p)).transpose().map_err(usage)?;
            for _ in 0..n {
                let t = match &condition {
                    None => model.model().sample(&mut rng),
                    Some(u) => {
                        let mal = model.model().as_mallows().ok_or_else(|| {
                            usage(Error::InvalidArgument("conditioned sampling needs a Mallows model".into()))
                        })?;
                        mal.amp_sample(u, &mut rng).map_err(solving)?.0
                    }
                };
                writeln!(out, "{t}").map_err(io)?;
            }
            Ok(())
        }
    }
}
