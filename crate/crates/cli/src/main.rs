use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regmc::automaton::{enabled_moves, eval_term};
use regmc::ctl::{compute_ctl, model_check};
use regmc::dsl::{self, ParseError, Trace};
use regmc::reach::{post, post_literal, reach_with, BuildOptions, QuotientGraph};
use regmc::repr::Universe;
use regmc::{Configuration, ConstantSet, DataSymbol, RegisterAutomaton, Symbol, Valuation};

/// Reachability and CTL model checking for register automata.
#[derive(Parser)]
#[command(name = "regmc", version)]
struct Cli {
    /// Use the exhaustive matrix scans instead of the pruned successor search.
    #[arg(long, global = true)]
    oracle: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every representative matrix over N registers.
    Universe {
        #[arg(short = 'n', long = "registers")]
        registers: usize,
        /// Constants (repeat the flag or separate with commas).
        #[arg(short = 'c', long = "constants", value_delimiter = ',')]
        constants: Vec<u32>,
    },
    /// List the successors of a representative configuration.
    Post { file: PathBuf, config: String },
    /// Decide whether a representative configuration is reachable.
    Reach { file: PathBuf, config: String },
    /// Check a CTL formula on all initial configurations, or on one.
    Check {
        file: PathBuf,
        formula: String,
        /// Report membership of this configuration instead.
        #[arg(long)]
        config: Option<String>,
        /// Also print every satisfying configuration.
        #[arg(long)]
        list: bool,
    },
    /// Print a random concrete run.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of alphabet symbols to draw from, constants included.
        /// Defaults to |C| + |X| + max-arity + 1.
        #[arg(long)]
        pool_size: Option<usize>,
    },
}

/// Outcome of a command: text for stdout and the exit status.
struct Outcome {
    out: String,
    status: u8,
}

impl Outcome {
    fn ok(out: String) -> Self {
        Outcome { out, status: 0 }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(o) => {
            print!("{}", o.out);
            ExitCode::from(o.status)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<RegisterAutomaton, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    dsl::parse_automaton(&text).map_err(|e| located(&path.display().to_string(), &e))
}

fn located(origin: &str, e: &ParseError) -> String {
    format!("{origin}:{e}")
}

fn run(cli: Cli) -> Result<Outcome, String> {
    let literal = cli.oracle;
    match cli.command {
        Command::Universe { registers, constants } => {
            let constants = ConstantSet::new(constants.into_iter().map(Symbol))
                .map_err(|e| e.to_string())?;
            let universe = if literal {
                Universe::literal(registers, &constants).map_err(|e| e.to_string())?
            } else {
                Universe::new(registers, &constants)
            };
            let names: Vec<String> = (1..=registers).map(|i| format!("x{i}")).collect();
            let mut out = String::new();
            for m in universe.matrices() {
                out.push_str(&dsl::serialize_matrix(m, &names));
                out.push('\n');
            }
            out.push_str(&format!("count: {}\n", universe.len()));
            Ok(Outcome::ok(out))
        }
        Command::Post { file, config } => {
            let ra = load(&file)?;
            let c = dsl::parse_repconfig(&config, &ra).map_err(|e| located("config", &e))?;
            let succ = if literal { post_literal(&ra, &c) } else { post(&ra, &c) }
                .map_err(|e| e.to_string())?;
            let mut out = String::new();
            for s in &succ {
                out.push_str(&dsl::serialize_repconfig(s, &ra));
                out.push('\n');
            }
            Ok(Outcome::ok(out))
        }
        Command::Reach { file, config } => {
            let ra = load(&file)?;
            let c = dsl::parse_repconfig(&config, &ra).map_err(|e| located("config", &e))?;
            let opts = BuildOptions::from_env().map_err(|e| e.to_string())?.literal(literal);
            let yes = reach_with(&ra, &c, &opts).map_err(|e| e.to_string())?;
            Ok(Outcome {
                out: if yes { "reachable\n" } else { "unreachable\n" }.into(),
                status: if yes { 0 } else { 1 },
            })
        }
        Command::Check { file, formula, config, list } => {
            let ra = load(&file)?;
            let f = dsl::parse_formula(&formula, &ra).map_err(|e| located("formula", &e))?;
            let target = config
                .map(|c| dsl::parse_repconfig(&c, &ra).map_err(|e| located("config", &e)))
                .transpose()?;
            let opts = BuildOptions::from_env().map_err(|e| e.to_string())?.literal(literal);
            let graph = QuotientGraph::build(&ra, &opts).map_err(|e| e.to_string())?;
            let sat = compute_ctl(&graph, &f).map_err(|e| e.to_string())?;
            let mut out = String::new();
            if list {
                for c in sat.configs(&graph) {
                    out.push_str(&dsl::serialize_repconfig(&c, &ra));
                    out.push('\n');
                }
            }
            let yes = match target {
                Some(c) => {
                    let node = graph.node_of(&c).ok_or("configuration is not in the graph")?;
                    let member = sat.contains(node);
                    out.push_str(if member { "member\n" } else { "non-member\n" });
                    member
                }
                None => {
                    let holds = model_check(&graph, &f).map_err(|e| e.to_string())?;
                    out.push_str(if holds { "holds\n" } else { "fails\n" });
                    holds
                }
            };
            Ok(Outcome { out, status: if yes { 0 } else { 1 } })
        }
        Command::Simulate { file, steps, seed, pool_size } => {
            let ra = load(&file)?;
            let pool = match pool_size {
                None => ra.sufficient_pool(),
                Some(k) if k < ra.constants().len() => {
                    return Err(format!(
                        "pool size {k} is smaller than the {} constant(s)",
                        ra.constants().len()
                    ))
                }
                Some(k) => ra.constants().pool_with_fresh(k - ra.constants().len()),
            };
            if pool.is_empty() {
                return Err("pool size must be positive".into());
            }
            let trace = simulate(&ra, steps, seed, &pool).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(dsl::serialize_trace(&trace, &ra)))
        }
    }
}

/// A random run: at each step an enabled (transition, arguments) pair is
/// drawn uniformly, then every register the assignment leaves unbound gets
/// a uniform value from the pool.
fn simulate(
    ra: &RegisterAutomaton,
    steps: usize,
    seed: u64,
    pool: &[Symbol],
) -> regmc::Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ra.num_registers();
    let start = Valuation((0..n).map(|_| pool[rng.gen_range(0..pool.len())]).collect());
    let mut trace = Trace {
        configs: vec![Configuration::new(ra.initial(), start)],
        symbols: Vec::new(),
    };
    for _ in 0..steps {
        let here = trace.configs.last().expect("non-empty");
        let moves = enabled_moves(ra, here, pool)?;
        let Some((k, args)) = moves.choose(&mut rng) else {
            break;
        };
        let t = &ra.transitions()[*k];
        let mut next = Vec::with_capacity(n);
        for r in 0..n {
            next.push(match t.assignment.get(r) {
                Some(e) => eval_term(e, &here.valuation, args)?,
                None => pool[rng.gen_range(0..pool.len())],
            });
        }
        trace.symbols.push(DataSymbol { action: t.action, args: args.clone() });
        trace.configs.push(Configuration::new(t.target, Valuation(next)));
    }
    Ok(trace)
}
