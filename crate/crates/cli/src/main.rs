//! `transfer`: command line front end to the exact computations.

mod cache;
mod commands;
mod config;
mod suites;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use cache::Cache;
use commands::{CongruenceArgs, Outcome};
use config::{parse_gamma, parse_primes, RunConfig};

/// Exit 1 for failed checks and computation errors, 2 for bad input.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn failure(msg: impl Into<String>) -> CliError {
        CliError::Failure(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl From<transfer_core::Error> for CliError {
    fn from(e: transfer_core::Error) -> CliError {
        use transfer_core::Error as E;
        match e {
            E::Usage(_) | E::Precision(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "transfer", version, about = "Exact formal group law, transfer cocycle and f-invariant computations")]
struct Cli {
    /// Truncation N: Bernoulli numbers B_1..B_N are available.
    #[arg(long, global = true, default_value_t = 20)]
    prec: u32,
    /// q-expansions are kept below q^Q.
    #[arg(long, global = true, default_value_t = 40)]
    qprec: i64,
    /// Comma separated primes >= 5.
    #[arg(long, global = true, default_value = "5,7,11,13")]
    primes: String,
    /// Topological generator override, p=g (repeatable).
    #[arg(long = "gamma-for", global = true, value_parser = parse_gamma)]
    gamma_for: Vec<(u64, u64)>,
    #[arg(long, global = true, env = cache::ENV_ROOT)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    /// Write the JSON artifact here instead of stdout.
    #[arg(long = "json", global = true, value_name = "OUT")]
    json_out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    Universal,
    Multiplicative,
    Additive,
    Elliptic,
    Tate,
}

impl Law {
    fn name(self) -> &'static str {
        match self {
            Law::Universal => "universal",
            Law::Multiplicative => "multiplicative",
            Law::Additive => "additive",
            Law::Elliptic => "elliptic",
            Law::Tate => "tate",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheAction {
    Stats,
    Clear,
    Path,
}

#[derive(Subcommand)]
enum Command {
    /// Logarithm and exponential of a law.
    Fgl {
        #[arg(long, value_enum)]
        law: Law,
        /// Also check the group law axioms.
        #[arg(long)]
        check: bool,
    },
    /// Bernoulli numbers B_n and B_n/n of a law.
    Bernoulli {
        #[arg(long, value_enum)]
        law: Law,
        #[arg(long)]
        max: Option<u32>,
        /// Check d_n B_n/n against the law's integral form.
        #[arg(long)]
        miller: bool,
    },
    /// Image of a transfer cocycle, or its values on primitives.
    Transfer {
        #[arg(long, value_parser = ["e_tau", "E_tau", "K"])]
        cocycle: String,
        #[arg(long, value_enum, requires = "right")]
        left: Option<Law>,
        #[arg(long, value_enum, requires = "left")]
        right: Option<Law>,
        /// Tabulate m! n! [S^m T^n] after substituting exp^L, m, n <= M.
        #[arg(long, value_name = "M")]
        primitives: Option<i32>,
    },
    /// Integrality and reduction of a divided congruence.
    Congruence {
        #[arg(long, conflicts_with = "component")]
        input: Option<PathBuf>,
        /// WEIGHT:FORM, e.g. 4:1/240*c4 (repeatable).
        #[arg(long)]
        component: Vec<String>,
        /// Defaults to every prime in --primes.
        #[arg(long)]
        prime: Option<u64>,
        /// Also reduce in the quotient of this weight.
        #[arg(long)]
        reduce_weight: Option<i32>,
        #[arg(long, requires = "reduce_weight")]
        pole_bound: Option<i64>,
    },
    /// f-invariant report on p_s (x) p_t.
    Finv {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, requires = "prime")]
        gamma: Option<u64>,
    },
    /// f'' on p_s (x) p_t by closed form and by substitution.
    Fprime {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, requires = "prime")]
        gamma: Option<u64>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        /// Include per-check runtimes (makes the output non-deterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Inspect or clear the on-disk cache.
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
    },
}

fn run(cfg: &mut RunConfig, primes: &str, command: Command) -> Result<Outcome, CliError> {
    cfg.primes = parse_primes(primes).map_err(CliError::usage)?;
    cfg.validate()?;
    let cfg = &mut *cfg;
    let cache = Cache::new(cfg.cache_dir.clone());
    match command {
        Command::Fgl { law, check } => commands::fgl(cfg, &cache, law.name(), check),
        Command::Bernoulli { law, max, miller } => {
            commands::bernoulli(cfg, &cache, law.name(), max.unwrap_or(cfg.prec), miller)
        }
        Command::Transfer { cocycle, left, right, primitives } => {
            let pair = left.zip(right).map(|(l, r)| (l.name(), r.name()));
            commands::transfer(cfg, &cache, &cocycle, pair, primitives)
        }
        Command::Congruence { input, component, prime, reduce_weight, pole_bound } => {
            let input = match input {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))?;
                    Some(serde_json::from_str::<Value>(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?)
                }
                None => None,
            };
            if let Some(p) = prime {
                RunConfig { primes: vec![p], ..cfg.clone() }.validate()?;
            }
            let args = CongruenceArgs { input, components: component, primes: prime.into_iter().collect(), reduce_weight, pole_bound };
            commands::congruence(cfg, args)
        }
        Command::Finv { s, t, prime, gamma } => commands::finv(cfg, s, t, prime, gamma),
        Command::Fprime { s, t, prime, gamma } => commands::fprime(cfg, s, t, prime, gamma),
        Command::Verify { suite, timings } => {
            cfg.timings = timings;
            let report = suites::verify(cfg, &suite)?;
            Ok(Outcome { ok: report.pass(), json: report.to_json(cfg) })
        }
        Command::Cache { action } => {
            let action = match action {
                CacheAction::Stats => "stats",
                CacheAction::Clear => "clear",
                CacheAction::Path => "path",
            };
            commands::cache_command(&cache, action)
        }
    }
}

fn emit(json: &Value, out: Option<&PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(json).map_err(|e| CliError::failure(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::failure(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = RunConfig {
        prec: cli.prec,
        qprec: cli.qprec,
        primes: Vec::new(),
        gammas: cli.gamma_for.into_iter().collect(),
        cache_dir: if cli.no_cache { None } else { cli.cache_dir },
        output: cli.json_out,
        timings: false,
    };
    let result = run(&mut cfg, &cli.primes, cli.command).and_then(|o| emit(&o.json, cfg.output.as_ref()).map(|_| o.ok));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Failure(_) => 1,
            })
        }
    }
}
