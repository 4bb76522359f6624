use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ncg_core::constructions::{self, Fixture, NonlocalKind};
use ncg_core::{
    check, dynamics, format_fraction, max_tree_is_ne, parse_fraction, reduce, sum_tree_certify,
    approx_ratio, Concept, ExpectationFile, InstanceFile, Objective, Policy, Rational, Schedule,
    Search, SumTreeVerdict,
};

/// Exit status when the checked property holds.
const HOLDS: u8 = 0;
/// Exit status when it is violated.
const VIOLATED: u8 = 1;
/// Exit status on any input or runtime error.
const FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "ncg", version, about = "Network creation game equilibria, ratios and reductions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an equilibrium concept; exit 0 if it holds, 1 if violated, 2 on error.
    Check {
        instance: PathBuf,
        #[arg(long, value_parser = parse_concept)]
        concept: Concept,
        /// `tree` uses the tree characterizations (NE only).
        #[arg(long, value_enum, default_value_t = Oracle::Brute)]
        oracle: Oracle,
        /// Search best responses with at most this many edges.
        #[arg(long)]
        budget_cap: Option<usize>,
    },
    /// Write a construction as an instance file plus an expectations sidecar.
    Generate {
        #[arg(value_enum)]
        family: Family,
        #[arg(long, value_parser = parse_alpha)]
        alpha: Option<Rational>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Variant of max-nonlocal: star, clique or spider.
        #[arg(long, default_value = "star")]
        kind: NonlocalKind,
        /// Ownership pattern of c5 as five characters from `1`/`0`.
        #[arg(long, default_value = "11111")]
        pattern: String,
        /// For cheap-star: the leaves own their edges.
        #[arg(long)]
        leaf_owned: bool,
        /// Instance path; the sidecar goes to `<stem>.expect.json` beside it.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a Graphviz rendering.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Smallest beta such that the network is a beta-approximate NE.
    Ratio {
        instance: PathBuf,
        #[arg(long)]
        budget_cap: Option<usize>,
    },
    /// Reduce one agent's best-response problem to facility location.
    Reduce {
        instance: PathBuf,
        #[arg(long)]
        agent: usize,
    },
    /// Run greedy dynamics; exit 0 if converged, 1 if the round budget ran out.
    Dynamics {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::RoundRobin)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_rounds: usize,
        /// Write one DOT file per step into this directory.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
    },
    /// Check a concept for every alpha in a list; CSV on standard output.
    SweepAlpha {
        instance: PathBuf,
        /// Comma-separated fractions, e.g. `1/2,1,4`.
        #[arg(long, value_delimiter = ',', value_parser = parse_alpha, required = true)]
        alphas: Vec<Rational>,
        #[arg(long, value_parser = parse_concept)]
        concept: Concept,
        #[arg(long)]
        budget_cap: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Brute,
    Tree,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    RoundRobin,
    Random,
    MaxGain,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    C5,
    C5DoubleOwner,
    CycleWithLeaves,
    C5WithPendant,
    SumLowerBound,
    MaxNonlocal,
    BadlyConnectedTree,
    CheapNetwork,
    MaxLowerBound,
    CheapStar,
}

fn parse_concept(s: &str) -> Result<Concept, String> {
    s.parse().map_err(|e: ncg_core::Error| e.to_string())
}

fn parse_alpha(s: &str) -> Result<Rational, String> {
    parse_fraction(s).map_err(|e| e.to_string())
}

fn load(path: &Path) -> Result<InstanceFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    InstanceFile::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn search(budget_cap: Option<usize>) -> Search {
    let s = Search::from_env();
    match budget_cap {
        Some(cap) => s.with_budget_cap(cap),
        None => s,
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn status(holds: bool) -> u8 {
    if holds {
        HOLDS
    } else {
        VIOLATED
    }
}

fn cmd_check(path: &Path, concept: Concept, oracle: Oracle, budget_cap: Option<usize>) -> Result<u8> {
    let file = load(path)?;
    let (g, cfg) = (file.graph()?, file.config()?);
    if oracle == Oracle::Brute {
        let report = check(&g, &cfg, concept, &search(budget_cap))?;
        print_json(&json!({ "oracle": "brute", "report": report }))?;
        return Ok(status(report.holds));
    }
    if concept != Concept::Ne {
        bail!("--oracle tree is only available for --concept ne");
    }
    let (holds, verdict) = match cfg.objective {
        Objective::Max => {
            let v = max_tree_is_ne(&g, &cfg)?;
            (v.is_ne(), serde_json::to_value(v)?)
        }
        Objective::Sum => {
            let v = sum_tree_certify(&g, &cfg)?;
            (matches!(v, SumTreeVerdict::GeAndNe), serde_json::to_value(v)?)
        }
    };
    print_json(&json!({ "oracle": "tree", "concept": concept, "holds": holds, "verdict": verdict }))?;
    Ok(status(holds))
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.with_context(|| format!("{family} requires --{flag}"))
}

fn parse_pattern(s: &str) -> Result<[bool; 5]> {
    let bits: Vec<bool> = s
        .chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            _ => bail!("pattern characters must be 0 or 1"),
        })
        .collect::<Result<_>>()?;
    bits.try_into()
        .map_err(|_| anyhow::anyhow!("pattern must have exactly 5 characters"))
}

#[allow(clippy::too_many_arguments)]
fn build_fixture(
    family: Family,
    alpha: Option<Rational>,
    k: Option<usize>,
    n: Option<usize>,
    kind: NonlocalKind,
    pattern: &str,
    leaf_owned: bool,
) -> Result<Fixture> {
    let a = |default: (i128, i128)| alpha.unwrap_or_else(|| ncg_core::frac(default.0, default.1));
    let f = match family {
        Family::C5 => constructions::c5(parse_pattern(pattern)?, a((2, 1)))?,
        Family::C5DoubleOwner => constructions::c5_double_owner(a((3, 1)))?,
        Family::CycleWithLeaves => constructions::cycle_with_leaves(a((7, 1)))?,
        Family::C5WithPendant => constructions::c5_with_pendant(a((7, 2)))?,
        Family::SumLowerBound => constructions::sum_lower_bound(k.unwrap_or(3))?,
        Family::MaxNonlocal => constructions::max_nonlocal(kind, k.unwrap_or(2))?,
        Family::BadlyConnectedTree => constructions::badly_connected_tree(k.unwrap_or(5))?,
        Family::CheapNetwork => constructions::cheap_network(a((1, 1)))?,
        Family::MaxLowerBound => constructions::max_lower_bound(k.unwrap_or(3), a((2, 1)))?,
        Family::CheapStar => constructions::cheap_star(
            need(n, "n", "cheap-star")?,
            a((1, 100)),
            !leaf_owned,
        )?,
    };
    Ok(f)
}

fn sidecar_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    output.with_file_name(format!("{stem}.expect.json"))
}

fn cmd_generate(fixture: &Fixture, output: Option<&Path>, dot: Option<&Path>) -> Result<u8> {
    let instance = InstanceFile::from_fixture(fixture).to_json();
    let sidecar = ExpectationFile::from_fixture(fixture).to_json();
    match output {
        Some(path) => {
            fs::write(path, instance).with_context(|| format!("writing {}", path.display()))?;
            let side = sidecar_path(path);
            fs::write(&side, sidecar).with_context(|| format!("writing {}", side.display()))?;
        }
        None => std::io::stdout().lock().write_all(instance.as_bytes())?,
    }
    if let Some(path) = dot {
        fs::write(path, fixture.graph.to_dot(&fixture.name))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(HOLDS)
}

fn cmd_ratio(path: &Path, budget_cap: Option<usize>) -> Result<u8> {
    let file = load(path)?;
    let report = approx_ratio(&file.graph()?, &file.config()?, &search(budget_cap))?;
    print_json(&report)?;
    Ok(HOLDS)
}

fn cmd_reduce(path: &Path, agent: usize) -> Result<u8> {
    let file = load(path)?;
    let (inst, _) = reduce(&file.graph()?, &file.config()?, agent)?;
    print_json(&inst)?;
    Ok(HOLDS)
}

fn cmd_dynamics(path: &Path, policy: Policy, max_rounds: usize, dot_dir: Option<&Path>) -> Result<u8> {
    let file = load(path)?;
    let (g, cfg) = (file.graph()?, file.config()?);
    let schedule = Schedule::new(policy, max_rounds)?;
    let mut frames = Vec::new();
    let trajectory = dynamics::run_with(&g, &cfg, &schedule, |_, g| {
        if dot_dir.is_some() {
            frames.push(g.clone());
        }
    });
    if let Some(dir) = dot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, frame) in std::iter::once(&g).chain(&frames).enumerate() {
            let name = format!("step_{i:04}");
            fs::write(dir.join(format!("{name}.dot")), frame.to_dot(&name))?;
        }
    }
    print_json(&trajectory)?;
    Ok(status(trajectory.converged))
}

fn cmd_sweep(path: &Path, alphas: &[Rational], concept: Concept, budget_cap: Option<usize>) -> Result<u8> {
    let file = load(path)?;
    let g = file.graph()?;
    let base = file.config()?;
    let search = search(budget_cap);
    let mut out = csv::Writer::from_writer(std::io::stdout());
    out.write_record(["alpha", "holds"])?;
    for &alpha in alphas {
        let report = check(&g, &base.with_alpha(alpha)?, concept, &search)?;
        out.write_record([format_fraction(&alpha).as_str(), if report.holds { "yes" } else { "no" }])?;
    }
    out.flush()?;
    Ok(HOLDS)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check { instance, concept, oracle, budget_cap } => {
            cmd_check(&instance, concept, oracle, budget_cap)
        }
        Command::Generate { family, alpha, k, n, kind, pattern, leaf_owned, output, dot } => {
            let fixture = build_fixture(family, alpha, k, n, kind, &pattern, leaf_owned)?;
            cmd_generate(&fixture, output.as_deref(), dot.as_deref())
        }
        Command::Ratio { instance, budget_cap } => cmd_ratio(&instance, budget_cap),
        Command::Reduce { instance, agent } => cmd_reduce(&instance, agent),
        Command::Dynamics { instance, policy, seed, max_rounds, dot_dir } => {
            let policy = match policy {
                PolicyArg::RoundRobin => Policy::RoundRobin,
                PolicyArg::Random => Policy::Random { seed },
                PolicyArg::MaxGain => Policy::MaxGain,
            };
            cmd_dynamics(&instance, policy, max_rounds, dot_dir.as_deref())
        }
        Command::SweepAlpha { instance, alphas, concept, budget_cap } => {
            cmd_sweep(&instance, &alphas, concept, budget_cap)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(FAILURE)
        }
    }
}
