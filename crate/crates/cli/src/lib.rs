//! Command-line front end: instance generation, single-agent solving,
//! dynamics runs and price-of-anarchy reports.
//!
//! Exit codes: 0 on success, 1 on usage, parse or I/O errors, 2 when the
//! dynamics do not converge or the final state fails verification.

pub mod format;
pub mod instance_file;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ncgg_core::discrete::{exact_dp, mckp_fptas, mckp_reduce, DiscreteCgpInstance};
use ncgg_core::dynamics::{is_eps_ne, run_dynamics, DynamicsConfig, DynamicsOutcome, InitialState, Schedule};
use ncgg_core::lab::{poa_star_instance, random_bipartite, random_tree, star_poa, UtilitySampler};
use ncgg_core::waterfill::{water_fill, CgpInstance};
use ncgg_core::{GameInstance, UtilityFunction};
use serde::Serialize;

use format::sig;
use instance_file::{read_instance, serialize_instance};

/// Significant digits in trace files.
pub const TRACE_DIGITS: usize = 12;
/// Significant digits in price-of-anarchy reports.
pub const REPORT_DIGITS: usize = 15;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ncgg", version, about = "Solvers and experiments for the networked common goods game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve the single-agent problem, continuous or discrete
    SolveCgp(SolveArgs),
    /// Run best-response dynamics on an instance file
    Dynamics(DynamicsArgs),
    /// Price-of-anarchy report for the star family
    Poa(PoaArgs),
}

#[derive(Debug, Args)]
pub struct GenCommon {
    /// Random seed
    #[arg(long, env = "NCGG_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Common good p_c (ground level 1) plus one private good per agent
    Star {
        #[arg(long)]
        n: usize,
        /// kind:param, e.g. power:0.5 or log:1
        #[arg(long, default_value = "power:0.5")]
        utility: String,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Connected random bipartite graph
    RandomBipartite {
        #[arg(long)]
        goods: usize,
        #[arg(long)]
        agents: usize,
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
        /// Ground levels are uniform in [0, alpha-max)
        #[arg(long, default_value_t = 1.0)]
        alpha_max: f64,
        /// kind:param, or `mixed` to draw each agent's utility at random
        #[arg(long, default_value = "mixed")]
        utility: String,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Random bipartite tree
    RandomTree {
        /// Total number of goods and agents
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha_max: f64,
        #[arg(long, default_value = "mixed")]
        utility: String,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Ground levels, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub alphas: Vec<f64>,
    /// Continuous budget
    #[arg(long, default_value_t = 1.0, conflicts_with = "discrete")]
    pub budget: f64,
    /// Number of unit atoms; switches to the discrete problem
    #[arg(long)]
    pub discrete: Option<usize>,
    /// Utility for the discrete problem, kind:param
    #[arg(long, default_value = "power:0.5")]
    pub utility: String,
    /// FPTAS accuracy for the discrete problem
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    RoundRobin,
    UniformRandom,
    StaleOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    AllOnFirstNeighbor,
    UniformSplit,
    Random,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::StaleOnly)]
    pub schedule: ScheduleArg,
    #[arg(long, env = "NCGG_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    pub init: InitArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_rounds: usize,
    /// CSV with one row per round
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// JSON document with the final allocation and levels
    #[arg(long)]
    pub alloc_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoaArgs {
    /// Star sizes, comma separated
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value = "power:0.9")]
    pub utility: String,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// CSV output path; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Gen { kind } => cmd_gen(kind, stdout).map(|()| EXIT_OK),
        Command::SolveCgp(args) => cmd_solve_cgp(&args, stdout).map(|()| EXIT_OK),
        Command::Dynamics(args) => cmd_dynamics(&args, stdout),
        Command::Poa(args) => cmd_poa(&args, stdout).map(|()| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn parse_utility(s: &str) -> Result<UtilityFunction> {
    s.parse().with_context(|| format!("bad --utility {s:?}"))
}

fn parse_sampler(s: &str) -> Result<UtilitySampler> {
    if s == "mixed" {
        Ok(UtilitySampler::Mixed)
    } else {
        Ok(UtilitySampler::Fixed(parse_utility(s)?))
    }
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => stdout.write_all(text.as_bytes()).context("cannot write to standard output"),
    }
}

pub fn cmd_gen(kind: GenKind, stdout: &mut dyn Write) -> Result<()> {
    let (inst, common) = match kind {
        GenKind::Star { n, utility, common } => (poa_star_instance(n, parse_utility(&utility)?)?, common),
        GenKind::RandomBipartite { goods, agents, edge_prob, alpha_max, utility, common } => {
            let sampler = parse_sampler(&utility)?;
            (random_bipartite(goods, agents, edge_prob, alpha_max, &sampler, common.seed)?, common)
        }
        GenKind::RandomTree { size, alpha_max, utility, common } => {
            let sampler = parse_sampler(&utility)?;
            (random_tree(size, alpha_max, &sampler, common.seed)?, common)
        }
    };
    emit(common.out.as_deref(), &serialize_instance(&inst), stdout)
}

fn join(xs: impl IntoIterator<Item = String>) -> String {
    xs.into_iter().collect::<Vec<_>>().join(",")
}

pub fn cmd_solve_cgp(args: &SolveArgs, stdout: &mut dyn Write) -> Result<()> {
    match args.discrete {
        None => {
            let inst = CgpInstance::new(args.alphas.clone(), args.budget)?;
            let sol = water_fill(&inst);
            writeln!(stdout, "level {}", sig(sol.level, TRACE_DIGITS))?;
            writeln!(stdout, "x {}", join(sol.x.iter().map(|&x| sig(x, TRACE_DIGITS))))?;
        }
        Some(units) => {
            let u = parse_utility(&args.utility)?;
            let inst = DiscreteCgpInstance::new(args.alphas.clone(), units, u)?;
            let m = mckp_reduce(&inst);
            let s = mckp_fptas(&m, args.eps)?;
            writeln!(stdout, "value {:.6}", s.value)?;
            writeln!(stdout, "selection {}", join(s.selection.iter().map(|c| c.unwrap_or(0).to_string())))?;
            match exact_dp(&inst) {
                Ok(opt) => writeln!(stdout, "exact {:.6}", opt.value)?,
                Err(ncgg_core::Error::Resource(_)) => writeln!(stdout, "exact skipped")?,
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

/// Trace CSV: `round,agent,moves,phi,psi`, agents by id.
pub fn trace_csv(inst: &GameInstance, out: &DynamicsOutcome) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["round", "agent", "moves", "phi", "psi"])?;
    for r in &out.trace.rounds {
        w.write_record([
            r.round.to_string(),
            inst.agents()[r.agent].id.clone(),
            r.moves.to_string(),
            sig(r.phi, TRACE_DIGITS),
            sig(r.psi, TRACE_DIGITS),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct AllocEntry<'a> {
    good: &'a str,
    agent: &'a str,
    amount: f64,
}

#[derive(Serialize)]
struct LevelEntry<'a> {
    good: &'a str,
    level: f64,
}

#[derive(Serialize)]
struct FinalState<'a> {
    epsilon: f64,
    k: u64,
    converged: bool,
    rounds: usize,
    total_moves: u64,
    worst_gap: Option<f64>,
    allocation: Vec<AllocEntry<'a>>,
    levels: Vec<LevelEntry<'a>>,
}

pub fn cmd_dynamics(args: &DynamicsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let inst = read_instance(&args.instance)?;
    let schedule = match args.schedule {
        ScheduleArg::RoundRobin => Schedule::RoundRobin,
        ScheduleArg::UniformRandom => Schedule::UniformRandom { seed: args.seed },
        ScheduleArg::StaleOnly => Schedule::StaleOnly { seed: args.seed },
    };
    let init = match args.init {
        InitArg::AllOnFirstNeighbor => InitialState::AllOnFirstNeighbor,
        InitArg::UniformSplit => InitialState::UniformSplit,
        InitArg::Random => InitialState::Random { seed: args.seed },
    };
    let config = DynamicsConfig::new(args.eps)
        .with_schedule(schedule)
        .with_initial_state(init)
        .with_max_rounds(args.max_rounds);
    let out = run_dynamics(&inst, &config)?;
    let levels = inst.water_levels(&out.alloc)?;
    let check = is_eps_ne(&inst, &out.alloc, args.eps)?;

    if let Some(p) = &args.trace_out {
        emit(Some(p), &trace_csv(&inst, &out)?, stdout)?;
    }
    if let Some(p) = &args.alloc_out {
        let doc = FinalState {
            epsilon: args.eps,
            k: out.trace.k,
            converged: out.trace.converged,
            rounds: out.trace.rounds.len(),
            total_moves: out.trace.total_moves,
            worst_gap: Some(check.worst_gap),
            allocation: inst
                .edges()
                .iter()
                .enumerate()
                .map(|(e, edge)| AllocEntry {
                    good: &inst.goods()[edge.good].id,
                    agent: &inst.agents()[edge.agent].id,
                    amount: out.alloc.get(e),
                })
                .collect(),
            levels: inst.goods().iter().zip(&levels).map(|(g, &level)| LevelEntry { good: &g.id, level }).collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        emit(Some(p), &text, stdout)?;
    }

    writeln!(stdout, "converged {}", out.trace.converged)?;
    writeln!(stdout, "k {}", out.trace.k)?;
    writeln!(stdout, "rounds {}", out.trace.rounds.len())?;
    writeln!(stdout, "moves {}", out.trace.total_moves)?;
    writeln!(stdout, "worst_gap {}", sig(check.worst_gap, TRACE_DIGITS))?;
    writeln!(stdout, "levels {}", join(levels.iter().map(|&l| sig(l, TRACE_DIGITS))))?;
    if !out.trace.converged {
        writeln!(stdout, "status not converged")?;
        return Ok(EXIT_NOT_CONVERGED);
    }
    if !check.ok {
        writeln!(stdout, "status not an equilibrium (gap {} at agent {:?})", sig(check.worst_gap, TRACE_DIGITS), inst.agents()[check.worst_agent].id)?;
        return Ok(EXIT_NOT_CONVERGED);
    }
    writeln!(stdout, "status ok")?;
    Ok(EXIT_OK)
}

/// One row of the star report.
#[derive(Debug, Clone, PartialEq)]
pub struct PoaRow {
    pub n: usize,
    pub welfare_ne: f64,
    pub welfare_common: f64,
    /// `welfare_common / welfare_ne`, raised to 1 when below.
    pub ratio: f64,
    /// True when the raw ratio was below 1.
    pub clamped: bool,
}

pub fn poa_rows(ns: &[usize], utility: UtilityFunction, eps: f64) -> Result<Vec<PoaRow>> {
    ns.iter()
        .map(|&n| {
            if n < 1 {
                bail!("star size must be at least 1");
            }
            let r = star_poa(n, utility, eps, None)?;
            let common = r.welfare_reference.expect("star report has a reference");
            let raw = common / r.welfare_ne;
            Ok(PoaRow { n, welfare_ne: r.welfare_ne, welfare_common: common, ratio: raw.max(1.0), clamped: raw < 1.0 })
        })
        .collect()
}

pub fn poa_csv(rows: &[PoaRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "welfare_ne", "welfare_common", "ratio", "clamped"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            sig(r.welfare_ne, REPORT_DIGITS),
            sig(r.welfare_common, REPORT_DIGITS),
            sig(r.ratio, REPORT_DIGITS),
            r.clamped.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn cmd_poa(args: &PoaArgs, stdout: &mut dyn Write) -> Result<()> {
    let rows = poa_rows(&args.n, parse_utility(&args.utility)?, args.eps)?;
    emit(args.out.as_deref(), &poa_csv(&rows)?, stdout)
}
