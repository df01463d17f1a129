//! `bim` — budgeted influence maximization toolkit.
//!
//! Subcommands:
//! * `gen` — generate or ingest a graph, assign edge probabilities and
//!   node costs, write edge-list/cost files;
//! * `select` — run one seed-selection algorithm and report the selected
//!   set with a Monte-Carlo-evaluated spread;
//! * `eval-rmse` — compare a DAG estimator's activation probabilities
//!   against Monte-Carlo ground truth;
//! * `sweep` — run an algorithms x budgets (or seed counts) grid and
//!   write a CSV report.

mod sweep;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bim_core::select::optimized_select_auto;
use bim_core::*;

#[derive(Parser)]
#[command(
    name = "bim",
    version,
    about = "Budgeted influence maximization under the independent cascade model"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate or ingest a graph and write edge-list / cost files.
    Gen(GenArgs),
    /// Select a seed set with one algorithm and evaluate it.
    Select(SelectArgs),
    /// RMSE of a DAG estimator against Monte-Carlo ground truth.
    EvalRmse(RmseArgs),
    /// Run an algorithms x parameters grid and write a CSV report.
    Sweep(sweep::SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Naive,
    Improved,
    Celf,
    Wdeg,
    Optimized,
}

impl AlgoArg {
    pub fn name(self) -> &'static str {
        match self {
            AlgoArg::Naive => "naive",
            AlgoArg::Improved => "improved",
            AlgoArg::Celf => "celf",
            AlgoArg::Wdeg => "wdeg",
            AlgoArg::Optimized => "optimized",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Exact,
    Mc,
    Spbp,
    Lbp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DagArg {
    Dag1,
    Dag2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbArg {
    /// Weighted cascade: p(u,v) = 1 / in-degree(v).
    Wc,
    /// Trivalency: uniform draw from a small value set.
    Tv,
    /// Uniform in [ra-lo, ra-hi].
    Ra,
    /// Truncated power law on [pl-lo, pl-hi].
    Pl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    Unit,
    Uniform,
}

/// Where the graph comes from: an edge-list file or the synthetic
/// generator.
#[derive(Args, Clone)]
pub struct SourceArgs {
    /// Edge-list file ("u v p" lines, '#' comments).
    #[arg(long, conflicts_with_all = ["n", "m"])]
    pub input: Option<PathBuf>,
    /// Probability for edges listed without one.
    #[arg(long)]
    pub default_prob: Option<f64>,
    /// Node-cost file ("u c" lines).
    #[arg(long)]
    pub costs: Option<PathBuf>,
    /// Synthetic generator: node count.
    #[arg(long, requires = "m")]
    pub n: Option<usize>,
    /// Synthetic generator: approximate edge count.
    #[arg(long, requires = "n")]
    pub m: Option<usize>,
    /// Synthetic generator: out-degree power-law exponent.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

impl SourceArgs {
    pub fn load(&self, seed: u64) -> Result<InfluenceGraph> {
        let mut g = match (&self.input, self.n) {
            (Some(path), _) => InfluenceGraph::load_edge_list(path, self.default_prob)
                .with_context(|| format!("loading {}", path.display()))?,
            (None, Some(n)) => generate(&SynthConfig {
                n,
                m_target: self.m.expect("clap enforces n with m"),
                beta: self.beta,
                rng_seed: seed,
            })?,
            (None, None) => bail!("give either --input or --n/--m"),
        };
        if let Some(costs) = &self.costs {
            g = g
                .load_costs(costs)
                .with_context(|| format!("loading {}", costs.display()))?;
        }
        Ok(g)
    }

    pub fn is_synthetic(&self) -> bool {
        self.input.is_none()
    }
}

/// Edge-probability model flags.
#[derive(Args, Clone)]
pub struct ProbArgs {
    /// Probability model to (re)assign; omit to keep the input's values.
    #[arg(long, value_enum)]
    pub prob: Option<ProbArg>,
    #[arg(long, default_value_t = 0.001)]
    pub ra_lo: f64,
    #[arg(long, default_value_t = 0.2)]
    pub ra_hi: f64,
    #[arg(long, default_value_t = 0.05)]
    pub pl_alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    pub pl_beta: f64,
    #[arg(long, default_value_t = 0.001)]
    pub pl_lo: f64,
    #[arg(long, default_value_t = 0.2)]
    pub pl_hi: f64,
    /// Trivalency value set.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001])]
    pub tv_values: Vec<f64>,
}

impl ProbArgs {
    pub fn model(&self) -> Option<ProbModel> {
        self.prob.map(|p| match p {
            ProbArg::Wc => ProbModel::WeightedCascade,
            ProbArg::Tv => ProbModel::Trivalency {
                values: self.tv_values.clone(),
            },
            ProbArg::Ra => ProbModel::Random {
                lo: self.ra_lo,
                hi: self.ra_hi,
            },
            ProbArg::Pl => ProbModel::PowerLaw {
                alpha: self.pl_alpha,
                beta: self.pl_beta,
                lo: self.pl_lo,
                hi: self.pl_hi,
            },
        })
    }

    /// Synthetic graphs carry placeholder probabilities, so a model must
    /// be applied; default to the uniform-random one.
    pub fn model_or_default(&self, synthetic: bool) -> Option<ProbModel> {
        self.model().or_else(|| {
            synthetic.then_some(ProbModel::Random {
                lo: self.ra_lo,
                hi: self.ra_hi,
            })
        })
    }
}

/// Node-cost model flags.
#[derive(Args, Clone)]
pub struct CostArgs {
    /// Cost model to assign; omit to keep the input's values.
    #[arg(long, value_enum)]
    pub cost: Option<CostArg>,
    #[arg(long, default_value_t = 1.0)]
    pub cost_lo: f64,
    #[arg(long, default_value_t = 3.0)]
    pub cost_hi: f64,
}

impl CostArgs {
    pub fn model(&self) -> Option<CostModel> {
        self.cost.map(|c| match c {
            CostArg::Unit => CostModel::Unit,
            CostArg::Uniform => CostModel::Uniform {
                lo: self.cost_lo,
                hi: self.cost_hi,
            },
        })
    }
}

/// Estimator / DAG-model / threshold flags shared by selection commands.
#[derive(Args, Clone)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value = "spbp")]
    pub estimator: EstimatorArg,
    #[arg(long, value_enum, default_value = "dag2")]
    pub dag: DagArg,
    /// Influence threshold for region construction.
    #[arg(long, default_value_t = DEFAULT_THETA)]
    pub theta: f64,
    /// Monte-Carlo rounds per estimator evaluation (mc estimator only).
    #[arg(long, default_value_t = DEFAULT_MC_ROUNDS)]
    pub mc_rounds: usize,
    /// Disable lazy re-evaluation in the optimized selector.
    #[arg(long)]
    pub eager: bool,
}

impl EstimatorArgs {
    pub fn kind(&self) -> EstimatorKind {
        match self.estimator {
            EstimatorArg::Exact => EstimatorKind::Exact,
            EstimatorArg::Mc => EstimatorKind::Mc {
                rounds: self.mc_rounds,
            },
            EstimatorArg::Spbp => EstimatorKind::Spbp,
            EstimatorArg::Lbp => EstimatorKind::Lbp(LbpConfig::default()),
        }
    }

    pub fn dag_model(&self) -> DagModel {
        match self.dag {
            DagArg::Dag1 => DagModel::Dag1,
            DagArg::Dag2 => DagModel::Dag2,
        }
    }

    pub fn config(&self, budget: BudgetSpec, rng_seed: u64) -> SelectionConfig {
        SelectionConfig {
            budget,
            theta: self.theta,
            estimator: self.kind(),
            dag_model: self.dag_model(),
            lazy: !self.eager,
            rng_seed,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    prob: ProbArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output edge-list path.
    #[arg(long)]
    out: PathBuf,
    /// Output cost-file path.
    #[arg(long)]
    cost_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("budget_spec").required(true).args(["budget", "k"])))]
struct SelectArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    prob: ProbArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    est: EstimatorArgs,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Cost budget (real node costs apply).
    #[arg(long)]
    budget: Option<f64>,
    /// Seed count (unit-cost mode).
    #[arg(long)]
    k: Option<usize>,
    /// Monte-Carlo rounds for the reported spread.
    #[arg(long, default_value_t = DEFAULT_MC_ROUNDS)]
    eval_rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-round selection trace as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RmseArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    prob: ProbArgs,
    #[command(flatten)]
    est: EstimatorArgs,
    /// Seed nodes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u32>,
    /// Monte-Carlo rounds for the ground truth.
    #[arg(long, default_value_t = DEFAULT_MC_ROUNDS)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> Result<()> {
    if let Ok(workers) = std::env::var("BIM_WORKERS") {
        let workers: usize = workers
            .parse()
            .context("BIM_WORKERS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("installing the worker pool")?;
    }
    match Cli::parse().cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Select(args) => cmd_select(args),
        Cmd::EvalRmse(args) => cmd_eval_rmse(args),
        Cmd::Sweep(args) => sweep::cmd_sweep(args),
    }
}

/// Derives a sub-seed so each pipeline stage draws from its own stream.
pub fn stage_seed(seed: u64, stage: u64) -> u64 {
    seed.wrapping_mul(0x9e3779b97f4a7c15).rotate_left(17) ^ stage
}

pub fn prepare_graph(
    source: &SourceArgs,
    prob: &ProbArgs,
    cost: Option<&CostArgs>,
    seed: u64,
) -> Result<InfluenceGraph> {
    let mut g = source.load(stage_seed(seed, 1))?;
    if let Some(model) = prob.model_or_default(source.is_synthetic()) {
        g = g.assign_probabilities(&model, stage_seed(seed, 2))?;
    }
    if let Some(model) = cost.and_then(|c| c.model()) {
        g = g.assign_costs(&model, stage_seed(seed, 3))?;
    }
    Ok(g)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let g = prepare_graph(&args.source, &args.prob, Some(&args.cost), args.seed)?;
    g.save_edge_list(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(cost_out) = &args.cost_out {
        g.save_costs(cost_out)
            .with_context(|| format!("writing {}", cost_out.display()))?;
    }

    let n = g.node_count();
    let m = g.edge_count();
    let density = if n > 1 {
        m as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };
    let degrees = out_degrees(&g);
    let max_deg = degrees.iter().copied().max().unwrap_or(0);
    let mean_deg = if n > 0 { m as f64 / n as f64 } else { 0.0 };
    println!("nodes       {n}");
    println!("edges       {m}");
    println!("density     {density:.3e}");
    println!("max degree  {max_deg}");
    println!("mean degree {mean_deg:.2}");
    if args.source.is_synthetic() {
        if let Some(slope) = fit_power_law_slope(&degrees) {
            println!("fitted out-degree slope {slope:.3}");
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Runs one algorithm under `cfg`. The caller decides how to evaluate the
/// returned set.
pub fn run_algorithm(
    g: &InfluenceGraph,
    algo: AlgoArg,
    cfg: &SelectionConfig,
) -> bim_core::Result<SelectionResult> {
    match algo {
        AlgoArg::Naive => naive_greedy(g, cfg),
        AlgoArg::Improved => improved_greedy(g, cfg),
        AlgoArg::Celf => celf_greedy(g, cfg),
        AlgoArg::Wdeg => weighted_degree(g, cfg),
        AlgoArg::Optimized => optimized_select_auto(g, cfg),
    }
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let g = prepare_graph(&args.source, &args.prob, Some(&args.cost), args.seed)?;
    let budget = match (args.budget, args.k) {
        (Some(b), None) => BudgetSpec::Cost(b),
        (None, Some(k)) => BudgetSpec::Cardinality(k),
        _ => unreachable!("clap enforces exactly one"),
    };
    if let BudgetSpec::Cost(b) = budget {
        if !g.costs().iter().any(|&c| c <= b) {
            bail!("infeasible budget {b}: every node costs more");
        }
    }
    let cfg = args.est.config(budget, stage_seed(args.seed, 4));

    let started = Instant::now();
    let result = run_algorithm(&g, args.algo, &cfg)?;
    let select_time = started.elapsed();
    // Reported spreads always come from the Monte-Carlo oracle so runs
    // with different estimators stay comparable.
    let spread = result.mc_sigma(&g, args.eval_rounds, stage_seed(args.seed, 5))?;

    let budget_desc = match budget {
        BudgetSpec::Cost(b) => format!("b={b}"),
        BudgetSpec::Cardinality(k) => format!("k={k}"),
    };
    println!(
        "algorithm={} {budget_desc} seeds={} cost={:.3} spread_mc={spread:.2} \
         evals={} time={:.2}s",
        args.algo.name(),
        result.seeds.len(),
        result.total_cost,
        result.estimator_evals,
        select_time.as_secs_f64()
    );
    let seed_list: Vec<String> = result.seeds.iter().map(|s| s.to_string()).collect();
    println!("seeds: {}", seed_list.join(","));

    if let Some(path) = &args.out {
        let mut w = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        result.write_csv(&mut w)?;
        w.flush()?;
        println!("trace: {}", path.display());
    }
    Ok(())
}

fn cmd_eval_rmse(args: RmseArgs) -> Result<()> {
    let g = prepare_graph(&args.source, &args.prob, None, args.seed)?;
    let seeds: Vec<NodeId> = args.seeds.iter().map(|&s| NodeId(s)).collect();

    let truth = mc_activation_probs(&g, &seeds, args.rounds, stage_seed(args.seed, 6))?;
    let inferred = match args.est.dag_model() {
        DagModel::Dag1 => {
            let dag = build_dag1(&g, &seeds, args.est.theta)?;
            estimate_on(&dag, &args.est)?
        }
        DagModel::Dag2 => {
            let cache = build_mioa_cache(&g, args.est.theta)?;
            let dag = build_dag2(&g, &seeds, &cache, args.est.theta)?;
            estimate_on(&dag, &args.est)?
        }
    };
    let value = rmse(&truth.probs, &inferred.probs)?;
    println!(
        "rmse={value:.6} method={}-{} theta={} rounds={}",
        match args.est.dag {
            DagArg::Dag1 => "dag1",
            DagArg::Dag2 => "dag2",
        },
        match args.est.estimator {
            EstimatorArg::Spbp => "spbp",
            EstimatorArg::Lbp => "lbp",
            _ => bail!("eval-rmse expects a DAG estimator (spbp or lbp)"),
        },
        args.est.theta,
        args.rounds
    );
    Ok(())
}

fn estimate_on(dag: &InfluenceDag, est: &EstimatorArgs) -> Result<ActivationEstimate> {
    Ok(match est.estimator {
        EstimatorArg::Spbp => spbp(dag),
        EstimatorArg::Lbp => lbp(dag, &LbpConfig::default())?,
        _ => bail!("expected a DAG estimator (spbp or lbp)"),
    })
}
