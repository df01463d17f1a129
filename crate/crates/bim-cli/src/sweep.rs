//! The experiment grid: algorithms x budgets (or seed counts), one CSV row
//! per cell. Cells run in parallel with per-cell RNG streams, so the report
//! is identical no matter how many workers execute it.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use bim_core::{BudgetSpec, InfluenceGraph, SelectionConfig};

use crate::{
    prepare_graph, run_algorithm, stage_seed, AlgoArg, CostArgs, EstimatorArgs, ProbArgs,
    SourceArgs,
};

#[derive(Args)]
#[command(group(clap::ArgGroup::new("grid").required(true).args(["budgets", "ks"])))]
pub struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    prob: ProbArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    est: EstimatorArgs,
    /// Algorithms to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    algos: Vec<AlgoArg>,
    /// Cost budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<f64>>,
    /// Seed counts, comma separated; `lo:hi:step` ranges allowed.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<String>>,
    /// Algorithm whose spread normalizes the spread_ratio column
    /// (defaults to celf when present, else the first algorithm).
    #[arg(long, value_enum)]
    ref_algo: Option<AlgoArg>,
    /// Monte-Carlo rounds for each reported spread.
    #[arg(long, default_value_t = bim_core::DEFAULT_MC_ROUNDS)]
    eval_rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy)]
enum Param {
    Budget(f64),
    K(usize),
}

impl Param {
    fn kind(self) -> &'static str {
        match self {
            Param::Budget(_) => "budget",
            Param::K(_) => "k",
        }
    }

    fn value(self) -> f64 {
        match self {
            Param::Budget(b) => b,
            Param::K(k) => k as f64,
        }
    }

    fn budget(self) -> BudgetSpec {
        match self {
            Param::Budget(b) => BudgetSpec::Cost(b),
            Param::K(k) => BudgetSpec::Cardinality(k),
        }
    }
}

struct Cell {
    algo: AlgoArg,
    param: Param,
    outcome: Result<CellOk, String>,
}

struct CellOk {
    seeds: usize,
    total_cost: f64,
    spread: f64,
    runtime_s: f64,
    evals: usize,
}

pub fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let params = parse_params(&args)?;
    if params.is_empty() {
        bail!("the parameter sweep is empty");
    }
    if args.algos.is_empty() {
        bail!("no algorithms given");
    }
    let reference = args.ref_algo.unwrap_or_else(|| {
        if args.algos.contains(&AlgoArg::Celf) {
            AlgoArg::Celf
        } else {
            args.algos[0]
        }
    });

    let g = prepare_graph(&args.source, &args.prob, Some(&args.cost), args.seed)?;

    let grid: Vec<(usize, usize)> = (0..args.algos.len())
        .flat_map(|a| (0..params.len()).map(move |p| (a, p)))
        .collect();
    let cells: Vec<Cell> = grid
        .par_iter()
        .map(|&(ai, pi)| run_cell(&g, &args, args.algos[ai], params[pi], (ai, pi)))
        .collect();

    // spread of the reference algorithm per parameter, for the ratio column
    let ref_spread = |param_idx: usize| -> Option<f64> {
        cells
            .iter()
            .find(|c| {
                c.algo == reference && (c.param.value() - params[param_idx].value()).abs() < 1e-12
            })
            .and_then(|c| c.outcome.as_ref().ok().map(|ok| ok.spread))
    };

    let mut raw = BufWriter::new(
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?,
    );
    writeln!(raw, "# bim sweep csv v1")?;
    let mut w = csv::Writer::from_writer(raw);
    w.write_record([
        "algorithm",
        "param_kind",
        "param",
        "seeds",
        "total_cost",
        "spread_mc",
        "spread_ratio",
        "runtime_s",
        "evals",
    ])?;
    for (i, cell) in cells.iter().enumerate() {
        let pi = i % params.len();
        match &cell.outcome {
            Ok(ok) => {
                let ratio = ref_spread(pi)
                    .filter(|r| *r > 0.0)
                    .map(|r| format!("{:.4}", ok.spread / r))
                    .unwrap_or_default();
                w.write_record([
                    cell.algo.name().to_string(),
                    cell.param.kind().to_string(),
                    format!("{}", cell.param.value()),
                    format!("{}", ok.seeds),
                    format!("{:.4}", ok.total_cost),
                    format!("{:.3}", ok.spread),
                    ratio,
                    format!("{:.3}", ok.runtime_s),
                    format!("{}", ok.evals),
                ])?;
            }
            Err(msg) => {
                w.write_record([
                    cell.algo.name().to_string(),
                    cell.param.kind().to_string(),
                    format!("{}", cell.param.value()),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {msg}"),
                ])?;
            }
        }
    }
    w.flush()?;
    drop(w);
    println!(
        "wrote {} rows ({} algorithms x {} parameters) to {}",
        cells.len(),
        args.algos.len(),
        params.len(),
        args.out.display()
    );
    Ok(())
}

fn run_cell(
    g: &InfluenceGraph,
    args: &SweepArgs,
    algo: AlgoArg,
    param: Param,
    pos: (usize, usize),
) -> Cell {
    let cell_seed = stage_seed(
        args.seed,
        0x1_0000_0000 | ((pos.0 as u64) << 16) | pos.1 as u64,
    );
    let cfg: SelectionConfig = args.est.config(param.budget(), cell_seed);
    let started = Instant::now();
    let outcome = run_algorithm(g, algo, &cfg)
        .map_err(|e| e.to_string())
        .and_then(|result| {
            let runtime_s = started.elapsed().as_secs_f64();
            let spread = result
                .mc_sigma(g, args.eval_rounds, stage_seed(cell_seed, 0x51))
                .map_err(|e| e.to_string())?;
            Ok(CellOk {
                seeds: result.seeds.len(),
                total_cost: result.total_cost,
                spread,
                runtime_s,
                evals: result.estimator_evals,
            })
        });
    Cell {
        algo,
        param,
        outcome,
    }
}

fn parse_params(args: &SweepArgs) -> Result<Vec<Param>> {
    match (&args.budgets, &args.ks) {
        (Some(budgets), None) => Ok(budgets.iter().map(|&b| Param::Budget(b)).collect()),
        (None, Some(ks)) => {
            let mut out = Vec::new();
            for tok in ks {
                if let Some((lo, rest)) = tok.split_once(':') {
                    let (hi, step) = rest
                        .split_once(':')
                        .map(|(h, s)| (h, Some(s)))
                        .unwrap_or((rest, None));
                    let lo: usize = lo.parse().context("bad k range start")?;
                    let hi: usize = hi.parse().context("bad k range end")?;
                    let step: usize = step.map_or(Ok(1), |s| s.parse()).context("bad k step")?;
                    if step == 0 || hi < lo {
                        bail!("bad k range '{tok}'");
                    }
                    out.extend((lo..=hi).step_by(step).map(Param::K));
                } else {
                    out.push(Param::K(tok.parse().context("bad k value")?));
                }
            }
            Ok(out)
        }
        _ => unreachable!("clap enforces exactly one of --budgets/--ks"),
    }
}
