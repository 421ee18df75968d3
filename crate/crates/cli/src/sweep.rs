use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use gwrboost::boost::{boosted_scheme, fit_gwrboost, BoostTrace};
use gwrboost::io::{fmt_f64, write_rows};
use gwrboost::simulation::{generate_dataset, SimulationConfig};
use gwrboost::{BoostConfig, EarlyStop, Likelihood};
use serde_json::json;

use crate::args::{BandwidthArgs, InputArgs, MetricArgs, OutputArgs, TraceArg};
use crate::fit::{prepare, reference_scheme};
use crate::output::OutDir;

pub const TRACE_HEADER: &[&str] = &["stage", "rss", "r2", "aic", "aicc", "hat_trace"];

/// One row per stage; undefined criteria are left empty.
pub fn trace_rows(prefix: &[String], trace: &BoostTrace) -> Vec<Vec<String>> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    trace
        .records
        .iter()
        .map(|r| {
            let mut row = prefix.to_vec();
            row.extend([
                r.stage.to_string(),
                fmt_f64(r.rss),
                fmt_f64(r.r2),
                opt(r.aic),
                opt(r.aicc),
                fmt_f64(r.hat_trace),
            ]);
            row
        })
        .collect()
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Input CSV; without it one simulated replication is used.
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub columns: InputArgs,
    /// Seed of the simulated replication used when no input is given.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Replication index of the simulated data.
    #[arg(long, default_value_t = 0)]
    pub rep: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.5")]
    pub learning_rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.0,2.0")]
    pub bw_factors: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub max_stages: Vec<usize>,
    #[arg(long, value_enum, default_value = "boosted")]
    pub trace_method: TraceArg,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn run(args: &SweepArgs) -> Result<()> {
    args.bandwidth.validate()?;
    let likelihood: Likelihood = args.metrics.likelihood.into();
    if args.learning_rates.is_empty() || args.bw_factors.is_empty() || args.max_stages.is_empty() {
        bail!("the sweep grid is empty");
    }
    let mut cells = Vec::new();
    for &lambda in &args.learning_rates {
        for &factor in &args.bw_factors {
            for &m in &args.max_stages {
                let cfg = BoostConfig {
                    max_stages: m,
                    learning_rate: lambda,
                    bandwidth_factor: factor,
                    early_stop: EarlyStop::None,
                    trace_method: match args.trace_method {
                        TraceArg::Boosted => gwrboost::TraceMethod::Boosted,
                        TraceArg::Exact => gwrboost::TraceMethod::Exact,
                    },
                    likelihood,
                };
                cfg.validate()?;
                cells.push(cfg);
            }
        }
    }

    let (data, inputs, seeds) = match &args.input {
        Some(path) => (prepare(path, &args.columns)?.data, vec![path.display().to_string()], vec![]),
        None => (
            generate_dataset(&SimulationConfig::default(), args.seed, args.rep)?.dataset,
            vec![],
            vec![args.seed],
        ),
    };
    let (reference, found) = reference_scheme(&data, &args.bandwidth, likelihood)?;
    let mut out = OutDir::create(&args.output.out_dir)?;

    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for (c, cfg) in cells.iter().enumerate() {
        let scheme = boosted_scheme(&data, &reference, cfg.bandwidth_factor)?;
        let model = fit_gwrboost(&data, &scheme, cfg)?;
        let prefix = [
            fmt_f64(cfg.learning_rate),
            fmt_f64(cfg.bandwidth_factor),
            cfg.max_stages.to_string(),
            fmt_f64(scheme.bandwidth.value()),
        ];
        curves.extend(trace_rows(&prefix, model.trace()));
        let best = model
            .trace()
            .records
            .iter()
            .filter_map(|r| r.aicc.map(|a| (r.stage, a)))
            .fold(None, |acc: Option<(usize, f64)>, (s, a)| match acc {
                Some((_, b)) if b <= a => acc,
                _ => Some((s, a)),
            });
        let last = model.trace().records.last().and_then(|r| r.aicc);
        let mut row = prefix.to_vec();
        row.extend([
            best.map(|b| b.0.to_string()).unwrap_or_default(),
            best.map(|b| fmt_f64(b.1)).unwrap_or_default(),
            last.map(fmt_f64).unwrap_or_default(),
        ]);
        summary.push(row);
        if !args.output.quiet {
            eprintln!("cell {}/{}", c + 1, cells.len());
        }
    }
    let mut header = vec!["learning_rate", "bw_factor", "max_stages", "bandwidth"];
    header.extend_from_slice(TRACE_HEADER);
    write_rows(out.file("curves.csv")?, &header, curves)?;
    write_rows(
        out.file("cells.csv")?,
        &[
            "learning_rate",
            "bw_factor",
            "max_stages",
            "bandwidth",
            "best_stage",
            "best_aicc",
            "final_aicc",
        ],
        summary,
    )?;
    let config = json!({
        "grid": cells,
        "reference_bandwidth": reference.bandwidth.value(),
        "bandwidth_mode": reference.bandwidth.mode_name(),
        "kernel": reference.kernel,
        "bandwidth_searched": found.is_some(),
        "simulated_rep": if args.input.is_none() { Some(args.rep) } else { None },
    });
    out.finish("sweep", config, seeds, inputs, vec![])
}
