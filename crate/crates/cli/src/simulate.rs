use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::Result;
use clap::{Args, ValueEnum};
use gwrboost::gwr::{SearchMode, SearchOptions};
use gwrboost::io::{fmt_f64, write_dataset_csv, write_json, write_rows};
use gwrboost::simulation::{
    generate_dataset, run_replications_with, AggregateReport, CovariateDistribution, ReplicationConfig,
    SimulationConfig, REPORTED_METRICS,
};
use gwrboost::{Bandwidth, ModelKind};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{BoostArgs, CriterionArg, KernelArg, MetricArgs, ModelArg, OutputArgs, SearchModeArg};
use crate::output::{aligned_table, cell, write_text, OutDir};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CovariateArg {
    Uniform,
    Normal,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of independent replications.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Base seed; replication r uses stream r of this seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 25)]
    pub width: usize,
    #[arg(long, default_value_t = 25)]
    pub height: usize,
    #[arg(long, default_value_t = SimulationConfig::default().noise_sd)]
    pub noise_sd: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub covariate_dist: CovariateArg,
    /// Models to compare, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ols,gwr,gwrboost")]
    pub models: Vec<ModelArg>,
    #[arg(long, value_enum, default_value = "bisquare")]
    pub kernel: KernelArg,
    /// Criterion for the GWR bandwidth search.
    #[arg(long, value_enum, default_value = "aicc")]
    pub bw_search: CriterionArg,
    #[arg(long, value_enum, default_value = "adaptive")]
    pub search_mode: SearchModeArg,
    /// Fixed GWR distance bandwidth instead of the search.
    #[arg(long, conflicts_with = "adaptive")]
    pub bandwidth: Option<f64>,
    /// Fixed GWR neighbor count instead of the search.
    #[arg(long)]
    pub adaptive: Option<usize>,
    /// Do not write the per-replication dataset files.
    #[arg(long)]
    pub no_datasets: bool,
    /// Only generate datasets.
    #[arg(long, conflicts_with = "no_datasets")]
    pub no_fit: bool,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SimulateArgs {
    fn config(&self) -> Result<ReplicationConfig> {
        let likelihood = self.metrics.likelihood.into();
        let mut models: Vec<ModelKind> = Vec::new();
        for m in &self.models {
            let m = (*m).into();
            if !models.contains(&m) {
                models.push(m);
            }
        }
        let cfg = ReplicationConfig {
            reps: self.reps,
            base_seed: self.seed,
            models,
            simulation: SimulationConfig {
                width: self.width,
                height: self.height,
                noise_sd: self.noise_sd,
                covariates: match self.covariate_dist {
                    CovariateArg::Uniform => CovariateDistribution::Uniform,
                    CovariateArg::Normal => CovariateDistribution::Normal,
                },
            },
            search: SearchOptions {
                kernel: self.kernel.into(),
                mode: match self.search_mode {
                    SearchModeArg::Adaptive => SearchMode::Adaptive,
                    SearchModeArg::Fixed => SearchMode::Fixed,
                },
                criterion: self.bw_search.into(),
                likelihood,
                ..Default::default()
            },
            gwr_bandwidth: match (self.bandwidth, self.adaptive) {
                (Some(h), _) => Some(Bandwidth::Fixed(h)),
                (None, Some(k)) => Some(Bandwidth::Adaptive(k)),
                (None, None) => None,
            },
            boost: self.boost.config(likelihood)?,
            moran: self.metrics.moran.into(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let cfg = args.config()?;
    let mut out = OutDir::create(&args.output.out_dir)?;

    if !args.no_datasets {
        let names: Vec<_> = (0..cfg.reps).map(|r| format!("datasets/rep_{r:03}.csv")).collect();
        let paths = names.iter().map(|n| out.file(n)).collect::<Result<Vec<_>>>()?;
        paths.par_iter().enumerate().try_for_each(|(rep, path)| -> Result<()> {
            let sim = generate_dataset(&cfg.simulation, cfg.base_seed, rep)?;
            let mut extra: Vec<(String, Vec<f64>)> = (0..sim.truth.n_params())
                .map(|j| (format!("b{j}_true"), sim.truth.column(j).to_vec()))
                .collect();
            extra.push(("noise".into(), sim.noise.to_vec()));
            write_dataset_csv(path, &sim.dataset, "y", &extra)?;
            Ok(())
        })?;
    }

    if !args.no_fit {
        let done = AtomicUsize::new(0);
        let report = run_replications_with(&cfg, |_| {
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if !args.output.quiet {
                eprintln!("replication {k}/{}", cfg.reps);
            }
        })?;
        let rows = report.rows();
        write_rows(
            out.file("replications.csv")?,
            &["rep", "model", "metric", "value"],
            rows.iter()
                .map(|r| [r.rep.to_string(), r.model.to_string(), r.metric.clone(), fmt_f64(r.value)]),
        )?;
        let aggregate = report.aggregate();
        write_json(out.file("aggregate.json")?, &aggregate)?;
        write_text(&out.file("table.txt")?, &summary_table(&aggregate))?;
    }

    let config = serde_json::to_value(&cfg)?;
    let config = json!({
        "replication": config,
        "write_datasets": !args.no_datasets,
        "fit": !args.no_fit,
    });
    out.finish("simulate", config, vec![cfg.base_seed], vec![], vec![])
}

/// Models as columns, reported metrics as rows, `mean ± sd` cells.
pub fn summary_table(aggregate: &AggregateReport) -> String {
    let models: Vec<&String> = aggregate
        .header
        .config
        .models
        .iter()
        .filter_map(|m| aggregate.models.get_key_value(m.as_str()).map(|(k, _)| k))
        .collect();
    let mut header = vec!["metric".to_string()];
    header.extend(models.iter().map(|m| m.to_string()));
    let rows: Vec<Vec<String>> = REPORTED_METRICS
        .iter()
        .map(|metric| {
            let mut row = vec![metric.to_string()];
            for m in &models {
                row.push(match aggregate.models[*m].get(*metric) {
                    Some(s) => format!("{} ± {}", cell(s.mean), cell(s.sd)),
                    None => "-".into(),
                });
            }
            row
        })
        .collect();
    aligned_table(&header, &rows)
}
