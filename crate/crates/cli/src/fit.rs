use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Args, ValueEnum};
use gwrboost::boost::{boosted_scheme, fit_gwrboost};
use gwrboost::gwr::{fit_gwr, fit_ols, search_bandwidth, BandwidthSearch};
use gwrboost::io::{
    coefficient_summary, fmt_f64, load_csv, write_coefficients, write_diagnostics, write_json, write_rows,
    write_summary_csv, zscore, DiagnosticsRecord, StandardizationRecord,
};
use gwrboost::{Dataset, FitResult, Likelihood, ModelKind, MoranWeights, SpatialWeightScheme};
use serde_json::{json, Value};

use crate::args::{BandwidthArgs, BoostArgs, InputArgs, MetricArgs, ModelArg, OutputArgs};
use crate::output::OutDir;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV with a header row.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    #[command(flatten)]
    pub columns: InputArgs,
    #[arg(long, value_enum, default_value = "gwrboost")]
    pub model: ModelArg,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Report coefficients, fitted values and residuals in the units of the
    /// input columns.
    #[arg(long)]
    pub original_units: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Input CSV with a header row.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    #[command(flatten)]
    pub columns: InputArgs,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Loaded data, standardized unless disabled.
pub struct Prepared {
    pub data: Dataset,
    pub record: Option<StandardizationRecord>,
}

pub fn prepare(path: &Path, columns: &InputArgs) -> Result<Prepared> {
    let raw = load_csv(path, &columns.schema())?;
    if columns.no_standardize {
        return Ok(Prepared { data: raw, record: None });
    }
    let (data, record) = zscore(&raw)?;
    Ok(Prepared {
        data,
        record: Some(record),
    })
}

/// The GWR bandwidth: given on the command line or found by search.
pub fn reference_scheme(
    data: &Dataset,
    bw: &BandwidthArgs,
    likelihood: Likelihood,
) -> Result<(SpatialWeightScheme, Option<BandwidthSearch>)> {
    let kernel = bw.kernel.into();
    if let Some(b) = bw.given() {
        let scheme = SpatialWeightScheme::new(kernel, b);
        scheme.validate_for_regression(data.len(), data.design().n_params())?;
        return Ok((scheme, None));
    }
    let found = search_bandwidth(data, &bw.search_options(likelihood))?;
    Ok((SpatialWeightScheme::new(kernel, found.bandwidth), Some(found)))
}

fn search_echo(found: &Option<BandwidthSearch>, bw: &BandwidthArgs) -> Value {
    match found {
        None => json!({ "source": "given" }),
        Some(s) => json!({
            "source": "search",
            "criterion": bw.bw_search.to_possible_value().map(|v| v.get_name().to_string()),
            "score": s.score,
            "evaluations": s.evaluations.len(),
        }),
    }
}


pub fn run(args: &FitArgs) -> Result<()> {
    args.bandwidth.validate()?;
    let likelihood: Likelihood = args.metrics.likelihood.into();
    let boost_cfg = args.boost.config(likelihood)?;
    let model: ModelKind = args.model.into();
    let prepared = prepare(&args.input, &args.columns)?;
    let data = &prepared.data;
    let moran = MoranWeights::build(data.coords(), args.metrics.moran.into())?;
    let mut out = OutDir::create(&args.output.out_dir)?;

    let mut echo = json!({
        "model": model.as_str(),
        "likelihood": likelihood.to_string(),
        "moran_weights": moran.scheme(),
        "standardized": prepared.record.is_some(),
        "coefficient_units": if args.original_units && prepared.record.is_some() { "original" } else if prepared.record.is_some() { "standardized" } else { "original" },
        "seed": Value::Null,
        "input": args.input.display().to_string(),
    });
    let mut trace_rows = None;

    let result = match model {
        ModelKind::Ols => FitResult::from_gwr(data, &fit_ols(data)?, likelihood, Some(&moran))?,
        ModelKind::Gwr | ModelKind::Gwrboost => {
            let (reference, found) = reference_scheme(data, &args.bandwidth, likelihood)?;
            echo["kernel"] = json!(reference.kernel);
            echo["bandwidth_search"] = search_echo(&found, &args.bandwidth);
            if let Some(s) = &found {
                write_json(out.file("search.json")?, s)?;
            }
            if model == ModelKind::Gwr {
                echo["bandwidth"] = json!(reference.bandwidth.value());
                echo["bandwidth_mode"] = json!(reference.bandwidth.mode_name());
                FitResult::from_gwr(data, &fit_gwr(data, &reference)?, likelihood, Some(&moran))?
            } else {
                let scheme = boosted_scheme(data, &reference, boost_cfg.bandwidth_factor)?;
                let fitted = fit_gwrboost(data, &scheme, &boost_cfg)?;
                echo["reference_bandwidth"] = json!(reference.bandwidth.value());
                echo["bandwidth"] = json!(scheme.bandwidth.value());
                echo["bandwidth_mode"] = json!(scheme.bandwidth.mode_name());
                echo["boost"] = serde_json::to_value(boost_cfg)?;
                echo["stopped_at"] = json!(fitted.stopped_at());
                echo["early_stopped"] = json!(fitted.trace().early_stopped);
                echo["stages_run"] = json!(fitted.trace().records.len());
                trace_rows = Some(crate::sweep::trace_rows(&[], fitted.trace()));
                for w in fitted.warnings() {
                    eprintln!("warning: {w}");
                }
                FitResult::from_boost(data, &fitted, Some(&moran))?
            }
        }
    };

    let (coefficients, fitted, residuals) = match (&prepared.record, args.original_units) {
        (Some(rec), true) => (
            rec.coefficients_to_original(&result.coefficients)?,
            rec.response_to_original(&result.fitted, true),
            rec.response_to_original(&result.residuals, false),
        ),
        _ => (result.coefficients.clone(), result.fitted.clone(), result.residuals.clone()),
    };
    write_coefficients(out.file("coefficients.csv")?, data, &coefficients, &fitted, &residuals)?;
    let summary = coefficient_summary(&coefficients, &data.coefficient_names())?;
    write_summary_csv(out.file("summary.csv")?, &summary)?;
    if let Some(rows) = trace_rows {
        write_rows(out.file("trace.csv")?, crate::sweep::TRACE_HEADER, rows)?;
    }
    if let Some(rec) = &prepared.record {
        write_json(out.file("standardization.json")?, rec)?;
    }
    let record = DiagnosticsRecord::from_fit(data, &result, echo.clone());
    write_diagnostics(out.file("diagnostics.json")?, &record)?;
    out.finish(
        "fit",
        echo,
        vec![],
        vec![args.input.display().to_string()],
        result.warnings.clone(),
    )
}

pub fn run_search(args: &SearchArgs) -> Result<()> {
    args.bandwidth.validate()?;
    let likelihood: Likelihood = args.metrics.likelihood.into();
    let prepared = prepare(&args.input, &args.columns)?;
    let opts = args.bandwidth.search_options(likelihood);
    let found = search_bandwidth(&prepared.data, &opts)?;
    let mut out = OutDir::create(&args.output.out_dir)?;
    write_json(out.file("search.json")?, &found)?;
    write_rows(
        out.file("evaluations.csv")?,
        &["bandwidth", "score"],
        found
            .evaluations
            .iter()
            .map(|(b, s)| [fmt_f64(b.value()), fmt_f64(*s)]),
    )?;
    if !args.output.quiet {
        eprintln!("bandwidth {} (score {})", found.bandwidth, found.score);
    }
    out.finish(
        "search",
        json!({ "search": opts, "standardized": prepared.record.is_some() }),
        vec![],
        vec![args.input.display().to_string()],
        vec![],
    )
}
