use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use gwrboost::io::{fmt_f64, write_rows, DiagnosticsRecord};
use gwrboost::simulation::AggregateReport;
use serde_json::{json, Value};

use crate::args::OutputArgs;
use crate::output::{aligned_table, cell, write_text, OutDir};

/// Row order of the comparison table; other metrics follow alphabetically.
const METRIC_ORDER: &[&str] = &["rmse", "rss", "aic", "aicc", "r2", "adjusted_r2", "moran_i"];

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Diagnostics or aggregate JSON files, one column per model.
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

struct Column {
    label: String,
    mean: BTreeMap<String, f64>,
    sd: Option<BTreeMap<String, f64>>,
    hash: Option<String>,
}

fn load(path: &PathBuf) -> Result<Vec<Column>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("models").is_some() {
        let agg: AggregateReport = serde_json::from_value(value)
            .with_context(|| format!("{} is not an aggregate report", path.display()))?;
        let order = agg.header.config.models.iter().map(|m| m.to_string());
        return Ok(order
            .filter_map(|m| {
                let metrics = agg.models.get(&m)?;
                Some(Column {
                    label: m.clone(),
                    mean: metrics.iter().map(|(k, s)| (k.clone(), s.mean)).collect(),
                    sd: Some(metrics.iter().map(|(k, s)| (k.clone(), s.sd)).collect()),
                    hash: None,
                })
            })
            .collect());
    }
    let rec: DiagnosticsRecord = serde_json::from_value(value)
        .with_context(|| format!("{} is not a diagnostics file", path.display()))?;
    Ok(vec![Column {
        label: rec.model,
        mean: rec.metrics,
        sd: None,
        hash: Some(rec.dataset_hash),
    }])
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let mut columns = Vec::new();
    let mut sources = Vec::new();
    for p in &args.inputs {
        for c in load(p)? {
            sources.push(p.clone());
            columns.push(c);
        }
    }

    let keys: Vec<BTreeSet<&String>> = columns.iter().map(|c| c.mean.keys().collect()).collect();
    let all: BTreeSet<&String> = keys.iter().flatten().copied().collect();
    let missing: Vec<String> = columns
        .iter()
        .zip(&keys)
        .zip(&sources)
        .filter_map(|((c, k), src)| {
            let gone: Vec<&str> = all.difference(k).map(|s| s.as_str()).collect();
            (!gone.is_empty()).then(|| format!("{} ({}): {}", c.label, src.display(), gone.join(", ")))
        })
        .collect();
    if !missing.is_empty() {
        bail!("incompatible metric sets; missing keys: {}", missing.join("; "));
    }

    let mut warnings = Vec::new();
    let hashes: BTreeSet<&String> = columns.iter().filter_map(|c| c.hash.as_ref()).collect();
    if hashes.len() > 1 {
        let w = format!("inputs come from {} different datasets", hashes.len());
        eprintln!("warning: {w}");
        warnings.push(w);
    }

    let mut labels: Vec<String> = columns.iter().map(|c| c.label.clone()).collect();
    for i in 0..labels.len() {
        if labels.iter().filter(|l| **l == columns[i].label).count() > 1 {
            let stem = sources[i].file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            labels[i] = format!("{}:{stem}", columns[i].label);
        }
    }
    let mut metrics: Vec<&String> = METRIC_ORDER.iter().filter_map(|m| all.iter().find(|k| k.as_str() == *m).copied()).collect();
    metrics.extend(all.iter().filter(|k| !METRIC_ORDER.contains(&k.as_str())));

    let with_sd = columns.iter().any(|c| c.sd.is_some());
    let mut header = vec!["metric".to_string()];
    for l in &labels {
        header.push(l.clone());
        if with_sd {
            header.push(format!("{l}_sd"));
        }
    }
    let mut csv_rows = Vec::new();
    let mut text_rows = Vec::new();
    for m in &metrics {
        let mut csv_row = vec![m.to_string()];
        let mut text_row = vec![m.to_string()];
        for c in &columns {
            let mean = c.mean[*m];
            csv_row.push(fmt_f64(mean));
            let sd = c.sd.as_ref().and_then(|s| s.get(*m).copied());
            if with_sd {
                csv_row.push(sd.map(fmt_f64).unwrap_or_default());
            }
            text_row.push(match sd {
                Some(sd) => format!("{} ± {}", cell(mean), cell(sd)),
                None => cell(mean),
            });
        }
        csv_rows.push(csv_row);
        text_rows.push(text_row);
    }
    let mut out = OutDir::create(&args.output.out_dir)?;
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(out.file("table.csv")?, &header_refs, csv_rows)?;
    let mut text_header = vec!["metric".to_string()];
    text_header.extend(labels.iter().cloned());
    let table = aligned_table(&text_header, &text_rows);
    write_text(&out.file("table.txt")?, &table)?;
    if !args.output.quiet {
        eprint!("{table}");
    }
    let inputs: Vec<String> = args.inputs.iter().map(|p| p.display().to_string()).collect();
    out.finish("report", json!({ "columns": labels }), vec![], inputs, warnings)
}
