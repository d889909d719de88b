use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiment::ExperimentResult;
use crate::Result;

/// Bumped whenever a CSV column or summary key changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 17] = [
    "epsilon",
    "norm_sup_t_l2",
    "norm_rbar",
    "norm_fluct",
    "norm_trace",
    "norm_u_minus_u0",
    "scaled_rbar",
    "scaled_fluct",
    "energy_constant",
    "kernel_constant",
    "null_flux",
    "coarse_u_minus_u0",
    "norm_initial_data",
    "norm_wall_data",
    "norm_smooth_sources",
    "norm_weighted_layer",
    "norm_weighted_layer_source",
];

pub const CSV_FILE: &str = "sweep.csv";
pub const SUMMARY_FILE: &str = "summary.toml";
pub const PLOT_FILE: &str = "plot.py";

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// The sweep table as CSV text, one row per `ε` in sweep order.
pub fn csv_string(r: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for (i, row) in r.rows.iter().enumerate() {
        let n = &row.norms;
        w.write_record([
            num(row.eps),
            num(n.sup_t_l2),
            num(n.rbar),
            num(n.fluct),
            num(n.trace),
            num(row.u_minus_u0),
            num(r.scaled.rbar[i]),
            num(r.scaled.fluct[i]),
            num(r.energy.constants[i].1),
            num(r.kernel.constants[i].1),
            opt(row.null_flux),
            opt(row.coarse_u_minus_u0),
            num(row.components.initial),
            num(row.components.wall_data),
            num(row.components.smooth_sources),
            num(row.components.layer),
            num(row.components.layer_source),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| crate::HarnessError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct RateEntry {
    series: String,
    slope: Option<f64>,
    stderr: Option<f64>,
    intercept: Option<f64>,
}

#[derive(Serialize)]
struct CheckEntry {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct ConditionEntry {
    condition: String,
    wall: String,
    violation: f64,
}

#[derive(Serialize)]
struct EstimateEntry {
    delta: f64,
    spread: f64,
    margin: String,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    data: String,
    boundary: String,
    epsilons: Vec<f64>,
    t_final: f64,
    seed: u64,
    passed: bool,
    scaled_rbar_spread: f64,
    scaled_fluct_spread: f64,
    energy: EstimateEntry,
    kernel: EstimateEntry,
    rates: Vec<RateEntry>,
    checks: Vec<CheckEntry>,
    compatibility: Vec<ConditionEntry>,
}

pub fn summary_string(r: &ExperimentResult) -> Result<String> {
    let est = |e: &remainder_lab::EstimateCheck| EstimateEntry {
        delta: e.delta,
        spread: e.spread,
        margin: num(e.margin),
    };
    let s = Summary {
        schema_version: SCHEMA_VERSION,
        data: r.label.clone(),
        boundary: r.compatibility.kind.name().to_string(),
        epsilons: r.config.epsilons.clone(),
        t_final: r.config.t_final,
        seed: r.config.seed,
        passed: r.passed(),
        scaled_rbar_spread: r.scaled.rbar_spread,
        scaled_fluct_spread: r.scaled.fluct_spread,
        energy: est(&r.energy),
        kernel: est(&r.kernel),
        rates: r
            .rates
            .iter()
            .map(|(n, f)| RateEntry {
                series: n.to_string(),
                slope: f.as_ref().map(|f| f.slope),
                stderr: f.as_ref().map(|f| f.stderr),
                intercept: f.as_ref().map(|f| f.intercept),
            })
            .collect(),
        checks: r
            .checks
            .iter()
            .map(|c| CheckEntry { name: c.name.as_str().into(), passed: c.passed, detail: c.detail.clone() })
            .collect(),
        compatibility: r
            .compatibility
            .checks
            .iter()
            .map(|c| ConditionEntry { condition: c.name.into(), wall: c.side.name().into(), violation: c.violation })
            .collect(),
    };
    toml::to_string(&s).map_err(|e| crate::HarnessError::Io(e.to_string()))
}

/// Matplotlib script drawing the sweep on log-log axes against `ε^{1/2}`.
pub fn plot_script() -> String {
    format!(
        r#"#!/usr/bin/env python3
# Generated by slab-lab (CSV schema {SCHEMA_VERSION}).
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "{CSV_FILE}")))
eps = [float(r["epsilon"]) for r in rows]
series = ["norm_u_minus_u0", "norm_sup_t_l2", "norm_rbar", "norm_fluct", "norm_trace"]

fig, ax = plt.subplots(figsize=(6, 4.5))
for name in series:
    vals = [float(r[name]) for r in rows]
    if all(v > 0 for v in vals):
        ax.loglog(eps, vals, "o-", label=name)
ref = [float(rows[0]["norm_u_minus_u0"] or 1) * (e / eps[0]) ** 0.5 for e in eps]
if all(v > 0 for v in ref):
    ax.loglog(eps, ref, "k--", label="slope 1/2")
ax.set_xlabel("epsilon")
ax.set_ylabel("norm")
ax.legend()
fig.tight_layout()
out = here / (sys.argv[1] if len(sys.argv) > 1 else "sweep.png")
fig.savefig(out, dpi=150)
print(out)
"#
    )
}

/// Writes the CSV, summary and plot script into `dir` and returns their paths.
pub fn write_artifacts(r: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, body) in [(CSV_FILE, csv_string(r)?), (SUMMARY_FILE, summary_string(r)?), (PLOT_FILE, plot_script())] {
        let p = dir.join(name);
        std::fs::File::create(&p)?.write_all(body.as_bytes())?;
        paths.push(p);
    }
    Ok(paths)
}

/// Plain-text report for the terminal.
pub fn report(r: &ExperimentResult) -> String {
    let mut s = format!("data `{}` ({} walls), T = {}\n", r.label, r.compatibility.kind.name(), r.config.t_final);
    s.push_str("  epsilon      |u-U0|       sup|R|       |Rbar|       |R-Rbar|     trace\n");
    for row in &r.rows {
        let n = &row.norms;
        s.push_str(&format!(
            "  {:<12.4e} {:<12.4e} {:<12.4e} {:<12.4e} {:<12.4e} {:<12.4e}\n",
            row.eps, row.u_minus_u0, n.sup_t_l2, n.rbar, n.fluct, n.trace
        ));
    }
    for (name, f) in &r.rates {
        match f {
            Some(f) => s.push_str(&format!("  slope {name:<22} {:.4} ± {:.4}\n", f.slope, f.stderr)),
            None => s.push_str(&format!("  slope {name:<22} n/a (vanishing norms)\n")),
        }
    }
    for c in &r.checks {
        s.push_str(&format!("  [{}] {}: {}\n", if c.passed { "pass" } else { "FAIL" }, c.name.as_str(), c.detail));
    }
    s
}
