//! Experiment results and their on-disk layout.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use eigrom_core::sampling::SampleSet;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub library_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub mesh: MeshStats,
    /// High-fidelity dimension `N_h`.
    pub hifi_dim: usize,
    pub runs: Vec<RunReport>,
    pub sweeps: Vec<SweepReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub cells: [usize; 2],
    pub diagonal: String,
    pub vertices: usize,
    pub triangles: usize,
    pub interior: usize,
    pub h: f64,
    pub min_area: f64,
    pub max_area: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub index: usize,
    pub training: String,
    pub num_samples: usize,
    pub strategy: String,
    pub num_snapshots: usize,
    pub rank: usize,
    /// ROM dimension used for the test points.
    pub dim: usize,
    pub singular_values: Vec<f64>,
    /// `||S - V V^T S||_F^2 / ||S||_F^2` at `dim`.
    pub relative_projection_error: f64,
    pub points: Vec<PointRecord>,
    pub convergence: Vec<ConvergenceRecord>,
    /// Per sweep, per sweep point: ROM eigenvalues.
    pub sweep_values: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub mu: Vec<f64>,
    pub fem_values: Vec<f64>,
    pub rom_values: Vec<f64>,
    /// ROM mode `i` against FEM mode `i`.
    pub relative_errors: Vec<f64>,
    pub matches: Vec<MatchRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub rom_mode: usize,
    pub fem_mode: usize,
    pub correlation: f64,
    /// Against the matched FEM eigenvalue.
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub mode: usize,
    pub rom_value: f64,
    pub fem_value: f64,
    pub relative_error: f64,
    pub matched_fem_mode: usize,
    pub correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: usize,
    pub points: Vec<Vec<f64>>,
    /// Sorted FEM eigenvalues per point.
    pub fem_values: Vec<Vec<f64>>,
    /// Tracked label of each sorted mode per point, if tracking succeeded.
    pub tracking: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracking_error: Option<String>,
}

impl ExperimentReport {
    pub fn param_dim(&self) -> usize {
        self.runs
            .first()
            .and_then(|r| r.points.first())
            .map_or(1, |p| p.mu.len())
    }
}

/// Float text used in every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn mu_headers(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("mu{i}")).collect()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn sweep_file(i: usize, what: &str) -> String {
    if i == 0 {
        format!("sweep_{what}.csv")
    } else {
        format!("sweep{i}_{what}.csv")
    }
}

/// One parameter point per row.
pub fn samples_to_csv(set: &SampleSet) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(mu_headers(set.dim()))?;
    for p in &set.points {
        w.write_record(p.iter().map(|&x| fmt_f64(x)))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes `report.json` and the CSV files into `dir`; returns the paths.
pub fn emit_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let dim = report.param_dim();

    let json = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(&json, text).with_context(|| format!("writing {}", json.display()))?;
    written.push(json);

    let path = dir.join("table.csv");
    let mut w = writer(&path)?;
    let mut header: Vec<String> = ["run", "training", "strategy", "n"].map(String::from).to_vec();
    header.extend(mu_headers(dim));
    header.extend(
        [
            "rom_mode",
            "fem_value",
            "rom_value",
            "relative_error",
            "matched_fem_mode",
            "correlation",
            "matched_relative_error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for run in &report.runs {
        for p in &run.points {
            for (i, m) in p.matches.iter().enumerate() {
                let mut row = vec![
                    run.index.to_string(),
                    run.training.clone(),
                    run.strategy.clone(),
                    run.dim.to_string(),
                ];
                row.extend(p.mu.iter().map(|&x| fmt_f64(x)));
                row.extend([
                    (i + 1).to_string(),
                    fmt_f64(p.fem_values[i]),
                    fmt_f64(p.rom_values[i]),
                    fmt_f64(p.relative_errors[i]),
                    m.fem_mode.to_string(),
                    fmt_f64(m.correlation),
                    fmt_f64(m.relative_error),
                ]);
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("singular_values.csv");
    let mut w = writer(&path)?;
    w.write_record(["run", "index", "sigma"])?;
    for run in &report.runs {
        for (i, s) in run.singular_values.iter().enumerate() {
            w.write_record([run.index.to_string(), (i + 1).to_string(), fmt_f64(*s)])?;
        }
    }
    w.flush()?;
    written.push(path);

    for (si, sweep) in report.sweeps.iter().enumerate() {
        let k = sweep.fem_values.first().map_or(0, Vec::len);
        let path = dir.join(sweep_file(si, "eigenvalues"));
        let mut w = writer(&path)?;
        let mut header = mu_headers(dim);
        header.extend((1..=k).map(|i| format!("lambda{i}")));
        w.write_record(&header)?;
        for (mu, vals) in sweep.points.iter().zip(&sweep.fem_values) {
            w.write_record(mu.iter().chain(vals).map(|&x| fmt_f64(x)))?;
        }
        w.flush()?;
        written.push(path);

        if let Some(tracking) = &sweep.tracking {
            let path = dir.join(sweep_file(si, "tracking"));
            let mut w = writer(&path)?;
            let mut header = mu_headers(dim);
            header.extend((1..=k).map(|i| format!("label_of_sorted{i}")));
            w.write_record(&header)?;
            for (mu, labels) in sweep.points.iter().zip(tracking) {
                let mut row: Vec<String> = mu.iter().map(|&x| fmt_f64(x)).collect();
                row.extend(labels.iter().map(|l| (l + 1).to_string()));
                w.write_record(&row)?;
            }
            w.flush()?;
            written.push(path);
        }

        if report.runs.iter().any(|r| r.sweep_values.get(si).is_some_and(|v| !v.is_empty())) {
            let m = report
                .runs
                .iter()
                .filter_map(|r| r.sweep_values.get(si))
                .flat_map(|v| v.iter().map(Vec::len))
                .max()
                .unwrap_or(0);
            let path = dir.join(sweep_file(si, "rom"));
            let mut w = writer(&path)?;
            let mut header = vec!["run".to_string()];
            header.extend(mu_headers(dim));
            header.extend((1..=m).map(|i| format!("rom_lambda{i}")));
            w.write_record(&header)?;
            for run in &report.runs {
                let Some(values) = run.sweep_values.get(si) else { continue };
                for (mu, vals) in sweep.points.iter().zip(values) {
                    let mut row = vec![run.index.to_string()];
                    row.extend(mu.iter().map(|&x| fmt_f64(x)));
                    row.extend(vals.iter().map(|&x| fmt_f64(x)));
                    row.resize(1 + dim + m, String::new());
                    w.write_record(&row)?;
                }
            }
            w.flush()?;
            written.push(path);
        }
    }

    if report.runs.iter().any(|r| !r.convergence.is_empty()) {
        let path = dir.join("convergence.csv");
        let mut w = writer(&path)?;
        w.write_record([
            "run",
            "n",
            "mode",
            "rom_value",
            "fem_value",
            "relative_error",
            "matched_fem_mode",
            "correlation",
        ])?;
        for run in &report.runs {
            for c in &run.convergence {
                w.write_record([
                    run.index.to_string(),
                    c.n.to_string(),
                    c.mode.to_string(),
                    fmt_f64(c.rom_value),
                    fmt_f64(c.fem_value),
                    fmt_f64(c.relative_error),
                    c.matched_fem_mode.to_string(),
                    fmt_f64(c.correlation),
                ])?;
            }
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
