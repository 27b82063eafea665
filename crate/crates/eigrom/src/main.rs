use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use eigrom::config::ExperimentConfig;
use eigrom::report::{emit_outputs, samples_to_csv, ExperimentReport};
use eigrom::{meshio, mtx, presets, runner};
use eigrom_core::fem::AffineOperator;
use eigrom_core::pod::{gram_svd, select_dim, truncate, SnapshotSet};

#[derive(Parser)]
#[command(name = "eigrom", version, about = "POD reduced-basis models for parametric eigenproblems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `output_dir` or `out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in reference configurations.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Print mesh and discretization statistics.
    MeshInfo { config: PathBuf },
    /// Write the affine matrices (and optionally snapshots and bases) in
    /// Matrix Market format.
    ExportMatrices {
        config: PathBuf,
        dir: PathBuf,
        /// Also write A(mu) and M(mu) at this parameter, e.g. `--mu=-0.3`
        /// or `--mu 0.5,0.6`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu: Option<Vec<f64>>,
        /// Also write training samples, snapshot matrices and POD bases.
        #[arg(long)]
        snapshots: bool,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as TOML.
    Show { name: String },
    /// Run one preset, or every preset with `all`.
    Run {
        name: String,
        /// Parent directory for the preset output folders.
        #[arg(long, default_value = "out")]
        out_root: PathBuf,
    },
}

fn summarize(report: &ExperimentReport, dir: &Path, files: usize) {
    println!("{} ({}), N_h = {}", report.config.name, report.config.problem, report.hifi_dim);
    for run in &report.runs {
        let worst = run
            .points
            .iter()
            .flat_map(|p| p.relative_errors.iter().copied())
            .fold(0.0, f64::max);
        println!(
            "  run {}: training {} ({} samples), strategy {}, rank {}, N {}, max rel. error {:.3e}",
            run.index, run.training, run.num_samples, run.strategy, run.rank, run.dim, worst
        );
    }
    for (i, s) in report.sweeps.iter().enumerate() {
        if let Some(e) = &s.tracking_error {
            println!("  sweep {i}: tracking stopped: {e}");
        }
    }
    println!("  wrote {files} files to {}", dir.display());
}

fn run_config(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let report = runner::run_experiment(cfg).with_context(|| format!("experiment '{}'", cfg.name))?;
    let files = emit_outputs(&report, dir)?;
    summarize(&report, dir, files.len());
    Ok(())
}

fn mesh_info(cfg: &ExperimentConfig) -> Result<()> {
    let problem = cfg.problem_def()?;
    let mesh = cfg.build_mesh()?;
    let r = mesh.report();
    let op = AffineOperator::assemble(&problem, &mesh)?;
    println!("problem      {}", problem.id.name());
    println!("cells        {} x {} ({} diagonal)", mesh.cells.0, mesh.cells.1, mesh.diagonal.name());
    println!("vertices     {}", r.vertices);
    println!("triangles    {}", r.triangles);
    println!("interior     {}", r.interior);
    println!("h            {:.6}", r.h);
    println!("area         {:.6e} .. {:.6e}", r.min_area, r.max_area);
    for (i, (a, c)) in op.stiffness_terms.iter().enumerate() {
        println!("stiffness[{i}] nnz {} coefficient {}", a.nnz(), c.label);
    }
    for (i, (m, c)) in op.mass_terms.iter().enumerate() {
        println!("mass[{i}]      nnz {} coefficient {}", m.nnz(), c.label);
    }
    Ok(())
}

fn export(cfg: &ExperimentConfig, dir: &Path, mu: Option<&[f64]>, snapshots: bool) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let problem = cfg.problem_def()?;
    let mesh = cfg.build_mesh()?;
    let op = AffineOperator::assemble(&problem, &mesh)?;
    std::fs::write(dir.join("mesh.txt"), meshio::mesh_to_string(&mesh))?;
    for (i, (a, c)) in op.stiffness_terms.iter().enumerate() {
        mtx::write_sparse(&dir.join(format!("stiffness_{i}.mtx")), a, &format!("coefficient {}", c.label))?;
    }
    for (i, (m, c)) in op.mass_terms.iter().enumerate() {
        mtx::write_sparse(&dir.join(format!("mass_{i}.mtx")), m, &format!("coefficient {}", c.label))?;
    }
    if let Some(mu) = mu {
        let (a, m) = op.evaluate(mu)?;
        let note = format!("mu = {mu:?}");
        mtx::write_sparse(&dir.join("stiffness_at_mu.mtx"), &a, &note)?;
        mtx::write_sparse(&dir.join("mass_at_mu.mtx"), &m, &note)?;
    }
    if snapshots {
        let rule = cfg.dim_rule()?;
        let mut run = 0;
        for (ti, t) in cfg.training.iter().enumerate() {
            let samples = t.to_samples(&problem)?;
            std::fs::write(dir.join(format!("training_{ti}.csv")), samples_to_csv(&samples)?)?;
            let sols = runner::solve_many(&op, &samples.points, cfg.k)?;
            for s in &cfg.strategies {
                let strategy = s.to_strategy()?;
                let snaps = SnapshotSet::from_solutions(&samples, &sols, &strategy)?;
                let full = gram_svd(&snaps.matrix)?;
                let n = match rule {
                    eigrom::config::DimRule::Tolerance(e) => select_dim(&full.singular_values, e)?,
                    eigrom::config::DimRule::Fixed(n) => n.min(full.rank()),
                    eigrom::config::DimRule::Rank => full.rank(),
                };
                let note = format!("training {}, strategy {}", t.label(), strategy.label());
                mtx::write_dense(&dir.join(format!("snapshots_{run}.mtx")), &snaps.matrix, &note)?;
                mtx::write_dense(&dir.join(format!("basis_{run}.mtx")), &truncate(&full, n)?.vectors, &note)?;
                run += 1;
            }
        }
    }
    println!("wrote matrices for {} (N_h = {}) to {}", cfg.name, op.dim(), dir.display());
    Ok(())
}

fn preset(name: &str) -> Result<ExperimentConfig> {
    presets::get(name).with_context(|| format!("unknown preset '{name}' (see `eigrom presets list`)"))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir());
            run_config(&cfg, &dir)
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for c in presets::all() {
                    println!("{:<8} {:<10} {}", c.name, c.problem, c.description);
                }
                Ok(())
            }
            PresetAction::Show { name } => {
                print!("{}", preset(&name)?.to_toml());
                Ok(())
            }
            PresetAction::Run { name, out_root } => {
                let list = if name == "all" { presets::all() } else { vec![preset(&name)?] };
                for cfg in &list {
                    run_config(cfg, &out_root.join(&cfg.name))?;
                }
                Ok(())
            }
        },
        Command::MeshInfo { config } => mesh_info(&ExperimentConfig::load(&config)?),
        Command::ExportMatrices {
            config,
            dir,
            mu,
            snapshots,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            if let Some(mu) = &mu {
                cfg.problem_def()?.check_admissible(mu)?;
            }
            export(&cfg, &dir, mu.as_deref(), snapshots)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

