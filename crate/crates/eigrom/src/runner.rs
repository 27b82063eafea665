//! Runs one experiment: high-fidelity solves, POD, projection, diagnostics.

use std::collections::{HashMap, HashSet};

use anyhow::{bail, Context, Result};
use eigrom_core::diagnostics::{convergence_study, match_all, relative_error, track_sweep};
use eigrom_core::eigensolve::{solve_at, EigenSet};
use eigrom_core::fem::AffineOperator;
use eigrom_core::linalg::SparseSymMatrix;
use eigrom_core::pod::{gram_svd, select_dim, SnapshotSet};
use eigrom_core::rom::RomSystem;
use eigrom_core::sampling::SampleSet;
use rayon::prelude::*;

use crate::config::{DimRule, ExperimentConfig};
use crate::report::{
    ConvergenceRecord, ExperimentReport, MatchRecord, MeshStats, PointRecord, RunReport, SweepReport,
};

/// Worker threads for the parallel stages; unset or `0` means one per core.
pub const THREADS_ENV: &str = "EIGROM_THREADS";

pub fn library_version() -> String {
    format!("eigrom {}", env!("CARGO_PKG_VERSION"))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?)
}

/// Independent high-fidelity solves in parallel, returned in input order.
pub fn solve_many(op: &AffineOperator, points: &[Vec<f64>], k: usize) -> Result<Vec<EigenSet>> {
    points
        .par_iter()
        .map(|mu| solve_at(op, mu, k))
        .collect::<Result<Vec<_>, _>>()
        .context("stage: high-fidelity solve")
}

fn key(mu: &[f64]) -> Vec<u64> {
    mu.iter().map(|x| x.to_bits()).collect()
}

/// High-fidelity eigensets keyed by the exact bits of the parameter.
pub struct HifiCache<'a> {
    op: &'a AffineOperator,
    k: usize,
    sets: HashMap<Vec<u64>, EigenSet>,
}

impl<'a> HifiCache<'a> {
    pub fn new(op: &'a AffineOperator, k: usize) -> Self {
        Self {
            op,
            k,
            sets: HashMap::new(),
        }
    }

    /// Solves every point not yet cached, in parallel.
    pub fn fill(&mut self, points: &[Vec<f64>]) -> Result<()> {
        let mut seen = HashSet::new();
        let missing: Vec<Vec<f64>> = points
            .iter()
            .filter(|mu| !self.sets.contains_key(&key(mu)) && seen.insert(key(mu)))
            .cloned()
            .collect();
        let solved = solve_many(self.op, &missing, self.k)?;
        for set in solved {
            self.sets.insert(key(&set.mu), set);
        }
        Ok(())
    }

    pub fn get(&self, mu: &[f64]) -> Result<&EigenSet> {
        self.sets
            .get(&key(mu))
            .with_context(|| format!("no high-fidelity solution cached at mu = {mu:?}"))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

fn mass_for(op: &AffineOperator, mu: &[f64]) -> Result<SparseSymMatrix> {
    Ok(match op.constant_mass() {
        Some(m) => m.clone(),
        None => op.mass_at(mu)?,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    thread_pool()?.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let problem = cfg.problem_def()?;
    let mesh = cfg.build_mesh().context("stage: mesh")?;
    let op = AffineOperator::assemble(&problem, &mesh).context("stage: assembly")?;

    let trainings: Vec<SampleSet> = cfg
        .training
        .iter()
        .map(|t| t.to_samples(&problem))
        .collect::<Result<_>>()?;
    let tests = cfg.test_samples()?;
    let sweeps: Vec<SampleSet> = cfg
        .sweeps
        .iter()
        .map(|s| s.to_samples(&problem))
        .collect::<Result<_>>()?;

    let mut all: Vec<Vec<f64>> = Vec::new();
    for set in trainings.iter().chain([&tests]).chain(&sweeps) {
        all.extend(set.points.iter().cloned());
    }
    if let Some(c) = &cfg.convergence {
        all.push(c.mu.clone());
    }
    let mut cache = HifiCache::new(&op, cfg.k);
    cache.fill(&all)?;

    let mut sweep_reports = Vec::with_capacity(sweeps.len());
    for (sc, set) in cfg.sweeps.iter().zip(&sweeps) {
        let sets: Vec<EigenSet> = set.points.iter().map(|mu| cache.get(mu).cloned()).collect::<Result<_>>()?;
        let m = mass_for(&op, &set.points[0])?;
        let (tracking, tracking_error) = match track_sweep(&sets, &m) {
            Ok(t) => (Some(t), None),
            Err(e) => (None, Some(e.to_string())),
        };
        sweep_reports.push(SweepReport {
            axis: sc.axis,
            points: set.points.clone(),
            fem_values: sets.into_iter().map(|s| s.values).collect(),
            tracking,
            tracking_error,
        });
    }

    let rule = cfg.dim_rule()?;
    let mut runs = Vec::new();
    for (tc, samples) in cfg.training.iter().zip(&trainings) {
        for sc in &cfg.strategies {
            let strategy = sc.to_strategy()?;
            let index = runs.len();
            let run = build_run(cfg, &op, &cache, rule, samples, &strategy, &tests, &sweeps)
                .with_context(|| format!("run {index} (training {}, strategy {})", tc.label(), strategy.label()))?;
            runs.push(RunReport {
                index,
                training: tc.label(),
                ..run
            });
        }
    }

    let r = mesh.report();
    Ok(ExperimentReport {
        library_version: library_version(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        mesh: MeshStats {
            cells: [mesh.cells.0, mesh.cells.1],
            diagonal: mesh.diagonal.name().to_string(),
            vertices: r.vertices,
            triangles: r.triangles,
            interior: r.interior,
            h: r.h,
            min_area: r.min_area,
            max_area: r.max_area,
        },
        hifi_dim: op.dim(),
        runs,
        sweeps: sweep_reports,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_run(
    cfg: &ExperimentConfig,
    op: &AffineOperator,
    cache: &HifiCache,
    rule: DimRule,
    samples: &SampleSet,
    strategy: &eigrom_core::pod::SnapshotStrategy,
    tests: &SampleSet,
    sweeps: &[SampleSet],
) -> Result<RunReport> {
    let solutions: Vec<EigenSet> = samples.points.iter().map(|mu| cache.get(mu).cloned()).collect::<Result<_>>()?;
    let snaps = SnapshotSet::from_solutions(samples, &solutions, strategy).context("stage: snapshots")?;
    let full = gram_svd(&snaps.matrix).context("stage: POD")?;
    let rank = full.rank();
    let dim = match rule {
        DimRule::Tolerance(t) => select_dim(&full.singular_values, t)?,
        DimRule::Fixed(n) if n <= rank => n,
        DimRule::Fixed(n) => bail!("stage: POD: rom.n = {n} exceeds the snapshot rank {rank}"),
        DimRule::Rank => rank,
    };
    let full_sys = RomSystem::project(op, &full).context("stage: projection")?;
    let sys = full_sys.truncated(dim)?;
    let total: f64 = full.singular_values.iter().map(|s| s * s).sum();
    let relative_projection_error = sys.basis.projection_error_sq(&snaps.matrix) / total;

    let k_rom = cfg.rom.modes.min(dim);
    let mut points = Vec::with_capacity(tests.len());
    for mu in &tests.points {
        let fem = cache.get(mu)?;
        let m = mass_for(op, mu)?;
        let lifted = sys.solve_lifted(op, mu, k_rom).context("stage: reduced solve")?;
        let matches = match_all(&lifted, fem, &m).context("stage: mode matching")?;
        points.push(PointRecord {
            mu: mu.clone(),
            fem_values: fem.values.clone(),
            relative_errors: (0..k_rom).map(|i| relative_error(lifted.values[i], fem.values[i])).collect(),
            rom_values: lifted.values,
            matches: matches
                .into_iter()
                .map(|mm| MatchRecord {
                    rom_mode: mm.rom_mode_index,
                    fem_mode: mm.matched_fem_index,
                    correlation: mm.correlation,
                    relative_error: mm.relative_value_error,
                })
                .collect(),
        });
    }

    let mut convergence = Vec::new();
    if let Some(c) = &cfg.convergence {
        let fem = cache.get(&c.mu)?;
        let m = mass_for(op, &c.mu)?;
        let list: Vec<usize> = match &c.n_list {
            Some(l) => l.iter().copied().filter(|&n| n <= rank).collect(),
            None => (1..=rank).collect(),
        };
        let modes = c.modes.unwrap_or(cfg.rom.modes);
        let rows = convergence_study(&full_sys, fem, &m, &list, modes).context("stage: convergence study")?;
        convergence = rows
            .into_iter()
            .map(|r| ConvergenceRecord {
                n: r.n,
                mode: r.mode,
                rom_value: r.rom_value,
                fem_value: r.fem_value,
                relative_error: r.relative_error,
                matched_fem_mode: r.matched.matched_fem_index,
                correlation: r.matched.correlation,
            })
            .collect();
    }

    let mut sweep_values = Vec::with_capacity(sweeps.len());
    for (sc, set) in cfg.sweeps.iter().zip(sweeps) {
        if !sc.rom {
            sweep_values.push(Vec::new());
            continue;
        }
        let vals = set
            .points
            .iter()
            .map(|mu| sys.solve(mu, k_rom).map(|r| r.values))
            .collect::<Result<Vec<_>, _>>()
            .context("stage: reduced sweep")?;
        sweep_values.push(vals);
    }

    Ok(RunReport {
        index: 0,
        training: String::new(),
        num_samples: samples.len(),
        strategy: strategy.label(),
        num_snapshots: snaps.num_snapshots(),
        rank,
        dim,
        singular_values: full.singular_values.clone(),
        relative_projection_error,
        points,
        convergence,
        sweep_values,
    })
}
