//! Named configurations for every table of the one- and two-parameter studies.

use crate::config::{
    ConvergenceConfig, ExperimentConfig, MeshConfig, RomConfig, StrategyConfig, SweepConfig, TrainingConfig,
};

const EPS_TOL: f64 = 1e-8;

fn modes(m: &[usize]) -> StrategyConfig {
    StrategyConfig::Modes { modes: m.to_vec() }
}

fn sum(m: &[usize]) -> StrategyConfig {
    StrategyConfig::Combination {
        modes: m.to_vec(),
        coeffs: None,
    }
}

fn one_param(name: &str, description: &str, strategies: Vec<StrategyConfig>, rom_modes: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        description: description.into(),
        problem: "problem_1d".into(),
        k: 6,
        mesh: MeshConfig {
            n: None,
            h: Some(0.05),
            diagonal: "alternating".into(),
        },
        training: [0.1, 0.05]
            .iter()
            .map(|&step| TrainingConfig::Uniform1d { a: -1.4, b: 1.4, step })
            .collect(),
        strategies,
        rom: RomConfig {
            eps_tol: Some(EPS_TOL),
            n: None,
            full_rank: false,
            modes: rom_modes,
        },
        test_points: None,
        sweeps: Vec::new(),
        convergence: Some(ConvergenceConfig {
            mu: vec![1.25],
            n_list: None,
            modes: None,
        }),
        output_dir: None,
    }
}

fn two_param(name: &str, description: &str, strategy: StrategyConfig, rom_modes: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        description: description.into(),
        problem: "problem_2d".into(),
        k: 6,
        mesh: MeshConfig {
            n: None,
            h: Some(0.05),
            diagonal: "alternating".into(),
        },
        training: [5, 7].iter().map(|&c| TrainingConfig::Grid2d { counts: [c, c] }).collect(),
        strategies: vec![strategy],
        rom: RomConfig {
            eps_tol: Some(EPS_TOL),
            n: None,
            full_rank: false,
            modes: rom_modes,
        },
        test_points: None,
        sweeps: [0.6, 0.8]
            .iter()
            .map(|&mu2| SweepConfig {
                axis: 0,
                base: vec![0.4, mu2],
                a: 0.4,
                b: 1.0,
                step: 0.01,
                rom: true,
            })
            .collect(),
        convergence: Some(ConvergenceConfig {
            mu: vec![0.5, 0.6],
            n_list: None,
            modes: None,
        }),
        output_dir: None,
    }
}

/// Every preset, in presentation order.
pub fn all() -> Vec<ExperimentConfig> {
    let mut out = vec![
        one_param("table1", "lambda1 from u1 snapshots", vec![modes(&[1])], 1),
        one_param("table2", "lambda2 from u2 snapshots", vec![modes(&[2])], 2),
        one_param("table3", "lambda2 from u1+u2 snapshots", vec![sum(&[1, 2])], 2),
        one_param("table4", "lambda3 from u3 snapshots", vec![modes(&[3])], 3),
        one_param("table5", "lambda3, lambda4 from u3, u4 snapshots", vec![modes(&[3, 4])], 4),
        one_param("table6", "lambda1..3 from u1, u2, u3 snapshots", vec![modes(&[1, 2, 3])], 3),
        one_param("table7", "lambda1..3 from u1+u2+u3 snapshots", vec![sum(&[1, 2, 3])], 3),
        one_param(
            "table8",
            "lambda3: u1, u2, u3 against u1+u2+u3 snapshots",
            vec![modes(&[1, 2, 3]), sum(&[1, 2, 3])],
            3,
        ),
        one_param("table9", "lambda4 from u4 snapshots", vec![modes(&[4])], 4),
        one_param("table10", "lambda3, lambda4 from u3, u4 snapshots", vec![modes(&[3, 4])], 4),
        one_param("table11", "lambda1..4 from u1..u4 snapshots", vec![modes(&[1, 2, 3, 4])], 4),
        one_param("table12", "lambda1..4 from u1+..+u4 snapshots", vec![sum(&[1, 2, 3, 4])], 4),
        one_param(
            "table13",
            "lambda4: u1..u4 against u1+..+u4 snapshots",
            vec![modes(&[1, 2, 3, 4]), sum(&[1, 2, 3, 4])],
            4,
        ),
    ];
    let mut fig3 = one_param(
        "fig3",
        "first six sorted eigenvalues along mu = -1.4:0.01:1.4 with ROM curves",
        vec![modes(&[1]), modes(&[3]), modes(&[1, 2, 3])],
        3,
    );
    fig3.training.truncate(1);
    fig3.convergence = None;
    fig3.sweeps = vec![SweepConfig {
        axis: 0,
        base: Vec::new(),
        a: -1.4,
        b: 1.4,
        step: 0.01,
        rom: true,
    }];
    out.push(fig3);
    out.extend([
        two_param("u1", "lambda1 from u1 snapshots", modes(&[1]), 1),
        two_param("u2", "lambda2 from u2 snapshots", modes(&[2]), 2),
        two_param("u3", "lambda3 from u3 snapshots", modes(&[3]), 3),
        two_param("u13", "lambda1..3 from u1, u2, u3 snapshots", modes(&[1, 2, 3]), 3),
        two_param("au3", "lambda1..3 from u1+u2+u3 snapshots", sum(&[1, 2, 3]), 3),
        two_param("u4", "lambda4 from u4 snapshots", modes(&[4]), 4),
        two_param("u34", "lambda3, lambda4 from u3, u4 snapshots", modes(&[3, 4]), 4),
        two_param("u14", "lambda1..4 from u1..u4 snapshots", modes(&[1, 2, 3, 4]), 4),
        two_param("au4", "lambda1..4 from u1+..+u4 snapshots", sum(&[1, 2, 3, 4]), 4),
    ]);
    out
}

pub fn get(name: &str) -> Option<ExperimentConfig> {
    all().into_iter().find(|c| c.name == name)
}

pub fn names() -> Vec<String> {
    all().into_iter().map(|c| c.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_unique() {
        let all = all();
        assert_eq!(all.len(), 13 + 1 + 9);
        for c in &all {
            c.validate().unwrap_or_else(|e| panic!("{}: {e:#}", c.name));
            let back = ExperimentConfig::from_toml_str(&c.to_toml()).unwrap();
            assert_eq!(&back, c);
        }
        let mut names = names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
        assert!(get("table7").is_some() && get("au4").is_some() && get("nope").is_none());
    }
}
