//! ROM-vs-FEM comparison, mode matching and mode tracking along sweeps.

use alloc::vec::Vec;

use crate::eigensolve::EigenSet;
use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;
use crate::rom::RomSystem;

/// Ties in [`mode_match`] closer than this go to the smaller index.
pub const MATCH_TIE_TOLERANCE: f64 = 1e-12;
/// Correlation gap below which [`track_sweep`] refuses to choose.
pub const TRACK_AMBIGUITY: f64 = 1e-6;

/// `|rom - fem| / fem`.
pub fn relative_error(rom: f64, fem: f64) -> f64 {
    (rom - fem).abs() / fem
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMatch {
    /// 1-based.
    pub rom_mode_index: usize,
    /// 1-based.
    pub matched_fem_index: usize,
    pub correlation: f64,
    /// Against the matched FEM eigenvalue.
    pub relative_value_error: f64,
}

/// `|<x, y>_M| / (||x||_M ||y||_M)`.
pub fn correlation(x: &[f64], y: &[f64], m: &SparseSymMatrix) -> Result<f64> {
    let nx = m.inner(x, x);
    let ny = m.inner(y, y);
    if !(nx > 0.0) || !(ny > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(m.inner(x, y).abs() / libm::sqrt(nx * ny))
}

/// FEM mode best aligned with `v` in the M-inner product.
pub fn mode_match(rom_mode_index: usize, rom_value: f64, v: &[f64], fem: &EigenSet, m: &SparseSymMatrix) -> Result<ModeMatch> {
    if fem.is_empty() {
        return Err(Error::invalid("FEM eigenset is empty"));
    }
    if v.len() != fem.space_dim() || m.dim() != v.len() {
        return Err(Error::DimensionMismatch {
            context: "mode_match vector",
            expected: fem.space_dim(),
            found: v.len(),
        });
    }
    let mut best = (0, f64::NEG_INFINITY);
    for j in 0..fem.len() {
        let c = correlation(v, fem.vector(j), m)?;
        if c > best.1 + MATCH_TIE_TOLERANCE {
            best = (j, c);
        }
    }
    Ok(ModeMatch {
        rom_mode_index,
        matched_fem_index: best.0 + 1,
        correlation: best.1,
        relative_value_error: relative_error(rom_value, fem.values[best.0]),
    })
}

/// Matches every mode of a lifted ROM eigenset.
pub fn match_all(rom: &EigenSet, fem: &EigenSet, m: &SparseSymMatrix) -> Result<Vec<ModeMatch>> {
    (0..rom.len())
        .map(|i| mode_match(i + 1, rom.values[i], rom.vector(i), fem, m))
        .collect()
}

/// Continuity-consistent labels along an ordered sweep.
///
/// Entry `[s][i]` is the tracked label (0-based) of the `i`-th sorted mode at
/// sweep point `s`. The first point gets the identity. Consecutive points are
/// linked by greedily pairing the largest remaining M-correlations.
pub fn track_sweep(sets: &[EigenSet], m: &SparseSymMatrix) -> Result<Vec<Vec<usize>>> {
    let Some(first) = sets.first() else {
        return Ok(Vec::new());
    };
    let k = first.len();
    let mut out = Vec::with_capacity(sets.len());
    out.push((0..k).collect::<Vec<_>>());
    for s in 1..sets.len() {
        let (prev, next) = (&sets[s - 1], &sets[s]);
        if next.len() != k || next.space_dim() != prev.space_dim() {
            return Err(Error::DimensionMismatch {
                context: "sweep eigenset size",
                expected: k,
                found: next.len(),
            });
        }
        let mut corr = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                corr.push(correlation(prev.vector(i), next.vector(j), m)?);
            }
        }
        let mut row_free = alloc::vec![true; k];
        let mut col_free = alloc::vec![true; k];
        let mut labels = alloc::vec![usize::MAX; k];
        for _ in 0..k {
            let mut best = (0, 0, f64::NEG_INFINITY);
            for i in (0..k).filter(|&i| row_free[i]) {
                for j in (0..k).filter(|&j| col_free[j]) {
                    if corr[i * k + j] > best.2 {
                        best = (i, j, corr[i * k + j]);
                    }
                }
            }
            let (bi, bj, bc) = best;
            let runner_up = (0..k)
                .filter(|&j| col_free[j] && j != bj)
                .map(|j| corr[bi * k + j])
                .chain((0..k).filter(|&i| row_free[i] && i != bi).map(|i| corr[i * k + bj]))
                .fold(f64::NEG_INFINITY, f64::max);
            if bc - runner_up < TRACK_AMBIGUITY {
                return Err(Error::AmbiguousAssignment {
                    step: s,
                    mode: bi + 1,
                    best: bc,
                    runner_up,
                });
            }
            labels[bj] = out[s - 1][bi];
            row_free[bi] = false;
            col_free[bj] = false;
        }
        out.push(labels);
    }
    Ok(out)
}

/// One `(N, mode)` entry of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// 1-based.
    pub mode: usize,
    pub rom_value: f64,
    /// FEM eigenvalue with the same index.
    pub fem_value: f64,
    pub relative_error: f64,
    pub matched: ModeMatch,
}

/// Re-truncates `rom` to every `N` in `n_list` and compares the first
/// `modes` reduced eigenpairs at `fem.mu` with the reference set.
pub fn convergence_study(rom: &RomSystem, fem: &EigenSet, m: &SparseSymMatrix, n_list: &[usize], modes: usize) -> Result<Vec<ConvergenceRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("N list must be strictly ascending"));
    }
    if modes == 0 || modes > fem.len() {
        return Err(Error::invalid("modes must lie in 1..=number of FEM eigenpairs"));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        let sys = rom.truncated(n)?;
        let k = modes.min(n);
        let reduced = sys.solve(&fem.mu, k)?;
        let lifted = sys.lift(&reduced, m);
        for i in 0..k {
            let matched = mode_match(i + 1, lifted.values[i], lifted.vector(i), fem, m)?;
            rows.push(ConvergenceRow {
                n,
                mode: i + 1,
                rom_value: lifted.values[i],
                fem_value: fem.values[i],
                relative_error: relative_error(lifted.values[i], fem.values[i]),
                matched,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use alloc::vec;

    fn unit_set(cols: &[Vec<f64>], values: &[f64]) -> EigenSet {
        EigenSet {
            mu: vec![0.0],
            values: values.to_vec(),
            vectors: DenseMatrix::from_columns(cols[0].len(), cols),
        }
    }

    fn eye(n: usize) -> SparseSymMatrix {
        SparseSymMatrix::from_dense(&DenseMatrix::identity(n))
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(3.0, 3.0), 0.0);
        assert!((relative_error(5.98379387, 5.98379108) - 4.7e-7).abs() < 0.05e-7);
        assert!((relative_error(8.78969339, 8.77547249) - 1.6e-3).abs() < 0.05e-3);
    }

    #[test]
    fn exact_and_mixed_matches() {
        let fem = unit_set(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], &[1.0, 2.0, 3.0]);
        let m = eye(3);
        let mm = mode_match(1, 2.0, &[0.0, -1.0, 0.0], &fem, &m).unwrap();
        assert_eq!((mm.matched_fem_index, mm.correlation, mm.relative_value_error), (2, 1.0, 0.0));
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mm = mode_match(1, 1.5, &[s, s, 0.0], &fem, &m).unwrap();
        assert_eq!(mm.matched_fem_index, 1);
        assert!((mm.correlation - s).abs() < 1e-15);
        let scaled = mode_match(1, 1.5, &[-7.0 * s, -7.0 * s, 0.0], &fem, &m).unwrap();
        assert_eq!(scaled.matched_fem_index, mm.matched_fem_index);
        assert!((scaled.correlation - mm.correlation).abs() < 1e-15);
        assert_eq!(mode_match(1, 1.0, &[0.0; 3], &fem, &m).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn tracking_follows_swapped_vectors() {
        let m = eye(3);
        let a = unit_set(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], &[1.0, 2.0, 3.0]);
        let b = unit_set(&[vec![0.0, 1.0, 0.1], vec![1.0, 0.0, 0.0], vec![0.0, -0.1, 1.0]], &[1.0, 2.0, 3.0]);
        let perms = track_sweep(&[a.clone(), b.clone(), a.clone()], &m).unwrap();
        assert_eq!(perms, vec![vec![0, 1, 2], vec![1, 0, 2], vec![0, 1, 2]]);
        assert_eq!(track_sweep(core::slice::from_ref(&a), &m).unwrap(), vec![vec![0, 1, 2]]);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let c = unit_set(&[vec![s, s, 0.0], vec![s, -s, 0.0], vec![0.0, 0.0, 1.0]], &[1.0, 2.0, 3.0]);
        assert!(matches!(track_sweep(&[a, c], &m), Err(Error::AmbiguousAssignment { .. })));
    }
}
