//! Randomized invariants of the POD / ROM pipeline.

use eigrom_core::diagnostics::{mode_match, relative_error};
use eigrom_core::eigensolve::solve_at;
use eigrom_core::fem::{AffineOperator, ProblemId};
use eigrom_core::linalg::DenseMatrix;
use eigrom_core::mesh::{Diagonal, TriMesh};
use eigrom_core::pod::{collect_snapshots, gram_svd, select_dim, truncate, SnapshotStrategy};
use eigrom_core::rom::RomSystem;
use eigrom_core::sampling::SampleSet;
use proptest::prelude::*;

/// Singular values by one-sided Jacobi rotations, descending.
fn jacobi_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j).to_vec()).collect();
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = (0..m).map(|i| cols[p][i] * cols[q][i]).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    (*x, *y) = (c * *x - s * *y, s * *x + c * *y);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn matrix(rows: usize, cols: usize, rank: usize, seed: Vec<f64>) -> DenseMatrix {
    let take = |off: usize, r: usize, c: usize| {
        DenseMatrix::from_col_major(r, c, (0..r * c).map(|i| seed[(off + i) % seed.len()] + 0.01 * i as f64).collect())
    };
    let r = rank.min(rows).min(cols);
    take(0, rows, r).matmul(&take(7, r, cols))
}

fn matrices() -> impl Strategy<Value = DenseMatrix> {
    (2usize..40, 1usize..10, 1usize..10, prop::collection::vec(-1.0f64..1.0, 64))
        .prop_map(|(r, c, k, seed)| matrix(r, c, k, seed))
}

fn operator(id: ProblemId, n: usize, diagonal: Diagonal) -> AffineOperator {
    let problem = id.definition();
    let mesh = TriMesh::structured_with(problem.rect, n, n, diagonal).unwrap();
    AffineOperator::assemble(&problem, &mesh).unwrap()
}

/// Maps unit-cube coordinates into the interior of the problem's box.
fn param(id: ProblemId, u: &[f64]) -> Vec<f64> {
    let p = id.definition();
    (0..p.param_dim())
        .map(|d| p.domain.lower[d] + (p.domain.upper[d] - p.domain.lower[d]) * (0.02 + 0.96 * u[d]))
        .collect()
}

fn problems() -> impl Strategy<Value = (ProblemId, Diagonal)> {
    (
        prop_oneof![Just(ProblemId::OneParameter), Just(ProblemId::TwoParameter)],
        prop_oneof![Just(Diagonal::Right), Just(Diagonal::Alternating)],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schmidt_eckart_young_and_orthonormal_basis(s in matrices()) {
        let basis = gram_svd(&s).unwrap();
        let n = basis.dim();
        prop_assert!(basis.vectors.tr_matmul(&basis.vectors).max_abs_diff(&DenseMatrix::identity(n)) <= 1e-10);
        let total = s.frobenius_norm().powi(2);
        for k in 1..=n {
            let t = truncate(&basis, k).unwrap();
            let gap = (t.projection_error_sq(&s) - t.tail_energy()).abs();
            prop_assert!(gap <= 1e-8 * total, "k={} gap={}", k, gap / total);
        }
    }

    #[test]
    fn singular_values_match_jacobi_oracle(s in matrices()) {
        let basis = gram_svd(&s).unwrap();
        let oracle = jacobi_singular_values(&s);
        let s1 = oracle[0];
        for (i, sv) in basis.singular_values.iter().enumerate() {
            // Gram eigenvalues resolve sigma only to about sqrt(eps) sigma_1.
            prop_assert!((sv - oracle[i]).abs() <= 1e-7 * s1, "{} vs {}", sv, oracle[i]);
        }
        for rest in &oracle[basis.rank()..] {
            prop_assert!(*rest <= 1e-7 * s1);
        }
    }

    #[test]
    fn dimension_criterion_is_minimal(s in matrices(), e in 1e-12f64..0.5) {
        let sv = gram_svd(&s).unwrap().singular_values;
        let n = select_dim(&sv, e).unwrap();
        let total: f64 = sv.iter().map(|x| x * x).sum();
        let energy = |k: usize| sv[..k].iter().map(|x| x * x).sum::<f64>() / total;
        prop_assert!(energy(n) >= 1.0 - e);
        prop_assert!(n == 1 || energy(n - 1) < 1.0 - e);
        prop_assert!(select_dim(&sv, e / 10.0).unwrap() >= n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigensets_are_m_orthonormal_and_sign_fixed((id, diag) in problems(), u in prop::array::uniform2(0.0f64..1.0)) {
        let op = operator(id, 9, diag);
        let mu = param(id, &u);
        let (a, m) = op.evaluate(&mu).unwrap();
        let set = solve_at(&op, &mu, 5).unwrap();
        let check = set.check(&a, &m);
        prop_assert!(check.orthonormality <= 1e-10);
        prop_assert!(check.residual <= 1e-9);
        for j in 0..set.len() {
            let v = set.vector(j);
            let max = v.iter().fold(0.0f64, |x, y| x.max(y.abs()));
            let first = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-9)).unwrap();
            prop_assert!(*first > 0.0);
        }
    }

    #[test]
    fn galerkin_bound_and_training_exactness(
        (id, diag) in problems(),
        train in prop::collection::vec(prop::array::uniform2(0.0f64..1.0), 2..6),
        probe in prop::array::uniform2(0.0f64..1.0),
        cut in 0.0f64..1.0,
    ) {
        let op = operator(id, 8, diag);
        let points: Vec<Vec<f64>> = train.iter().map(|u| param(id, u)).collect();
        let Ok(samples) = SampleSet::explicit(points) else { return Ok(()) };
        let snaps = collect_snapshots(&op, &samples, &SnapshotStrategy::Modes(vec![1, 2, 3]), 3).unwrap();
        let basis = gram_svd(&snaps.matrix).unwrap();
        let rom = RomSystem::project(&op, &basis).unwrap();
        for mu in &samples.points {
            let fem = solve_at(&op, mu, 3).unwrap();
            let red = rom.solve(mu, 3).unwrap();
            for i in 0..3 {
                prop_assert!(relative_error(red.values[i], fem.values[i]) <= 1e-9);
            }
        }
        let n = 3 + ((basis.rank() - 3) as f64 * cut) as usize;
        let sys = rom.truncated(n).unwrap();
        let mu = param(id, &probe);
        let fem = solve_at(&op, &mu, 3).unwrap();
        let red = sys.solve(&mu, 3).unwrap();
        for i in 0..3 {
            prop_assert!(red.values[i] >= fem.values[i] * (1.0 - 1e-9));
        }
    }

    #[test]
    fn combination_column_is_sum_of_eigenvectors((id, diag) in problems(), u in prop::array::uniform2(0.0f64..1.0)) {
        let op = operator(id, 7, diag);
        let mu = param(id, &u);
        let samples = SampleSet::explicit(vec![mu.clone()]).unwrap();
        let snaps = collect_snapshots(&op, &samples, &SnapshotStrategy::sum_of_first(3), 4).unwrap();
        let set = solve_at(&op, &mu, 3).unwrap();
        for r in 0..op.dim() {
            let expect = set.vectors[(r, 0)] + set.vectors[(r, 1)] + set.vectors[(r, 2)];
            prop_assert!((snaps.matrix[(r, 0)] - expect).abs() <= 1e-14);
        }
    }

    #[test]
    fn mode_match_ignores_scale_and_sign(u in prop::array::uniform2(0.0f64..1.0), alpha in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0], w in prop::array::uniform3(-1.0f64..1.0)) {
        let id = ProblemId::OneParameter;
        let op = operator(id, 8, Diagonal::Alternating);
        let mu = param(id, &u);
        let fem = solve_at(&op, &mu, 3).unwrap();
        let m = op.mass_at(&mu).unwrap();
        let v: Vec<f64> = (0..op.dim()).map(|r| (0..3).map(|j| w[j] * fem.vectors[(r, j)]).sum()).collect();
        prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
        let scaled: Vec<f64> = v.iter().map(|x| alpha * x).collect();
        let a = mode_match(1, fem.values[0], &v, &fem, &m).unwrap();
        let b = mode_match(1, fem.values[0], &scaled, &fem, &m).unwrap();
        prop_assert_eq!(a.matched_fem_index, b.matched_fem_index);
        prop_assert!((a.correlation - b.correlation).abs() <= 1e-12);
    }
}
