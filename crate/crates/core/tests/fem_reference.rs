//! High-fidelity discretization against closed forms and a dense reference
//! assembly written independently of the library.

use std::f64::consts::PI;

use eigrom_core::eigensolve::{solve_at, solve_gevp};
use eigrom_core::fem::{assemble_mass, assemble_stiffness_term, AffineOperator, ProblemDef, ProblemId, Tensor2};
use eigrom_core::linalg::DenseMatrix;
use eigrom_core::mesh::{Diagonal, Rect, TriMesh};

/// Dense P1 stiffness and consistent mass on the interior vertices.
fn dense_reference(mesh: &TriMesh, d: Tensor2) -> (DenseMatrix, DenseMatrix) {
    let n = mesh.interior_index.iter().flatten().count();
    let mut k = DenseMatrix::zeros(n, n);
    let mut m = DenseMatrix::zeros(n, n);
    for tri in &mesh.triangles {
        let p = tri.map(|v| mesh.vertices[v]);
        let (ax, ay) = (p[1][0] - p[0][0], p[1][1] - p[0][1]);
        let (bx, by) = (p[2][0] - p[0][0], p[2][1] - p[0][1]);
        let det = ax * by - ay * bx;
        let area = 0.5 * det.abs();
        // Rows of B^{-T} are the gradients of the barycentric coordinates 1 and 2.
        let g1 = [by / det, -bx / det];
        let g2 = [-ay / det, ax / det];
        let g = [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2];
        for a in 0..3 {
            let Some(i) = mesh.interior_index[tri[a]] else { continue };
            for b in 0..3 {
                let Some(j) = mesh.interior_index[tri[b]] else { continue };
                let dg = [
                    d[0][0] * g[b][0] + d[0][1] * g[b][1],
                    d[1][0] * g[b][0] + d[1][1] * g[b][1],
                ];
                k[(i, j)] += area * (g[a][0] * dg[0] + g[a][1] * dg[1]);
                m[(i, j)] += area / 12.0 * if a == b { 2.0 } else { 1.0 };
            }
        }
    }
    (k, m)
}

fn scale(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().fold(0.0f64, |x, v| x.max(v.abs()))
}

#[test]
fn affine_operator_matches_dense_reference() {
    for id in [ProblemId::OneParameter, ProblemId::TwoParameter] {
        let problem: ProblemDef = id.definition();
        for diagonal in [Diagonal::Right, Diagonal::Alternating] {
            let mesh = TriMesh::structured_with(problem.rect, 7, 6, diagonal).unwrap();
            let op = AffineOperator::assemble(&problem, &mesh).unwrap();
            let mus: Vec<Vec<f64>> = match id {
                ProblemId::OneParameter => vec![vec![-1.3], vec![0.0], vec![0.77]],
                ProblemId::TwoParameter => vec![vec![0.4, 1.0], vec![0.55, 0.61], vec![1.0, 0.45]],
            };
            for mu in mus {
                let (k_ref, m_ref) = dense_reference(&mesh, problem.diffusion_tensor(&mu));
                let (a, m) = op.evaluate(&mu).unwrap();
                assert!(a.to_dense().max_abs_diff(&k_ref) <= 1e-12 * scale(&k_ref), "{id:?} {diagonal:?} {mu:?}");
                assert!(m.to_dense().max_abs_diff(&m_ref) <= 1e-12 * scale(&m_ref));
            }
        }
    }
}

fn laplacian(n: usize, diagonal: Diagonal) -> Vec<f64> {
    let mesh = TriMesh::structured_with(Rect::unit_square(), n, n, diagonal).unwrap();
    let a = assemble_stiffness_term(&mesh, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let m = assemble_mass(&mesh).unwrap();
    solve_gevp(&a, &m, 3).unwrap().values
}

#[test]
fn dirichlet_laplacian_converges_at_second_order() {
    let (l1, l23) = (2.0 * PI * PI, 5.0 * PI * PI);
    for diagonal in [Diagonal::Right, Diagonal::Alternating] {
        let fine = laplacian(20, diagonal);
        let coarse = laplacian(10, diagonal);
        assert!(fine[0] >= l1 && fine[0] <= l1 * 1.015, "{diagonal:?}: {}", fine[0]);
        for v in &fine[1..3] {
            assert!(*v >= l23 && *v <= l23 * 1.02, "{diagonal:?}: {v}");
        }
        let ratio = (coarse[0] - l1) / (fine[0] - l1);
        assert!((3.5..=4.5).contains(&ratio), "{diagonal:?}: ratio {ratio}");
    }
}

#[test]
fn alternating_mesh_respects_mirror_symmetry() {
    let problem = ProblemId::OneParameter.definition();
    let mesh = TriMesh::structured_with(problem.rect, 16, 16, Diagonal::Alternating).unwrap();
    let op = AffineOperator::assemble(&problem, &mesh).unwrap();
    let plus = solve_at(&op, &[0.5], 4).unwrap();
    let minus = solve_at(&op, &[-0.5], 4).unwrap();
    for i in 0..4 {
        assert!((plus.values[i] - minus.values[i]).abs() <= 1e-10 * plus.values[i]);
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let problem = ProblemId::TwoParameter.definition();
    let mesh = TriMesh::structured_with(problem.rect, 18, 18, Diagonal::Alternating).unwrap();
    let op = AffineOperator::assemble(&problem, &mesh).unwrap();
    let a = solve_at(&op, &[0.63, 0.71], 5).unwrap();
    let b = solve_at(&op, &[0.63, 0.71], 5).unwrap();
    assert_eq!(a, b);
}
