//! P1 finite element assembly and the affine parameter decomposition
//! `A_h(mu) = sum_k theta_k(mu) A_h^k`, `M_h(mu) = sum_k Theta_k(mu) M_h^k`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;
use crate::mesh::{Rect, TriMesh};

/// Symmetric 2x2 diffusion tensor, row-major.
pub type Tensor2 = [[f64; 2]; 2];

/// Scalar coefficient function of the parameter vector.
#[derive(Clone, Copy, Debug)]
pub struct Coefficient {
    pub label: &'static str,
    pub eval: fn(&[f64]) -> f64,
}

impl Coefficient {
    pub const ONE: Coefficient = Coefficient {
        label: "1",
        eval: |_| 1.0,
    };

    #[inline]
    pub fn at(&self, mu: &[f64]) -> f64 {
        (self.eval)(mu)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DiffusionTerm {
    pub tensor: Tensor2,
    pub coeff: Coefficient,
}

/// Closed box `[lower_i, upper_i]` in parameter space.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamBox {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        mu.len() == self.dim() && mu.iter().zip(self.lower.iter().zip(&self.upper)).all(|(m, (lo, hi))| lo <= m && m <= hi)
    }

    pub fn strictly_contains(&self, mu: &[f64]) -> bool {
        mu.len() == self.dim() && mu.iter().zip(self.lower.iter().zip(&self.upper)).all(|(m, (lo, hi))| lo < m && m < hi)
    }
}

/// Which concrete problem a definition describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemId {
    /// `A(mu) = [[1, mu], [mu, 2]]` on `(-1, 1)^2`, `|mu| < sqrt(2)`.
    OneParameter,
    /// `A(mu) = [[1/mu1^2, 0.7/mu2], [0.7/mu2, 1/mu2^2]]` on `(0, 1)^2`.
    TwoParameter,
}

impl ProblemId {
    pub fn name(self) -> &'static str {
        match self {
            ProblemId::OneParameter => "problem_1d",
            ProblemId::TwoParameter => "problem_2d",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "problem_1d" => Some(ProblemId::OneParameter),
            "problem_2d" => Some(ProblemId::TwoParameter),
            _ => None,
        }
    }

    pub fn definition(self) -> ProblemDef {
        match self {
            ProblemId::OneParameter => build_problem_1d(),
            ProblemId::TwoParameter => build_problem_2d(),
        }
    }
}

/// A parametric diffusion eigenproblem `-div(A(mu) grad u) = lambda u` with
/// homogeneous Dirichlet conditions and affine `A(mu)`.
#[derive(Clone, Debug)]
pub struct ProblemDef {
    pub id: ProblemId,
    pub rect: Rect,
    pub diffusion_terms: Vec<DiffusionTerm>,
    /// Mass coefficients `Theta_k`; one constant term for both problems.
    pub mass_coeffs: Vec<Coefficient>,
    /// Training / sweep domain.
    pub domain: ParamBox,
}

impl ProblemDef {
    pub fn param_dim(&self) -> usize {
        self.domain.dim()
    }

    /// `sum_k theta_k(mu) D_k`.
    pub fn diffusion_tensor(&self, mu: &[f64]) -> Tensor2 {
        let mut a = [[0.0; 2]; 2];
        for term in &self.diffusion_terms {
            let c = term.coeff.at(mu);
            for r in 0..2 {
                for s in 0..2 {
                    a[r][s] += c * term.tensor[r][s];
                }
            }
        }
        a
    }

    /// `mu` is admissible when the diffusion tensor is finite and symmetric
    /// positive definite.
    pub fn is_admissible(&self, mu: &[f64]) -> bool {
        if mu.len() != self.param_dim() || mu.iter().any(|m| !m.is_finite()) {
            return false;
        }
        let a = self.diffusion_tensor(mu);
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        a.iter().flatten().all(|v| v.is_finite()) && a[0][0] > 0.0 && det > 0.0
    }

    pub fn check_admissible(&self, mu: &[f64]) -> Result<()> {
        if self.is_admissible(mu) {
            Ok(())
        } else {
            Err(Error::Inadmissible { mu: mu.to_vec() })
        }
    }
}

fn theta_one(_: &[f64]) -> f64 {
    1.0
}

fn theta_mu(mu: &[f64]) -> f64 {
    mu[0]
}

fn theta_inv_mu1_sq(mu: &[f64]) -> f64 {
    1.0 / (mu[0] * mu[0])
}

fn theta_07_over_mu2(mu: &[f64]) -> f64 {
    0.7 / mu[1]
}

fn theta_inv_mu2_sq(mu: &[f64]) -> f64 {
    1.0 / (mu[1] * mu[1])
}

/// One-parameter problem on `(-1, 1)^2`.
pub fn build_problem_1d() -> ProblemDef {
    let s2 = core::f64::consts::SQRT_2;
    ProblemDef {
        id: ProblemId::OneParameter,
        rect: Rect::centered_square(),
        diffusion_terms: alloc::vec![
            DiffusionTerm {
                tensor: [[1.0, 0.0], [0.0, 2.0]],
                coeff: Coefficient {
                    label: "1",
                    eval: theta_one,
                },
            },
            DiffusionTerm {
                tensor: [[0.0, 1.0], [1.0, 0.0]],
                coeff: Coefficient {
                    label: "mu",
                    eval: theta_mu,
                },
            },
        ],
        mass_coeffs: alloc::vec![Coefficient::ONE],
        domain: ParamBox {
            lower: alloc::vec![-s2],
            upper: alloc::vec![s2],
        },
    }
}

/// Two-parameter problem on `(0, 1)^2` with training box `[0.4, 1]^2`.
pub fn build_problem_2d() -> ProblemDef {
    ProblemDef {
        id: ProblemId::TwoParameter,
        rect: Rect::unit_square(),
        diffusion_terms: alloc::vec![
            DiffusionTerm {
                tensor: [[1.0, 0.0], [0.0, 0.0]],
                coeff: Coefficient {
                    label: "1/mu1^2",
                    eval: theta_inv_mu1_sq,
                },
            },
            DiffusionTerm {
                tensor: [[0.0, 1.0], [1.0, 0.0]],
                coeff: Coefficient {
                    label: "0.7/mu2",
                    eval: theta_07_over_mu2,
                },
            },
            DiffusionTerm {
                tensor: [[0.0, 0.0], [0.0, 1.0]],
                coeff: Coefficient {
                    label: "1/mu2^2",
                    eval: theta_inv_mu2_sq,
                },
            },
        ],
        mass_coeffs: alloc::vec![Coefficient::ONE],
        domain: ParamBox {
            lower: alloc::vec![0.4, 0.4],
            upper: alloc::vec![1.0, 1.0],
        },
    }
}

/// Gradients of the three barycentric basis functions on triangle `t`, and
/// its area.
fn p1_gradients(mesh: &TriMesh, t: usize) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = mesh.triangles[t];
    let (p0, p1, p2) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
    let area = mesh.signed_area(t);
    let s = 1.0 / (2.0 * area);
    (
        [
            [(p1[1] - p2[1]) * s, (p2[0] - p1[0]) * s],
            [(p2[1] - p0[1]) * s, (p0[0] - p2[0]) * s],
            [(p0[1] - p1[1]) * s, (p1[0] - p0[0]) * s],
        ],
        area,
    )
}

/// Scatters a local 3x3 matrix into the interior-DOF upper-triangle map.
fn scatter(mesh: &TriMesh, t: usize, local: &[[f64; 3]; 3], upper: &mut BTreeMap<(usize, usize), f64>) {
    let tri = mesh.triangles[t];
    for a in 0..3 {
        let Some(ia) = mesh.interior_index[tri[a]] else {
            continue;
        };
        for b in 0..3 {
            let Some(ib) = mesh.interior_index[tri[b]] else {
                continue;
            };
            if ia <= ib {
                *upper.entry((ia, ib)).or_insert(0.0) += local[a][b];
            }
        }
    }
}

/// Stiffness matrix of `int (D grad u) . grad v` over interior DOFs.
pub fn assemble_stiffness_term(mesh: &TriMesh, d: Tensor2) -> Result<SparseSymMatrix> {
    if mesh.num_interior() == 0 {
        return Err(Error::EmptySystem);
    }
    if d[0][1] != d[1][0] {
        return Err(Error::invalid("diffusion tensor must be symmetric"));
    }
    let mut upper = BTreeMap::new();
    for t in 0..mesh.triangles.len() {
        let (g, area) = p1_gradients(mesh, t);
        let mut local = [[0.0; 3]; 3];
        for b in 0..3 {
            let dg = [d[0][0] * g[b][0] + d[0][1] * g[b][1], d[1][0] * g[b][0] + d[1][1] * g[b][1]];
            for a in 0..3 {
                local[a][b] = area * (dg[0] * g[a][0] + dg[1] * g[a][1]);
            }
        }
        scatter(mesh, t, &local, &mut upper);
    }
    Ok(SparseSymMatrix::from_upper_map(mesh.num_interior(), &upper))
}

fn local_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// Consistent P1 mass matrix over interior DOFs.
pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseSymMatrix> {
    if mesh.num_interior() == 0 {
        return Err(Error::EmptySystem);
    }
    let mut upper = BTreeMap::new();
    for t in 0..mesh.triangles.len() {
        scatter(mesh, t, &local_mass(mesh.signed_area(t)), &mut upper);
    }
    Ok(SparseSymMatrix::from_upper_map(mesh.num_interior(), &upper))
}

/// Consistent mass matrix over all vertices, before Dirichlet elimination.
pub fn assemble_mass_all_vertices(mesh: &TriMesh) -> SparseSymMatrix {
    let mut upper = BTreeMap::new();
    for t in 0..mesh.triangles.len() {
        let local = local_mass(mesh.signed_area(t));
        let tri = mesh.triangles[t];
        for a in 0..3 {
            for b in 0..3 {
                if tri[a] <= tri[b] {
                    *upper.entry((tri[a], tri[b])).or_insert(0.0) += local[a][b];
                }
            }
        }
    }
    SparseSymMatrix::from_upper_map(mesh.num_vertices(), &upper)
}

/// Parameter-independent matrices of an affine problem on a fixed mesh.
#[derive(Clone, Debug)]
pub struct AffineOperator {
    pub problem: ProblemDef,
    pub stiffness_terms: Vec<(SparseSymMatrix, Coefficient)>,
    pub mass_terms: Vec<(SparseSymMatrix, Coefficient)>,
}

impl AffineOperator {
    /// Assembles every `A_h^k` and `M_h^k` once.
    pub fn assemble(problem: &ProblemDef, mesh: &TriMesh) -> Result<Self> {
        let stiffness_terms = problem
            .diffusion_terms
            .iter()
            .map(|t| Ok((assemble_stiffness_term(mesh, t.tensor)?, t.coeff)))
            .collect::<Result<Vec<_>>>()?;
        let mass = assemble_mass(mesh)?;
        let mass_terms = problem.mass_coeffs.iter().map(|c| (mass.clone(), *c)).collect();
        Ok(Self {
            problem: problem.clone(),
            stiffness_terms,
            mass_terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.stiffness_terms[0].0.dim()
    }

    pub fn stiffness_at(&self, mu: &[f64]) -> Result<SparseSymMatrix> {
        self.problem.check_admissible(mu)?;
        Ok(combine(&self.stiffness_terms, mu))
    }

    pub fn mass_at(&self, mu: &[f64]) -> Result<SparseSymMatrix> {
        self.problem.check_admissible(mu)?;
        Ok(combine(&self.mass_terms, mu))
    }

    /// `(A_h(mu), M_h(mu))`.
    pub fn evaluate(&self, mu: &[f64]) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
        self.problem.check_admissible(mu)?;
        Ok((combine(&self.stiffness_terms, mu), combine(&self.mass_terms, mu)))
    }

    /// The mass matrix when it carries a single constant term.
    pub fn constant_mass(&self) -> Option<&SparseSymMatrix> {
        match self.mass_terms.as_slice() {
            [(m, c)] if c.label == "1" => Some(m),
            _ => None,
        }
    }
}

fn combine(terms: &[(SparseSymMatrix, Coefficient)], mu: &[f64]) -> SparseSymMatrix {
    let weighted: Vec<(f64, &SparseSymMatrix)> = terms.iter().map(|(m, c)| (c.at(mu), m)).collect();
    SparseSymMatrix::linear_combination(&weighted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> TriMesh {
        TriMesh::structured(Rect::unit_square(), 2, 2).unwrap()
    }

    #[test]
    fn five_point_diagonal() {
        let k = assemble_stiffness_term(&unit2(), [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(k.dim(), 1);
        assert!((k.get(0, 0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_tensor_gives_zero_matrix() {
        let mesh = TriMesh::structured(Rect::unit_square(), 4, 3).unwrap();
        let k = assemble_stiffness_term(&mesh, [[0.0; 2]; 2]).unwrap();
        assert!(k.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn center_mass() {
        let m = assemble_mass(&unit2()).unwrap();
        assert!((m.get(0, 0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn partition_of_unity() {
        for (rect, n) in [(Rect::unit_square(), 5), (Rect::centered_square(), 8)] {
            let mesh = TriMesh::structured(rect, n, n + 1).unwrap();
            let m = assemble_mass_all_vertices(&mesh);
            let ones = alloc::vec![1.0; m.dim()];
            assert!((m.inner(&ones, &ones) - rect.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_system() {
        let mesh = TriMesh::structured(Rect::unit_square(), 1, 1).unwrap();
        assert_eq!(assemble_mass(&mesh).unwrap_err(), Error::EmptySystem);
        assert_eq!(
            assemble_stiffness_term(&mesh, [[1.0, 0.0], [0.0, 1.0]]).unwrap_err(),
            Error::EmptySystem
        );
    }

    #[test]
    fn problem_1d_terms() {
        let p = build_problem_1d();
        assert_eq!(p.diffusion_tensor(&[0.0]), [[1.0, 0.0], [0.0, 2.0]]);
        assert!(p.is_admissible(&[1.4]));
        assert!(!p.is_admissible(&[1.5]));
        assert!(!p.is_admissible(&[core::f64::consts::SQRT_2]));
        assert_eq!(p.diffusion_terms[1].coeff.at(&[-1.25]), -1.25);
    }

    #[test]
    fn problem_2d_terms() {
        let p = build_problem_2d();
        let th: Vec<f64> = p.diffusion_terms.iter().map(|t| t.coeff.at(&[0.5, 0.6])).collect();
        assert!((th[0] - 4.0).abs() < 1e-15);
        assert!((th[1] - 0.7 / 0.6).abs() < 1e-15);
        assert!((th[2] - 1.0 / 0.36).abs() < 1e-14);
        assert!((p.diffusion_terms[1].coeff.at(&[0.5, 0.7]) - 1.0).abs() < 1e-15);
        // det = (1/mu1^2 - 0.49) / mu2^2 is smallest at mu1 = 1
        for &m1 in &[0.4, 0.7, 1.0] {
            for &m2 in &[0.4, 0.7, 1.0] {
                assert!(p.is_admissible(&[m1, m2]));
            }
        }
        assert!(!p.is_admissible(&[0.5]));
    }

    #[test]
    fn affine_evaluation() {
        let p = build_problem_1d();
        let mesh = TriMesh::structured(p.rect, 6, 6).unwrap();
        let op = AffineOperator::assemble(&p, &mesh).unwrap();
        let (a0, m0) = op.evaluate(&[0.0]).unwrap();
        assert_eq!(a0, op.stiffness_terms[0].0);
        assert_eq!(&m0, op.constant_mass().unwrap());
        let ap = op.stiffness_at(&[0.5]).unwrap();
        let am = op.stiffness_at(&[-0.5]).unwrap();
        for (i, j, v) in op.stiffness_terms[1].0.upper_entries() {
            assert!((ap.get(i, j) - am.get(i, j) - v).abs() <= 1e-15);
        }
        assert_eq!(
            op.evaluate(&[1.5]).unwrap_err(),
            Error::Inadmissible { mu: alloc::vec![1.5] }
        );
    }
}
