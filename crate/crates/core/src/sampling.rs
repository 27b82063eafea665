//! Training and test sets in parameter space.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{ParamBox, ProblemDef};

/// How `(b - a) / step` may deviate from an integer and still count as one.
const STEP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    Uniform1d,
    UniformGrid2d,
    Explicit,
}

/// Ordered, pairwise distinct parameter points.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub kind: SampleKind,
}

impl SampleSet {
    /// Wraps explicit points, rejecting duplicates and ragged dimensions.
    pub fn explicit(points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = points.first() {
            if points.iter().any(|p| p.len() != first.len()) {
                return Err(Error::invalid("sample points have different dimensions"));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::invalid("duplicate sample point"));
                }
            }
        }
        Ok(Self {
            points,
            kind: SampleKind::Explicit,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        self.points.iter().any(|p| p.as_slice() == mu)
    }

    /// Fails on the first point the problem does not admit.
    pub fn check_admissible(&self, problem: &ProblemDef) -> Result<()> {
        self.points.iter().try_for_each(|p| problem.check_admissible(p))
    }
}

fn step_count(a: f64, b: f64, step: f64) -> Result<usize> {
    if !(a < b) || !(step > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("uniform range needs a < b and step > 0"));
    }
    let ratio = (b - a) / step;
    let n = libm::round(ratio);
    if (ratio - n).abs() > STEP_TOLERANCE * n.max(1.0) || n < 1.0 {
        return Err(Error::NonCommensurateStep { a, b, step });
    }
    Ok(n as usize)
}

/// `a, a + step, ..., b`; point `i` is `a + i * step`, the last one exactly `b`.
pub fn uniform_1d(a: f64, b: f64, step: f64) -> Result<SampleSet> {
    let n = step_count(a, b, step)?;
    let mut points: Vec<Vec<f64>> = (0..n).map(|i| vec![a + i as f64 * step]).collect();
    points.push(vec![b]);
    Ok(SampleSet {
        points,
        kind: SampleKind::Uniform1d,
    })
}

fn axis_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Tensor grid with `counts[0] x counts[1]` nodes including the corners;
/// the first parameter varies fastest.
pub fn uniform_grid_2d(bounds: &ParamBox, counts: (usize, usize)) -> Result<SampleSet> {
    if bounds.dim() != 2 {
        return Err(Error::invalid("uniform_grid_2d needs a two-dimensional box"));
    }
    if counts.0 < 2 || counts.1 < 2 {
        return Err(Error::invalid("grid needs at least 2 nodes per axis"));
    }
    if !(bounds.lower[0] < bounds.upper[0] && bounds.lower[1] < bounds.upper[1]) {
        return Err(Error::invalid("degenerate parameter box"));
    }
    let xs = axis_nodes(bounds.lower[0], bounds.upper[0], counts.0);
    let ys = axis_nodes(bounds.lower[1], bounds.upper[1], counts.1);
    let points = ys.iter().flat_map(|&y| xs.iter().map(move |&x| vec![x, y])).collect();
    Ok(SampleSet {
        points,
        kind: SampleKind::UniformGrid2d,
    })
}

/// Uniform steps along one axis with the other coordinates held fixed.
pub fn uniform_line(base: &[f64], axis: usize, a: f64, b: f64, step: f64) -> Result<SampleSet> {
    if axis >= base.len() {
        return Err(Error::invalid("sweep axis out of range"));
    }
    let line = uniform_1d(a, b, step)?;
    let points = line
        .points
        .into_iter()
        .map(|p| {
            let mut q = base.to_vec();
            q[axis] = p[0];
            q
        })
        .collect();
    Ok(SampleSet {
        points,
        kind: if base.len() == 1 { SampleKind::Uniform1d } else { SampleKind::Explicit },
    })
}

/// The six comparison points of the one-parameter study.
pub fn test_points_1d() -> SampleSet {
    SampleSet {
        points: [-1.25, -0.75, -0.5, 0.5, 0.75, 1.25].iter().map(|&m| vec![m]).collect(),
        kind: SampleKind::Explicit,
    }
}

/// The four comparison points of the two-parameter study.
pub fn test_points_2d() -> SampleSet {
    SampleSet {
        points: vec![vec![0.5, 0.6], vec![0.5, 0.8], vec![0.8, 0.6], vec![0.8, 0.8]],
        kind: SampleKind::Explicit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_problem_1d, build_problem_2d};

    #[test]
    fn reference_grids_1d() {
        let coarse = uniform_1d(-1.4, 1.4, 0.1).unwrap();
        assert_eq!(coarse.len(), 29);
        assert_eq!(coarse.points[28], vec![1.4]);
        assert_eq!(coarse.points[0], vec![-1.4]);
        assert_eq!(uniform_1d(-1.4, 1.4, 0.05).unwrap().len(), 57);
        assert_eq!(uniform_1d(-1.4, 1.4, 0.01).unwrap().len(), 281);
        let p = build_problem_1d();
        coarse.check_admissible(&p).unwrap();
    }

    #[test]
    fn bad_ranges() {
        assert!(uniform_1d(0.0, 0.0, 0.1).is_err());
        assert!(uniform_1d(0.0, 1.0, 0.0).is_err());
        assert!(matches!(uniform_1d(0.0, 1.0, 0.3), Err(Error::NonCommensurateStep { .. })));
    }

    #[test]
    fn reference_grids_2d() {
        let p = build_problem_2d();
        let g5 = uniform_grid_2d(&p.domain, (5, 5)).unwrap();
        let g7 = uniform_grid_2d(&p.domain, (7, 7)).unwrap();
        assert_eq!((g5.len(), g7.len()), (25, 49));
        assert_eq!(g5.points[1], vec![0.55, 0.4]);
        assert_eq!(g5.points[24], vec![1.0, 1.0]);
        let unit = ParamBox {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
        };
        let corners = uniform_grid_2d(&unit, (2, 2)).unwrap();
        assert_eq!(corners.points, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(uniform_grid_2d(&unit, (3, 4)).unwrap().len(), 12);
        assert!(uniform_grid_2d(&unit, (1, 4)).is_err());
    }

    fn near_member(set: &SampleSet, pt: &[f64]) -> bool {
        set.points
            .iter()
            .any(|q| q.iter().zip(pt).all(|(a, b)| (a - b).abs() < 1e-9))
    }

    #[test]
    fn test_points_are_interior() {
        let p1 = build_problem_1d();
        let t1 = test_points_1d();
        assert_eq!(t1.len(), 6);
        assert!(t1.points.iter().all(|pt| p1.domain.strictly_contains(pt)));
        let p2 = build_problem_2d();
        let t2 = test_points_2d();
        assert_eq!(t2.len(), 4);
        assert!(t2.points.iter().all(|pt| p2.domain.strictly_contains(pt)));
    }

    #[test]
    fn test_point_membership_in_training_grids() {
        // Only the 25-point grid avoids every test point; the others contain
        // some or all of them (up to roundoff of the grid nodes).
        let t1 = test_points_1d();
        let coarse = uniform_1d(-1.4, 1.4, 0.1).unwrap();
        let fine = uniform_1d(-1.4, 1.4, 0.05).unwrap();
        let on_coarse: Vec<bool> = t1.points.iter().map(|p| near_member(&coarse, p)).collect();
        assert_eq!(on_coarse, vec![false, false, true, true, false, false]);
        assert!(t1.points.iter().all(|p| near_member(&fine, p)));

        let p2 = build_problem_2d();
        let t2 = test_points_2d();
        let g25 = uniform_grid_2d(&p2.domain, (5, 5)).unwrap();
        let g49 = uniform_grid_2d(&p2.domain, (7, 7)).unwrap();
        assert!(t2.points.iter().all(|p| !near_member(&g25, p)));
        assert!(t2.points.iter().all(|p| near_member(&g49, p)));
    }

    #[test]
    fn explicit_rejects_duplicates() {
        assert!(SampleSet::explicit(vec![vec![0.1], vec![0.1]]).is_err());
        assert!(SampleSet::explicit(vec![vec![0.1], vec![0.1, 0.2]]).is_err());
        assert_eq!(SampleSet::explicit(vec![vec![0.1], vec![0.2]]).unwrap().len(), 2);
    }

    #[test]
    fn line_sweep() {
        let s = uniform_line(&[0.0, 0.8], 0, 0.4, 1.0, 0.05).unwrap();
        assert_eq!(s.len(), 13);
        assert!(s.points.iter().all(|p| p[1] == 0.8));
    }
}
