//! Structured P1 triangulations of axis-aligned rectangles.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `(x_min, x_max) x (y_min, y_max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::invalid("rectangle must satisfy x_min < x_max and y_min < y_max"));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn unit_square() -> Self {
        Self {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    /// `(-1, 1)^2`
    pub fn centered_square() -> Self {
        Self {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Cell counts per axis giving a grid spacing closest to `h`.
    pub fn cells_for_spacing(&self, h: f64) -> Result<(usize, usize)> {
        if !(h > 0.0) {
            return Err(Error::invalid("mesh spacing must be positive"));
        }
        let nx = libm::round(self.width() / h).max(1.0) as usize;
        let ny = libm::round(self.height() / h).max(1.0) as usize;
        Ok((nx, ny))
    }
}

/// How each grid cell is split into two triangles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Diagonal {
    /// Every cell along its lower-left to upper-right diagonal.
    #[default]
    Right,
    /// Checkerboard: cells with odd `i + j` use the other diagonal. Mirror
    /// symmetric in both axes when the cell counts are even.
    Alternating,
}

impl Diagonal {
    pub fn name(self) -> &'static str {
        match self {
            Diagonal::Right => "right",
            Diagonal::Alternating => "alternating",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "right" => Some(Diagonal::Right),
            "alternating" => Some(Diagonal::Alternating),
            _ => None,
        }
    }
}

/// Conforming triangulation with Dirichlet boundary identification.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub rect: Rect,
    pub cells: (usize, usize),
    pub diagonal: Diagonal,
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub is_boundary: Vec<bool>,
    /// Interior DOF number of each vertex, `None` on the boundary.
    pub interior_index: Vec<Option<usize>>,
    /// Longest cell edge (the cell diagonal).
    pub h: f64,
    num_interior: usize,
}

/// Counts and quality figures for a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshReport {
    pub vertices: usize,
    pub triangles: usize,
    pub interior: usize,
    pub min_area: f64,
    pub max_area: f64,
    pub h: f64,
}

impl TriMesh {
    /// Uniform `nx x ny` grid, every cell split along its lower-left to
    /// upper-right diagonal. Vertices are numbered row-major, x fastest.
    pub fn structured(rect: Rect, nx: usize, ny: usize) -> Result<Self> {
        Self::structured_with(rect, nx, ny, Diagonal::Right)
    }

    /// Uniform grid with a chosen cell split; same vertex numbering as
    /// [`TriMesh::structured`].
    pub fn structured_with(rect: Rect, nx: usize, ny: usize, diagonal: Diagonal) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("cells per side must be at least 1"));
        }
        if !(rect.x_min < rect.x_max && rect.y_min < rect.y_max) {
            return Err(Error::invalid("degenerate rectangle"));
        }
        let (w, hgt) = (rect.width(), rect.height());
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut is_boundary = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            let y = if j == ny { rect.y_max } else { rect.y_min + hgt * j as f64 / ny as f64 };
            for i in 0..=nx {
                let x = if i == nx { rect.x_max } else { rect.x_min + w * i as f64 / nx as f64 };
                vertices.push([x, y]);
                is_boundary.push(i == 0 || i == nx || j == 0 || j == ny);
            }
        }
        let vid = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                if diagonal == Diagonal::Alternating && (i + j) % 2 == 1 {
                    triangles.push([v00, v10, v01]);
                    triangles.push([v10, v11, v01]);
                } else {
                    triangles.push([v00, v10, v11]);
                    triangles.push([v00, v11, v01]);
                }
            }
        }
        let mut next = 0;
        let interior_index = is_boundary
            .iter()
            .map(|&b| {
                if b {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        let dx = w / nx as f64;
        let dy = hgt / ny as f64;
        Ok(Self {
            rect,
            cells: (nx, ny),
            diagonal,
            vertices,
            triangles,
            is_boundary,
            interior_index,
            h: libm::hypot(dx, dy),
            num_interior: next,
        })
    }

    /// Grid spacing along each axis.
    pub fn axis_steps(&self) -> (f64, f64) {
        (self.rect.width() / self.cells.0 as f64, self.rect.height() / self.cells.1 as f64)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_interior(&self) -> usize {
        self.num_interior
    }

    /// Signed area of triangle `t`, positive for counter-clockwise order.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn report(&self) -> MeshReport {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for t in 0..self.triangles.len() {
            let a = self.signed_area(t);
            lo = lo.min(a);
            hi = hi.max(a);
        }
        MeshReport {
            vertices: self.num_vertices(),
            triangles: self.triangles.len(),
            interior: self.num_interior,
            min_area: lo,
            max_area: hi,
            h: self.h,
        }
    }

    fn on_boundary(&self, p: [f64; 2]) -> bool {
        let r = &self.rect;
        p[0] == r.x_min || p[0] == r.x_max || p[1] == r.y_min || p[1] == r.y_max
    }

    /// Checks orientation, boundary flags, conformity and DOF numbering.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if !(self.signed_area(t) > 0.0) {
                return Err(Error::invalid("triangle with non-positive signed area"));
            }
        }
        for (v, &p) in self.vertices.iter().enumerate() {
            if self.is_boundary[v] != self.on_boundary(p) {
                return Err(Error::invalid("boundary flag disagrees with geometry"));
            }
        }
        let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            let boundary_edge = self.is_boundary[a] && self.is_boundary[b] && {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                (pa[0] == pb[0] && (pa[0] == self.rect.x_min || pa[0] == self.rect.x_max))
                    || (pa[1] == pb[1] && (pa[1] == self.rect.y_min || pa[1] == self.rect.y_max))
            };
            let expected = if boundary_edge { 1 } else { 2 };
            if count != expected {
                return Err(Error::invalid("non-conforming edge"));
            }
        }
        let mut seen = 0;
        for (v, idx) in self.interior_index.iter().enumerate() {
            match (self.is_boundary[v], idx) {
                (true, None) => {}
                (false, Some(k)) if *k == seen => seen += 1,
                _ => return Err(Error::invalid("interior numbering is not 0..N_h-1 in vertex order")),
            }
        }
        if seen != self.num_interior {
            return Err(Error::invalid("interior count mismatch"));
        }
        Ok(())
    }
}
