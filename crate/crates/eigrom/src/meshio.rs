//! Plain-text mesh dump: `ntri nvert`, then `x y boundary_flag` per vertex,
//! then `i j k` (0-based) per triangle.

use std::fmt::Write as _;

use anyhow::{ensure, Context, Result};
use eigrom_core::mesh::TriMesh;

use crate::report::fmt_f64;

pub fn mesh_to_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", mesh.triangles.len(), mesh.vertices.len());
    for (v, b) in mesh.vertices.iter().zip(&mesh.is_boundary) {
        let _ = writeln!(s, "{} {} {}", fmt_f64(v[0]), fmt_f64(v[1]), u8::from(*b));
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}

/// Parsed dump: vertices, boundary flags, triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshDump {
    pub vertices: Vec<[f64; 2]>,
    pub boundary: Vec<bool>,
    pub triangles: Vec<[usize; 3]>,
}

pub fn mesh_from_str(text: &str) -> Result<MeshDump> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().context("empty mesh file")?;
    let mut t = head.split_whitespace();
    let ntri: usize = t.next().context("missing ntri")?.parse()?;
    let nvert: usize = t.next().context("missing nvert")?.parse()?;
    let mut dump = MeshDump {
        vertices: Vec::with_capacity(nvert),
        boundary: Vec::with_capacity(nvert),
        triangles: Vec::with_capacity(ntri),
    };
    for _ in 0..nvert {
        let line = lines.next().context("missing vertex line")?;
        let w: Vec<&str> = line.split_whitespace().collect();
        ensure!(w.len() == 3, "bad vertex line: {line}");
        dump.vertices.push([w[0].parse()?, w[1].parse()?]);
        dump.boundary.push(w[2] == "1");
    }
    for _ in 0..ntri {
        let line = lines.next().context("missing triangle line")?;
        let w = line
            .split_whitespace()
            .map(str::parse::<usize>)
            .collect::<Result<Vec<_>, _>>()?;
        ensure!(w.len() == 3 && w.iter().all(|&i| i < nvert), "bad triangle line: {line}");
        dump.triangles.push([w[0], w[1], w[2]]);
    }
    ensure!(lines.next().is_none(), "trailing lines after triangles");
    Ok(dump)
}
