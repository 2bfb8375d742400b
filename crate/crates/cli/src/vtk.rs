//! Legacy VTK ASCII unstructured grids with per-vertex scalar fields.

use std::io::{self, Write};

use poro_hdg::mesh::Mesh;
use poro_hdg::timestep::{PointValues, Solver, State};

use crate::config::Component;

const TRIANGLE: u8 = 5;

/// Field values at mesh vertices: each element's polynomials are sampled
/// at its corners and averaged over the elements sharing a vertex.
pub fn vertex_values(solver: &Solver, state: &State) -> Vec<PointValues> {
    let mesh = solver.mesh();
    let mut sum = vec![[0.0; 8]; mesh.vertices.len()];
    let mut count = vec![0usize; mesh.vertices.len()];
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let map = mesh.affine_map(e);
        for &v in tri {
            let xi = map.to_reference(mesh.vertices[v]);
            let vals = solver.point_values(state, e, xi);
            for (s, x) in sum[v].iter_mut().zip(vals) {
                *s += x;
            }
            count[v] += 1;
        }
    }
    for (s, &c) in sum.iter_mut().zip(&count) {
        if c > 0 {
            s.iter_mut().for_each(|x| *x /= c as f64);
        }
    }
    sum
}

/// Writes the mesh and the selected vertex fields.
pub fn write(
    out: &mut impl Write,
    mesh: &Mesh,
    values: &[PointValues],
    fields: &[Component],
    title: &str,
) -> io::Result<()> {
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(out, "{:.16e} {:.16e} 0", v[0], v[1])?;
    }
    let m = mesh.triangles.len();
    writeln!(out, "CELLS {m} {}", 4 * m)?;
    for t in &mesh.triangles {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {m}")?;
    for _ in 0..m {
        writeln!(out, "{TRIANGLE}")?;
    }
    writeln!(out, "POINT_DATA {}", mesh.vertices.len())?;
    for &c in fields {
        writeln!(out, "SCALARS {} double 1", c.name())?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in values {
            writeln!(out, "{:.8e}", v[c.index()])?;
        }
    }
    Ok(())
}

/// Contents of a legacy VTK triangle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkGrid {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<[usize; 3]>,
    pub point_data: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("vtk line {line}: {msg}")]
pub struct VtkError {
    pub line: usize,
    pub msg: String,
}

struct Tokens<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn line(&mut self) -> Result<(usize, &'a str), VtkError> {
        let last = self.lines.last().map_or(0, |l| l.0);
        let l = self.lines.get(self.pos).copied().ok_or(VtkError { line: last, msg: "unexpected end of file".into() })?;
        self.pos += 1;
        Ok(l)
    }

    fn numbers<T: std::str::FromStr>(&mut self, n: usize) -> Result<Vec<T>, VtkError> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let (line, text) = self.line()?;
            for tok in text.split_whitespace() {
                out.push(tok.parse().map_err(|_| VtkError { line, msg: format!("bad number `{tok}`") })?);
            }
            if out.len() > n {
                return Err(VtkError { line, msg: "too many values".into() });
            }
        }
        Ok(out)
    }
}

fn header<'a>(t: &mut Tokens<'a>, keyword: &str) -> Result<(usize, Vec<&'a str>), VtkError> {
    let (line, text) = t.line()?;
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.first() != Some(&keyword) {
        return Err(VtkError { line, msg: format!("expected {keyword}") });
    }
    Ok((line, parts))
}

fn count(parts: &[&str], i: usize, line: usize) -> Result<usize, VtkError> {
    parts.get(i).and_then(|s| s.parse().ok()).ok_or(VtkError { line, msg: "bad count".into() })
}

/// Parses a file written by [`write`], checking counts, cell types and
/// index ranges.
pub fn read(text: &str) -> Result<VtkGrid, VtkError> {
    let all: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())).collect();
    if all.len() < 4 {
        return Err(VtkError { line: all.len(), msg: "truncated header".into() });
    }
    if !all[0].1.starts_with("# vtk DataFile Version") {
        return Err(VtkError { line: 1, msg: "missing vtk identifier".into() });
    }
    let title = all[1].1.to_string();
    if all[2].1.trim() != "ASCII" {
        return Err(VtkError { line: 3, msg: "only ASCII files are supported".into() });
    }
    let body: Vec<(usize, &str)> = all[3..].iter().copied().filter(|l| !l.1.trim().is_empty()).collect();
    let mut t = Tokens { lines: body, pos: 0 };
    let (line, parts) = header(&mut t, "DATASET")?;
    if parts.get(1) != Some(&"UNSTRUCTURED_GRID") {
        return Err(VtkError { line, msg: "expected UNSTRUCTURED_GRID".into() });
    }
    let (line, parts) = header(&mut t, "POINTS")?;
    let np = count(&parts, 1, line)?;
    let coords: Vec<f64> = t.numbers(3 * np)?;
    let points: Vec<[f64; 3]> = coords.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    let (line, parts) = header(&mut t, "CELLS")?;
    let nc = count(&parts, 1, line)?;
    if count(&parts, 2, line)? != 4 * nc {
        return Err(VtkError { line, msg: "CELLS size does not match triangles".into() });
    }
    let raw: Vec<usize> = t.numbers(4 * nc)?;
    let mut cells = Vec::with_capacity(nc);
    for c in raw.chunks(4) {
        if c[0] != 3 || c[1..].iter().any(|&v| v >= np) {
            return Err(VtkError { line, msg: "invalid triangle".into() });
        }
        cells.push([c[1], c[2], c[3]]);
    }
    let (line, parts) = header(&mut t, "CELL_TYPES")?;
    if count(&parts, 1, line)? != nc {
        return Err(VtkError { line, msg: "CELL_TYPES count mismatch".into() });
    }
    if t.numbers::<u8>(nc)?.iter().any(|&ty| ty != TRIANGLE) {
        return Err(VtkError { line, msg: "non-triangle cell type".into() });
    }
    let mut point_data = Vec::new();
    if t.pos < t.lines.len() {
        let (line, parts) = header(&mut t, "POINT_DATA")?;
        if count(&parts, 1, line)? != np {
            return Err(VtkError { line, msg: "POINT_DATA count mismatch".into() });
        }
        while t.pos < t.lines.len() {
            let (line, parts) = header(&mut t, "SCALARS")?;
            let name = parts.get(1).ok_or(VtkError { line, msg: "missing scalar name".into() })?.to_string();
            if parts.get(3).is_some_and(|n| *n != "1") {
                return Err(VtkError { line, msg: "only one component per scalar is supported".into() });
            }
            header(&mut t, "LOOKUP_TABLE")?;
            point_data.push((name, t.numbers(np)?));
        }
    }
    Ok(VtkGrid { title, points, cells, point_data })
}
