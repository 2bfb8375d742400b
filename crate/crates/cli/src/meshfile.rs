//! Plain-text mesh files.
//!
//! ```text
//! poro-mesh v1
//! <vertex count>
//! x y            (one line per vertex)
//! <triangle count>
//! a b c          (zero-based vertex indices)
//! face v0 v1 <velocity|traction> <pressure|flux>
//! ```
//!
//! Boundary faces without a `face` line get solid velocity and pressure
//! conditions.

use std::collections::HashMap;
use std::io::{self, Write};

use poro_hdg::mesh::{BoundaryTags, ElasticBc, FlowBc, Mesh};

pub const HEADER: &str = "poro-mesh v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("mesh file line {line}: {msg}")]
pub struct MeshFileError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> MeshFileError {
    MeshFileError { line, msg: msg.into() }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

pub fn read(text: &str) -> Result<Mesh, MeshFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|l| !l.1.is_empty());
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")));
    let (line, head) = next("header")?;
    if head != HEADER {
        return Err(err(line, format!("expected `{HEADER}`")));
    }
    let count = |(line, s): (usize, &str)| s.parse::<usize>().map_err(|_| err(line, "expected a count"));
    let nv = count(next("vertex count")?)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, s) = next("vertex")?;
        let v: Vec<f64> = s.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| err(line, "bad vertex"))?;
        if v.len() != 2 || !v.iter().all(|x| x.is_finite()) {
            return Err(err(line, "expected two finite coordinates"));
        }
        vertices.push([v[0], v[1]]);
    }
    let nt = count(next("triangle count")?)?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, s) = next("triangle")?;
        let t: Vec<usize> = s.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| err(line, "bad triangle"))?;
        if t.len() != 3 || t.iter().any(|&i| i >= nv) {
            return Err(err(line, "expected three vertex indices in range"));
        }
        triangles.push([t[0], t[1], t[2]]);
    }
    let mut tags: HashMap<(usize, usize), (BoundaryTags, usize)> = HashMap::new();
    for (line, s) in lines {
        let p: Vec<&str> = s.split_whitespace().collect();
        if p.len() != 5 || p[0] != "face" {
            return Err(err(line, "expected `face v0 v1 elastic flow`"));
        }
        let a: usize = p[1].parse().map_err(|_| err(line, "bad vertex index"))?;
        let b: usize = p[2].parse().map_err(|_| err(line, "bad vertex index"))?;
        let elastic = match p[3] {
            "velocity" => ElasticBc::Velocity,
            "traction" => ElasticBc::Traction,
            other => return Err(err(line, format!("unknown elastic tag `{other}`"))),
        };
        let flow = match p[4] {
            "pressure" => FlowBc::Pressure,
            "flux" => FlowBc::Flux,
            other => return Err(err(line, format!("unknown flow tag `{other}`"))),
        };
        if tags.insert(key(a, b), (BoundaryTags { elastic, flow }, line)).is_some() {
            return Err(err(line, "face tagged twice"));
        }
    }
    let mut used = 0;
    let mesh = Mesh::new(vertices, triangles, |ends, _| match tags.get(&key(ends[0], ends[1])) {
        Some(t) => {
            used += 1;
            t.0
        }
        None => BoundaryTags::DIRICHLET,
    })
    .map_err(|e| err(0, e.to_string()))?;
    if used != tags.len() {
        let boundary: std::collections::HashSet<(usize, usize)> =
            mesh.faces.iter().filter(|f| f.is_boundary()).map(|f| key(f.vertices[0], f.vertices[1])).collect();
        let bad = tags.iter().filter(|(k, _)| !boundary.contains(k)).map(|(_, v)| v.1).min().unwrap_or(0);
        return Err(err(bad, "tagged face is not a boundary edge"));
    }
    Ok(mesh)
}

pub fn write(out: &mut impl Write, mesh: &Mesh) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{}", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(out, "{:?} {:?}", v[0], v[1])?;
    }
    writeln!(out, "{}", mesh.triangles.len())?;
    for t in &mesh.triangles {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    for f in mesh.faces.iter().filter(|f| f.is_boundary()) {
        let tags = f.boundary.unwrap_or_default();
        let e = if tags.elastic == ElasticBc::Velocity { "velocity" } else { "traction" };
        let p = if tags.flow == FlowBc::Pressure { "pressure" } else { "flux" };
        writeln!(out, "face {} {} {e} {p}", f.vertices[0], f.vertices[1])?;
    }
    Ok(())
}
