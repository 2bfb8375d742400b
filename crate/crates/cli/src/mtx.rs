//! Matrix Market coordinate files.

use std::collections::BTreeMap;
use std::io::{self, Write};

/// Writes a real general `rows x cols` matrix, summing duplicate entries.
pub fn write(
    out: &mut impl Write,
    rows: usize,
    cols: usize,
    triplets: impl IntoIterator<Item = (usize, usize, f64)>,
) -> io::Result<()> {
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, j, v) in triplets {
        *entries.entry((i, j)).or_insert(0.0) += v;
    }
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{rows} {cols} {}", entries.len())?;
    for ((i, j), v) in entries {
        writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads a file written by [`write`] back into `(rows, cols, triplets)`.
pub fn read(text: &str) -> Option<(usize, usize, Vec<(usize, usize, f64)>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let dims: Vec<usize> = lines.next()?.split_whitespace().map(|s| s.parse().ok()).collect::<Option<_>>()?;
    if dims.len() != 3 {
        return None;
    }
    let mut entries = Vec::with_capacity(dims[2]);
    for l in lines {
        let p: Vec<&str> = l.split_whitespace().collect();
        if p.len() != 3 {
            return None;
        }
        let (i, j): (usize, usize) = (p[0].parse().ok()?, p[1].parse().ok()?);
        if i == 0 || j == 0 || i > dims[0] || j > dims[1] {
            return None;
        }
        entries.push((i - 1, j - 1, p[2].parse().ok()?));
    }
    (entries.len() == dims[2]).then_some((dims[0], dims[1], entries))
}
