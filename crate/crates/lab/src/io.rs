//! Grid functions on disk: one JSON header line `{"dim":d,"level":L}`
//! followed by a flat `index,value` CSV. Values are written in shortest
//! round-trip form, so reading a file back gives bit-identical values.

use std::io::{BufRead, Write};

use extrapolab_core::{Grid, GridFunction, Weight};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Value { line: usize, message: String },
    #[error(transparent)]
    Grid(#[from] extrapolab_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub dim: usize,
    pub level: u32,
}

pub fn write_function<W: Write>(mut out: W, f: &GridFunction) -> Result<(), IoError> {
    let header = Header { dim: f.grid().dim(), level: f.grid().level() };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    writeln!(out, "index,value")?;
    for (i, v) in f.values().iter().enumerate() {
        writeln!(out, "{i},{v:?}")?;
    }
    Ok(())
}

pub fn read_function<R: BufRead>(input: R) -> Result<GridFunction, IoError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or(IoError::Value { line: 1, message: "empty file".into() })??;
    let header: Header = serde_json::from_str(&first)?;
    let grid = Grid::new(header.dim, header.level)?;
    let mut values = Vec::with_capacity(grid.cell_count());
    for (k, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || (k == 0 && t == "index,value") {
            continue;
        }
        let bad = |message: String| IoError::Value { line: k + 2, message };
        let (index, value) = t.split_once(',').ok_or_else(|| bad("expected `index,value`".into()))?;
        let index: usize = index.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        if index != values.len() {
            return Err(bad(format!("expected index {}, got {index}", values.len())));
        }
        values.push(value.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?);
    }
    Ok(GridFunction::new(grid, values)?)
}

pub fn read_weight<R: BufRead>(input: R) -> Result<Weight, IoError> {
    Ok(Weight::from_function(read_function(input)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(2, 3).unwrap();
        let f = GridFunction::from_cells(g, |i| (i as f64).sqrt() / 3.0 + 1e-17 * i as f64).unwrap();
        let mut buf = Vec::new();
        write_function(&mut buf, &f).unwrap();
        let back = read_function(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_wrong_length() {
        let text = "{\"dim\":1,\"level\":2}\nindex,value\n0,1\n1,2\n2,3\n";
        assert!(read_function(text.as_bytes()).is_err());
        let skipped = "{\"dim\":1,\"level\":2}\n0,1\n2,2\n";
        assert!(read_function(skipped.as_bytes()).is_err());
    }
}
