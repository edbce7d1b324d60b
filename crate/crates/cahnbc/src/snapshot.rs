//! `.field` snapshots: a header line `nx ny Lx Ly time`, then the `nx·ny`
//! nodal values, one grid row (fixed `y`) per line, bottom row first.

use std::fmt::Write as _;
use std::path::Path;

use cahnbc_core::diagnostics::format_sci;
use cahnbc_core::{Field, SlabGrid};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: SlabGrid,
    pub field: Field,
    pub time: f64,
}

pub fn to_string(grid: &SlabGrid, field: &Field, time: f64) -> String {
    let mut s = format!("{} {} {} {} {}\n", grid.nx(), grid.ny(), format_sci(grid.lx()), format_sci(grid.ly()), format_sci(time));
    for j in 0..grid.ny() {
        let row: Vec<String> = field.row(j).iter().map(|&v| format_sci(v)).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn write(path: &Path, grid: &SlabGrid, field: &Field, time: f64) -> Result<()> {
    std::fs::write(path, to_string(grid, field, time)).map_err(CliError::io(path))
}

pub fn parse(text: &str, path: &Path) -> Result<Snapshot> {
    let bad = |message: String| CliError::Snapshot { path: path.to_path_buf(), message };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    let [nx, ny, lx, ly, t] = header[..] else {
        return Err(bad(format!("header has {} entries, expected `nx ny Lx Ly time`", header.len())));
    };
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    let int = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
    let grid = SlabGrid::new(int(nx)?, int(ny)?, num(lx)?, num(ly)?).map_err(|e| bad(e.to_string()))?;
    let values = lines.flat_map(str::split_whitespace).map(num).collect::<Result<Vec<f64>>>()?;
    if values.len() != grid.len() {
        return Err(bad(format!("{} values for a {}x{} grid", values.len(), grid.nx(), grid.ny())));
    }
    let field = grid.field_from_vec(values).map_err(|e| bad(e.to_string()))?;
    Ok(Snapshot { grid, field, time: num(t)? })
}

pub fn read(path: &Path) -> Result<Snapshot> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = SlabGrid::new(5, 4, 2.0, 1.5).unwrap();
        let f = g.field_from_fn(|x, y| (x * 1.7).sin() + y / 3.0);
        let text = to_string(&g, &f, 0.125);
        assert!(text.starts_with("5 4 2.000000000000e+00 1.500000000000e+00 1.250000000000e-01\n"));
        assert_eq!(text.lines().count(), 5);
        let s = parse(&text, Path::new("x.field")).unwrap();
        assert_eq!(s.grid, g);
        assert_eq!(s.time, 0.125);
        assert!(s.field.sub(&f).max_abs() < 1e-12);
    }

    #[test]
    fn short_files_are_rejected() {
        let err = parse("4 4 1 1 0\n1 2 3\n", Path::new("x.field")).unwrap_err();
        assert!(err.to_string().contains("3 values"));
        assert_eq!(err.exit_code(), 4);
        assert!(parse("4 4 1\n", Path::new("x.field")).is_err());
    }
}
