//! Dataset files (headerless CSV, one point per row) and topology edge lists.

use std::fs;
use std::io::Write;
use std::path::Path;

use dcoreset_core::network::{Topology, TopologyKind};
use dcoreset_core::{Point, WeightedPointSet};

use crate::error::{io_err, HarnessError, Result};

/// Reads comma-separated finite reals, one point per row, unit weights.
/// Header rows are not supported and fail on line 1.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<WeightedPointSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(file);

    let parse_err = |line: u64, msg: String| HarnessError::Parse { path: path.to_path_buf(), line, msg };
    let mut points = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(parse_err(line, format!("expected {w} fields, found {}", record.len())));
            }
        }
        width = Some(record.len());
        let coords = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line, format!("`{f}` is not a finite number")))
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(Point::new(coords).map_err(|e| parse_err(line, e.to_string()))?);
    }
    if points.is_empty() {
        return Err(HarnessError::EmptyFile { path: path.to_path_buf() });
    }
    Ok(WeightedPointSet::unit(points)?)
}

/// Writes coordinates only; weights are not stored.
pub fn write_dataset(path: impl AsRef<Path>, set: &WeightedPointSet) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for p in set.points() {
        writer.write_record(p.iter().map(|v| v.to_string()))?;
    }
    writer.flush().map_err(io_err(path))
}

/// First line `n m`, then `m` lines `u v` with 0-indexed site ids.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Topology> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let parse_err = |line: usize, msg: &str| HarnessError::Parse { path: path.to_path_buf(), line: line as u64, msg: msg.into() };

    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (first, header) = lines.next().ok_or(HarnessError::EmptyFile { path: path.to_path_buf() })?;
    let pair = |line: usize, s: &str| -> Result<(usize, usize)> {
        let mut it = s.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
            _ => Err(parse_err(line, "expected two nonnegative integers")),
        }
    };
    let (n, m) = pair(first + 1, header)?;
    let edges = lines.map(|(i, l)| pair(i + 1, l)).collect::<Result<Vec<_>>>()?;
    if edges.len() != m {
        return Err(parse_err(first + 1, &format!("header announces {m} edges, file has {}", edges.len())));
    }
    Ok(Topology::from_edges(n, &edges, TopologyKind::Custom)?)
}

pub fn write_edge_list(path: impl AsRef<Path>, g: &Topology) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(8 * (g.m() + 1));
    out.push_str(&format!("{} {}\n", g.n(), g.m()));
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    fs::File::create(path).and_then(|mut f| f.write_all(out.as_bytes())).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn two_rows_load_in_order() {
        let f = file("0,0\n3,4");
        let set = load_dataset(f.path()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.points()[1].coords(), &[3.0, 4.0]);
        assert_eq!(set.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(matches!(load_dataset(file("").path()), Err(HarnessError::EmptyFile { .. })));
    }

    #[test]
    fn header_fails_on_line_one() {
        let err = load_dataset(file("x,y\n1,2\n").path()).unwrap_err();
        assert!(matches!(err, HarnessError::Parse { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn ragged_and_nonfinite_rows_are_rejected() {
        let err = load_dataset(file("1,2\n3\n").path()).unwrap_err();
        assert!(matches!(err, HarnessError::Parse { line: 2, .. }), "{err}");
        let err = load_dataset(file("1,2\n3,NaN\n").path()).unwrap_err();
        assert!(matches!(err, HarnessError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn dataset_round_trip() {
        let f = file("0.5,-1\n2,3.25\n");
        let set = load_dataset(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_dataset(out.path(), &set).unwrap();
        assert_eq!(load_dataset(out.path()).unwrap(), set);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Topology::grid(2, 3).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_edge_list(out.path(), &g).unwrap();
        let text = fs::read_to_string(out.path()).unwrap();
        assert!(text.starts_with("6 7\n"));
        let back = read_edge_list(out.path()).unwrap();
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(read_edge_list(file("3 2\n0 1\n").path()), Err(HarnessError::Parse { line: 1, .. })));
        assert!(matches!(read_edge_list(file("3 1\n0 1\n").path()), Err(HarnessError::Core(dcoreset_core::Error::Disconnected))));
        assert!(matches!(read_edge_list(file("2 1\n0 x\n").path()), Err(HarnessError::Parse { line: 2, .. })));
    }
}
