//! File formats: atomic writes, `x,y` curve CSVs, labelled matrix CSVs,
//! JSONL correlation ensembles, eigensystem and dendrogram JSON, and DOT
//! graphs. Floats are rendered with the shortest representation that
//! parses back bit-exactly, and everything is written atomically
//! (temp file + rename) so interrupted runs never leave partial output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::CorrelationMatrix;
use crate::spectral::EigenSystem;
use crate::structure::{Dendrogram, DistanceMatrix, SpanningTree};

/// Write `bytes` to `path` atomically.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Write a two-column `x,y` curve CSV (header included).
pub fn write_curve_csv(path: impl AsRef<Path>, points: &[(f64, f64)]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["x", "y"])?;
        for &(x, y) in points {
            w.write_record([format!("{x}"), format!("{y}")])?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

/// Read a two-column `x,y` curve CSV.
pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |field: &str| -> Result<f64> {
            field.parse().map_err(|_| Error::CsvRow {
                row: idx + 1,
                message: format!("bad number `{field}`"),
            })
        };
        if record.len() != 2 {
            return Err(Error::CsvRow {
                row: idx + 1,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        out.push((parse(&record[0])?, parse(&record[1])?));
    }
    Ok(out)
}

/// Write a labelled square matrix CSV: header `label,SYM...`, one row
/// per label.
pub fn write_matrix_csv(path: impl AsRef<Path>, labels: &[String], get: impl Fn(usize, usize) -> f64) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["label".to_string()];
        header.extend(labels.iter().cloned());
        w.write_record(&header)?;
        for (i, li) in labels.iter().enumerate() {
            let mut rec = vec![li.clone()];
            for j in 0..labels.len() {
                rec.push(format!("{}", get(i, j)));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

/// Read a labelled square matrix CSV into a distance matrix.
pub fn read_distance_csv(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut row = 0usize;
    for record in reader.records() {
        let record = record?;
        if record.len() != n + 1 {
            return Err(Error::CsvRow {
                row: row + 1,
                message: format!("expected {} fields, got {}", n + 1, record.len()),
            });
        }
        for j in 0..n {
            m[(row, j)] = record[j + 1].parse().map_err(|_| Error::CsvRow {
                row: row + 1,
                message: format!("bad number `{}`", &record[j + 1]),
            })?;
        }
        row += 1;
    }
    if row != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: row,
        });
    }
    DistanceMatrix::new(labels, m)
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixRecord {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

/// Write one correlation matrix per line (JSONL).
pub fn write_matrix_jsonl<'a>(
    path: impl AsRef<Path>,
    members: impl IntoIterator<Item = &'a CorrelationMatrix>,
) -> Result<()> {
    let mut buf = Vec::new();
    for m in members {
        let rec = MatrixRecord {
            labels: m.labels().to_vec(),
            values: (0..m.dim())
                .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
                .collect(),
        };
        serde_json::to_writer(&mut buf, &rec)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

/// Read a JSONL correlation ensemble.
pub fn read_matrix_jsonl(path: impl AsRef<Path>) -> Result<Vec<CorrelationMatrix>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let rec: MatrixRecord = serde_json::from_str(line)?;
        let n = rec.labels.len();
        if rec.values.len() != n || rec.values.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rec.values.len(),
            });
        }
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rec.values[i][j]);
        out.push(CorrelationMatrix::from_gram(rec.labels, m)?);
    }
    if out.is_empty() {
        return Err(Error::Argument("empty ensemble file".into()));
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct EigsFile {
    members: Vec<EigenSystem>,
}

/// Write an ensemble of eigensystems as JSON.
pub fn write_eigs_json(path: impl AsRef<Path>, members: &[EigenSystem]) -> Result<()> {
    let file = EigsFile {
        members: members.to_vec(),
    };
    let mut buf = serde_json::to_vec_pretty(&file)?;
    buf.push(b'\n');
    write_atomic(path, &buf)
}

/// Read an ensemble of eigensystems from JSON.
pub fn read_eigs_json(path: impl AsRef<Path>) -> Result<Vec<EigenSystem>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let file: EigsFile = serde_json::from_str(&text)?;
    if file.members.is_empty() {
        return Err(Error::Argument("empty eigensystem file".into()));
    }
    Ok(file.members)
}

#[derive(Debug, Serialize, Deserialize)]
struct DendroFile {
    labels: Vec<String>,
    /// `[a, b, height, size]` with cluster ids M..2M-2 for merges.
    merges: Vec<(usize, usize, f64, usize)>,
    leaf_order: Vec<usize>,
}

/// Write a dendrogram as JSON (merge list plus leaf order).
pub fn write_dendro_json(path: impl AsRef<Path>, dendro: &Dendrogram) -> Result<()> {
    let file = DendroFile {
        labels: dendro.labels.clone(),
        merges: dendro
            .merges
            .iter()
            .map(|m| (m.a, m.b, m.height, m.size))
            .collect(),
        leaf_order: dendro.leaf_order.clone(),
    };
    let mut buf = serde_json::to_vec_pretty(&file)?;
    buf.push(b'\n');
    write_atomic(path, &buf)
}

/// Render a spanning tree as an undirected DOT graph; nodes are ticker
/// labels and edges carry a `weight` attribute.
pub fn write_dot(path: impl AsRef<Path>, tree: &SpanningTree, name: &str) -> Result<()> {
    let mut s = String::new();
    s.push_str(&format!("graph {name} {{\n"));
    for (a, b, w) in &tree.edges {
        s.push_str(&format!("  \"{a}\" -- \"{b}\" [weight={w}];\n"));
    }
    s.push_str("}\n");
    write_atomic(path, s.as_bytes())
}

/// Write the producing configuration next to an output file as
/// `<file>.meta.json`. Contains only the config, never timestamps, so
/// reruns stay byte-identical.
pub fn write_sidecar(path: impl AsRef<Path>, config: &serde_json::Value) -> Result<()> {
    let path = path.as_ref();
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    let sidecar = path.with_file_name(name);
    let mut buf = serde_json::to_vec_pretty(config)?;
    buf.push(b'\n');
    write_atomic(sidecar, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn curve_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let pts = vec![(0.1, 1.0 / 3.0), (0.2, 2.0), (0.30000000000000004, -5e-9)];
        write_curve_csv(&path, &pts).unwrap();
        assert_eq!(read_curve_csv(&path).unwrap(), pts);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,y\n"));
    }

    #[test]
    fn jsonl_round_trip() {
        let labels: Vec<String> = vec!["B".into(), "E".into()];
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 1.0]);
        let c = CorrelationMatrix::from_correlation(labels, m).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.jsonl");
        write_matrix_jsonl(&path, [&c, &c]).unwrap();
        let back = read_matrix_jsonl(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], c);
    }

    #[test]
    fn sidecar_lands_next_to_output() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"x,y\n").unwrap();
        write_sidecar(&path, &serde_json::json!({"seed": 7})).unwrap();
        let meta = dir.path().join("out.csv.meta.json");
        let text = std::fs::read_to_string(meta).unwrap();
        assert!(text.contains("\"seed\": 7"));
    }

    #[test]
    fn distance_matrix_csv_round_trip() {
        let labels: Vec<String> = vec!["A".into(), "B".into(), "C".into()];
        let d = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.5, 0.7, 1.5, 0.0, 2.25, 0.7, 2.25, 0.0],
        );
        let dm = DistanceMatrix::new(labels.clone(), d).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_matrix_csv(&path, &labels, |i, j| dm.get(i, j)).unwrap();
        let back = read_distance_csv(&path).unwrap();
        assert_eq!(back, dm);
    }
}
