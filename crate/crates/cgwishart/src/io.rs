//! On-disk formats for graphs, matrices, and scalar series.
//!
//! Colored graphs travel as JSON objects with 1-based vertex labels,
//!
//! ```json
//! {
//!   "p": 3,
//!   "edges": [[1, 2], [1, 3], [2, 3]],
//!   "vertex_classes": [[1], [2], [3]],
//!   "edge_classes": [[[1, 2]], [[1, 3], [2, 3]]]
//! }
//! ```
//!
//! matching the labeling used in error messages. Symmetric matrices travel
//! as header-free CSV with one row per line, written with shortest
//! round-trip float formatting so reading back reproduces the exact bits.
//! Scalar series (traces, autocorrelations) travel as single-column CSV
//! with a one-line header naming the column.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::matrix::SymMatrix;

/// Serialized form of a colored graph, all labels 1-based.
#[derive(Debug, Serialize, Deserialize)]
struct GraphSpec {
    p: usize,
    edges: Vec<(usize, usize)>,
    vertex_classes: Vec<Vec<usize>>,
    edge_classes: Vec<Vec<(usize, usize)>>,
}

impl GraphSpec {
    fn from_graph(graph: &ColoredGraph) -> GraphSpec {
        GraphSpec {
            p: graph.p(),
            edges: graph.edges().iter().map(|&(i, j)| (i + 1, j + 1)).collect(),
            vertex_classes: graph
                .vertex_classes()
                .iter()
                .map(|c| c.iter().map(|&v| v + 1).collect())
                .collect(),
            edge_classes: graph
                .edge_classes()
                .iter()
                .map(|c| c.iter().map(|&(i, j)| (i + 1, j + 1)).collect())
                .collect(),
        }
    }

    fn into_graph(self) -> Result<ColoredGraph> {
        ColoredGraph::new(self.p, &self.edges, &self.vertex_classes, &self.edge_classes)
    }
}

/// Writes a colored graph as pretty-printed JSON.
pub fn write_graph_json<P: AsRef<Path>>(path: P, graph: &ColoredGraph) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, &GraphSpec::from_graph(graph))?;
    Ok(())
}

/// Reads a colored graph from JSON, validating it on construction.
pub fn read_graph_json<P: AsRef<Path>>(path: P) -> Result<ColoredGraph> {
    let file = BufReader::new(File::open(path)?);
    let spec: GraphSpec = serde_json::from_reader(file)?;
    spec.into_graph()
}

/// Writes a symmetric matrix as header-free CSV.
pub fn write_matrix_csv<P: AsRef<Path>>(path: P, m: &SymMatrix) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    for row in m.to_rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(file, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads a symmetric matrix from header-free CSV.
pub fn read_matrix_csv<P: AsRef<Path>>(path: P) -> Result<SymMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path.as_ref())
        .map_err(Error::from)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad float {field:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    SymMatrix::from_rows(&rows)
}

/// Writes a scalar series as single-column CSV under the given header.
pub fn write_series_csv<P: AsRef<Path>>(path: P, name: &str, xs: &[f64]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{name}")?;
    for x in xs {
        writeln!(file, "{x}")?;
    }
    Ok(())
}

/// Reads a single-column CSV series, skipping its header line.
pub fn read_series_csv<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(Error::from)?;
    let mut xs = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 1 {
            return Err(Error::Parse(format!(
                "expected one column, got {} fields in {record:?}",
                record.len()
            )));
        }
        let field = &record[0];
        xs.push(
            field
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad float {field:?}: {e}")))?,
        );
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::builtin_fixture;

    #[test]
    fn graph_json_roundtrip_preserves_structure() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.json");
        for name in ["fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "cycle20a"] {
            let g = builtin_fixture(name).unwrap().graph;
            write_graph_json(&path, &g).unwrap();
            let back = read_graph_json(&path).unwrap();
            assert_eq!(back.p(), g.p(), "{name}");
            assert_eq!(back.edges(), g.edges(), "{name}");
            assert_eq!(back.vertex_classes(), g.vertex_classes(), "{name}");
            assert_eq!(back.edge_classes(), g.edge_classes(), "{name}");
        }
    }

    #[test]
    fn graph_json_is_one_based_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.json");
        let g = builtin_fixture("fig1d").unwrap().graph;
        write_graph_json(&path, &g).unwrap();
        let raw = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert_eq!(v["p"], 3);
        assert_eq!(v["edges"][0][0], 1, "vertex labels start at 1 on disk");
        let labels: Vec<i64> = v["vertex_classes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c[0].as_i64().unwrap())
            .collect();
        assert_eq!(labels, vec![1, 2, 3]);
    }

    #[test]
    fn invalid_graph_json_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.json");
        std::fs::write(&path, "{\"p\": 2}").unwrap();
        assert!(matches!(read_graph_json(&path), Err(Error::Json(_))));
        // Structurally valid JSON with an uncovered vertex fails validation.
        std::fs::write(
            &path,
            "{\"p\": 2, \"edges\": [], \"vertex_classes\": [[1]], \"edge_classes\": []}",
        )
        .unwrap();
        assert!(matches!(read_graph_json(&path), Err(Error::UncoveredElement { .. })));
    }

    #[test]
    fn matrix_csv_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = builtin_fixture("fig1e").unwrap().scale;
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(back.get(i, j).to_bits(), m.get(i, j).to_bits(), "({i}, {j})");
            }
        }
        // A third of a unit exercises a non-terminating binary fraction.
        let mut odd = SymMatrix::identity(2);
        odd.set(0, 1, 1.0 / 3.0);
        write_matrix_csv(&path, &odd).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(back.get(0, 1).to_bits(), (1.0f64 / 3.0).to_bits());
    }

    #[test]
    fn matrix_csv_rejects_bad_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "1.0,abc\nabc,1.0\n").unwrap();
        assert!(matches!(read_matrix_csv(&path), Err(Error::Parse(_))));
        std::fs::write(&path, "1.0,0.5\n0.4,1.0\n").unwrap();
        assert!(read_matrix_csv(&path).is_err(), "asymmetric input must fail");
    }

    #[test]
    fn series_csv_roundtrip_keeps_order_and_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let xs = [1.5, -2.25, 0.0, 1.0 / 3.0, f64::MIN_POSITIVE];
        write_series_csv(&path, "logdet", &xs).unwrap();
        let raw = std::fs::read_to_string(&path).unwrap();
        assert!(raw.starts_with("logdet\n"));
        let back = read_series_csv(&path).unwrap();
        assert_eq!(back.len(), xs.len());
        for (a, b) in back.iter().zip(&xs) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
