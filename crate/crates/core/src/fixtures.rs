//! The four six-node graphs used to illustrate WL misalignment with edit
//! distance. Nodes `A..F` are numbered `0..5`; all nodes share one color.

use std::path::{Path, PathBuf};

use crate::error::{AuditError, Result};
use crate::graph::Graph;
use crate::ingest::write_single_graph;

const A: u32 = 0;
const B: u32 = 1;
const C: u32 = 2;
const D: u32 = 3;
const E: u32 = 4;
const F: u32 = 5;

/// Six-cycle A-B-C-D-E-F-A.
pub fn g1() -> Graph {
    Graph::new(6, [(A, B), (B, C), (C, D), (D, E), (E, F), (F, A)]).expect("valid fixture")
}

/// Six-cycle plus the chord B-E.
pub fn g2() -> Graph {
    Graph::new(6, [(A, B), (B, C), (C, D), (D, E), (E, F), (F, A), (B, E)]).expect("valid fixture")
}

/// Six-path A-B-C-D-E-F.
pub fn g3() -> Graph {
    Graph::new(6, [(A, B), (B, C), (C, D), (D, E), (E, F)]).expect("valid fixture")
}

/// Two disjoint triangles A-B-C and D-E-F.
pub fn g4() -> Graph {
    Graph::new(6, [(A, B), (B, C), (A, C), (D, E), (E, F), (F, D)]).expect("valid fixture")
}

pub fn example_graphs() -> [Graph; 4] {
    [g1(), g2(), g3(), g4()]
}

pub const FIXTURE_FILES: [&str; 4] = ["g1.g", "g2.g", "g3.g", "g4.g"];

/// Writes G1..G4 in the single-graph text format; returns the written paths.
pub fn emit_fixture_graphs(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| AuditError::io(dir, e))?;
    let mut written = Vec::new();
    for (graph, name) in example_graphs().iter().zip(FIXTURE_FILES) {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| AuditError::io(&path, e))?;
        write_single_graph(graph, std::io::BufWriter::new(file))
            .map_err(|e| AuditError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
