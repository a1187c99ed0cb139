//! Identifiability of instances under WL colorings and sensitivity of
//! colorings and embeddings to single-edge edits.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::EmbeddingTable;
use crate::error::{AuditError, Result};
use crate::graph::{Dataset, Graph};
use crate::scalar::Scalar;
use crate::wl::{wl_partition, wl_refine, wl_refine_with, wl_signature, Comparison, WlOptions};

#[derive(Debug, Clone, Serialize)]
pub struct GroupRow {
    /// `None` for the overall row.
    pub group: Option<u32>,
    pub name: String,
    pub count: usize,
    pub identifiable: usize,
    pub fraction: f64,
}

impl GroupRow {
    fn new(group: Option<u32>, name: String, count: usize, identifiable: usize) -> Self {
        let fraction = if count == 0 {
            0.0
        } else {
            identifiable as f64 / count as f64
        };
        GroupRow {
            group,
            name,
            count,
            identifiable,
            fraction,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentifiabilityReport {
    pub dataset: String,
    pub t: usize,
    pub overall: GroupRow,
    pub groups: Vec<GroupRow>,
}

#[derive(Debug, Clone, Default)]
pub struct IdentifiabilityOptions {
    /// Report per-group rows; fails when the dataset has no group column.
    pub by_group: bool,
    /// Display names for group ids `0..`; missing names fall back to the id.
    pub group_names: Vec<String>,
    pub wl: WlOptions,
    pub comparison: Comparison,
}

/// Instances that are alone in their class of `E_WL^t`, overall and per group.
pub fn identifiability(
    ds: &Dataset,
    t: usize,
    opts: &IdentifiabilityOptions,
) -> Result<IdentifiabilityReport> {
    let history = wl_refine_with(ds, Some(t), &opts.wl);
    let p = wl_partition(&history, ds, t, opts.comparison)?;
    let unique: Vec<bool> = (0..p.len())
        .map(|i| p.class_sizes()[p.class_of(i) as usize] == 1)
        .collect();
    let overall = GroupRow::new(
        None,
        ds.name().to_string(),
        p.len(),
        unique.iter().filter(|&&u| u).count(),
    );
    let mut groups = Vec::new();
    if opts.by_group {
        let ids = ds.groups().ok_or(AuditError::MissingGroups)?;
        let k = ids.iter().max().map_or(0, |&m| m as usize + 1);
        let mut count = vec![0usize; k];
        let mut hit = vec![0usize; k];
        for (&g, &u) in ids.iter().zip(&unique) {
            count[g as usize] += 1;
            hit[g as usize] += usize::from(u);
        }
        for g in 0..k {
            let name = opts
                .group_names
                .get(g)
                .cloned()
                .unwrap_or_else(|| format!("group {g}"));
            groups.push(GroupRow::new(Some(g as u32), name, count[g], hit[g]));
        }
    }
    Ok(IdentifiabilityReport {
        dataset: ds.name().to_string(),
        t,
        overall,
        groups,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EditKind {
    Delete,
    Add,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeEdit {
    pub kind: EditKind,
    pub u: u32,
    pub v: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditKinds {
    pub delete: bool,
    pub add: bool,
}

impl Default for EditKinds {
    fn default() -> Self {
        EditKinds {
            delete: true,
            add: true,
        }
    }
}

/// Every single-edge edit of `g`: deletions in edge order, then additions in
/// lexicographic order of the missing pair.
pub fn all_edits(g: &Graph, kinds: EditKinds) -> Vec<EdgeEdit> {
    let mut out = Vec::new();
    if kinds.delete {
        out.extend(g.edges().iter().map(|&(u, v)| EdgeEdit {
            kind: EditKind::Delete,
            u,
            v,
        }));
    }
    if kinds.add {
        let n = g.num_nodes();
        for u in 0..n {
            for v in u + 1..n {
                if !g.has_edge(u, v) {
                    out.push(EdgeEdit {
                        kind: EditKind::Add,
                        u: u as u32,
                        v: v as u32,
                    });
                }
            }
        }
    }
    out
}

pub fn apply_edit(g: &Graph, edit: EdgeEdit) -> Result<Graph> {
    let edges: Vec<(u32, u32)> = match edit.kind {
        EditKind::Delete => g
            .edges()
            .iter()
            .copied()
            .filter(|&e| e != (edit.u, edit.v))
            .collect(),
        EditKind::Add => g
            .edges()
            .iter()
            .copied()
            .chain(std::iter::once((edit.u, edit.v)))
            .collect(),
    };
    let mut out = Graph::new(g.num_nodes(), edges)?;
    if let Some(labels) = g.node_labels() {
        out = out.with_node_labels(labels.to_vec())?;
    }
    if let Some(features) = g.node_features() {
        out = out.with_node_features(features.clone())?;
    }
    Ok(out)
}

/// A seeded sample of `budget` single-edge edits (all of them when `None`),
/// kept in enumeration order, with the edited graphs.
pub fn neighbor_pairs(
    g: &Graph,
    budget: Option<usize>,
    seed: u64,
    kinds: EditKinds,
) -> Result<Vec<(EdgeEdit, Graph)>> {
    let edits = all_edits(g, kinds);
    let chosen: Vec<EdgeEdit> = match budget {
        None => edits,
        Some(m) if m > edits.len() => {
            return Err(AuditError::InvalidArgument(format!(
                "budget {m} exceeds the {} possible edits",
                edits.len()
            )))
        }
        Some(m) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picks = index::sample(&mut rng, edits.len(), m).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| edits[i]).collect()
        }
    };
    chosen
        .into_iter()
        .map(|e| apply_edit(g, e).map(|h| (e, h)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceStats<F> {
    /// Empirical lower bound on the sensitivity: the largest L1 distance seen.
    pub max: F,
    pub mean: F,
    pub min: F,
    pub distances: Vec<F>,
    /// Neighbors without an embedding row; the statistics skip them.
    pub missing: Vec<usize>,
    pub partial: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport<F> {
    pub t: usize,
    pub edits: Vec<EdgeEdit>,
    /// Per edit: whether the WL signature at `t` differs from the original's.
    pub signature_changed: Vec<bool>,
    pub changed_fraction: f64,
    /// Distinct WL signatures among the edited graphs.
    pub distinct_neighbor_signatures: usize,
    pub embedding_distance: Option<DistanceStats<F>>,
}

#[derive(Debug, Clone, Default)]
pub struct SensitivityOptions {
    pub budget: Option<usize>,
    pub seed: u64,
    pub kinds: EditKinds,
}

/// Signature changes under sampled single-edge edits of `g`. Embedding rows
/// are keyed 0 for `g` and `k` for the `k`-th edit (1-based).
pub fn wl_sensitivity<F: Scalar>(
    g: &Graph,
    t: usize,
    opts: &SensitivityOptions,
    embeddings: Option<&EmbeddingTable<F>>,
) -> Result<SensitivityReport<F>> {
    let neighbors = neighbor_pairs(g, opts.budget, opts.seed, opts.kinds)?;
    let mut graphs = Vec::with_capacity(neighbors.len() + 1);
    graphs.push(g.clone());
    graphs.extend(neighbors.iter().map(|(_, h)| h.clone()));
    let ds = Dataset::graph_level("neighbors", graphs)?;
    let history = wl_refine(&ds, Some(t));
    let base = wl_signature(&history, 0, t)?.color_histogram;
    let mut sigs = Vec::with_capacity(neighbors.len());
    for k in 1..=neighbors.len() {
        sigs.push(wl_signature(&history, k, t)?.color_histogram);
    }
    let signature_changed: Vec<bool> = sigs.iter().map(|s| *s != base).collect();
    let changed = signature_changed.iter().filter(|&&c| c).count();
    let mut distinct = sigs.clone();
    distinct.sort();
    distinct.dedup();

    let embedding_distance = match embeddings {
        None => None,
        Some(table) => {
            let origin = table
                .get(0)
                .ok_or_else(|| AuditError::MissingEmbeddings(vec![0]))?;
            let mut distances = Vec::new();
            let mut missing = Vec::new();
            for k in 1..=neighbors.len() {
                match table.get(k) {
                    Some(row) => {
                        if row.len() != origin.len() {
                            return Err(AuditError::InvalidData(format!(
                                "embedding {k} has dimension {}",
                                row.len()
                            )));
                        }
                        distances.push(origin.iter().zip(row).map(|(&a, &b)| (a - b).abs()).sum());
                    }
                    None => missing.push(k),
                }
            }
            if distances.is_empty() {
                return Err(AuditError::MissingEmbeddings(missing));
            }
            let max = distances.iter().copied().fold(F::neg_infinity(), F::max);
            let min = distances.iter().copied().fold(F::infinity(), F::min);
            let mean = distances.iter().copied().sum::<F>() / F::from_usize_lossy(distances.len());
            Some(DistanceStats {
                max,
                mean,
                min,
                distances,
                partial: !missing.is_empty(),
                missing,
            })
        }
    };
    Ok(SensitivityReport {
        t,
        edits: neighbors.iter().map(|(e, _)| *e).collect(),
        changed_fraction: if neighbors.is_empty() {
            0.0
        } else {
            changed as f64 / neighbors.len() as f64
        },
        signature_changed,
        distinct_neighbor_signatures: distinct.len(),
        embedding_distance,
    })
}
