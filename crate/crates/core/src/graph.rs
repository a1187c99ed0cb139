//! Graphs, datasets and instance partitions shared by every audit.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Dense per-node feature matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatures {
    dim: usize,
    values: Vec<f64>,
}

impl NodeFeatures {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(AuditError::InvalidData(format!(
                    "feature row {i} has dimension {}, expected {dim}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Ok(NodeFeatures { dim, values })
    }

    pub fn from_flat(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 && !values.is_empty() || dim > 0 && !values.len().is_multiple_of(dim) {
            return Err(AuditError::InvalidData(format!(
                "{} feature values do not split into rows of dimension {dim}",
                values.len()
            )));
        }
        Ok(NodeFeatures { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }
}

/// Simple undirected graph with optional discrete node labels, real node
/// features and a graph label.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
    node_labels: Option<Vec<u32>>,
    node_features: Option<NodeFeatures>,
    graph_label: Option<u32>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges (in either
    /// orientation) and out-of-range endpoints.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let (graph, duplicates) = Self::build(num_nodes, edges, false)?;
        debug_assert_eq!(duplicates, 0);
        Ok(graph)
    }

    /// Like [`Graph::new`] but drops duplicate edges, returning how many were dropped.
    pub fn new_dedup(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<(Self, usize)> {
        Self::build(num_nodes, edges, true)
    }

    fn build(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        dedupe: bool,
    ) -> Result<(Self, usize)> {
        let mut normalized: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u as usize >= num_nodes || v as usize >= num_nodes {
                return Err(AuditError::InvalidData(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{num_nodes}"
                )));
            }
            if u == v {
                return Err(AuditError::InvalidData(format!("self-loop on node {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        let before = normalized.len();
        if !dedupe {
            if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
                return Err(AuditError::InvalidData(format!(
                    "duplicate edge ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        normalized.dedup();
        let duplicates = before - normalized.len();

        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &normalized {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok((
            Graph {
                num_nodes,
                edges: normalized,
                adjacency,
                node_labels: None,
                node_features: None,
                graph_label: None,
            },
            duplicates,
        ))
    }

    pub fn with_node_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(AuditError::InvalidData(format!(
                "{} node labels for {} nodes",
                labels.len(),
                self.num_nodes
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn with_node_features(mut self, features: NodeFeatures) -> Result<Self> {
        if features.rows() != self.num_nodes && !(self.num_nodes == 0 && features.dim == 0) {
            return Err(AuditError::InvalidData(format!(
                "{} feature rows for {} nodes",
                features.rows(),
                self.num_nodes
            )));
        }
        self.node_features = Some(features);
        Ok(self)
    }

    pub fn with_graph_label(mut self, label: u32) -> Self {
        self.graph_label = Some(label);
        self
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn node_labels(&self) -> Option<&[u32]> {
        self.node_labels.as_deref()
    }

    pub fn node_features(&self) -> Option<&NodeFeatures> {
        self.node_features.as_ref()
    }

    pub fn graph_label(&self) -> Option<u32> {
        self.graph_label
    }

    /// Returns the graph with node `i` renamed to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.num_nodes, "permutation length mismatch");
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u as usize] as u32, perm[v as usize] as u32));
        let mut g = Graph::new(self.num_nodes, edges)?;
        if let Some(labels) = &self.node_labels {
            let mut out = vec![0; labels.len()];
            for (i, &l) in labels.iter().enumerate() {
                out[perm[i]] = l;
            }
            g = g.with_node_labels(out)?;
        }
        if let Some(features) = &self.node_features {
            let mut rows = vec![Vec::new(); self.num_nodes];
            for i in 0..self.num_nodes {
                rows[perm[i]] = features.row(i).to_vec();
            }
            g = g.with_node_features(NodeFeatures::from_rows(rows)?)?;
        }
        g.graph_label = self.graph_label;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Graph,
    Node,
}

/// A collection of auditable instances: graphs (graph-level) or the nodes of
/// a single graph (node-level).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    level: Level,
    graphs: Vec<Graph>,
    labels: Option<Vec<u32>>,
    groups: Option<Vec<u32>>,
}

impl Dataset {
    /// Graph-level dataset. Instance labels are taken from the graph labels
    /// when every graph carries one.
    pub fn graph_level(name: impl Into<String>, graphs: Vec<Graph>) -> Result<Self> {
        let labels: Option<Vec<u32>> = graphs.iter().map(Graph::graph_label).collect();
        let labels = if graphs.is_empty() { None } else { labels };
        let ds = Dataset {
            name: name.into(),
            level: Level::Graph,
            graphs,
            labels: None,
            groups: None,
        };
        match labels {
            Some(l) => ds.with_labels(l),
            None => Ok(ds),
        }
    }

    pub fn node_level(name: impl Into<String>, graph: Graph) -> Self {
        Dataset {
            name: name.into(),
            level: Level::Node,
            graphs: vec![graph],
            labels: None,
            groups: None,
        }
    }

    /// Attaches instance labels; they must cover every instance and use a
    /// contiguous 0-based id space.
    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        self.check_len(labels.len(), "labels")?;
        check_contiguous(&labels, "label")?;
        if self.level == Level::Graph {
            for (g, &l) in self.graphs.iter_mut().zip(&labels) {
                g.graph_label = Some(l);
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_groups(mut self, groups: Vec<u32>) -> Result<Self> {
        self.check_len(groups.len(), "groups")?;
        self.groups = Some(groups);
        Ok(self)
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != instance_count(self) {
            return Err(AuditError::InvalidData(format!(
                "{len} {what} for {} instances",
                instance_count(self)
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn groups(&self) -> Option<&[u32]> {
        self.groups.as_deref()
    }

    pub fn total_nodes(&self) -> usize {
        self.graphs.iter().map(Graph::num_nodes).sum()
    }

    pub fn avg_nodes_per_graph(&self) -> f64 {
        if self.graphs.is_empty() {
            0.0
        } else {
            self.total_nodes() as f64 / self.graphs.len() as f64
        }
    }
}

fn check_contiguous(ids: &[u32], what: &str) -> Result<()> {
    let Some(&max) = ids.iter().max() else {
        return Ok(());
    };
    let mut seen = vec![false; max as usize + 1];
    for &id in ids {
        seen[id as usize] = true;
    }
    if let Some(gap) = seen.iter().position(|s| !s) {
        return Err(AuditError::InvalidData(format!(
            "{what} ids are not contiguous: {gap} unused below {max}"
        )));
    }
    Ok(())
}

/// Maps arbitrary raw label values onto `0..k` in ascending order of value.
pub fn normalize_labels<T: Ord + Copy>(raw: &[T]) -> Vec<u32> {
    let mut distinct: Vec<T> = raw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    raw.iter()
        .map(|v| distinct.binary_search(v).expect("value present") as u32)
        .collect()
}

/// Number of auditable instances: graphs, or nodes of a node-level dataset.
pub fn instance_count(ds: &Dataset) -> usize {
    match ds.level {
        Level::Graph => ds.graphs.len(),
        Level::Node => ds.graphs.first().map_or(0, Graph::num_nodes),
    }
}

/// Assignment of instances to equivalence classes. Class ids are contiguous
/// and numbered by first occurrence in instance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    class_of: Vec<u32>,
    class_sizes: Vec<usize>,
}

impl Partition {
    /// Groups instances with equal keys.
    pub fn from_keys<K, I>(keys: I) -> Self
    where
        K: Hash + Eq,
        I: IntoIterator<Item = K>,
    {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let mut class_of = Vec::new();
        let mut class_sizes = Vec::new();
        for key in keys {
            let next = ids.len() as u32;
            let id = *ids.entry(key).or_insert(next);
            if id == next {
                class_sizes.push(0);
            }
            class_sizes[id as usize] += 1;
            class_of.push(id);
        }
        Partition {
            class_of,
            class_sizes,
        }
    }

    pub fn singletons_of(n: usize) -> Self {
        Partition::from_keys(0..n)
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn class_of(&self, instance: usize) -> u32 {
        self.class_of[instance]
    }

    pub fn class_ids(&self) -> &[u32] {
        &self.class_of
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn singletons(&self) -> usize {
        self.class_sizes.iter().filter(|&&s| s == 1).count()
    }

    /// Members of every class, in instance order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes()];
        for (i, &c) in self.class_of.iter().enumerate() {
            out[c as usize].push(i);
        }
        out
    }

    /// True when every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        assert_eq!(
            self.len(),
            coarser.len(),
            "partitions over different instance sets"
        );
        let mut image: Vec<Option<u32>> = vec![None; self.num_classes()];
        for (&fine, &coarse) in self.class_of.iter().zip(&coarser.class_of) {
            match image[fine as usize] {
                None => image[fine as usize] = Some(coarse),
                Some(c) if c != coarse => return false,
                Some(_) => {}
            }
        }
        true
    }

    /// Equality as set partitions, ignoring class numbering.
    pub fn same_as(&self, other: &Partition) -> bool {
        self.num_classes() == other.num_classes() && self.refines(other)
    }

    /// Restricts the partition to a subset of instances, renumbering classes.
    pub fn restrict(&self, instances: &[usize]) -> Partition {
        Partition::from_keys(instances.iter().map(|&i| self.class_of[i]))
    }
}

/// Partition of instances by task label.
pub fn label_partition(ds: &Dataset) -> Result<Partition> {
    let labels = ds.labels().ok_or(AuditError::MissingLabels)?;
    Ok(Partition::from_keys(labels.iter().copied()))
}

/// `(number of classes, number of singleton classes)`.
pub fn partition_stats(p: &Partition) -> (usize, usize) {
    (p.num_classes(), p.singletons())
}
