//! 1-WL color refinement over the disjoint union of a dataset's graphs.
//!
//! Colors are assigned by canonical recoding: at every iteration the distinct
//! signatures `(old color, sorted multiset of neighbor colors)` are sorted
//! lexicographically and numbered `0..k`. The recoding is injective, so two
//! nodes share a color exactly when their signatures agree, and ids are a
//! pure function of the input (no hashing, no dependence on thread count).

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AuditError, Result};
use crate::graph::{Dataset, Graph, Level, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    SingleGraph,
    DatasetGlobal,
}

/// How graphs are compared when turning colorings into graph classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Full `(color, count)` histogram under the shared color space.
    #[default]
    Histogram,
    /// Sorted vector of color counts only.
    SortedCount,
}

#[derive(Debug, Clone, Default)]
pub struct WlOptions {
    /// Append the instance group id to the initial node color.
    pub include_groups: bool,
}

/// Per-iteration node colors for every node of a dataset.
#[derive(Debug, Clone)]
pub struct ColoringHistory {
    offsets: Vec<usize>,
    colors: Vec<Vec<u32>>,
    num_colors: Vec<usize>,
    converged_at: Option<usize>,
    scope: Scope,
}

/// Color histogram of one graph at one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WlSignature {
    pub color_histogram: Vec<(u32, usize)>,
    pub sorted_counts: Vec<usize>,
}

/// Sparse feature vector: sorted `(feature index, count)` entries.
pub type SparseCounts = Vec<(usize, u64)>;

impl ColoringHistory {
    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn converged_at(&self) -> Option<usize> {
        self.converged_at
    }

    pub fn num_graphs(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Index of the last stored iteration.
    pub fn last_iteration(&self) -> usize {
        self.colors.len() - 1
    }

    /// Resolves `t` to a stored iteration. Iterations past convergence map to
    /// the stable coloring, which is identical to every later one.
    fn stored(&self, t: usize) -> Result<usize> {
        let last = self.last_iteration();
        if t <= last {
            Ok(t)
        } else if self.converged_at.is_some() {
            Ok(last)
        } else {
            Err(AuditError::UnknownIteration {
                requested: t,
                available: last,
            })
        }
    }

    /// Colors of every node in the union at iteration `t`.
    pub fn colors_at(&self, t: usize) -> Result<&[u32]> {
        Ok(&self.colors[self.stored(t)?])
    }

    pub fn num_colors_at(&self, t: usize) -> Result<usize> {
        Ok(self.num_colors[self.stored(t)?])
    }

    /// Colors of the nodes of one graph at iteration `t`.
    pub fn graph_colors(&self, graph: usize, t: usize) -> Result<&[u32]> {
        if graph >= self.num_graphs() {
            return Err(AuditError::UnknownGraph(graph));
        }
        let colors = self.colors_at(t)?;
        Ok(&colors[self.offsets[graph]..self.offsets[graph + 1]])
    }

    /// Sorted `(color, count)` histogram of one graph.
    pub fn histogram(&self, graph: usize, t: usize) -> Result<Vec<(u32, usize)>> {
        let mut colors = self.graph_colors(graph, t)?.to_vec();
        colors.sort_unstable();
        let mut out: Vec<(u32, usize)> = Vec::new();
        for c in colors {
            match out.last_mut() {
                Some((last, n)) if *last == c => *n += 1,
                _ => out.push((c, 1)),
            }
        }
        Ok(out)
    }

    /// Writes the coloring as CSV `graph_id,node_id,t,color`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "graph_id,node_id,t,color")?;
        for g in 0..self.num_graphs() {
            for node in 0..self.offsets[g + 1] - self.offsets[g] {
                for (t, colors) in self.colors.iter().enumerate() {
                    writeln!(out, "{g},{node},{t},{}", colors[self.offsets[g] + node])?;
                }
            }
        }
        Ok(())
    }
}

/// Flat adjacency of the disjoint union of several graphs.
struct UnionAdjacency {
    starts: Vec<usize>,
    targets: Vec<u32>,
}

impl UnionAdjacency {
    fn new<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> (Self, Vec<usize>) {
        let mut starts = vec![0];
        let mut targets = Vec::new();
        let mut offsets = vec![0];
        for g in graphs {
            let base = *offsets.last().unwrap() as u32;
            for v in 0..g.num_nodes() {
                targets.extend(g.neighbors(v).iter().map(|&w| w + base));
                starts.push(targets.len());
            }
            offsets.push(base as usize + g.num_nodes());
        }
        (UnionAdjacency { starts, targets }, offsets)
    }

    fn len(&self) -> usize {
        self.starts.len() - 1
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.starts[v]..self.starts[v + 1]]
    }
}

/// Numbers the distinct keys `0..k` in sorted order and returns the recoded
/// sequence with `k`.
pub(crate) fn recode_by<T, F>(items: &[T], cmp: F) -> (Vec<u32>, usize)
where
    T: Sync,
    F: Fn(&T, &T) -> Ordering + Sync,
{
    let mut order: Vec<u32> = (0..items.len() as u32).collect();
    order.par_sort_unstable_by(|&a, &b| cmp(&items[a as usize], &items[b as usize]));
    let mut out = vec![0u32; items.len()];
    let mut next = 0u32;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && cmp(&items[order[pos - 1] as usize], &items[i as usize]) != Ordering::Equal {
            next += 1;
        }
        out[i as usize] = next;
    }
    let count = if items.is_empty() {
        0
    } else {
        next as usize + 1
    };
    (out, count)
}

pub(crate) fn recode<T: Ord + Sync>(items: &[T]) -> (Vec<u32>, usize) {
    recode_by(items, T::cmp)
}

/// Initial color key of each node: node label, else feature bit pattern,
/// else a uniform constant. Feature values are compared bitwise.
pub(crate) fn initial_keys(graph: &Graph) -> Vec<Vec<u64>> {
    if let Some(labels) = graph.node_labels() {
        labels.iter().map(|&l| vec![0, l as u64]).collect()
    } else if let Some(features) = graph.node_features() {
        (0..graph.num_nodes())
            .map(|v| {
                let mut key = Vec::with_capacity(features.dim() + 1);
                key.push(1);
                key.extend(features.row(v).iter().map(|x| x.to_bits()));
                key
            })
            .collect()
    } else {
        vec![vec![2]; graph.num_nodes()]
    }
}

/// Jointly recoded initial colors for a list of graphs.
pub(crate) fn joint_initial_colors(graphs: &[&Graph]) -> (Vec<Vec<u32>>, usize) {
    let keys: Vec<Vec<u64>> = graphs.iter().flat_map(|g| initial_keys(g)).collect();
    let (flat, k) = recode(&keys);
    let mut out = Vec::with_capacity(graphs.len());
    let mut at = 0;
    for g in graphs {
        out.push(flat[at..at + g.num_nodes()].to_vec());
        at += g.num_nodes();
    }
    (out, k)
}

/// One refinement step. Returns the new colors and their count.
fn refine_step(adj: &UnionAdjacency, colors: &[u32]) -> (Vec<u32>, usize) {
    let n = adj.len();
    let neighbor_colors: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut cs: Vec<u32> = adj
                .neighbors(v)
                .iter()
                .map(|&w| colors[w as usize])
                .collect();
            cs.sort_unstable();
            cs
        })
        .collect();
    let nodes: Vec<u32> = (0..n as u32).collect();
    recode_by(&nodes, |&a, &b| {
        colors[a as usize]
            .cmp(&colors[b as usize])
            .then_with(|| neighbor_colors[a as usize].cmp(&neighbor_colors[b as usize]))
    })
}

/// Refinement to the stable (equitable) coloring on a fixed union of graphs.
/// Used by the exact search, which re-refines after every individualization.
pub(crate) struct Refiner {
    adj: UnionAdjacency,
}

impl Refiner {
    pub(crate) fn new(graphs: &[&Graph]) -> Self {
        let (adj, _) = UnionAdjacency::new(graphs.iter().copied());
        Refiner { adj }
    }

    /// Returns the stable coloring refining `colors` and its number of colors.
    pub(crate) fn stable(&self, colors: &[u32]) -> (Vec<u32>, usize) {
        let (mut colors, mut count) = recode(colors);
        loop {
            let (next, next_count) = refine_step(&self.adj, &colors);
            if next_count == count {
                return (next, count);
            }
            colors = next;
            count = next_count;
        }
    }
}

/// Runs 1-WL over the disjoint union of all graphs in the dataset.
///
/// With `t_max = Some(t)` exactly `t` iterations are recorded (iterations past
/// convergence repeat the stable coloring). With `None` refinement runs until
/// the partition stops changing.
pub fn wl_refine(ds: &Dataset, t_max: Option<usize>) -> ColoringHistory {
    wl_refine_with(ds, t_max, &WlOptions::default())
}

pub fn wl_refine_with(ds: &Dataset, t_max: Option<usize>, opts: &WlOptions) -> ColoringHistory {
    let graphs: Vec<&Graph> = ds.graphs().iter().collect();
    let mut keys: Vec<Vec<u64>> = graphs.iter().flat_map(|g| initial_keys(g)).collect();
    if opts.include_groups {
        if let Some(groups) = ds.groups() {
            match ds.level() {
                Level::Node => {
                    for (key, &grp) in keys.iter_mut().zip(groups) {
                        key.push(grp as u64);
                    }
                }
                Level::Graph => {
                    let mut at = 0;
                    for (g, &grp) in graphs.iter().zip(groups) {
                        for key in &mut keys[at..at + g.num_nodes()] {
                            key.push(grp as u64);
                        }
                        at += g.num_nodes();
                    }
                }
            }
        }
    }
    let (initial, _) = recode(&keys);
    refine_from(&graphs, initial, t_max, Scope::DatasetGlobal)
}

/// Runs 1-WL on a single graph.
pub fn wl_refine_graph(graph: &Graph, t_max: Option<usize>) -> ColoringHistory {
    let (initial, _) = recode(&initial_keys(graph));
    refine_from(&[graph], initial, t_max, Scope::SingleGraph)
}

fn refine_from(
    graphs: &[&Graph],
    initial: Vec<u32>,
    t_max: Option<usize>,
    scope: Scope,
) -> ColoringHistory {
    let (adj, offsets) = UnionAdjacency::new(graphs.iter().copied());
    let (initial, k0) = recode(&initial);
    let mut colors = vec![initial];
    let mut num_colors = vec![k0];
    let mut converged_at = None;
    let mut t = 0;
    loop {
        if t_max.is_some_and(|max| t >= max) {
            break;
        }
        if converged_at.is_some() {
            // stable: later iterations repeat the same ids
            colors.push(colors[t].clone());
            num_colors.push(num_colors[t]);
            t += 1;
            continue;
        }
        let (next, k) = refine_step(&adj, &colors[t]);
        if k == num_colors[t] {
            converged_at = Some(t);
            if t_max.is_none() {
                break;
            }
            debug_assert_eq!(next, colors[t]);
        }
        colors.push(next);
        num_colors.push(k);
        t += 1;
    }
    ColoringHistory {
        offsets,
        colors,
        num_colors,
        converged_at,
        scope,
    }
}

pub fn wl_signature(h: &ColoringHistory, graph: usize, t: usize) -> Result<WlSignature> {
    let color_histogram = h.histogram(graph, t)?;
    let mut sorted_counts: Vec<usize> = color_histogram.iter().map(|&(_, n)| n).collect();
    sorted_counts.sort_unstable();
    Ok(WlSignature {
        color_histogram,
        sorted_counts,
    })
}

/// True iff the two graphs' color histograms differ at iteration `t`.
pub fn wl_distinguishes(h: &ColoringHistory, g1: usize, g2: usize, t: usize) -> Result<bool> {
    wl_distinguishes_by(h, g1, g2, t, Comparison::Histogram)
}

pub fn wl_distinguishes_by(
    h: &ColoringHistory,
    g1: usize,
    g2: usize,
    t: usize,
    comparison: Comparison,
) -> Result<bool> {
    let a = wl_signature(h, g1, t)?;
    let b = wl_signature(h, g2, t)?;
    Ok(match comparison {
        Comparison::Histogram => a.color_histogram != b.color_histogram,
        Comparison::SortedCount => a.sorted_counts != b.sorted_counts,
    })
}

/// Instances grouped by WL coloring at iteration `t`: graphs by signature
/// (graph-level) or nodes by color (node-level).
pub fn wl_partition(
    h: &ColoringHistory,
    ds: &Dataset,
    t: usize,
    comparison: Comparison,
) -> Result<Partition> {
    match ds.level() {
        Level::Node => Ok(Partition::from_keys(h.colors_at(t)?.iter().copied())),
        Level::Graph => {
            let sigs = (0..h.num_graphs())
                .map(|g| {
                    wl_signature(h, g, t).map(|s| match comparison {
                        Comparison::Histogram => s.color_histogram,
                        Comparison::SortedCount => {
                            s.sorted_counts.into_iter().map(|n| (0, n)).collect()
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Partition::from_keys(sigs))
        }
    }
}

/// Subtree feature map: color counts of iterations `0..=t`, concatenated, with
/// iteration `s` colors placed after all colors of earlier iterations.
pub fn wl_kernel_features(h: &ColoringHistory, graph: usize, t: usize) -> Result<SparseCounts> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for s in 0..=t {
        for (color, count) in h.histogram(graph, s)? {
            out.push((offset + color as usize, count as u64));
        }
        offset += h.num_colors_at(s)?;
    }
    Ok(out)
}
