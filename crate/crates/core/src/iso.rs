//! Exact isomorphism, automorphism orbits and node twins.
//!
//! The search is individualization-refinement: both graphs are refined
//! jointly to their stable coloring, then the smallest non-singleton color
//! class is split by individualizing its lowest-id node in the first graph
//! against each same-colored node of the second graph in ascending id order.
//! A discrete coloring fixes a bijection, which is verified edge by edge.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AuditError, Result};
use crate::graph::{Dataset, Graph, Level, Partition};
use crate::wl::{initial_keys, joint_initial_colors, wl_refine, Refiner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoResult {
    Isomorphic,
    NonIsomorphic,
}

/// Verdict of the exact test. `witness[v]` is the image in the second graph
/// of node `v` of the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoCertificate {
    pub result: IsoResult,
    pub witness: Option<Vec<usize>>,
}

impl IsoCertificate {
    pub fn is_isomorphic(&self) -> bool {
        self.result == IsoResult::Isomorphic
    }

    fn non_isomorphic() -> Self {
        IsoCertificate {
            result: IsoResult::NonIsomorphic,
            witness: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsoCaps {
    /// Largest graph accepted by [`is_isomorphic`].
    pub max_nodes: usize,
    /// Largest graph accepted by [`node_orbit_partition`].
    pub orbit_max_nodes: usize,
}

impl Default for IsoCaps {
    fn default() -> Self {
        IsoCaps {
            max_nodes: 512,
            orbit_max_nodes: 64,
        }
    }
}

/// Checks that `map` is a bijection carrying edges onto edges, non-edges onto
/// non-edges and initial colors onto equal initial colors.
pub fn verify_isomorphism(g1: &Graph, g2: &Graph, map: &[usize]) -> bool {
    let n = g1.num_nodes();
    if n != g2.num_nodes() || map.len() != n || g1.num_edges() != g2.num_edges() {
        return false;
    }
    let mut hit = vec![false; n];
    for &w in map {
        if w >= n || std::mem::replace(&mut hit[w], true) {
            return false;
        }
    }
    let (k1, k2) = (initial_keys(g1), initial_keys(g2));
    if (0..n).any(|v| k1[v] != k2[map[v]]) {
        return false;
    }
    // equal edge counts make edge preservation enough for non-edges too
    g1.edges()
        .iter()
        .all(|&(u, v)| g2.has_edge(map[u as usize], map[v as usize]))
}

/// Search state over the union of two graphs: the first graph's nodes are
/// `0..n`, the second's `n..2n`.
struct Search<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    refiner: Refiner,
    n: usize,
}

impl<'a> Search<'a> {
    fn new(g1: &'a Graph, g2: &'a Graph) -> Self {
        Search {
            g1,
            g2,
            refiner: Refiner::new(&[g1, g2]),
            n: g1.num_nodes(),
        }
    }

    fn run(&self, colors: &[u32]) -> Option<Vec<usize>> {
        let (stable, count) = self.refiner.stable(colors);
        let (left, right) = stable.split_at(self.n);
        let mut size_left = vec![0usize; count];
        let mut size_right = vec![0usize; count];
        for &c in left {
            size_left[c as usize] += 1;
        }
        for &c in right {
            size_right[c as usize] += 1;
        }
        if size_left != size_right {
            return None;
        }
        // smallest non-singleton class, lowest color id on ties
        let target = (0..count)
            .filter(|&c| size_left[c] > 1)
            .min_by_key(|&c| (size_left[c], c));
        let Some(target) = target else {
            let mut image = vec![0usize; count];
            for (w, &c) in right.iter().enumerate() {
                image[c as usize] = w;
            }
            let map: Vec<usize> = left.iter().map(|&c| image[c as usize]).collect();
            return verify_isomorphism(self.g1, self.g2, &map).then_some(map);
        };
        let v = left.iter().position(|&c| c as usize == target).unwrap();
        let fresh = count as u32;
        for (w, &c) in right.iter().enumerate() {
            if c as usize != target {
                continue;
            }
            let mut next = stable.clone();
            next[v] = fresh;
            next[self.n + w] = fresh;
            if let Some(map) = self.run(&next) {
                return Some(map);
            }
        }
        None
    }
}

fn check_cap(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit {
        return Err(AuditError::ResourceCap {
            what,
            limit,
            actual: n,
        });
    }
    Ok(())
}

/// Exact isomorphism test with the default node cap.
pub fn is_isomorphic(g1: &Graph, g2: &Graph) -> Result<IsoCertificate> {
    is_isomorphic_with(g1, g2, &IsoCaps::default())
}

pub fn is_isomorphic_with(g1: &Graph, g2: &Graph, caps: &IsoCaps) -> Result<IsoCertificate> {
    check_cap(
        g1.num_nodes().max(g2.num_nodes()),
        caps.max_nodes,
        "isomorphism node count",
    )?;
    if g1.num_nodes() != g2.num_nodes() || g1.num_edges() != g2.num_edges() {
        return Ok(IsoCertificate::non_isomorphic());
    }
    let (initial, _) = joint_initial_colors(&[g1, g2]);
    let colors: Vec<u32> = initial.concat();
    let witness = Search::new(g1, g2).run(&colors);
    Ok(match witness {
        Some(map) => {
            debug_assert!(verify_isomorphism(g1, g2, &map));
            IsoCertificate {
                result: IsoResult::Isomorphic,
                witness: Some(map),
            }
        }
        None => IsoCertificate::non_isomorphic(),
    })
}

/// Graph-level isomorphism classes.
#[derive(Debug, Clone)]
pub struct IsoPartition {
    pub partition: Partition,
    /// Graphs above the node cap, classed by WL signature alone.
    pub heuristic_graphs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct IsoPartitionOptions {
    pub caps: IsoCaps,
    /// Class graphs above the cap by their WL signature instead of failing.
    pub wl_fallback: bool,
}

/// Partition of a graph-level dataset into isomorphism classes.
pub fn iso_partition(ds: &Dataset) -> Result<Partition> {
    iso_partition_with(ds, &IsoPartitionOptions::default()).map(|p| p.partition)
}

pub fn iso_partition_with(ds: &Dataset, opts: &IsoPartitionOptions) -> Result<IsoPartition> {
    if ds.level() != Level::Graph {
        return Err(AuditError::InvalidArgument(
            "isomorphism classes need a graph-level dataset; use node_duplicate_partition".into(),
        ));
    }
    let history = wl_refine(ds, None);
    let stable = history.last_iteration();
    let mut buckets: HashMap<Vec<(u32, usize)>, Vec<usize>> = HashMap::new();
    let mut order = Vec::new();
    for g in 0..ds.graphs().len() {
        let sig = history.histogram(g, stable)?;
        let entry = buckets.entry(sig).or_default();
        if entry.is_empty() {
            order.push(g);
        }
        entry.push(g);
    }
    let bucket_lists: Vec<Vec<usize>> = order
        .iter()
        .map(|&first| {
            let sig = history.histogram(first, stable).expect("graph exists");
            buckets.remove(&sig).expect("bucket present")
        })
        .collect();

    let graphs = ds.graphs();
    // representative of each graph's class
    type BucketResult = Result<(Vec<(usize, usize)>, Vec<usize>)>;
    let results: Vec<BucketResult> = bucket_lists
        .par_iter()
        .map(|members| {
            let mut reps: Vec<usize> = Vec::new();
            let mut assigned = Vec::with_capacity(members.len());
            let mut heuristic = Vec::new();
            for &g in members {
                if graphs[g].num_nodes() > opts.caps.max_nodes {
                    if !opts.wl_fallback {
                        check_cap(
                            graphs[g].num_nodes(),
                            opts.caps.max_nodes,
                            "isomorphism node count",
                        )?;
                    }
                    heuristic.push(g);
                    let rep = *reps.first().unwrap_or(&g);
                    if reps.is_empty() {
                        reps.push(g);
                    }
                    assigned.push((g, rep));
                    continue;
                }
                let mut found = None;
                for &r in &reps {
                    if graphs[r].num_nodes() > opts.caps.max_nodes {
                        continue;
                    }
                    if is_isomorphic_with(&graphs[r], &graphs[g], &opts.caps)?.is_isomorphic() {
                        found = Some(r);
                        break;
                    }
                }
                let rep = found.unwrap_or_else(|| {
                    reps.push(g);
                    g
                });
                assigned.push((g, rep));
            }
            Ok((assigned, heuristic))
        })
        .collect();

    let mut rep_of = vec![0usize; graphs.len()];
    let mut heuristic_graphs = Vec::new();
    for r in results {
        let (assigned, heuristic) = r?;
        for (g, rep) in assigned {
            rep_of[g] = rep;
        }
        heuristic_graphs.extend(heuristic);
    }
    heuristic_graphs.sort_unstable();
    Ok(IsoPartition {
        partition: Partition::from_keys(rep_of),
        heuristic_graphs,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller id stays root so roots are deterministic
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }

    fn partition(&mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_keys(roots)
    }
}

/// Classes of the twin relation (equal initial colors and
/// `N(u) \ {v} = N(v) \ {u}`), closed transitively. Twins are swapped by an
/// automorphism, so every class lies inside one orbit.
pub fn node_duplicate_partition(g: &Graph) -> Partition {
    let keys = initial_keys(g);
    let mut uf = UnionFind::new(g.num_nodes());
    // false twins: same open neighborhood
    let mut open: HashMap<(&[u64], &[u32]), usize> = HashMap::new();
    for (v, key) in keys.iter().enumerate() {
        let first = *open.entry((key, g.neighbors(v))).or_insert(v);
        uf.union(first, v);
    }
    // true twins: same closed neighborhood
    let closed: Vec<Vec<u32>> = (0..g.num_nodes())
        .map(|v| {
            let mut c = g.neighbors(v).to_vec();
            let at = c.binary_search(&(v as u32)).unwrap_err();
            c.insert(at, v as u32);
            c
        })
        .collect();
    let mut by_closed: HashMap<(&[u64], &[u32]), usize> = HashMap::new();
    for v in 0..g.num_nodes() {
        let first = *by_closed.entry((&keys[v], &closed[v])).or_insert(v);
        uf.union(first, v);
    }
    uf.partition()
}

/// Exact automorphism orbits.
pub fn node_orbit_partition(g: &Graph) -> Result<Partition> {
    node_orbit_partition_with(g, &IsoCaps::default())
}

pub fn node_orbit_partition_with(g: &Graph, caps: &IsoCaps) -> Result<Partition> {
    let n = g.num_nodes();
    check_cap(n, caps.orbit_max_nodes, "orbit node count")?;
    let (initial, _) = joint_initial_colors(&[g, g]);
    let base: Vec<u32> = initial.concat();
    let search = Search::new(g, g);
    let (stable, _) = search.refiner.stable(&base);
    let fresh = stable.iter().max().map_or(0, |&m| m + 1);

    let mut uf = UnionFind::new(n);
    let mut reps_by_color: HashMap<u32, Vec<usize>> = HashMap::new();
    for v in 0..n {
        let reps = reps_by_color.entry(stable[v]).or_default();
        let mut joined = false;
        for &r in reps.iter() {
            if uf.find(r) == uf.find(v) {
                joined = true;
                break;
            }
            let mut colors = stable.clone();
            colors[r] = fresh;
            colors[n + v] = fresh;
            if let Some(map) = search.run(&colors) {
                for (i, &j) in map.iter().enumerate() {
                    uf.union(i, j);
                }
                joined = true;
                break;
            }
        }
        if !joined {
            reps.push(v);
        }
    }
    Ok(uf.partition())
}
