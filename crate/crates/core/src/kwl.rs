//! Classic (oblivious) k-WL over ordered k-tuples.
//!
//! The neighbors of a tuple at position `i` are the `n` tuples obtained by
//! replacing its `i`-th entry. A tuple's new color is the canonical recoding
//! of its old color together with the `k` position-wise neighbor multisets.

use serde::Serialize;

use crate::error::{AuditError, Result};
use crate::graph::Graph;
use crate::wl::{joint_initial_colors, recode};

/// Largest node count accepted per order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KwlCaps {
    pub k2: usize,
    pub k3: usize,
    pub higher: usize,
}

impl Default for KwlCaps {
    fn default() -> Self {
        KwlCaps {
            k2: 16,
            k3: 10,
            higher: 6,
        }
    }
}

impl KwlCaps {
    pub fn for_order(&self, k: usize) -> usize {
        match k {
            2 => self.k2,
            3 => self.k3,
            _ => self.higher,
        }
    }
}

/// Tuple colors of two graphs refined jointly, one vector per iteration.
/// Tuples of the first graph come first; within a graph a tuple
/// `(v_0, .., v_{k-1})` has index `sum v_i n^(k-1-i)`.
#[derive(Debug, Clone)]
pub struct KTupleColoring {
    pub k: usize,
    pub sizes: [usize; 2],
    pub colors: Vec<Vec<u32>>,
}

impl KTupleColoring {
    fn split(&self, t: usize) -> (&[u32], &[u32]) {
        let first = self.sizes[0].pow(self.k as u32);
        self.colors[t].split_at(first)
    }

    /// True iff the two graphs' tuple-color histograms differ at iteration `t`.
    pub fn distinguishes_at(&self, t: usize) -> bool {
        let (a, b) = self.split(t);
        histogram(a) != histogram(b)
    }
}

fn histogram(colors: &[u32]) -> Vec<u32> {
    let mut sorted = colors.to_vec();
    sorted.sort_unstable();
    sorted
}

fn decode(mut index: usize, n: usize, k: usize, out: &mut [usize]) {
    for slot in out.iter_mut().take(k).rev() {
        *slot = index % n;
        index /= n;
    }
}

fn tuple_count(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

/// Runs joint k-WL on two graphs until the tuple partition is stable or
/// `t_max` iterations have run.
pub fn k_wl_colorings(
    g1: &Graph,
    g2: &Graph,
    k: usize,
    t_max: Option<usize>,
    caps: &KwlCaps,
) -> Result<KTupleColoring> {
    if k < 2 {
        return Err(AuditError::InvalidArgument(format!(
            "k-WL needs k >= 2, got {k}"
        )));
    }
    let n_max = g1.num_nodes().max(g2.num_nodes());
    let cap = caps.for_order(k);
    if n_max > cap {
        return Err(AuditError::ResourceCap {
            what: "k-WL node count",
            limit: cap,
            actual: n_max,
        });
    }
    let graphs = [g1, g2];
    let (node_colors, _) = joint_initial_colors(&graphs);

    // atomic type: equality and adjacency pattern plus node colors
    let mut keys: Vec<Vec<u32>> = Vec::new();
    let mut tuple = vec![0usize; k];
    for (gi, g) in graphs.iter().enumerate() {
        let n = g.num_nodes();
        for idx in 0..tuple_count(n, k) {
            decode(idx, n, k, &mut tuple);
            let mut key = Vec::with_capacity(k * k + k);
            for i in 0..k {
                for j in i + 1..k {
                    key.push(u32::from(tuple[i] == tuple[j]));
                    key.push(u32::from(g.has_edge(tuple[i], tuple[j])));
                }
            }
            key.extend(tuple.iter().map(|&v| node_colors[gi][v]));
            keys.push(key);
        }
    }
    let (initial, mut count) = recode(&keys);
    let mut colors = vec![initial];

    let mut t = 0;
    while t_max.is_none_or(|max| t < max) {
        let current = &colors[t];
        let mut sigs: Vec<Vec<u32>> = Vec::with_capacity(current.len());
        let mut base = 0usize;
        for g in graphs {
            let n = g.num_nodes();
            let total = tuple_count(n, k);
            for idx in 0..total {
                decode(idx, n, k, &mut tuple);
                let mut sig = Vec::with_capacity(1 + k * n);
                sig.push(current[base + idx]);
                for (i, &ti) in tuple.iter().enumerate() {
                    let stride = n.pow((k - 1 - i) as u32);
                    let cleared = idx - ti * stride;
                    let start = sig.len();
                    sig.extend((0..n).map(|w| current[base + cleared + w * stride]));
                    sig[start..].sort_unstable();
                }
                sigs.push(sig);
            }
            base += total;
        }
        let (next, next_count) = recode(&sigs);
        if next_count == count {
            break;
        }
        colors.push(next);
        count = next_count;
        t += 1;
    }
    Ok(KTupleColoring {
        k,
        sizes: [g1.num_nodes(), g2.num_nodes()],
        colors,
    })
}

/// Joint k-WL test. Returns whether the graphs are distinguished and the
/// first iteration at which they were (or the iterations run without
/// distinguishing them).
pub fn k_wl_refine(
    g1: &Graph,
    g2: &Graph,
    k: usize,
    t_max: Option<usize>,
    caps: &KwlCaps,
) -> Result<(bool, usize)> {
    let coloring = k_wl_colorings(g1, g2, k, t_max, caps)?;
    for t in 0..coloring.colors.len() {
        if coloring.distinguishes_at(t) {
            return Ok((true, t));
        }
    }
    Ok((false, coloring.colors.len() - 1))
}
