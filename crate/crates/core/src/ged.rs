//! Exact graph edit distance for desk-scale graphs.
//!
//! Unit costs: node insertion/deletion 1, edge insertion/deletion 1, node
//! initial-color substitution 1. The smaller graph is padded with isolated
//! placeholder nodes and every bijection of the padded node sets is searched
//! depth-first with pruning on the partial cost.

use serde::Serialize;

use crate::error::{AuditError, Result};
use crate::graph::{Dataset, Graph};
use crate::wl::{joint_initial_colors, wl_distinguishes, wl_refine};

/// Largest node count accepted by [`graph_edit_distance`].
pub const GED_MAX_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GedResult {
    pub distance: usize,
    /// `optimal_bijection[v]` is the padded image of padded node `v` of the
    /// first graph; indices at or above a graph's node count are placeholders.
    pub optimal_bijection: Vec<usize>,
}

struct Padded {
    n: usize,
    real: usize,
    colors: Vec<Option<u32>>,
    adj: Vec<bool>,
}

impl Padded {
    fn new(g: &Graph, colors: &[u32], n: usize) -> Self {
        let mut adj = vec![false; n * n];
        for &(u, v) in g.edges() {
            adj[u as usize * n + v as usize] = true;
            adj[v as usize * n + u as usize] = true;
        }
        let colors = (0..n).map(|v| colors.get(v).copied()).collect();
        Padded {
            n,
            real: g.num_nodes(),
            colors,
            adj,
        }
    }

    fn edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }
}

fn node_cost(a: Option<u32>, b: Option<u32>) -> usize {
    match (a, b) {
        (None, None) => 0,
        (Some(x), Some(y)) => usize::from(x != y),
        _ => 1,
    }
}

struct Search<'a> {
    a: &'a Padded,
    b: &'a Padded,
    map: Vec<usize>,
    used: Vec<bool>,
    best: usize,
    best_map: Vec<usize>,
}

impl Search<'_> {
    fn go(&mut self, u: usize, cost: usize) {
        if cost >= self.best {
            return;
        }
        if u == self.a.n {
            self.best = cost;
            self.best_map.clone_from(&self.map);
            return;
        }
        for w in 0..self.b.n {
            if self.used[w] {
                continue;
            }
            let mut step = node_cost(self.a.colors[u], self.b.colors[w]);
            for p in 0..u {
                step += usize::from(self.a.edge(p, u) != self.b.edge(self.map[p], w));
            }
            self.used[w] = true;
            self.map.push(w);
            self.go(u + 1, cost + step);
            self.map.pop();
            self.used[w] = false;
        }
    }
}

/// Exact unit-cost edit distance. Both graphs must have at most
/// [`GED_MAX_NODES`] nodes.
pub fn graph_edit_distance(g1: &Graph, g2: &Graph) -> Result<GedResult> {
    let n = g1.num_nodes().max(g2.num_nodes());
    if n > GED_MAX_NODES {
        return Err(AuditError::ResourceCap {
            what: "edit distance node count",
            limit: GED_MAX_NODES,
            actual: n,
        });
    }
    let (colors, _) = joint_initial_colors(&[g1, g2]);
    let a = Padded::new(g1, &colors[0], n);
    let b = Padded::new(g2, &colors[1], n);
    // upper bound: delete everything, insert everything
    let trivial = a.real + b.real + g1.num_edges() + g2.num_edges();
    let mut search = Search {
        a: &a,
        b: &b,
        map: Vec::with_capacity(n),
        used: vec![false; n],
        best: trivial + 1,
        best_map: Vec::new(),
    };
    search.go(0, 0);
    debug_assert!(search.best <= trivial);
    Ok(GedResult {
        distance: search.best,
        optimal_bijection: search.best_map,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairValidity {
    pub graph_a: usize,
    pub graph_b: usize,
    pub ged: usize,
    pub wl_distinguishes: bool,
}

/// A smaller-distance pair that WL separates while a larger-distance pair
/// stays WL-equal. Indices point into [`ConvergentValidity::pairs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Inversion {
    pub closer: usize,
    pub farther: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergentValidity {
    pub pairs: Vec<PairValidity>,
    pub inversions: Vec<Inversion>,
}

/// Edit distance and stable 1-WL verdict for every pair of `graphs`, with
/// every ordering inversion between the two.
pub fn convergent_validity_report(graphs: &[Graph]) -> Result<ConvergentValidity> {
    let ds = Dataset::graph_level("convergent-validity", graphs.to_vec())?;
    let history = wl_refine(&ds, None);
    let stable = history.last_iteration();
    let mut pairs = Vec::new();
    for i in 0..graphs.len() {
        for j in i + 1..graphs.len() {
            pairs.push(PairValidity {
                graph_a: i,
                graph_b: j,
                ged: graph_edit_distance(&graphs[i], &graphs[j])?.distance,
                wl_distinguishes: wl_distinguishes(&history, i, j, stable)?,
            });
        }
    }
    let mut inversions = Vec::new();
    for (c, closer) in pairs.iter().enumerate() {
        for (f, farther) in pairs.iter().enumerate() {
            if closer.ged < farther.ged && closer.wl_distinguishes && !farther.wl_distinguishes {
                inversions.push(Inversion {
                    closer: c,
                    farther: f,
                });
            }
        }
    }
    Ok(ConvergentValidity { pairs, inversions })
}
