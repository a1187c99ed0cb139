//! Test-only oracles. Everything here is written from the definitions with
//! brute force and shares no code with the library beyond the graph type.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wl_audit::{Graph, Partition};

pub fn matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.num_nodes();
    let mut m = vec![vec![false; n]; n];
    for &(u, v) in g.edges() {
        m[u as usize][v as usize] = true;
        m[v as usize][u as usize] = true;
    }
    m
}

pub fn colors(g: &Graph) -> Vec<u32> {
    g.node_labels()
        .map(|l| l.to_vec())
        .unwrap_or_else(|| vec![0; g.num_nodes()])
}

/// Calls `f` on every permutation of `0..n` (lexicographic order).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize]) -> bool) {
    fn go(
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        n: usize,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if perm.len() == n {
            return f(perm);
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                perm.push(v);
                let stop = go(perm, used, n, f);
                perm.pop();
                used[v] = false;
                if stop {
                    return true;
                }
            }
        }
        false
    }
    go(&mut Vec::new(), &mut vec![false; n], n, &mut f);
}

pub fn is_isomorphism(a: &Graph, b: &Graph, perm: &[usize]) -> bool {
    let (ma, mb) = (matrix(a), matrix(b));
    let (ca, cb) = (colors(a), colors(b));
    let n = a.num_nodes();
    (0..n).all(|u| ca[u] == cb[perm[u]])
        && (0..n).all(|u| (0..n).all(|v| ma[u][v] == mb[perm[u]][perm[v]]))
}

/// Exhaustive isomorphism test over all bijections.
pub fn brute_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.num_nodes() != b.num_nodes() {
        return false;
    }
    let mut found = false;
    for_each_permutation(a.num_nodes(), |p| {
        found = is_isomorphism(a, b, p);
        found
    });
    found
}

/// Every automorphism, merged into orbits; orbits listed by smallest member.
pub fn brute_orbits(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.num_nodes();
    let mut orbit_of: Vec<usize> = (0..n).collect();
    for_each_permutation(n, |p| {
        if is_isomorphism(g, g, p) {
            for v in 0..n {
                let (a, b) = (orbit_of[v], orbit_of[p[v]]);
                let (lo, hi) = (a.min(b), a.max(b));
                for o in orbit_of.iter_mut() {
                    if *o == hi {
                        *o = lo;
                    }
                }
            }
        }
        false
    });
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &o) in orbit_of.iter().enumerate() {
        groups.entry(o).or_default().push(v);
    }
    groups.into_values().collect()
}

/// Unit-cost edit distance by enumerating every bijection of the padded
/// node sets.
pub fn brute_ged(a: &Graph, b: &Graph) -> usize {
    let n = a.num_nodes().max(b.num_nodes());
    let pad = |g: &Graph| {
        let m = matrix(g);
        let c = colors(g);
        let mut adj = vec![vec![false; n]; n];
        let mut col = vec![None; n];
        for u in 0..g.num_nodes() {
            col[u] = Some(c[u]);
            for v in 0..g.num_nodes() {
                adj[u][v] = m[u][v];
            }
        }
        (adj, col)
    };
    let ((ma, ca), (mb, cb)) = (pad(a), pad(b));
    let mut best = usize::MAX;
    for_each_permutation(n, |p| {
        let mut cost = 0;
        for u in 0..n {
            cost += usize::from(ca[u] != cb[p[u]]);
            for v in u + 1..n {
                cost += usize::from(ma[u][v] != mb[p[u]][p[v]]);
            }
        }
        best = best.min(cost);
        false
    });
    best
}

/// Naive joint 1-WL on two graphs with string-free signature interning.
/// Returns whether the color histograms differ at the stable coloring.
pub fn naive_wl_distinguishes(a: &Graph, b: &Graph) -> bool {
    let graphs = [a, b];
    let mut color: Vec<Vec<usize>> = Vec::new();
    let mut table: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for g in graphs {
        let c = colors(g);
        color.push(
            c.iter()
                .map(|&x| {
                    let next = table.len();
                    *table.entry(vec![x as usize]).or_insert(next)
                })
                .collect(),
        );
    }
    let total: usize = graphs.iter().map(|g| g.num_nodes()).sum();
    for _ in 0..=total {
        let mut table: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut next_colors = Vec::new();
        for (gi, g) in graphs.iter().enumerate() {
            let mut out = Vec::new();
            for v in 0..g.num_nodes() {
                let mut sig: Vec<usize> = g
                    .neighbors(v)
                    .iter()
                    .map(|&w| color[gi][w as usize])
                    .collect();
                sig.sort_unstable();
                sig.insert(0, color[gi][v]);
                let next = table.len();
                out.push(*table.entry(sig).or_insert(next));
            }
            next_colors.push(out);
        }
        color = next_colors;
    }
    let hist = |c: &Vec<usize>| {
        let mut h = c.clone();
        h.sort_unstable();
        h
    };
    hist(&color[0]) != hist(&color[1])
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, labels: u32) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::new(n, edges).unwrap();
    if labels > 1 {
        let l = (0..n).map(|_| rng.gen_range(0..labels)).collect();
        g.with_node_labels(l).unwrap()
    } else {
        g
    }
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Disjoint union of cycles with the given lengths (every node degree 2).
pub fn cycles(lengths: &[usize]) -> Graph {
    let mut edges = Vec::new();
    let mut base = 0u32;
    for &len in lengths {
        for i in 0..len as u32 {
            edges.push((base + i, base + (i + 1) % len as u32));
        }
        base += len as u32;
    }
    let edges: Vec<(u32, u32)> = edges
        .into_iter()
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    Graph::new(base as usize, edges).unwrap()
}

/// A pair drawn from a mix of isomorphic copies, one-edge variants,
/// 2-regular look-alikes and independent graphs.
pub fn random_pair(rng: &mut ChaCha8Rng, max_n: usize) -> (Graph, Graph) {
    let n = rng.gen_range(1..=max_n);
    let labels = if rng.gen_bool(0.3) { 2 } else { 1 };
    let p = rng.gen_range(0.1..0.9);
    let g = random_graph(rng, n, p, labels);
    match rng.gen_range(0..4) {
        0 => {
            let perm = random_permutation(rng, n);
            let h = g.permuted(&perm).unwrap();
            (g, h)
        }
        1 => {
            let mut m = matrix(&g);
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v {
                m[u][v] = !m[u][v];
                m[v][u] = m[u][v];
            }
            let edges = (0..n as u32)
                .flat_map(|a| (a + 1..n as u32).map(move |b| (a, b)))
                .filter(|&(a, b)| m[a as usize][b as usize]);
            let mut h = Graph::new(n, edges.collect::<Vec<_>>()).unwrap();
            if let Some(l) = g.node_labels() {
                h = h.with_node_labels(l.to_vec()).unwrap();
            }
            let perm = random_permutation(rng, n);
            (g, h.permuted(&perm).unwrap())
        }
        2 => {
            let splits: [&[&[usize]]; 4] = [
                &[&[6], &[3, 3]],
                &[&[7], &[3, 4]],
                &[&[3, 3], &[6]],
                &[&[4, 3], &[7]],
            ];
            let pick = splits[rng.gen_range(0..splits.len())];
            let a = cycles(pick[0]);
            let b = cycles(pick[1]);
            let perm = random_permutation(rng, b.num_nodes());
            (a, b.permuted(&perm).unwrap())
        }
        _ => {
            let m = rng.gen_range(1..=max_n);
            (g, random_graph(rng, m, p, labels))
        }
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    // scale to keep 60 significant bits before converting
    let shift = (den.bits() as i64 - 60).max(0) as u64;
    let (n, d) = (num >> shift, den >> shift);
    let nf: f64 = n.to_string().parse().unwrap();
    let df: f64 = d.to_string().parse().unwrap();
    nf / df
}

/// AMI straight from the definition: dense contingency table, explicit
/// entropies and expected MI with exact hypergeometric probabilities.
/// `None` when the denominator vanishes.
pub fn direct_ami(p: &[u32], q: &[u32]) -> Option<f64> {
    let n = p.len();
    let r = *p.iter().max()? as usize + 1;
    let c = *q.iter().max()? as usize + 1;
    let mut table = vec![vec![0usize; c]; r];
    for (&x, &y) in p.iter().zip(q) {
        table[x as usize][y as usize] += 1;
    }
    let a: Vec<usize> = table.iter().map(|row| row.iter().sum()).collect();
    let b: Vec<usize> = (0..c)
        .map(|j| table.iter().map(|row| row[j]).sum())
        .collect();
    let nf = n as f64;
    let h = |sizes: &[usize]| -> f64 {
        sizes
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| {
                let pr = s as f64 / nf;
                -pr * pr.ln()
            })
            .sum()
    };
    let mut mi = 0.0;
    for i in 0..r {
        for j in 0..c {
            let nij = table[i][j];
            if nij > 0 {
                let x = nij as f64;
                mi += x / nf * (nf * x / (a[i] as f64 * b[j] as f64)).ln();
            }
        }
    }
    let mut emi = 0.0;
    for &ai in a.iter().filter(|&&s| s > 0) {
        for &bj in b.iter().filter(|&&s| s > 0) {
            let total = binomial(n, bj);
            for k in (ai + bj).saturating_sub(n).max(1)..=ai.min(bj) {
                let prob = ratio(&(binomial(ai, k) * binomial(n - ai, bj - k)), &total);
                let x = k as f64;
                emi += x / nf * (nf * x / (ai as f64 * bj as f64)).ln() * prob;
            }
        }
    }
    let denom = (h(&a) + h(&b)) / 2.0 - emi;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((mi - emi) / denom)
}

pub fn partition(ids: &[u32]) -> Partition {
    Partition::from_keys(ids.to_vec())
}
