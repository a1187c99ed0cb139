//! Alignment of WL subtree-kernel similarity and embedding similarity with
//! label agreement over pairs of graphs.

use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingTable;
use crate::error::{AuditError, Result};
use crate::graph::{Dataset, Level};
use crate::scalar::Scalar;
use crate::wl::{wl_kernel_features, wl_refine, SparseCounts};

/// Above this many pairs the default sampling switches from all pairs to a
/// seeded uniform sample.
pub const ALL_PAIRS_LIMIT: u64 = 2_000_000;
/// Sample size used when the default switches to sampling.
pub const DEFAULT_SAMPLE: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Sampling {
    All,
    Uniform { m: usize, seed: u64 },
}

impl Sampling {
    /// All pairs up to [`ALL_PAIRS_LIMIT`], otherwise a uniform sample of
    /// [`DEFAULT_SAMPLE`] pairs.
    pub fn auto(num_pairs: u64, seed: u64) -> Self {
        if num_pairs <= ALL_PAIRS_LIMIT {
            Sampling::All
        } else {
            Sampling::Uniform {
                m: DEFAULT_SAMPLE,
                seed,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinRange {
    /// `[0, 1]` for kernel similarity, `[-1, 1]` for embedding similarity.
    #[default]
    Fixed,
    /// Observed minimum and maximum.
    Data,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlignOptions {
    pub t: usize,
    pub bins: usize,
    pub log_base: f64,
    pub bin_range: BinRange,
    /// `None` picks [`Sampling::auto`] with `seed`.
    pub sampling: Option<Sampling>,
    pub seed: u64,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            t: 4,
            bins: 20,
            log_base: 2.0,
            bin_range: BinRange::Fixed,
            sampling: None,
            seed: 0,
        }
    }
}

fn sparse_dot(a: &SparseCounts, b: &SparseCounts) -> u128 {
    let (mut i, mut j, mut acc) = (0, 0, 0u128);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 as u128 * b[j].1 as u128;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn sparse_cosine<F: Scalar>(a: &SparseCounts, b: &SparseCounts) -> F {
    if a == b && !a.is_empty() {
        return F::one();
    }
    let dot = F::from_u128(sparse_dot(a, b)).expect("finite");
    let na = F::from_u128(sparse_dot(a, a)).expect("finite").sqrt();
    let nb = F::from_u128(sparse_dot(b, b)).expect("finite").sqrt();
    if na.is_zero() || nb.is_zero() {
        return F::zero();
    }
    (dot / (na * nb)).min(F::one())
}

/// WL subtree kernel features of every graph at iteration `t`.
pub fn kernel_feature_table(ds: &Dataset, t: usize) -> Result<Vec<SparseCounts>> {
    let history = wl_refine(ds, Some(t));
    (0..ds.graphs().len())
        .map(|g| wl_kernel_features(&history, g, t))
        .collect()
}

/// Cosine of the subtree feature vectors of two graphs of `ds`.
pub fn kernel_cosine<F: Scalar>(ds: &Dataset, g1: usize, g2: usize, t: usize) -> Result<F> {
    let history = wl_refine(ds, Some(t));
    let a = wl_kernel_features(&history, g1, t)?;
    let b = wl_kernel_features(&history, g2, t)?;
    Ok(sparse_cosine(&a, &b))
}

pub fn embedding_cosine<F: Scalar>(e1: &[F], e2: &[F]) -> Result<F> {
    if e1.len() != e2.len() {
        return Err(AuditError::InvalidArgument(format!(
            "embedding dimensions differ: {} and {}",
            e1.len(),
            e2.len()
        )));
    }
    let dot: F = e1.iter().zip(e2).map(|(&a, &b)| a * b).sum();
    let n1: F = e1.iter().map(|&a| a * a).sum::<F>().sqrt();
    let n2: F = e2.iter().map(|&a| a * a).sum::<F>().sqrt();
    if n1.is_zero() || n2.is_zero() {
        return Err(AuditError::InvalidData(
            "cosine similarity of a zero vector".into(),
        ));
    }
    Ok((dot / (n1 * n2)).max(-F::one()).min(F::one()))
}

/// Histogram bin of `x` over `[lo, hi]`; the right edge belongs to the last bin.
fn bin_of<F: Scalar>(x: F, lo: F, hi: F, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let pos = ((x - lo) / (hi - lo) * F::from_usize_lossy(bins)).floor();
    pos.to_usize().unwrap_or(0).min(bins - 1)
}

/// Per-bin counts of `values` split by the label-match bit.
pub fn split_histograms<F: Scalar>(
    values: &[F],
    same: &[bool],
    range: (F, F),
    bins: usize,
) -> (Vec<u64>, Vec<u64>) {
    let mut hs = vec![0u64; bins];
    let mut hd = vec![0u64; bins];
    for (&v, &s) in values.iter().zip(same) {
        let b = bin_of(v, range.0, range.1, bins);
        if s {
            hs[b] += 1;
        } else {
            hd[b] += 1;
        }
    }
    (hs, hd)
}

/// Plug-in mutual information between the binned similarity and the
/// label-match bit, in units of `log_base`.
pub fn similarity_mi<F: Scalar>(
    values: &[F],
    same: &[bool],
    range: (F, F),
    bins: usize,
    log_base: F,
) -> Result<F> {
    if bins == 0 {
        return Err(AuditError::InvalidArgument("need at least one bin".into()));
    }
    let (hs, hd) = split_histograms(values, same, range, bins);
    mi_from_histograms(&hs, &hd, log_base)
}

fn mi_from_histograms<F: Scalar>(same: &[u64], different: &[u64], log_base: F) -> Result<F> {
    let ns: u64 = same.iter().sum();
    let nd: u64 = different.iter().sum();
    if ns < 2 || nd < 2 {
        return Err(AuditError::InsufficientPairs(format!(
            "{ns} same-label and {nd} different-label pairs; need at least 2 of each"
        )));
    }
    let f = |x: u64| F::from_u64(x).expect("finite");
    let n = f(ns + nd);
    let mut mi = F::zero();
    for (&a, &b) in same.iter().zip(different) {
        let col = f(a + b);
        for (cell, row) in [(a, ns), (b, nd)] {
            if cell > 0 {
                let c = f(cell);
                mi = mi + c / n * (c * n / (col * f(row))).ln();
            }
        }
    }
    Ok((mi / log_base.ln()).max(F::zero()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceStudy<F> {
    pub range: (F, F),
    pub same: Vec<u64>,
    pub different: Vec<u64>,
    pub mi: F,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairSimilarity<F> {
    pub graph_a: usize,
    pub graph_b: usize,
    pub kernel: F,
    pub embedding: Option<F>,
    pub same_label: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimilarityStudy<F> {
    pub dataset: String,
    pub sampling: Sampling,
    pub t: usize,
    pub bins: usize,
    pub log_base: F,
    pub bin_range: BinRange,
    pub num_pairs: usize,
    pub num_same: usize,
    pub num_different: usize,
    pub kernel: SourceStudy<F>,
    pub embedding: Option<SourceStudy<F>>,
    #[serde(skip)]
    pub pairs: Vec<PairSimilarity<F>>,
}

impl<F: Scalar> SimilarityStudy<F> {
    /// Writes one row per pair: `graph_a,graph_b,same_label,kernel,embedding`.
    pub fn write_pairs_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "graph_a,graph_b,same_label,kernel,embedding")?;
        for p in &self.pairs {
            let emb = p.embedding.map(|e| e.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                p.graph_a,
                p.graph_b,
                u8::from(p.same_label),
                p.kernel,
                emb
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
/// Pair `(i, j)`, `i < j`, at position `k` of the row-major enumeration.
fn decode_pair(k: u64, n: u64) -> (usize, usize) {
    // rows shrink by one; find the row by walking cumulative lengths
    let mut i = 0u64;
    let mut start = 0u64;
    loop {
        let len = n - 1 - i;
        if k < start + len {
            return (i as usize, (i + 1 + k - start) as usize);
        }
        start += len;
        i += 1;
    }
}

/// The pair list selected by `sampling`, in enumeration order.
pub fn sample_pairs(n: usize, sampling: Sampling) -> Vec<(usize, usize)> {
    let total = (n as u64) * (n.saturating_sub(1) as u64) / 2;
    match sampling {
        Sampling::All => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        Sampling::Uniform { m, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = m.min(total as usize);
            let mut picks = index::sample(&mut rng, total as usize, m).into_vec();
            picks.sort_unstable();
            // decode incrementally: picks are ascending
            let mut out = Vec::with_capacity(picks.len());
            let (mut i, mut start) = (0u64, 0u64);
            for k in picks {
                let k = k as u64;
                while k >= start + (n as u64 - 1 - i) {
                    start += n as u64 - 1 - i;
                    i += 1;
                }
                out.push((i as usize, (i + 1 + k - start) as usize));
            }
            out
        }
    }
}

fn source_study<F: Scalar>(
    values: &[F],
    same: &[bool],
    fixed: (F, F),
    opts: &AlignOptions,
) -> Result<SourceStudy<F>> {
    let range = match opts.bin_range {
        BinRange::Fixed => fixed,
        BinRange::Data => values
            .iter()
            .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            }),
    };
    let (s, d) = split_histograms(values, same, range, opts.bins);
    let mi = mi_from_histograms(&s, &d, F::lit(opts.log_base))?;
    Ok(SourceStudy {
        range,
        same: s,
        different: d,
        mi,
    })
}

/// Kernel (and, when given, embedding) similarity study over graph pairs.
pub fn alignment_report<F: Scalar>(
    ds: &Dataset,
    embeddings: Option<&EmbeddingTable<F>>,
    opts: &AlignOptions,
) -> Result<SimilarityStudy<F>> {
    if ds.level() != Level::Graph {
        return Err(AuditError::InvalidArgument(
            "the subtree kernel compares graphs; alignment needs a graph-level dataset".into(),
        ));
    }
    if opts.bins == 0 {
        return Err(AuditError::InvalidArgument("need at least one bin".into()));
    }
    let labels = ds.labels().ok_or(AuditError::MissingLabels)?;
    let n = ds.graphs().len();
    if let Some(table) = embeddings {
        let missing = table.missing_ids(n);
        if !missing.is_empty() {
            return Err(AuditError::MissingEmbeddings(missing));
        }
    }
    let total = (n as u64) * (n.saturating_sub(1) as u64) / 2;
    let sampling = opts.sampling.unwrap_or(Sampling::auto(total, opts.seed));
    let features = kernel_feature_table(ds, opts.t)?;
    let pairs: Vec<PairSimilarity<F>> = sample_pairs(n, sampling)
        .into_par_iter()
        .map(|(a, b)| {
            let embedding = match embeddings {
                Some(table) => Some(embedding_cosine(
                    table.get(a).expect("checked"),
                    table.get(b).expect("checked"),
                )?),
                None => None,
            };
            Ok(PairSimilarity {
                graph_a: a,
                graph_b: b,
                kernel: sparse_cosine(&features[a], &features[b]),
                embedding,
                same_label: labels[a] == labels[b],
            })
        })
        .collect::<Result<_>>()?;
    let same: Vec<bool> = pairs.iter().map(|p| p.same_label).collect();
    let kernel_values: Vec<F> = pairs.iter().map(|p| p.kernel).collect();
    let kernel = source_study(&kernel_values, &same, (F::zero(), F::one()), opts)?;
    let embedding = match embeddings {
        Some(_) => {
            let values: Vec<F> = pairs
                .iter()
                .map(|p| p.embedding.expect("present"))
                .collect();
            Some(source_study(&values, &same, (-F::one(), F::one()), opts)?)
        }
        None => None,
    };
    let num_same = same.iter().filter(|&&s| s).count();
    Ok(SimilarityStudy {
        dataset: ds.name().to_string(),
        sampling,
        t: opts.t,
        bins: opts.bins,
        log_base: F::lit(opts.log_base),
        bin_range: opts.bin_range,
        num_pairs: pairs.len(),
        num_same,
        num_different: pairs.len() - num_same,
        kernel,
        embedding,
        pairs,
    })
}
