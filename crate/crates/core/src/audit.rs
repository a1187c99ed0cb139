//! Equivalence-class statistics, AMI, majority-vote lookup accuracy and the
//! adversarial relabeling construction.

use serde::Serialize;

use crate::error::{AuditError, Result};
use crate::graph::{label_partition, Dataset, Level, Partition};
use crate::iso::{
    is_isomorphic_with, iso_partition_with, node_duplicate_partition, IsoCaps, IsoPartitionOptions,
    IsoResult,
};
use crate::scalar::Scalar;
use crate::wl::{wl_partition, wl_refine, Comparison};

/// Class count and singleton count of one partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassStats {
    pub source: String,
    pub num_classes: usize,
    pub singletons: usize,
}

impl ClassStats {
    fn of(source: impl Into<String>, p: &Partition) -> Self {
        ClassStats {
            source: source.into(),
            num_classes: p.num_classes(),
            singletons: p.singletons(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceTable {
    pub dataset: String,
    pub level: Level,
    pub num_graphs: usize,
    pub num_instances: usize,
    pub avg_nodes_per_graph: f64,
    pub labels: Option<ClassStats>,
    pub isomorphism: ClassStats,
    /// `E_WL^1 .. E_WL^T`.
    pub wl: Vec<ClassStats>,
    /// Whether the isomorphism partition refines each WL partition.
    pub iso_refines_wl: Vec<bool>,
    /// Graphs classed by WL signature only because they exceed the node cap.
    pub heuristic_graphs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct PartitionOptions {
    pub comparison: Comparison,
    pub iso: IsoPartitionOptions,
}

/// The isomorphism partition: exact classes for graph-level data, twin
/// classes (a lower bound on orbit merging) for node-level data.
pub fn isomorphism_partition(
    ds: &Dataset,
    opts: &IsoPartitionOptions,
) -> Result<(Partition, Vec<usize>)> {
    match ds.level() {
        Level::Graph => {
            let p = iso_partition_with(ds, opts)?;
            Ok((p.partition, p.heuristic_graphs))
        }
        Level::Node => Ok((node_duplicate_partition(&ds.graphs()[0]), Vec::new())),
    }
}

/// The partitions `E_WL^1 .. E_WL^t_max`.
pub fn wl_partitions(ds: &Dataset, t_max: usize, comparison: Comparison) -> Result<Vec<Partition>> {
    let history = wl_refine(ds, Some(t_max));
    (1..=t_max)
        .map(|t| wl_partition(&history, ds, t, comparison))
        .collect()
}

pub fn equivalence_table(ds: &Dataset, t_max: usize) -> Result<EquivalenceTable> {
    equivalence_table_with(ds, t_max, &PartitionOptions::default())
}

pub fn equivalence_table_with(
    ds: &Dataset,
    t_max: usize,
    opts: &PartitionOptions,
) -> Result<EquivalenceTable> {
    let (iso, heuristic_graphs) = isomorphism_partition(ds, &opts.iso)?;
    let wl = wl_partitions(ds, t_max, opts.comparison)?;
    let labels = match ds.labels() {
        Some(_) => Some(ClassStats::of("E_y", &label_partition(ds)?)),
        None => None,
    };
    Ok(EquivalenceTable {
        dataset: ds.name().to_string(),
        level: ds.level(),
        num_graphs: ds.graphs().len(),
        num_instances: iso.len(),
        avg_nodes_per_graph: ds.avg_nodes_per_graph(),
        labels,
        isomorphism: ClassStats::of("E_pi", &iso),
        iso_refines_wl: wl.iter().map(|w| iso.refines(w)).collect(),
        wl: wl
            .iter()
            .enumerate()
            .map(|(i, p)| ClassStats::of(format!("E_WL^{}", i + 1), p))
            .collect(),
        heuristic_graphs,
    })
}

/// Normalizer placed under the chance-corrected mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmiNormalization {
    Min,
    Geometric,
    #[default]
    Arithmetic,
    Max,
}

impl std::str::FromStr for AmiNormalization {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Self::Min),
            "geometric" => Ok(Self::Geometric),
            "arithmetic" => Ok(Self::Arithmetic),
            "max" => Ok(Self::Max),
            other => Err(AuditError::InvalidArgument(format!(
                "unknown AMI normalization {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmiValue<F> {
    pub value: F,
    /// Set when the normalizer equals the expected MI; `value` is then 0.
    pub degenerate: bool,
}

fn check_same_instances(p: &Partition, q: &Partition) -> Result<()> {
    if p.len() != q.len() {
        return Err(AuditError::InvalidArgument(format!(
            "partitions cover {} and {} instances",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Nonzero contingency cells `(class in p, class in q, count)`, sorted.
fn contingency(p: &Partition, q: &Partition) -> Vec<(u32, u32, usize)> {
    let mut pairs: Vec<(u32, u32)> = p
        .class_ids()
        .iter()
        .copied()
        .zip(q.class_ids().iter().copied())
        .collect();
    pairs.sort_unstable();
    let mut cells: Vec<(u32, u32, usize)> = Vec::new();
    for (a, b) in pairs {
        match cells.last_mut() {
            Some((x, y, n)) if *x == a && *y == b => *n += 1,
            _ => cells.push((a, b, 1)),
        }
    }
    cells
}

fn entropy<F: Scalar>(sizes: &[usize], n: usize) -> F {
    let nf = F::from_usize_lossy(n);
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = F::from_usize_lossy(s) / nf;
            -p * p.ln()
        })
        .sum()
}

/// Multiset of class sizes as sorted `(size, multiplicity)`.
fn size_multiset(sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for s in sorted {
        match out.last_mut() {
            Some((v, m)) if *v == s => *m += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

/// Expected mutual information under the hypergeometric model of random
/// partitions with fixed class sizes. Cells depend only on the two marginal
/// sizes, so the double sum runs over distinct sizes.
fn expected_mi<F: Scalar>(a: &[usize], b: &[usize], n: usize) -> F {
    let mut log_fact = Vec::with_capacity(n + 1);
    log_fact.push(F::zero());
    for k in 1..=n {
        let prev = log_fact[k - 1];
        log_fact.push(prev + F::from_usize_lossy(k).ln());
    }
    let nf = F::from_usize_lossy(n);
    let mut total = F::zero();
    for &(ai, ma) in &size_multiset(a) {
        for &(bj, mb) in &size_multiset(b) {
            let lo = (ai + bj).saturating_sub(n).max(1);
            let hi = ai.min(bj);
            let mut cell = F::zero();
            for nij in lo..=hi {
                let x = F::from_usize_lossy(nij);
                let term =
                    x / nf * (nf * x / (F::from_usize_lossy(ai) * F::from_usize_lossy(bj))).ln();
                let log_p = log_fact[ai] + log_fact[bj] + log_fact[n - ai] + log_fact[n - bj]
                    - log_fact[n]
                    - log_fact[nij]
                    - log_fact[ai - nij]
                    - log_fact[bj - nij]
                    - log_fact[n + nij - ai - bj];
                cell = cell + term * log_p.exp();
            }
            total = total + cell * F::from_usize_lossy(ma * mb);
        }
    }
    total
}

/// Adjusted mutual information with arithmetic-mean normalization.
pub fn ami<F: Scalar>(p: &Partition, q: &Partition) -> Result<AmiValue<F>> {
    ami_with(p, q, AmiNormalization::Arithmetic)
}

pub fn ami_with<F: Scalar>(
    p: &Partition,
    q: &Partition,
    normalization: AmiNormalization,
) -> Result<AmiValue<F>> {
    check_same_instances(p, q)?;
    let n = p.len();
    if n > 0 && p.num_classes() > 1 && p.same_as(q) {
        return Ok(AmiValue {
            value: F::one(),
            degenerate: false,
        });
    }
    let degenerate = AmiValue {
        value: F::zero(),
        degenerate: true,
    };
    if n == 0 || (p.num_classes() <= 1 && q.num_classes() <= 1) {
        return Ok(degenerate);
    }
    let nf = F::from_usize_lossy(n);
    let (a, b) = (p.class_sizes(), q.class_sizes());
    let mi: F = contingency(p, q)
        .into_iter()
        .map(|(i, j, c)| {
            let c = F::from_usize_lossy(c);
            let ai = F::from_usize_lossy(a[i as usize]);
            let bj = F::from_usize_lossy(b[j as usize]);
            c / nf * (nf * c / (ai * bj)).ln()
        })
        .sum();
    let emi = expected_mi::<F>(a, b, n);
    let (hp, hq) = (entropy::<F>(a, n), entropy::<F>(b, n));
    let norm = match normalization {
        AmiNormalization::Min => hp.min(hq),
        AmiNormalization::Geometric => (hp * hq).sqrt(),
        AmiNormalization::Arithmetic => (hp + hq) / F::lit(2.0),
        AmiNormalization::Max => hp.max(hq),
    };
    let denom = norm - emi;
    if denom.abs() <= F::epsilon() * F::lit(16.0) * norm.max(F::one()) {
        return Ok(degenerate);
    }
    Ok(AmiValue {
        value: (mi - emi) / denom,
        degenerate: false,
    })
}

/// Symmetric AMI matrix over named partitions.
#[derive(Debug, Clone, Serialize)]
pub struct AmiMatrix<F> {
    pub names: Vec<String>,
    pub values: Vec<Vec<F>>,
    pub degenerate: Vec<Vec<bool>>,
}

impl<F: Scalar> AmiMatrix<F> {
    pub fn from_partitions(
        named: &[(String, Partition)],
        normalization: AmiNormalization,
    ) -> Result<Self> {
        let k = named.len();
        let mut values = vec![vec![F::zero(); k]; k];
        let mut degenerate = vec![vec![false; k]; k];
        for i in 0..k {
            for j in i..k {
                let v = ami_with::<F>(&named[i].1, &named[j].1, normalization)?;
                values[i][j] = v.value;
                values[j][i] = v.value;
                degenerate[i][j] = v.degenerate;
                degenerate[j][i] = v.degenerate;
            }
        }
        Ok(AmiMatrix {
            names: named.iter().map(|(n, _)| n.clone()).collect(),
            values,
            degenerate,
        })
    }

    pub fn get(&self, a: &str, b: &str) -> Option<F> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }
}

/// The partitions `E_y` (when labeled), `E_pi` and `E_WL^1 .. E_WL^t_max`,
/// named as in the reports.
pub fn named_partitions(
    ds: &Dataset,
    t_max: usize,
    opts: &PartitionOptions,
) -> Result<Vec<(String, Partition)>> {
    let mut out = Vec::new();
    if ds.labels().is_some() {
        out.push(("E_y".to_string(), label_partition(ds)?));
    }
    out.push(("E_pi".to_string(), isomorphism_partition(ds, &opts.iso)?.0));
    for (i, p) in wl_partitions(ds, t_max, opts.comparison)?
        .into_iter()
        .enumerate()
    {
        out.push((format!("E_WL^{}", i + 1), p));
    }
    Ok(out)
}

/// AMI between every pair of `E_y`, `E_pi` and `E_WL^1 .. E_WL^t_max`.
pub fn ami_report<F: Scalar>(
    ds: &Dataset,
    t_max: usize,
    normalization: AmiNormalization,
    opts: &PartitionOptions,
) -> Result<AmiMatrix<F>> {
    AmiMatrix::from_partitions(&named_partitions(ds, t_max, opts)?, normalization)
}

/// Accuracy in percent of the lookup table predicting each class's majority
/// label, evaluated on the same instances.
pub fn majority_vote_accuracy<F: Scalar>(p: &Partition, labels: &Partition) -> Result<F> {
    check_same_instances(p, labels)?;
    if p.is_empty() {
        return Err(AuditError::InvalidArgument("empty partition".into()));
    }
    let mut best = vec![0usize; p.num_classes()];
    for (class, _, count) in contingency(p, labels) {
        let b = &mut best[class as usize];
        *b = (*b).max(count);
    }
    let correct: usize = best.iter().sum();
    Ok(F::from_usize_lossy(correct) / F::from_usize_lossy(p.len()) * F::lit(100.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct MajorityRow<F> {
    pub dataset: String,
    pub isomorphism: F,
    pub wl: F,
    pub t: usize,
}

/// Lookup accuracy under `E_pi` and under `E_WL^t`.
pub fn majority_report<F: Scalar>(
    ds: &Dataset,
    t: usize,
    opts: &PartitionOptions,
) -> Result<MajorityRow<F>> {
    let labels = label_partition(ds)?;
    let (iso, _) = isomorphism_partition(ds, &opts.iso)?;
    let wl = wl_partitions(ds, t, opts.comparison)?
        .pop()
        .unwrap_or_else(|| Partition::from_keys(vec![0u32; labels.len()]));
    Ok(MajorityRow {
        dataset: ds.name().to_string(),
        isomorphism: majority_vote_accuracy(&iso, &labels)?,
        wl: majority_vote_accuracy(&wl, &labels)?,
        t,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversarialLabels {
    /// New label per instance: its rank within its class of `p`.
    pub labels: Vec<u32>,
    /// Classes of `p` holding two isomorphic members, which receive
    /// different labels regardless.
    pub flagged_classes: Vec<u32>,
}

/// Gives the members of every class of `p` the distinct labels `0..m` in
/// instance order, so the lookup table over `p` is right exactly once per
/// class.
pub fn adversarial_relabel(ds: &Dataset, p: &Partition) -> Result<AdversarialLabels> {
    adversarial_relabel_with(ds, p, &IsoPartitionOptions::default())
}

pub fn adversarial_relabel_with(
    ds: &Dataset,
    p: &Partition,
    opts: &IsoPartitionOptions,
) -> Result<AdversarialLabels> {
    if p.len() != crate::graph::instance_count(ds) {
        return Err(AuditError::InvalidArgument(format!(
            "partition covers {} instances, dataset has {}",
            p.len(),
            crate::graph::instance_count(ds)
        )));
    }
    let mut rank = vec![0u32; p.num_classes()];
    let labels = p
        .class_ids()
        .iter()
        .map(|&c| {
            let r = rank[c as usize];
            rank[c as usize] += 1;
            r
        })
        .collect();
    let (iso, _) = isomorphism_partition(ds, opts)?;
    let mut flagged_classes: Vec<u32> = Vec::new();
    for (c, members) in p.classes().iter().enumerate() {
        let mut seen: Vec<u32> = members.iter().map(|&i| iso.class_of(i)).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            flagged_classes.push(c as u32);
        }
    }
    Ok(AdversarialLabels {
        labels,
        flagged_classes,
    })
}

/// A pair that WL at iteration `t` cannot tell apart, with the exact verdict.
#[derive(Debug, Clone, Serialize)]
pub struct InconclusivePair {
    pub graph_a: usize,
    pub graph_b: usize,
    pub exact: IsoResult,
}

/// Every pair of graphs sharing a WL class at iteration `t`, checked exactly.
pub fn wl_inconclusive_pairs(
    ds: &Dataset,
    t: usize,
    comparison: Comparison,
    caps: &IsoCaps,
) -> Result<Vec<InconclusivePair>> {
    if ds.level() != Level::Graph {
        return Err(AuditError::InvalidArgument(
            "pair listing needs a graph-level dataset".into(),
        ));
    }
    let history = wl_refine(ds, Some(t));
    let p = wl_partition(&history, ds, t, comparison)?;
    let graphs = ds.graphs();
    let mut out = Vec::new();
    for members in p.classes() {
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                let cert = is_isomorphic_with(&graphs[a], &graphs[b], caps)?;
                out.push(InconclusivePair {
                    graph_a: a,
                    graph_b: b,
                    exact: cert.result,
                });
            }
        }
    }
    out.sort_by_key(|q| (q.graph_a, q.graph_b));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g2, g3, g4};
    use crate::graph::Graph;

    fn part(ids: &[u32]) -> Partition {
        Partition::from_keys(ids.to_vec())
    }

    #[test]
    fn identical_nontrivial_partitions_have_ami_one() {
        let p = part(&[0, 0, 0, 1, 1, 1, 2, 2, 2]);
        let v = ami::<f64>(&p, &p).unwrap();
        assert_eq!(v.value, 1.0);
        assert!(!v.degenerate);
    }

    #[test]
    fn trivial_partitions_are_degenerate() {
        let p = part(&[0; 5]);
        let v = ami::<f64>(&p, &p).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn ami_is_symmetric_and_bounded() {
        let p = part(&[0, 0, 0, 1, 1, 1]);
        let q = part(&[0, 0, 1, 1, 2, 2]);
        let a = ami::<f64>(&p, &q).unwrap().value;
        let b = ami::<f64>(&q, &p).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        assert!(a < 1.0);
        let a32 = ami::<f32>(&p, &q).unwrap().value;
        assert!((a32 as f64 - a).abs() < 1e-4);
    }

    #[test]
    fn normalization_parses() {
        assert_eq!(
            "max".parse::<AmiNormalization>().unwrap(),
            AmiNormalization::Max
        );
        assert!("median".parse::<AmiNormalization>().is_err());
    }

    #[test]
    fn majority_vote_examples() {
        let labels = part(&[0, 1, 0, 1]);
        assert_eq!(
            majority_vote_accuracy::<f64>(&part(&[0, 1, 2, 3]), &labels).unwrap(),
            100.0
        );
        assert_eq!(
            majority_vote_accuracy::<f64>(&part(&[0, 0, 0, 0]), &labels).unwrap(),
            50.0
        );
        assert_eq!(
            majority_vote_accuracy::<f64>(&part(&[0, 0, 1, 1]), &labels).unwrap(),
            50.0
        );
        assert_eq!(
            majority_vote_accuracy::<f64>(&part(&[0, 1, 0, 1]), &labels).unwrap(),
            100.0
        );
    }

    #[test]
    fn example_graphs_table() {
        let ds = Dataset::graph_level("fig", vec![g1(), g2(), g3(), g4()])
            .unwrap()
            .with_labels(vec![0, 1, 0, 1])
            .unwrap();
        let t = equivalence_table(&ds, 3).unwrap();
        assert_eq!(t.isomorphism.num_classes, 4);
        // G1 and G4 share every WL signature
        assert!(t.wl.iter().all(|s| s.num_classes == 3 && s.singletons == 2));
        assert!(t.iso_refines_wl.iter().all(|&r| r));
        assert_eq!(t.labels.unwrap().num_classes, 2);
    }

    #[test]
    fn identical_copies_table() {
        let ds = Dataset::graph_level("copies", vec![g2(); 4]).unwrap();
        let t = equivalence_table(&ds, 3).unwrap();
        assert_eq!(
            (t.isomorphism.num_classes, t.isomorphism.singletons),
            (1, 0)
        );
        assert!(t.wl.iter().all(|s| (s.num_classes, s.singletons) == (1, 0)));
    }

    #[test]
    fn adversarial_pair_halves_accuracy() {
        let ds = Dataset::graph_level("pair", vec![g1(), g4()]).unwrap();
        let wl = wl_partitions(&ds, 3, Comparison::Histogram)
            .unwrap()
            .pop()
            .unwrap();
        let adv = adversarial_relabel(&ds, &wl).unwrap();
        assert_eq!(adv.labels, vec![0, 1]);
        assert!(adv.flagged_classes.is_empty());
        let labels = Partition::from_keys(adv.labels);
        assert_eq!(majority_vote_accuracy::<f64>(&wl, &labels).unwrap(), 50.0);
    }

    #[test]
    fn adversarial_flags_isomorphic_members() {
        let ds = Dataset::graph_level("dup", vec![g1(), g1(), g4()]).unwrap();
        let p = part(&[0, 0, 0]);
        let adv = adversarial_relabel(&ds, &p).unwrap();
        assert_eq!(adv.labels, vec![0, 1, 2]);
        assert_eq!(adv.flagged_classes, vec![0]);
    }

    #[test]
    fn inconclusive_pairs_of_example_graphs() {
        let ds = Dataset::graph_level("fig", vec![g1(), g2(), g3(), g4()]).unwrap();
        let pairs =
            wl_inconclusive_pairs(&ds, 3, Comparison::Histogram, &IsoCaps::default()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].graph_a, pairs[0].graph_b), (0, 3));
        assert_eq!(pairs[0].exact, IsoResult::NonIsomorphic);
    }

    #[test]
    fn node_level_uses_twins() {
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let ds = Dataset::node_level("star", star);
        let t = equivalence_table(&ds, 2).unwrap();
        assert_eq!(
            (t.isomorphism.num_classes, t.isomorphism.singletons),
            (2, 1)
        );
        assert_eq!(t.wl[1].num_classes, 2);
    }
}
