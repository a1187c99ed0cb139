use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wl_audit::align::{alignment_report, AlignOptions, BinRange, Sampling};
use wl_audit::audit::{
    adversarial_relabel_with, ami_report, equivalence_table_with, majority_report,
    majority_vote_accuracy, wl_inconclusive_pairs, wl_partitions, AmiNormalization,
    EquivalenceTable, PartitionOptions,
};
use wl_audit::fixtures::{emit_fixture_graphs, example_graphs};
use wl_audit::ged::{convergent_validity_report, GED_MAX_NODES};
use wl_audit::ingest::{
    load_embeddings, load_node_task_with, load_single_graph, load_tudataset_with, ColorSource,
    IngestOptions,
};
use wl_audit::iso::{IsoCaps, IsoPartitionOptions, IsoResult};
use wl_audit::kwl::{k_wl_refine, KwlCaps};
use wl_audit::trust::{
    identifiability, wl_sensitivity, EditKind, IdentifiabilityOptions, SensitivityOptions,
};
use wl_audit::wl::{Comparison, WlOptions};
use wl_audit::{AuditError, Dataset, Level, Partition, Result};

use crate::config::{AuditConfig, Caps};
use crate::output::{Artifacts, Format};
use crate::{Cli, ColorArg, Command, DataArgs, DataFormat, NormArg, RangeArg, WlArgs};

const OUT_ENV: &str = "WL_AUDIT_OUT";

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("wl-audit-out"))
}

fn base_config(cli: &Cli, command: &'static str) -> AuditConfig {
    let defaults = KwlCaps::default();
    let iso = IsoCaps::default();
    AuditConfig {
        command,
        dataset: None,
        format: None,
        color_source: "auto",
        dedupe: false,
        t_max: 3,
        k: None,
        comparison: "histogram",
        include_groups: false,
        caps: Caps {
            iso_nodes: iso.max_nodes,
            orbit_nodes: iso.orbit_max_nodes,
            ged_nodes: GED_MAX_NODES,
            kwl_nodes: [defaults.k2, defaults.k3, defaults.higher],
            pair_budget: None,
        },
        wl_fallback: false,
        ami_normalization: "arithmetic",
        mi_base: 2.0,
        bins: 20,
        bin_range: "fixed",
        seed: cli.seed,
        out_dir: out_dir(cli),
        formats: Vec::new(),
    }
}

fn artifacts(cli: &Cli, config: &mut AuditConfig, supported: &[Format]) -> Result<Artifacts> {
    let formats: Vec<Format> = if cli.formats.is_empty() {
        supported.to_vec()
    } else {
        supported
            .iter()
            .copied()
            .filter(|f| cli.formats.contains(f))
            .collect()
    };
    config.formats = formats.iter().map(|f| f.name()).collect();
    Artifacts::new(config, formats)
}

fn color_source(c: ColorArg) -> (ColorSource, &'static str) {
    match c {
        ColorArg::Auto => (ColorSource::Auto, "auto"),
        ColorArg::Labels => (ColorSource::Labels, "labels"),
        ColorArg::Attributes => (ColorSource::Attributes, "attributes"),
        ColorArg::Degree => (ColorSource::Degree, "degree"),
        ColorArg::Uniform => (ColorSource::Uniform, "uniform"),
    }
}

fn load(data: &DataArgs, config: &mut AuditConfig) -> Result<Dataset> {
    let (source, source_name) = color_source(data.color_source);
    let opts = IngestOptions {
        color_source: source,
        dedupe: data.dedupe,
    };
    let node_task = match data.format {
        DataFormat::NodeTask => true,
        DataFormat::Tudataset => false,
        DataFormat::Auto => data.dir.join("edges.csv").exists(),
    };
    config.dataset = Some(data.dir.clone());
    config.color_source = source_name;
    config.dedupe = data.dedupe;
    let (ds, report) = if node_task {
        config.format = Some("node-task");
        load_node_task_with(&data.dir, &opts)?
    } else {
        config.format = Some("tudataset");
        let name = match &data.name {
            Some(n) => n.clone(),
            None => data
                .dir
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| {
                    AuditError::InvalidArgument(format!(
                        "cannot take a dataset name from {}; pass --name",
                        data.dir.display()
                    ))
                })?
                .to_string(),
        };
        load_tudataset_with(&data.dir, &name, &opts)?
    };
    if report.duplicate_edges > 0 {
        eprintln!("note: dropped {} repeated edge(s)", report.duplicate_edges);
    }
    Ok(ds)
}

fn partition_options(wl: &WlArgs, config: &mut AuditConfig) -> PartitionOptions {
    config.t_max = wl.t;
    config.wl_fallback = wl.wl_fallback;
    config.caps.iso_nodes = wl.iso_max_nodes;
    let comparison = if wl.sortedcount_only {
        config.comparison = "sorted-count";
        Comparison::SortedCount
    } else {
        Comparison::Histogram
    };
    PartitionOptions {
        comparison,
        iso: IsoPartitionOptions {
            caps: IsoCaps {
                max_nodes: wl.iso_max_nodes,
                ..IsoCaps::default()
            },
            wl_fallback: wl.wl_fallback,
        },
    }
}

const ALL: &[Format] = &[Format::Csv, Format::Json, Format::Md];
const CSV_JSON: &[Format] = &[Format::Csv, Format::Json];

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Partitions { data, wl } => partitions(cli, data, wl),
        Command::Ami {
            data,
            wl,
            normalization,
        } => ami(cli, data, wl, *normalization),
        Command::Majority { data, wl } => majority(cli, data, wl),
        Command::Align {
            data,
            t,
            embeddings,
            bins,
            log_base,
            bin_range,
            sample,
            all_pairs,
            pairs_csv,
        } => {
            let mut config = base_config(cli, "align");
            config.t_max = *t;
            config.bins = *bins;
            config.mi_base = *log_base;
            config.caps.pair_budget = *sample;
            let range = match bin_range {
                RangeArg::Fixed => BinRange::Fixed,
                RangeArg::Data => {
                    config.bin_range = "data";
                    BinRange::Data
                }
            };
            let sampling = match (sample, all_pairs) {
                (Some(m), _) => Some(Sampling::Uniform {
                    m: *m,
                    seed: cli.seed,
                }),
                (None, true) => Some(Sampling::All),
                (None, false) => None,
            };
            let opts = AlignOptions {
                t: *t,
                bins: *bins,
                log_base: *log_base,
                bin_range: range,
                sampling,
                seed: cli.seed,
            };
            align(cli, config, data, embeddings.as_ref(), &opts, *pairs_csv)
        }
        Command::Trust {
            data,
            t,
            by_group,
            group_names,
            include_groups,
            graph,
            budget,
            embeddings,
        } => {
            let mut config = base_config(cli, "trust");
            config.t_max = *t;
            config.include_groups = *include_groups;
            config.caps.pair_budget = *budget;
            let opts = IdentifiabilityOptions {
                by_group: *by_group,
                group_names: group_names.clone(),
                wl: WlOptions {
                    include_groups: *include_groups,
                },
                comparison: Comparison::Histogram,
            };
            trust(
                cli,
                config,
                data,
                &opts,
                graph.as_ref(),
                *budget,
                embeddings.as_ref(),
            )
        }
        Command::Pairs { data, wl } => pairs(cli, data, wl),
        Command::Ged { graphs } => ged(cli, graphs),
        Command::Adversarial { data, wl } => adversarial(cli, data, wl),
        Command::Kwl { k, pair, t_max } => kwl(cli, *k, &pair[0], &pair[1], *t_max),
        Command::Fixtures => {
            let dir = out_dir(cli);
            for path in emit_fixture_graphs(&dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn iso_method(level: Level) -> &'static str {
    match level {
        Level::Graph => "exact isomorphism classes",
        Level::Node => "duplicate-based lower bound on orbit merging (twin classes)",
    }
}

#[derive(Serialize)]
struct PartitionsResult<'a> {
    isomorphism_method: &'static str,
    table: &'a EquivalenceTable,
}

fn partitions_csv(table: &EquivalenceTable) -> String {
    let mut head = String::from("dataset,graphs,avg_nodes,classes_pi,singletons_pi");
    let mut row = format!(
        "{},{},{:.2},{},{}",
        table.dataset,
        table.num_graphs,
        table.avg_nodes_per_graph,
        table.isomorphism.num_classes,
        table.isomorphism.singletons
    );
    for (i, s) in table.wl.iter().enumerate() {
        let t = i + 1;
        write!(head, ",classes_wl{t},singletons_wl{t}").unwrap();
        write!(row, ",{},{}", s.num_classes, s.singletons).unwrap();
    }
    format!("{head}\n{row}\n")
}

fn partitions_md(table: &EquivalenceTable) -> String {
    let mut head = String::from("| dataset | # graphs | avg # nodes/graph | |E_pi| | #1(E_pi) |");
    let mut rule = String::from("|---|---:|---:|---:|---:|");
    let mut row = format!(
        "| {} | {} | {:.2} | {} | {} |",
        table.dataset,
        table.num_graphs,
        table.avg_nodes_per_graph,
        table.isomorphism.num_classes,
        table.isomorphism.singletons
    );
    for (i, s) in table.wl.iter().enumerate() {
        let t = i + 1;
        write!(head, " |E_WL^{t}| | #1(E_WL^{t}) |").unwrap();
        rule.push_str("---:|---:|");
        write!(row, " {} | {} |", s.num_classes, s.singletons).unwrap();
    }
    format!(
        "{head}\n{rule}\n{row}\n\nE_pi: {}.\n",
        iso_method(table.level)
    )
}

fn partitions(cli: &Cli, data: &DataArgs, wl: &WlArgs) -> Result<()> {
    let mut config = base_config(cli, "partitions");
    let opts = partition_options(wl, &mut config);
    let ds = load(data, &mut config)?;
    let table = equivalence_table_with(&ds, wl.t, &opts)?;
    if !table.heuristic_graphs.is_empty() {
        eprintln!(
            "warning: {} graph(s) above the isomorphism cap were classed by WL signature only",
            table.heuristic_graphs.len()
        );
    }
    if table.iso_refines_wl.iter().any(|&r| !r) {
        eprintln!("warning: E_pi does not refine every E_WL^t");
    }
    let mut out = artifacts(cli, &mut config, ALL)?;
    let csv = partitions_csv(&table);
    out.csv("partitions.csv", &csv)?;
    out.md("partitions.md", &partitions_md(&table))?;
    out.json(
        "partitions.json",
        &PartitionsResult {
            isomorphism_method: iso_method(table.level),
            table: &table,
        },
    )?;
    print!("{csv}");
    Ok(())
}

fn ami(cli: &Cli, data: &DataArgs, wl: &WlArgs, norm: NormArg) -> Result<()> {
    let mut config = base_config(cli, "ami");
    let opts = partition_options(wl, &mut config);
    let (normalization, name) = match norm {
        NormArg::Min => (AmiNormalization::Min, "min"),
        NormArg::Geometric => (AmiNormalization::Geometric, "geometric"),
        NormArg::Arithmetic => (AmiNormalization::Arithmetic, "arithmetic"),
        NormArg::Max => (AmiNormalization::Max, "max"),
    };
    config.ami_normalization = name;
    let ds = load(data, &mut config)?;
    let matrix = ami_report::<f64>(&ds, wl.t, normalization, &opts)?;
    let mut csv = String::from("partition");
    for n in &matrix.names {
        write!(csv, ",{n}").unwrap();
    }
    csv.push('\n');
    for (name, row) in matrix.names.iter().zip(&matrix.values) {
        csv.push_str(name);
        for v in row {
            write!(csv, ",{v}").unwrap();
        }
        csv.push('\n');
    }
    let mut out = artifacts(cli, &mut config, CSV_JSON)?;
    out.csv("ami.csv", &csv)?;
    out.json("ami.json", &matrix)?;
    print!("{csv}");
    Ok(())
}

fn majority(cli: &Cli, data: &DataArgs, wl: &WlArgs) -> Result<()> {
    let mut config = base_config(cli, "majority");
    let opts = partition_options(wl, &mut config);
    let ds = load(data, &mut config)?;
    let row = majority_report::<f64>(&ds, wl.t, &opts)?;
    let csv = format!(
        "dataset,h_pi,h_wl{}\n{},{:.2},{:.2}\n",
        wl.t, row.dataset, row.isomorphism, row.wl
    );
    let md = format!(
        "| dataset | h(E_pi -> E_y) | h(E_WL^{t} -> E_y) |\n|---|---:|---:|\n| {} | {:.2} | {:.2} |\n",
        row.dataset,
        row.isomorphism,
        row.wl,
        t = wl.t
    );
    let mut out = artifacts(cli, &mut config, ALL)?;
    out.csv("majority.csv", &csv)?;
    out.md("majority.md", &md)?;
    out.json("majority.json", &row)?;
    print!("{csv}");
    Ok(())
}

fn align(
    cli: &Cli,
    mut config: AuditConfig,
    data: &DataArgs,
    embeddings: Option<&PathBuf>,
    opts: &AlignOptions,
    pairs_csv: bool,
) -> Result<()> {
    let ds = load(data, &mut config)?;
    let table = match embeddings {
        Some(path) => Some(load_embeddings::<f64>(path)?),
        None => None,
    };
    let study = alignment_report(&ds, table.as_ref(), opts)?;
    let mut csv = String::from("source,bin,lo,hi,same,different\n");
    let sources = [
        ("kernel", Some(&study.kernel)),
        ("embedding", study.embedding.as_ref()),
    ];
    for (name, source) in sources {
        let Some(s) = source else { continue };
        let width = (s.range.1 - s.range.0) / study.bins as f64;
        for b in 0..study.bins {
            let lo = s.range.0 + width * b as f64;
            let hi = if b + 1 == study.bins {
                s.range.1
            } else {
                lo + width
            };
            writeln!(csv, "{name},{b},{lo},{hi},{},{}", s.same[b], s.different[b]).unwrap();
        }
    }
    let mut out = artifacts(cli, &mut config, CSV_JSON)?;
    out.csv("align_histograms.csv", &csv)?;
    out.json("align.json", &study)?;
    if pairs_csv {
        let mut body = Vec::new();
        study
            .write_pairs_csv(&mut body)
            .expect("writing to memory succeeds");
        out.csv("align_pairs.csv", &String::from_utf8(body).expect("utf-8"))?;
    }
    println!("pairs,{}", study.num_pairs);
    println!("mi_kernel,{}", study.kernel.mi);
    if let Some(e) = &study.embedding {
        println!("mi_embedding,{}", e.mi);
    }
    Ok(())
}

#[derive(Serialize)]
struct SensitivityResult<'a> {
    note: &'static str,
    report: &'a wl_audit::SensitivityReport,
}

fn trust(
    cli: &Cli,
    mut config: AuditConfig,
    data: &DataArgs,
    opts: &IdentifiabilityOptions,
    graph: Option<&PathBuf>,
    budget: Option<usize>,
    embeddings: Option<&PathBuf>,
) -> Result<()> {
    let ds = load(data, &mut config)?;
    let report = identifiability(&ds, config.t_max, opts)?;
    let mut csv = String::from("dataset,group,count,identifiable,percentage\n");
    let rows = std::iter::once(&report.overall).chain(&report.groups);
    for r in rows {
        let group = if r.group.is_some() {
            r.name.as_str()
        } else {
            "all"
        };
        writeln!(
            csv,
            "{},{},{},{},{:.2}",
            report.dataset,
            group,
            r.count,
            r.identifiable,
            r.fraction * 100.0
        )
        .unwrap();
    }
    let sensitivity = match graph {
        Some(path) => {
            let g = load_single_graph(path)?;
            let table = match embeddings {
                Some(p) => Some(load_embeddings::<f64>(p)?),
                None => None,
            };
            let opts = SensitivityOptions {
                budget,
                seed: cli.seed,
                ..Default::default()
            };
            Some(wl_sensitivity(&g, config.t_max, &opts, table.as_ref())?)
        }
        None => None,
    };
    let mut out = artifacts(cli, &mut config, CSV_JSON)?;
    out.csv("trust.csv", &csv)?;
    out.json("trust.json", &report)?;
    if let Some(s) = &sensitivity {
        let mut body = String::from("edit,kind,u,v,signature_changed\n");
        for (i, (e, changed)) in s.edits.iter().zip(&s.signature_changed).enumerate() {
            let kind = match e.kind {
                EditKind::Delete => "delete",
                EditKind::Add => "add",
            };
            writeln!(
                body,
                "{},{kind},{},{},{}",
                i + 1,
                e.u,
                e.v,
                u8::from(*changed)
            )
            .unwrap();
        }
        out.csv("sensitivity.csv", &body)?;
        out.json(
            "sensitivity.json",
            &SensitivityResult {
                note: "distance maximum over sampled edits: an empirical lower bound on the sensitivity",
                report: s,
            },
        )?;
        println!("signature_changed_fraction,{}", s.changed_fraction);
    }
    print!("{csv}");
    Ok(())
}

fn pairs(cli: &Cli, data: &DataArgs, wl: &WlArgs) -> Result<()> {
    let mut config = base_config(cli, "pairs");
    let opts = partition_options(wl, &mut config);
    let ds = load(data, &mut config)?;
    let list = wl_inconclusive_pairs(&ds, wl.t, opts.comparison, &opts.iso.caps)?;
    let mut csv = String::from("graph_a,graph_b,wl_verdict,exact_verdict\n");
    for p in &list {
        let exact = match p.exact {
            IsoResult::Isomorphic => "isomorphic",
            IsoResult::NonIsomorphic => "non-isomorphic",
        };
        writeln!(csv, "{},{},indistinguishable,{exact}", p.graph_a, p.graph_b).unwrap();
    }
    let mut out = artifacts(cli, &mut config, CSV_JSON)?;
    out.csv("pairs.csv", &csv)?;
    out.json("pairs.json", &list)?;
    print!("{csv}");
    Ok(())
}

fn ged(cli: &Cli, files: &[PathBuf]) -> Result<()> {
    let mut config = base_config(cli, "ged");
    let graphs = if files.is_empty() {
        example_graphs().to_vec()
    } else {
        files
            .iter()
            .map(|p| load_single_graph(p))
            .collect::<Result<Vec<_>>>()?
    };
    let report = convergent_validity_report(&graphs)?;
    let mut csv = String::from("graph_a,graph_b,ged,wl_distinguishes\n");
    for p in &report.pairs {
        writeln!(
            csv,
            "{},{},{},{}",
            p.graph_a,
            p.graph_b,
            p.ged,
            u8::from(p.wl_distinguishes)
        )
        .unwrap();
    }
    let mut out = artifacts(cli, &mut config, CSV_JSON)?;
    out.csv("ged.csv", &csv)?;
    out.json("ged.json", &report)?;
    print!("{csv}");
    for inv in &report.inversions {
        let (c, f) = (&report.pairs[inv.closer], &report.pairs[inv.farther]);
        println!(
            "inversion: ({}, {}) at distance {} is WL-distinguished, ({}, {}) at distance {} is not",
            c.graph_a, c.graph_b, c.ged, f.graph_a, f.graph_b, f.ged
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct AdversarialResult<'a> {
    t: usize,
    instances: usize,
    classes: usize,
    accuracy: f64,
    minimum: f64,
    flagged_classes: &'a [u32],
}

fn adversarial(cli: &Cli, data: &DataArgs, wl: &WlArgs) -> Result<()> {
    let mut config = base_config(cli, "adversarial");
    let opts = partition_options(wl, &mut config);
    let ds = load(data, &mut config)?;
    let p = wl_partitions(&ds, wl.t, opts.comparison)?
        .pop()
        .ok_or_else(|| AuditError::InvalidArgument("--t must be at least 1".into()))?;
    let adv = adversarial_relabel_with(&ds, &p, &opts.iso)?;
    let labels = Partition::from_keys(adv.labels.iter().copied());
    let accuracy = majority_vote_accuracy::<f64>(&p, &labels)?;
    let summary = AdversarialResult {
        t: wl.t,
        instances: p.len(),
        classes: p.num_classes(),
        accuracy,
        minimum: p.num_classes() as f64 / p.len() as f64 * 100.0,
        flagged_classes: &adv.flagged_classes,
    };
    let mut csv = String::from("instance,class,label\n");
    for (i, l) in adv.labels.iter().enumerate() {
        writeln!(csv, "{i},{},{l}", p.class_of(i)).unwrap();
    }
    let mut out = artifacts(cli, &mut config, CSV_JSON)?;
    out.csv("adversarial.csv", &csv)?;
    out.json("adversarial.json", &summary)?;
    println!(
        "classes,{}\ninstances,{}\naccuracy,{:.2}\nflagged_classes,{}",
        summary.classes,
        summary.instances,
        summary.accuracy,
        adv.flagged_classes.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct KwlResult {
    k: usize,
    distinguished: bool,
    iteration: usize,
}

fn kwl(cli: &Cli, k: usize, a: &Path, b: &Path, t_max: Option<usize>) -> Result<()> {
    let mut config = base_config(cli, "kwl");
    config.k = Some(k);
    if let Some(t) = t_max {
        config.t_max = t;
    }
    let (g1, g2) = (load_single_graph(a)?, load_single_graph(b)?);
    let (distinguished, iteration) = k_wl_refine(&g1, &g2, k, t_max, &KwlCaps::default())?;
    let mut out = artifacts(cli, &mut config, &[Format::Json])?;
    out.json(
        "kwl.json",
        &KwlResult {
            k,
            distinguished,
            iteration,
        },
    )?;
    if distinguished {
        println!("{k}-WL: distinguished at iteration {iteration}");
    } else {
        println!("{k}-WL: not distinguished after {iteration} iteration(s)");
    }
    Ok(())
}
