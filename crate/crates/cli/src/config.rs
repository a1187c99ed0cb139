use std::path::PathBuf;

use serde::Serialize;

/// Everything that determines an artifact's content. Serialized into the
/// header of every output file. The worker thread count is deliberately not
/// part of it: outputs do not depend on it.
#[derive(Debug, Clone, Serialize)]
pub struct AuditConfig {
    pub command: &'static str,
    /// Dataset directory as given on the command line.
    pub dataset: Option<PathBuf>,
    /// `tudataset` or `node-task`.
    pub format: Option<&'static str>,
    /// Initial node colors for TU data (default `auto`: degree for IMDB-*,
    /// else node labels, else attributes, else uniform).
    pub color_source: &'static str,
    /// Drop repeated edges instead of rejecting the input (default false).
    pub dedupe: bool,
    /// Last WL iteration reported (default 3; 4 for `align`).
    pub t_max: usize,
    /// k for `kwl` (default 3).
    pub k: Option<usize>,
    /// Graph comparison: `histogram` (default) or `sorted-count`.
    pub comparison: &'static str,
    /// Append group ids to initial colors (default false).
    pub include_groups: bool,
    pub caps: Caps,
    /// Class oversized graphs by WL signature instead of failing (default false).
    pub wl_fallback: bool,
    /// `arithmetic` (default), `min`, `geometric` or `max`.
    pub ami_normalization: &'static str,
    /// Logarithm base for similarity MI (default 2).
    pub mi_base: f64,
    /// Histogram bins for similarity MI (default 20).
    pub bins: usize,
    /// `fixed` (default) or `data`.
    pub bin_range: &'static str,
    /// Seed for every sampled quantity (default 0).
    pub seed: u64,
    /// Output directory as given (default `$WL_AUDIT_OUT`, else `wl-audit-out`).
    pub out_dir: PathBuf,
    /// Formats written (default all that the command supports).
    pub formats: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Caps {
    /// Largest graph for exact isomorphism (default 512).
    pub iso_nodes: usize,
    /// Largest graph for orbit search (default 64).
    pub orbit_nodes: usize,
    /// Largest graph for exact edit distance (fixed at 8).
    pub ged_nodes: usize,
    /// Largest graphs for 2-WL, 3-WL and higher k-WL (default 16, 10, 6).
    pub kwl_nodes: [usize; 3],
    /// Pair or edit budget for sampled studies (default: all, or 10^6 pairs
    /// above 2*10^6).
    pub pair_budget: Option<usize>,
}
