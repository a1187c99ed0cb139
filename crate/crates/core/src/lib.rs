//! Auditing graph benchmarks against the Weisfeiler-Lehman hierarchy.
//!
//! The crate loads graph- and node-level datasets, runs 1-WL and classic
//! k-WL refinement, computes exact isomorphism classes, automorphism orbits
//! and edit distances on desk-scale graphs, and compares the resulting
//! partitions with labels (AMI, majority-vote lookup accuracy), with kernel
//! and embedding similarity, and with identifiability and edit-sensitivity
//! measures.
//!
//! Numeric results are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod align;
pub mod audit;
pub mod embedding;
pub mod error;
pub mod fixtures;
pub mod ged;
pub mod graph;
pub mod ingest;
pub mod iso;
pub mod kwl;
pub mod scalar;
pub mod trust;
pub mod wl;

pub use error::{AuditError, ErrorKind, Result};
pub use graph::{Dataset, Graph, Level, NodeFeatures, Partition};
pub use scalar::Scalar;

pub type Embeddings = embedding::EmbeddingTable<f64>;
pub type Ami = audit::AmiValue<f64>;
pub type AmiMatrix = audit::AmiMatrix<f64>;
pub type SimilarityStudy = align::SimilarityStudy<f64>;
pub type SensitivityReport = trust::SensitivityReport<f64>;
