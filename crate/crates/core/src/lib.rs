//! Ontology-guided knowledge graphs for image corpora.
//!
//! The pipeline: a multimodal model endpoint describes each image as
//! `predicate | value` lines constrained by a domain ontology; the lines
//! become triples, triples become per-image star graphs, and the graphs
//! merge into a global graph whose shared attribute nodes make images
//! comparable. On top of that sit node-overlap ranking (which training
//! images most resemble a generated one), group-level structure statistics,
//! style-delta attribution against a provenance-labeled world graph, and
//! removal planning plus before/after cosine reports for unlearning
//! experiments.
//!
//! Bulk loops run on rayon under the default `parallel` feature and
//! sequentially without it; results are identical either way.

pub mod error;
pub mod extraction;
pub mod graphstore;
pub mod mockserver;
pub mod normalize;
pub mod ontology;
pub mod similarity;
pub mod styletrace;
pub mod unlearn;

mod par;
mod stats;

pub use error::{Error, ErrorClass, Result};
