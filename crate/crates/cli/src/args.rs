//! Command-line surface.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "kgtrace",
    version,
    about = "Ontology-guided knowledge-graph attribution for image corpora",
    propagate_version = true
)]
pub struct Cli {
    /// Flat key=value configuration file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Ontology TSV file.
    #[arg(long, global = true)]
    pub ontology: Option<PathBuf>,

    /// Node identity for comparisons: `qualified` or `value-only`.
    #[arg(long, global = true)]
    pub match_mode: Option<String>,

    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Placeholder tokens treated as absent values, comma-separated.
    #[arg(long, global = true)]
    pub placeholders: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract triples for every image in a directory via the model endpoint.
    Extract {
        /// Directory of image files; the file stem is the image id.
        #[arg(long)]
        images: PathBuf,
        /// Model endpoint URL.
        #[arg(long)]
        endpoint: Option<String>,
        /// Model name sent with each request.
        #[arg(long)]
        model: Option<String>,
        /// JSON file overriding the built-in prompt template.
        #[arg(long)]
        prompt_template: Option<PathBuf>,
        /// Use a generic prompt that does not mention the ontology
        /// (extraction is still validated against it).
        #[arg(long)]
        no_ontology_prompt: bool,
        /// Per-request timeout in seconds.
        #[arg(long)]
        timeout: Option<u64>,
        /// Retries after network failures.
        #[arg(long)]
        retries: Option<u32>,
        /// Maximum concurrent requests.
        #[arg(long)]
        concurrency: Option<usize>,
        #[arg(long)]
        temperature: Option<f64>,
        /// Seed forwarded to endpoints that support one.
        #[arg(long)]
        seed: Option<u64>,
    },

    /// Rank corpus images by node overlap with a query image.
    Rank {
        /// Query image id.
        #[arg(long)]
        query: String,
        /// Corpus triples TSV.
        #[arg(long)]
        triples: PathBuf,
        /// Separate triples TSV containing the query (defaults to the corpus file).
        #[arg(long)]
        query_triples: Option<PathBuf>,
        /// Ranking size.
        #[arg(short, long)]
        k: Option<usize>,
        /// Drop zero-overlap candidates instead of padding to k.
        #[arg(long)]
        exclude_zero: bool,
    },

    /// Group-level graph statistics for a set of image ids.
    Stats {
        #[arg(long)]
        triples: PathBuf,
        /// File listing one image id per line.
        #[arg(long)]
        group: PathBuf,
        /// Also report overlap relative to this query image id.
        #[arg(long)]
        query: Option<String>,
        /// Cluster thresholds, comma-separated (default 5,7).
        #[arg(long)]
        thresholds: Option<String>,
    },

    /// Compute style deltas for reference/stylised pairs.
    Delta {
        /// Pairs manifest TSV: pair_id, reference_id, stylised_id.
        #[arg(long)]
        pairs: PathBuf,
        /// Triples TSVs covering the referenced image ids.
        #[arg(long, num_args = 1.., required = true)]
        triples: Vec<PathBuf>,
    },

    /// Match style deltas against a labeled world graph.
    Match {
        /// Deltas TSV produced by `delta`.
        #[arg(long)]
        deltas: PathBuf,
        /// World triples TSV.
        #[arg(long)]
        world: PathBuf,
        /// Labels TSV: image_id, source label.
        #[arg(long)]
        labels: PathBuf,
        /// Deduplicate delta elements globally before counting.
        #[arg(long)]
        dedupe: bool,
        /// Per-label counting: `occurrences` (per world frame, default) or
        /// `element-label` (once per element and label).
        #[arg(long)]
        label_counting: Option<String>,
    },

    /// Select per-prompt removal lists from rank reports.
    UnlearnPlan {
        /// Rank report JSON files, one per prompt.
        #[arg(long, num_args = 1.., required = true)]
        rank_reports: Vec<PathBuf>,
        /// Images to remove per prompt.
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        experiment_id: String,
    },

    /// Before/after cosine-similarity report from embedding files.
    UnlearnReport {
        /// Embeddings TSV for the before run.
        #[arg(long)]
        before: PathBuf,
        /// Embeddings TSV for the after run.
        #[arg(long)]
        after: PathBuf,
        /// Pairing TSV: prompt_id, before_id, after_id.
        #[arg(long)]
        pairing: PathBuf,
    },

    /// Most frequent attribute nodes in a corpus.
    Freq {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        top_k: Option<usize>,
    },

    /// Write bulk-import CSVs (nodes.csv, edges.csv) for a graph database.
    ExportBulk {
        #[arg(long)]
        triples: PathBuf,
        /// Optional labels TSV to carry provenance into nodes.csv.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}
