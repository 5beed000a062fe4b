//! `freq` and `export-bulk`: corpus queries and graph-database export.

use std::path::PathBuf;

use kgtrace_core::graphstore::{attribute_frequency, export_bulk, load_labels, FrequencyEntry};
use kgtrace_core::Result;

use crate::config::RunConfig;
use crate::report::write_pair;

use super::{ensure_out_dir, load_corpus, require_ontology};

pub struct FreqArgs {
    pub triples: PathBuf,
    pub top_k: Option<usize>,
}

pub fn run_freq(config: &RunConfig, args: FreqArgs) -> Result<u8> {
    let top_k = args.top_k.unwrap_or(20);
    if top_k == 0 {
        return Err(kgtrace_core::Error::Config("--top-k must be >= 1".into()));
    }
    let ontology = require_ontology(config)?;
    ensure_out_dir(config)?;
    let corpus = load_corpus(&args.triples, &ontology, config, None)?;
    let entries = attribute_frequency(&corpus, top_k);
    let tsv_path = write_pair(&config.out_dir, "freq", &freq_to_tsv(&entries), &entries)?;
    println!("{} entries; wrote {}", entries.len(), tsv_path.display());
    Ok(0)
}

fn freq_to_tsv(entries: &[FrequencyEntry]) -> String {
    let mut out = String::from("predicate\tvalue\tcount\n");
    for entry in entries {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            entry.node.predicate, entry.node.value, entry.count
        ));
    }
    out
}

pub struct ExportArgs {
    pub triples: PathBuf,
    pub labels: Option<PathBuf>,
}

pub fn run_export(config: &RunConfig, args: ExportArgs) -> Result<u8> {
    let ontology = require_ontology(config)?;
    ensure_out_dir(config)?;
    let labels = args.labels.as_deref().map(load_labels).transpose()?;
    let corpus = load_corpus(&args.triples, &ontology, config, labels)?;
    export_bulk(&corpus, &config.out_dir)?;
    println!(
        "wrote {} and {}",
        config.out_dir.join("nodes.csv").display(),
        config.out_dir.join("edges.csv").display()
    );
    Ok(0)
}
