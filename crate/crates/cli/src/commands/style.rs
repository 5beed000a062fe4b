//! `delta` and `match`: style-induced differences and world attribution.

use std::collections::BTreeSet;
use std::path::PathBuf;

use kgtrace_core::graphstore::{load_labels, AttrNode, GlobalGraph, ImageGraph};
use kgtrace_core::similarity::MatchMode;
use kgtrace_core::styletrace::{
    label_distribution, load_deltas, load_pairs_manifest, match_world_with, save_deltas,
    style_delta, MatchOptions, MatchReport, StyleDelta,
};
use kgtrace_core::Result;

use crate::config::RunConfig;
use crate::report::{write_json, write_text};

use super::{apply_mode, apply_mode_global, ensure_out_dir, load_corpus, require_ontology};

pub struct DeltaArgs {
    pub pairs: PathBuf,
    pub triples: Vec<PathBuf>,
}

pub fn run_delta(config: &RunConfig, args: DeltaArgs) -> Result<u8> {
    let ontology = require_ontology(config)?;
    ensure_out_dir(config)?;

    let mut corpus = GlobalGraph::new();
    for path in &args.triples {
        for graph in load_corpus(path, &ontology, config, None)?.images() {
            corpus.insert(graph.clone())?;
        }
    }

    let pairs = load_pairs_manifest(&args.pairs)?;
    let graph_or_empty = |id: &str| -> ImageGraph {
        match corpus.get(id) {
            Some(graph) => apply_mode(graph, config.match_mode),
            None => {
                log::warn!("image `{id}` has no triples; using an empty graph");
                ImageGraph::new(id)
            }
        }
    };
    let deltas: Vec<StyleDelta> = pairs
        .iter()
        .map(|pair| {
            style_delta(
                &graph_or_empty(&pair.reference_id),
                &graph_or_empty(&pair.stylised_id),
                &pair.pair_id,
            )
        })
        .collect();

    let path = config.out_dir.join("deltas.tsv");
    save_deltas(&deltas, &path)?;
    let elements: usize = deltas.iter().map(|d| d.introduced.len()).sum();
    println!(
        "{} pair(s), {} introduced element(s); wrote {}",
        deltas.len(),
        elements,
        path.display()
    );
    Ok(0)
}

pub struct MatchArgs {
    pub deltas: PathBuf,
    pub world: PathBuf,
    pub labels: PathBuf,
    pub dedupe: bool,
    pub label_counting: Option<String>,
}

pub fn run_match(config: &RunConfig, args: MatchArgs) -> Result<u8> {
    let ontology = require_ontology(config)?;
    ensure_out_dir(config)?;

    let labels = load_labels(&args.labels)?;
    let world = load_corpus(&args.world, &ontology, config, Some(labels))?;
    let world = apply_mode_global(&world, config.match_mode)?;

    let mut deltas = load_deltas(&args.deltas)?;
    if config.match_mode == MatchMode::ValueOnly {
        for delta in &mut deltas {
            delta.introduced = delta
                .introduced
                .iter()
                .map(|node| AttrNode::new("*", &node.value))
                .collect::<BTreeSet<_>>();
        }
    }

    let label_counting = args
        .label_counting
        .as_deref()
        .map(str::parse)
        .transpose()?
        .unwrap_or_default();
    let report = match_world_with(
        &deltas,
        &world,
        &MatchOptions {
            dedupe_global: args.dedupe,
            label_counting,
        },
    )?;

    write_json(&config.out_dir.join("match.json"), &report)?;
    write_text(
        &config.out_dir.join("label_distribution.tsv"),
        &distribution_to_tsv(&report),
    )?;
    write_text(
        &config.out_dir.join("unmatched.tsv"),
        &unmatched_to_tsv(&report),
    )?;

    println!(
        "unmatched rate: {:.2}% ({} of {} element(s) unmatched); wrote {}",
        report.unmatched_rate,
        report.unmatched,
        report.total_delta_elements,
        config.out_dir.join("match.json").display()
    );
    Ok(0)
}

pub(crate) fn distribution_to_tsv(report: &MatchReport) -> String {
    let mut out = String::from("label\ttriples\tpercentage\n");
    for row in label_distribution(report) {
        out.push_str(&format!(
            "{}\t{}\t{:.2}\n",
            row.label, row.occurrences, row.percentage
        ));
    }
    out
}

fn unmatched_to_tsv(report: &MatchReport) -> String {
    let mut out = String::from("predicate\tvalue\n");
    for node in &report.unmatched_elements {
        out.push_str(&format!("{}\t{}\n", node.predicate, node.value));
    }
    out
}
