//! `stats`: group-level graph statistics for a set of image ids.

use std::path::PathBuf;

use kgtrace_core::similarity::{group_stats_with_query, GroupStats};
use kgtrace_core::{Error, Result};

use crate::config::{parse_thresholds, RunConfig};
use crate::report::write_pair;

use super::{apply_mode, ensure_out_dir, load_corpus, load_id_list, require_ontology};

pub struct StatsArgs {
    pub triples: PathBuf,
    pub group: PathBuf,
    pub query: Option<String>,
    pub thresholds: Option<String>,
}

pub fn run(config: &RunConfig, args: StatsArgs) -> Result<u8> {
    let ontology = require_ontology(config)?;
    ensure_out_dir(config)?;

    let corpus = load_corpus(&args.triples, &ontology, config, None)?;
    let ids = load_id_list(&args.group)?;
    if ids.is_empty() {
        return Err(Error::Config(format!(
            "group file `{}` lists no image ids",
            args.group.display()
        )));
    }
    let group: Vec<_> = ids
        .iter()
        .map(|id| {
            corpus
                .get(id)
                .map(|graph| apply_mode(graph, config.match_mode))
                .ok_or_else(|| Error::UnknownId {
                    id: id.clone(),
                    context: "group member".into(),
                })
        })
        .collect::<Result<_>>()?;
    let query = args
        .query
        .as_deref()
        .map(|id| {
            corpus
                .get(id)
                .map(|graph| apply_mode(graph, config.match_mode))
                .ok_or_else(|| Error::UnknownId {
                    id: id.to_string(),
                    context: "query".into(),
                })
        })
        .transpose()?;

    let thresholds = match &args.thresholds {
        Some(spec) => parse_thresholds(spec).map_err(Error::Config)?,
        None => config.thresholds.clone(),
    };
    let stats = group_stats_with_query(&group, query.as_ref(), &thresholds)?;

    let tsv_path = write_pair(&config.out_dir, "stats", &stats_to_tsv(&stats), &stats)?;
    println!(
        "group of {} image(s); wrote {}",
        group.len(),
        tsv_path.display()
    );
    Ok(0)
}

pub(crate) fn stats_to_tsv(stats: &GroupStats) -> String {
    let mut out = String::from("metric\tvalue\n");
    out.push_str(&format!(
        "Distinct Relationships\t{}\n",
        stats.distinct_relationships
    ));
    out.push_str(&format!(
        "Avg. Unique Values/Rel.\t{:.2}\n",
        stats.avg_unique_values_per_rel
    ));
    out.push_str(&format!(
        "Avg. Shared Attributes\t{:.2}\n",
        stats.avg_shared_attributes
    ));
    out.push_str(&format!(
        "Max Shared Attributes\t{}\n",
        stats.max_shared_attributes
    ));
    for (threshold, size) in &stats.largest_cluster_at {
        out.push_str(&format!("Largest Cluster (\u{2265}{threshold})\t{size}\n"));
    }
    if let Some(avg) = stats.avg_shared_with_query {
        out.push_str(&format!("Avg. Shared Attributes (vs. Query)\t{avg:.2}\n"));
    }
    if let Some(max) = stats.max_shared_with_query {
        out.push_str(&format!("Max Shared Attributes (vs. Query)\t{max}\n"));
    }
    out
}
