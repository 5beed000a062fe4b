//! `rank`: node-overlap ranking of corpus images against a query.

use std::path::{Path, PathBuf};

use kgtrace_core::similarity::{rank_with, RankOptions, RankResult};
use kgtrace_core::{Error, Result};

use crate::config::RunConfig;
use crate::report::write_pair;

use super::{apply_mode, apply_mode_global, ensure_out_dir, load_corpus, require_ontology};

pub struct RankArgs {
    pub query: String,
    pub triples: PathBuf,
    pub query_triples: Option<PathBuf>,
    pub k: Option<usize>,
    pub exclude_zero: bool,
}

pub fn run(config: &RunConfig, args: RankArgs) -> Result<u8> {
    let ontology = require_ontology(config)?;
    ensure_out_dir(config)?;

    let corpus = load_corpus(&args.triples, &ontology, config, None)?;
    let query_source = match &args.query_triples {
        Some(path) => load_corpus(path, &ontology, config, None)?,
        None => corpus.clone(),
    };
    let query = query_source
        .get(&args.query)
        .ok_or_else(|| Error::UnknownId {
            id: args.query.clone(),
            context: "query".into(),
        })?;

    let query = apply_mode(query, config.match_mode);
    let corpus = apply_mode_global(&corpus, config.match_mode)?;
    let k = args.k.unwrap_or(config.k);
    if k == 0 {
        return Err(Error::Config("-k must be >= 1".into()));
    }
    let result = rank_with(
        &query,
        &corpus,
        k,
        &RankOptions {
            include_zero: !args.exclude_zero,
        },
    )?;

    let tsv_path = write_pair(&config.out_dir, "rank", &rank_to_tsv(&result), &result)?;
    println!(
        "ranked {} candidate(s) for `{}`; wrote {}",
        result.ranking.len(),
        result.query_id,
        tsv_path.display()
    );
    Ok(0)
}

pub(crate) fn rank_to_tsv(result: &RankResult) -> String {
    let mut out = format!("# query\t{}\n", result.query_id);
    out.push_str("rank\tcandidate_id\tshared\tshared_nodes\n");
    for (idx, score) in result.ranking.iter().enumerate() {
        let nodes: Vec<String> = score.shared_nodes.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            idx + 1,
            score.candidate_id,
            score.shared,
            nodes.join("; ")
        ));
    }
    out
}

/// Read a rank report back from its JSON file.
pub(crate) fn load_rank_report(path: &Path) -> Result<RankResult> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&content).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: format!("bad rank report: {e}"),
    })
}
