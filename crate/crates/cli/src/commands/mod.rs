//! One module per subcommand family, plus shared loading helpers.

pub mod extract;
pub mod rank;
pub mod stats;
pub mod store;
pub mod style;
pub mod unlearn;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use kgtrace_core::graphstore::{load_triples, GlobalGraph, ImageGraph, LoadMode, LoadOptions};
use kgtrace_core::ontology::{load_ontology, Ontology};
use kgtrace_core::similarity::{project_value_only, MatchMode};
use kgtrace_core::{Error, Result};

use crate::config::RunConfig;

pub(crate) fn require_ontology(config: &RunConfig) -> Result<Ontology> {
    let path = config.ontology.as_deref().ok_or_else(|| {
        Error::Config("no ontology given (use --ontology or set `ontology` in the config file)".into())
    })?;
    if !path.exists() {
        return Err(Error::Config(format!(
            "ontology file `{}` does not exist",
            path.display()
        )));
    }
    load_ontology(path)
}

pub(crate) fn ensure_out_dir(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))
}

/// Strict corpus load with the configured placeholder set.
pub(crate) fn load_corpus(
    path: &Path,
    ontology: &Ontology,
    config: &RunConfig,
    labels: Option<BTreeMap<String, String>>,
) -> Result<GlobalGraph> {
    let options = LoadOptions {
        mode: LoadMode::Strict,
        placeholders: config.placeholders.clone(),
        labels,
    };
    load_triples(path, ontology, &options)
}

/// Apply the configured node-identity mode to one graph.
pub(crate) fn apply_mode(graph: &ImageGraph, mode: MatchMode) -> ImageGraph {
    match mode {
        MatchMode::Qualified => graph.clone(),
        MatchMode::ValueOnly => project_value_only(graph),
    }
}

/// Apply the configured node-identity mode to a whole corpus.
pub(crate) fn apply_mode_global(global: &GlobalGraph, mode: MatchMode) -> Result<GlobalGraph> {
    match mode {
        MatchMode::Qualified => Ok(global.clone()),
        MatchMode::ValueOnly => {
            let mut projected = GlobalGraph::new();
            for graph in global.images() {
                projected.insert(project_value_only(graph))?;
            }
            Ok(projected)
        }
    }
}

/// Read a file of ids, one per line, `#` comments and blanks ignored;
/// duplicates are dropped with a warning.
pub(crate) fn load_id_list(path: &Path) -> Result<Vec<String>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seen = std::collections::BTreeSet::new();
    let mut ids = Vec::new();
    for raw in content.lines() {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if seen.insert(line.to_string()) {
            ids.push(line.to_string());
        } else {
            log::warn!("{}: duplicate id `{line}` ignored", path.display());
        }
    }
    Ok(ids)
}
