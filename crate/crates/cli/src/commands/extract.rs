//! `extract`: run the model endpoint over an image directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use kgtrace_core::extraction::{extract_batch, ModelClient};
use kgtrace_core::graphstore::{merge_global, triples_to_tsv, ImageGraph};
use kgtrace_core::ontology::{render_prompt, PromptTemplate};
use kgtrace_core::{Error, ErrorClass, Result};

use crate::config::RunConfig;
use crate::report::write_text;

use super::{ensure_out_dir, require_ontology};

/// Prompt used with `--no-ontology-prompt`; deliberately mentions no
/// relationship names so coverage reflects the model alone.
const GENERIC_PROMPT: &str = "Describe the image as structured lines, one characteristic per \
                              line, formatted exactly as:\nrelationship | value";

#[allow(clippy::too_many_arguments)]
pub struct ExtractArgs {
    pub images: PathBuf,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub prompt_template: Option<PathBuf>,
    pub no_ontology_prompt: bool,
    pub timeout: Option<u64>,
    pub retries: Option<u32>,
    pub concurrency: Option<usize>,
    pub temperature: Option<f64>,
    pub seed: Option<u64>,
}

pub fn run(config: &RunConfig, args: ExtractArgs) -> Result<u8> {
    let ontology = require_ontology(config)?;
    ensure_out_dir(config)?;

    let images = read_images(&args.images)?;
    let prompt = if args.no_ontology_prompt {
        GENERIC_PROMPT.to_string()
    } else {
        let template = match &args.prompt_template {
            Some(path) => PromptTemplate::load(path)?,
            None => PromptTemplate::default(),
        };
        render_prompt(&ontology, &template)?
    };

    let mut client_config = config.client.clone();
    if let Some(endpoint) = args.endpoint {
        client_config.endpoint = endpoint;
    }
    if let Some(model) = args.model {
        client_config.model = model;
    }
    if let Some(timeout) = args.timeout {
        client_config.timeout_secs = timeout;
    }
    if let Some(retries) = args.retries {
        client_config.max_retries = retries;
    }
    if let Some(concurrency) = args.concurrency {
        client_config.max_concurrent = concurrency;
    }
    if let Some(temperature) = args.temperature {
        client_config.temperature = temperature;
    }
    if let Some(seed) = args.seed {
        client_config.seed = Some(seed);
    }

    let client = ModelClient::new(client_config)?;
    let items = extract_batch(&client, &images, &ontology, &prompt, &config.placeholders);

    let mut graphs = Vec::new();
    let mut log_lines = String::from("image_id\tstatus\ttriples\trejected\tmessage\n");
    let mut failures = 0usize;
    let mut transport_failure = false;
    for item in &items {
        match &item.outcome {
            Ok(record) => {
                log_lines.push_str(&format!(
                    "{}\tok\t{}\t{}\t\n",
                    record.image_id,
                    record.triples.len(),
                    record.rejected.len()
                ));
                graphs.push(ImageGraph::from_triples(&record.image_id, &record.triples)?);
            }
            Err(err) => {
                failures += 1;
                transport_failure |= err.class() == ErrorClass::Transport;
                log_lines.push_str(&format!("{}\tfailed\t0\t0\t{err}\n", item.image_id));
            }
        }
    }

    let global = merge_global(graphs)?;
    write_text(&config.out_dir.join("triples.tsv"), &triples_to_tsv(&global))?;
    write_text(&config.out_dir.join("extract_log.tsv"), &log_lines)?;

    println!(
        "extracted {} image(s), {} failed; wrote {}",
        items.len() - failures,
        failures,
        config.out_dir.join("triples.tsv").display()
    );
    Ok(if transport_failure {
        3
    } else if failures > 0 {
        2
    } else {
        0
    })
}

/// Image files sorted by name; the file stem is the image id.
fn read_images(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| {
            path.is_file()
                && !path
                    .file_name()
                    .map(|n| n.to_string_lossy().starts_with('.'))
                    .unwrap_or(true)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "images directory `{}` contains no files",
            dir.display()
        )));
    }
    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut images = Vec::with_capacity(paths.len());
    for path in paths {
        let image_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if let Some(previous) = seen.insert(image_id.clone(), path.clone()) {
            return Err(Error::InvalidInput(format!(
                "image id `{image_id}` appears twice: {} and {}",
                previous.display(),
                path.display()
            )));
        }
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        images.push((image_id, bytes));
    }
    Ok(images)
}
