//! Per-image star graphs, the merged global graph with its inverted
//! attribute index, TSV persistence, frequency queries, and bulk CSV export
//! for external graph databases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::Triple;
use crate::normalize::{normalize_value, PlaceholderSet};
use crate::ontology::Ontology;

/// A qualified attribute node: the `(predicate, value)` pair is the unit of
/// graph identity, so `(has_pattern, floral)` and `(has_texture, floral)`
/// are distinct nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttrNode {
    pub predicate: String,
    pub value: String,
}

impl AttrNode {
    pub fn new(predicate: impl Into<String>, value: impl Into<String>) -> Self {
        AttrNode {
            predicate: predicate.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for AttrNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.predicate, self.value)
    }
}

/// One image's attribute set. Star-shaped by construction: every node links
/// only to the central image, so the node set is the whole graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageGraph {
    pub image_id: String,
    pub nodes: BTreeSet<AttrNode>,
    /// Provenance for world graphs, e.g. the movie a frame came from.
    pub source_label: Option<String>,
}

impl ImageGraph {
    pub fn new(image_id: impl Into<String>) -> Self {
        ImageGraph {
            image_id: image_id.into(),
            nodes: BTreeSet::new(),
            source_label: None,
        }
    }

    /// Build from triples that must all carry `image_id` as subject.
    pub fn from_triples(image_id: impl Into<String>, triples: &[Triple]) -> Result<Self> {
        let image_id = image_id.into();
        let mut graph = ImageGraph::new(image_id);
        for triple in triples {
            if triple.subject != graph.image_id {
                return Err(Error::InvalidInput(format!(
                    "mixed subjects: expected `{}`, found `{}`",
                    graph.image_id, triple.subject
                )));
            }
            graph
                .nodes
                .insert(AttrNode::new(&triple.predicate, &triple.object));
        }
        Ok(graph)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = Some(label.into());
        self
    }

    pub fn insert(&mut self, node: AttrNode) -> bool {
        self.nodes.insert(node)
    }

    pub fn contains(&self, node: &AttrNode) -> bool {
        self.nodes.contains(node)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Build an image graph from triples sharing one subject; the subject of the
/// first triple names the image. An empty list yields an empty graph.
pub fn build_image_graph(triples: &[Triple]) -> Result<ImageGraph> {
    let image_id = triples.first().map(|t| t.subject.as_str()).unwrap_or("");
    ImageGraph::from_triples(image_id, triples)
}

/// Union of all image graphs. Identical attribute nodes are shared across
/// images; `index` is the exact inverse of the membership relation and is
/// maintained under every mutation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GlobalGraph {
    images: BTreeMap<String, ImageGraph>,
    index: BTreeMap<AttrNode, BTreeSet<String>>,
}

impl GlobalGraph {
    pub fn new() -> Self {
        GlobalGraph::default()
    }

    /// Insert one image graph; the id must be new.
    pub fn insert(&mut self, graph: ImageGraph) -> Result<()> {
        if self.images.contains_key(&graph.image_id) {
            return Err(Error::DuplicateImage(graph.image_id));
        }
        for node in &graph.nodes {
            self.index
                .entry(node.clone())
                .or_default()
                .insert(graph.image_id.clone());
        }
        self.images.insert(graph.image_id.clone(), graph);
        Ok(())
    }

    pub fn remove(&mut self, image_id: &str) -> Option<ImageGraph> {
        let graph = self.images.remove(image_id)?;
        for node in &graph.nodes {
            if let Some(ids) = self.index.get_mut(node) {
                ids.remove(image_id);
                if ids.is_empty() {
                    self.index.remove(node);
                }
            }
        }
        Some(graph)
    }

    pub fn get(&self, image_id: &str) -> Option<&ImageGraph> {
        self.images.get(image_id)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Image graphs in ascending image-id order.
    pub fn images(&self) -> impl Iterator<Item = &ImageGraph> {
        self.images.values()
    }

    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.images.keys().map(String::as_str)
    }

    /// Ids of the images containing `node`.
    pub fn images_with(&self, node: &AttrNode) -> Option<&BTreeSet<String>> {
        self.index.get(node)
    }

    pub fn contains_node(&self, node: &AttrNode) -> bool {
        self.index.contains_key(node)
    }

    pub fn distinct_nodes(&self) -> impl Iterator<Item = &AttrNode> {
        self.index.keys()
    }

    /// Verify that `index` is exactly the inverse of the membership maps.
    pub fn check_invariants(&self) -> Result<()> {
        let mut expected: BTreeMap<&AttrNode, BTreeSet<&str>> = BTreeMap::new();
        for graph in self.images.values() {
            for node in &graph.nodes {
                expected
                    .entry(node)
                    .or_default()
                    .insert(graph.image_id.as_str());
            }
        }
        let actual: BTreeMap<&AttrNode, BTreeSet<&str>> = self
            .index
            .iter()
            .map(|(node, ids)| (node, ids.iter().map(String::as_str).collect()))
            .collect();
        if expected != actual {
            return Err(Error::InvalidInput(
                "inverted index out of sync with image graphs".into(),
            ));
        }
        Ok(())
    }
}

/// Merge image graphs with pairwise-distinct ids into one global graph.
pub fn merge_global(graphs: Vec<ImageGraph>) -> Result<GlobalGraph> {
    let mut global = GlobalGraph::new();
    for graph in graphs {
        global.insert(graph)?;
    }
    Ok(global)
}

/// An attribute node with the number of distinct images containing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub node: AttrNode,
    pub count: usize,
}

/// The `top_k` most frequent attribute nodes, counted per distinct image;
/// ties break by `(predicate, value)` ascending.
pub fn attribute_frequency(global: &GlobalGraph, top_k: usize) -> Vec<FrequencyEntry> {
    let mut entries: Vec<FrequencyEntry> = global
        .index
        .iter()
        .map(|(node, ids)| FrequencyEntry {
            node: node.clone(),
            count: ids.len(),
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.node.cmp(&b.node)));
    entries.truncate(top_k);
    entries
}

/// How `load_triples` reacts to invalid lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Any unknown predicate or placeholder object fails the load, listing
    /// the offending lines.
    #[default]
    Strict,
    /// Invalid lines are skipped with a warning.
    Lenient,
}

/// Knobs for [`load_triples`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub mode: LoadMode,
    pub placeholders: PlaceholderSet,
    /// Sidecar provenance: image id -> source label.
    pub labels: Option<BTreeMap<String, String>>,
}

/// Serialize a global graph as the canonical triple TSV: one
/// `image_id<TAB>predicate<TAB>value` line per node, sorted by
/// `(image_id, predicate, value)`, LF endings.
pub fn triples_to_tsv(global: &GlobalGraph) -> String {
    let mut out = String::new();
    for graph in global.images() {
        for node in &graph.nodes {
            out.push_str(&graph.image_id);
            out.push('\t');
            out.push_str(&node.predicate);
            out.push('\t');
            out.push_str(&node.value);
            out.push('\n');
        }
    }
    out
}

pub fn save_triples(global: &GlobalGraph, path: &Path) -> Result<()> {
    fs::write(path, triples_to_tsv(global)).map_err(|e| Error::io(path, e))
}

pub fn load_triples(path: &Path, ontology: &Ontology, options: &LoadOptions) -> Result<GlobalGraph> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_triples_str(&content, ontology, options, path)
}

/// Parse triple TSV content. Predicates are validated against the ontology
/// (and canonicalized), objects re-normalized and null-filtered; see
/// [`LoadMode`] for the failure policy.
pub fn load_triples_str(
    content: &str,
    ontology: &Ontology,
    options: &LoadOptions,
    path: &Path,
) -> Result<GlobalGraph> {
    let mut nodes_by_image: BTreeMap<String, BTreeSet<AttrNode>> = BTreeMap::new();
    let mut offending: Vec<String> = Vec::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut complain = |message: String| {
            offending.push(format!("line {}: {}", lineno + 1, message));
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [image_id, predicate_raw, object_raw] = fields.as_slice() else {
            complain(format!("expected 3 fields, got {}", fields.len()));
            continue;
        };
        let Some(spec) = ontology.resolve(predicate_raw) else {
            complain(format!("unknown predicate `{predicate_raw}`"));
            continue;
        };
        let object = normalize_value(object_raw);
        if options.placeholders.contains(&object) {
            complain(format!("placeholder object `{object}`"));
            continue;
        }
        nodes_by_image
            .entry(image_id.to_string())
            .or_default()
            .insert(AttrNode::new(&spec.name, object));
    }

    if !offending.is_empty() {
        match options.mode {
            LoadMode::Strict => {
                let detail = offending
                    .iter()
                    .take(8)
                    .cloned()
                    .collect::<Vec<_>>()
                    .join("; ");
                let detail = if offending.len() > 8 {
                    format!("{detail}; ...")
                } else {
                    detail
                };
                return Err(Error::InvalidLines {
                    path: path.to_path_buf(),
                    count: offending.len(),
                    detail,
                });
            }
            LoadMode::Lenient => {
                for line in &offending {
                    log::warn!("{}: skipped {}", path.display(), line);
                }
            }
        }
    }

    let mut global = GlobalGraph::new();
    for (image_id, nodes) in nodes_by_image {
        let mut graph = ImageGraph::new(&image_id);
        graph.nodes = nodes;
        if let Some(labels) = &options.labels {
            if let Some(label) = labels.get(&image_id) {
                graph.source_label = Some(label.clone());
            }
        }
        global.insert(graph)?;
    }
    Ok(global)
}

/// Load a labels sidecar: `image_id<TAB>label` per line.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = BTreeMap::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let Some((image_id, label)) = line.split_once('\t') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected `image_id<TAB>label`".into(),
            });
        };
        labels.insert(image_id.to_string(), label.to_string());
    }
    Ok(labels)
}

/// Render the bulk-import CSV pair: `(nodes.csv, edges.csv)` contents.
///
/// `nodes.csv` columns: `node_id,kind,predicate,value,source_label` — image
/// rows first (sorted by id), then attribute rows (sorted by predicate,
/// value). `edges.csv` columns: `image_node_id,attribute_node_id,predicate`.
/// Node ids are `i:<image_id>` and `a:<n>` with `n` the rank of the node in
/// the sorted distinct-node list, so re-exports are byte-identical.
pub fn export_bulk_strings(global: &GlobalGraph) -> Result<(String, String)> {
    let node_ids: BTreeMap<&AttrNode, String> = global
        .distinct_nodes()
        .enumerate()
        .map(|(idx, node)| (node, format!("a:{idx}")))
        .collect();

    let mut nodes = csv::Writer::from_writer(Vec::new());
    nodes
        .write_record(["node_id", "kind", "predicate", "value", "source_label"])
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    for graph in global.images() {
        nodes
            .write_record([
                &format!("i:{}", graph.image_id),
                "image",
                "",
                "",
                graph.source_label.as_deref().unwrap_or(""),
            ])
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    for (node, id) in &node_ids {
        nodes
            .write_record([id.as_str(), "attribute", &node.predicate, &node.value, ""])
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }

    let mut edges = csv::Writer::from_writer(Vec::new());
    edges
        .write_record(["image_node_id", "attribute_node_id", "predicate"])
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    for graph in global.images() {
        for node in &graph.nodes {
            edges
                .write_record([
                    &format!("i:{}", graph.image_id),
                    &node_ids[node],
                    &node.predicate,
                ])
                .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        }
    }

    let finish = |writer: csv::Writer<Vec<u8>>| -> Result<String> {
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(format!("csv utf-8: {e}")))
    };
    Ok((finish(nodes)?, finish(edges)?))
}

/// Write `nodes.csv` and `edges.csv` into `dir`.
pub fn export_bulk(global: &GlobalGraph, dir: &Path) -> Result<()> {
    let (nodes, edges) = export_bulk_strings(global)?;
    let nodes_path = dir.join("nodes.csv");
    fs::write(&nodes_path, nodes).map_err(|e| Error::io(&nodes_path, e))?;
    let edges_path = dir.join("edges.csv");
    fs::write(&edges_path, edges).map_err(|e| Error::io(&edges_path, e))?;
    Ok(())
}
