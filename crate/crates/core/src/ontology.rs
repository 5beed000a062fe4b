//! Domain ontologies: the closed set of relationships that constrains
//! extraction, plus prompt rendering.
//!
//! An ontology file is plain TSV, one relationship per line:
//!
//! ```text
//! # comment
//! name<TAB>category[<TAB>value1,value2,...]
//! ```
//!
//! The optional third field closes the value vocabulary for that
//! relationship; without it any (normalized, non-placeholder) value is
//! accepted.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::normalize_value;

/// One allowed relationship.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipSpec {
    /// Identifier used as the triple predicate, e.g. `has_pattern`.
    pub name: String,
    /// Free-text grouping label, e.g. `Visual Qualities`.
    pub category: String,
    /// Allowed values; empty means open vocabulary. Stored normalized.
    pub vocabulary: BTreeSet<String>,
}

impl RelationshipSpec {
    pub fn new(name: impl Into<String>, category: impl Into<String>) -> Self {
        RelationshipSpec {
            name: name.into(),
            category: category.into(),
            vocabulary: BTreeSet::new(),
        }
    }

    pub fn with_vocabulary<I, S>(mut self, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.vocabulary = values
            .into_iter()
            .map(|v| normalize_value(v.as_ref()))
            .collect();
        self
    }

    /// Open vocabularies accept everything; closed ones only their members.
    /// `value` must already be normalized.
    pub fn accepts(&self, value: &str) -> bool {
        self.vocabulary.is_empty() || self.vocabulary.contains(value)
    }
}

/// An ordered set of relationships with case-insensitively unique names.
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ontology {
    id: String,
    relationships: Vec<RelationshipSpec>,
    #[serde(skip)]
    by_lower: BTreeMap<String, usize>,
}

impl Ontology {
    pub fn new(id: impl Into<String>, relationships: Vec<RelationshipSpec>) -> Result<Self> {
        if relationships.is_empty() {
            return Err(Error::InvalidOntology(
                "an ontology needs at least one relationship".into(),
            ));
        }
        let mut by_lower = BTreeMap::new();
        for (idx, rel) in relationships.iter().enumerate() {
            if rel.name.is_empty() {
                return Err(Error::InvalidOntology(format!(
                    "relationship #{} has an empty name",
                    idx + 1
                )));
            }
            if rel.name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidOntology(format!(
                    "relationship name `{}` contains whitespace",
                    rel.name
                )));
            }
            if rel.category.contains('\t') || rel.category.contains('\n') {
                return Err(Error::InvalidOntology(format!(
                    "category of `{}` contains a tab or newline",
                    rel.name
                )));
            }
            if by_lower.insert(rel.name.to_lowercase(), idx).is_some() {
                return Err(Error::InvalidOntology(format!(
                    "duplicate relationship name `{}`",
                    rel.name
                )));
            }
        }
        Ok(Ontology {
            id: id.into(),
            relationships,
            by_lower,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn relationships(&self) -> &[RelationshipSpec] {
        &self.relationships
    }

    pub fn len(&self) -> usize {
        self.relationships.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relationships.is_empty()
    }

    /// Case-insensitive lookup returning the spec with its canonical name.
    pub fn resolve(&self, name: &str) -> Option<&RelationshipSpec> {
        self.by_lower
            .get(&name.trim().to_lowercase())
            .map(|&idx| &self.relationships[idx])
    }
}

/// Load an ontology from its TSV file. The ontology id is the file stem.
pub fn load_ontology(path: &Path) -> Result<Ontology> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_ontology(&content, &id).map_err(|(line, message)| Error::OntologyParse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

fn parse_ontology(content: &str, id: &str) -> std::result::Result<Ontology, (usize, String)> {
    let mut relationships = Vec::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err((
                lineno + 1,
                format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let mut rel = RelationshipSpec::new(fields[0].trim(), fields[1].trim());
        if let Some(values) = fields.get(2) {
            let mut vocabulary = BTreeSet::new();
            for value in values.split(',') {
                let normalized = normalize_value(value);
                if normalized.is_empty() {
                    return Err((lineno + 1, "empty vocabulary value".into()));
                }
                vocabulary.insert(normalized);
            }
            rel.vocabulary = vocabulary;
        }
        relationships.push(rel);
    }
    Ontology::new(id, relationships).map_err(|e| (0, e.to_string()))
}

/// Write an ontology back out in the file format. `load_ontology` of the
/// result (under a file named `<id>.tsv`) reproduces the input exactly.
pub fn save_ontology(ontology: &Ontology, path: &Path) -> Result<()> {
    fs::write(path, ontology_to_tsv(ontology)).map_err(|e| Error::io(path, e))
}

pub fn ontology_to_tsv(ontology: &Ontology) -> String {
    let mut out = String::new();
    for rel in ontology.relationships() {
        out.push_str(&rel.name);
        out.push('\t');
        out.push_str(&rel.category);
        if !rel.vocabulary.is_empty() {
            out.push('\t');
            let values: Vec<&str> = rel.vocabulary.iter().map(String::as_str).collect();
            out.push_str(&values.join(","));
        }
        out.push('\n');
    }
    out
}

/// The three text blocks a rendered extraction prompt is assembled from.
/// `relationship_line` is instantiated once per relationship and must use
/// the `{name}` placeholder exactly once; `{category}` and `{values}`
/// (comma-joined closed vocabulary, empty when open) are optional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub preamble: String,
    pub relationship_line: String,
    pub output_instruction: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            preamble: "You are a meticulous visual annotator. Look at the image and \
                       record its characteristics using only the allowed relationships \
                       listed below. Report concrete, directly visible qualities; omit \
                       anything you cannot determine from the image."
                .into(),
            relationship_line: "- {name} ({category})".into(),
            output_instruction: "Answer with one relationship per line, formatted exactly as:\n\
                                 relationship | value\n\
                                 Use only the relationship identifiers listed above, keep each \
                                 value short, and leave a relationship out entirely when it does \
                                 not apply instead of writing None or N/A."
                .into(),
        }
    }
}

impl PromptTemplate {
    /// Load a template from a JSON file with the three fields above.
    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let template: PromptTemplate = serde_json::from_str(&content)
            .map_err(|e| Error::Template(format!("{}: {e}", path.display())))?;
        template.validate()?;
        Ok(template)
    }

    pub fn validate(&self) -> Result<()> {
        match self.relationship_line.matches("{name}").count() {
            1 => Ok(()),
            n => Err(Error::Template(format!(
                "relationship line must contain the {{name}} placeholder exactly once, found {n}"
            ))),
        }
    }
}

/// Render the extraction prompt: preamble, one line per relationship in
/// ontology order, then the output-format instruction. Pure; equal inputs
/// produce byte-equal output.
pub fn render_prompt(ontology: &Ontology, template: &PromptTemplate) -> Result<String> {
    template.validate()?;
    let mut out = String::new();
    out.push_str(template.preamble.trim_end());
    out.push_str("\n\n");
    for rel in ontology.relationships() {
        let values: Vec<&str> = rel.vocabulary.iter().map(String::as_str).collect();
        let line = template
            .relationship_line
            .replace("{name}", &rel.name)
            .replace("{category}", &rel.category)
            .replace("{values}", &values.join(", "));
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push('\n');
    out.push_str(template.output_instruction.trim_end());
    out.push('\n');
    Ok(out)
}
