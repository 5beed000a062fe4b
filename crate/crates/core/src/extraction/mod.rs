//! Triple extraction: response parsing, placeholder filtering, and
//! corpus-level statistics. The HTTP client lives in [`client`].

pub mod client;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::{normalize_value, PlaceholderSet};
use crate::ontology::Ontology;
use crate::stats::mean_std_sample;

pub use client::{extract_batch, extract_image, BatchItem, ClientConfig, ModelClient};

/// One `(image_id, relation, attribute)` assertion. Predicates carry the
/// ontology's canonical spelling; objects are normalized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }
}

/// A response line that did not become a triple, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedLine {
    pub line: String,
    pub reason: String,
}

/// Outcome of parsing one model response.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedResponse {
    pub triples: Vec<Triple>,
    pub rejected: Vec<RejectedLine>,
    /// Non-fatal oddities, e.g. a foreign subject overridden by the image id.
    pub warnings: Vec<String>,
}

/// Everything extracted for one image, with the raw response kept for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub image_id: String,
    pub triples: Vec<Triple>,
    pub rejected: Vec<RejectedLine>,
    pub raw_response: String,
}

/// Parse a model response into triples with the default placeholder set.
///
/// Accepted line shapes, pipe- or tab-delimited, surrounding whitespace
/// ignored: `predicate | object` and `subject | predicate | object`. A
/// subject differing from `image_id` is overridden (with a warning, not a
/// rejection). Unknown predicates, closed-vocabulary violations, empty and
/// placeholder objects are rejected per line; nothing here is fatal.
pub fn parse_response(text: &str, image_id: &str, ontology: &Ontology) -> ParsedResponse {
    parse_response_with(text, image_id, ontology, &PlaceholderSet::default())
}

pub fn parse_response_with(
    text: &str,
    image_id: &str,
    ontology: &Ontology,
    placeholders: &PlaceholderSet,
) -> ParsedResponse {
    let mut out = ParsedResponse::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_start_matches(['-', '*', '•']).trim_start();
        if line.is_empty() {
            continue;
        }
        let reject = |reason: String, out: &mut ParsedResponse| {
            out.rejected.push(RejectedLine {
                line: raw.trim().to_string(),
                reason,
            });
        };

        let fields: Vec<&str> = if line.contains('|') {
            line.split('|').map(str::trim).collect()
        } else {
            line.split('\t').map(str::trim).collect()
        };
        let (subject, predicate_raw, object_raw) = match fields.as_slice() {
            [predicate, object] => (image_id, *predicate, *object),
            [subject, predicate, object] => (*subject, *predicate, *object),
            _ => {
                reject(
                    format!("expected 2 or 3 fields, got {}", fields.len()),
                    &mut out,
                );
                continue;
            }
        };

        if subject != image_id {
            out.warnings.push(format!(
                "line {}: subject `{}` overridden by image id `{}`",
                lineno + 1,
                subject,
                image_id
            ));
        }

        let spec = match ontology.resolve(predicate_raw) {
            Some(spec) => spec,
            None => {
                reject(format!("unknown predicate `{predicate_raw}`"), &mut out);
                continue;
            }
        };

        let object = normalize_value(object_raw);
        if object.is_empty() {
            reject("empty object".into(), &mut out);
            continue;
        }
        if placeholders.contains(&object) {
            reject(format!("placeholder object `{object}`"), &mut out);
            continue;
        }
        if !spec.accepts(&object) {
            reject(
                format!("value `{object}` not in vocabulary of `{}`", spec.name),
                &mut out,
            );
            continue;
        }

        out.triples.push(Triple::new(image_id, &spec.name, object));
    }
    out
}

/// Drop triples whose (re-normalized) object is a placeholder, preserving
/// the order of survivors. Idempotent.
pub fn filter_nulls(triples: Vec<Triple>) -> Vec<Triple> {
    filter_nulls_with(triples, &PlaceholderSet::default())
}

pub fn filter_nulls_with(triples: Vec<Triple>, placeholders: &PlaceholderSet) -> Vec<Triple> {
    triples
        .into_iter()
        .filter(|t| !placeholders.contains(&normalize_value(&t.object)))
        .collect()
}

/// Triples-per-image statistics after null filtering. `std` is the sample
/// standard deviation (divisor n-1, 0 for a single image).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleStats {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    pub std: f64,
}

pub fn triple_stats(records: &[ExtractionRecord]) -> Result<TripleStats> {
    let counts: Vec<usize> = records.iter().map(|r| r.triples.len()).collect();
    triple_stats_from_counts(&counts)
}

pub fn triple_stats_from_counts(counts: &[usize]) -> Result<TripleStats> {
    if counts.is_empty() {
        return Err(Error::InvalidInput(
            "triple statistics need at least one record".into(),
        ));
    }
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, std) = mean_std_sample(&values);
    Ok(TripleStats {
        mean,
        min: *counts.iter().min().expect("non-empty"),
        max: *counts.iter().max().expect("non-empty"),
        std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::RelationshipSpec;

    fn fashion_ontology() -> Ontology {
        Ontology::new(
            "fashion",
            vec![
                RelationshipSpec::new("depicts", "General Semantics"),
                RelationshipSpec::new("has_pattern", "Visual Qualities"),
                RelationshipSpec::new("has_material_type", "Materials"),
                RelationshipSpec::new("has_sleeve_type", "Garment Parts")
                    .with_vocabulary(["short", "long", "sleeveless"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_field_line_lowercases_object() {
        let parsed = parse_response("depicts | Dress", "img1", &fashion_ontology());
        assert_eq!(parsed.triples, vec![Triple::new("img1", "depicts", "dress")]);
        assert!(parsed.rejected.is_empty());
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn unknown_predicate_rejected() {
        let parsed = parse_response("flies | spaceship", "img1", &fashion_ontology());
        assert!(parsed.triples.is_empty());
        assert_eq!(parsed.rejected.len(), 1);
        assert!(parsed.rejected[0].reason.contains("unknown predicate"));
    }

    #[test]
    fn foreign_subject_overridden_with_warning() {
        let parsed = parse_response("img9 | has_pattern | floral", "img1", &fashion_ontology());
        assert_eq!(
            parsed.triples,
            vec![Triple::new("img1", "has_pattern", "floral")]
        );
        assert!(parsed.rejected.is_empty());
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("img9"));
    }

    #[test]
    fn matching_subject_no_warning() {
        let parsed = parse_response("img1\thas_pattern\tfloral", "img1", &fashion_ontology());
        assert_eq!(parsed.triples.len(), 1);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn placeholder_object_rejected() {
        let parsed = parse_response("has_pattern | None", "img1", &fashion_ontology());
        assert!(parsed.triples.is_empty());
        assert_eq!(parsed.rejected.len(), 1);
        assert!(parsed.rejected[0].reason.contains("placeholder"));
    }

    #[test]
    fn vocabulary_violation_rejected() {
        let parsed = parse_response("has_sleeve_type | puffed", "img1", &fashion_ontology());
        assert_eq!(parsed.rejected.len(), 1);
        assert!(parsed.rejected[0].reason.contains("vocabulary"));
        let ok = parse_response("has_sleeve_type | Long", "img1", &fashion_ontology());
        assert_eq!(ok.triples.len(), 1);
    }

    #[test]
    fn bullets_blanks_and_prose_handled() {
        let text = "Here are the findings:\n\n- depicts | dress\n* has_pattern | floral\n";
        let parsed = parse_response(text, "img1", &fashion_ontology());
        assert_eq!(parsed.triples.len(), 2);
        assert_eq!(parsed.rejected.len(), 1); // the prose line
    }

    #[test]
    fn predicate_casing_canonicalized() {
        let parsed = parse_response("DEPICTS | dress", "img1", &fashion_ontology());
        assert_eq!(parsed.triples[0].predicate, "depicts");
    }

    #[test]
    fn filter_nulls_drops_placeholders_keeps_order() {
        let triples = vec![
            Triple::new("i", "depicts", "dress"),
            Triple::new("i", "has_pattern", "none"),
            Triple::new("i", "has_material_type", "cotton"),
        ];
        let kept = filter_nulls(triples);
        assert_eq!(
            kept,
            vec![
                Triple::new("i", "depicts", "dress"),
                Triple::new("i", "has_material_type", "cotton"),
            ]
        );
    }

    #[test]
    fn filter_nulls_normalizes_before_checking() {
        let triples = vec![
            Triple::new("i", "depicts", "n/a"),
            Triple::new("i", "depicts", "N/A"),
        ];
        assert!(filter_nulls(triples).is_empty());
    }

    #[test]
    fn filter_nulls_empty_input() {
        assert!(filter_nulls(vec![]).is_empty());
    }

    #[test]
    fn filter_nulls_idempotent() {
        let triples = vec![
            Triple::new("i", "depicts", "dress"),
            Triple::new("i", "depicts", "none"),
            Triple::new("i", "depicts", "  Unknown "),
        ];
        let once = filter_nulls(triples);
        assert_eq!(filter_nulls(once.clone()), once);
    }

    fn record(image_id: &str, n: usize) -> ExtractionRecord {
        ExtractionRecord {
            image_id: image_id.into(),
            triples: (0..n)
                .map(|i| Triple::new(image_id, "depicts", format!("v{i}")))
                .collect(),
            rejected: vec![],
            raw_response: String::new(),
        }
    }

    #[test]
    fn stats_hand_computed() {
        let records = vec![record("a", 2), record("b", 4), record("c", 6)];
        let stats = triple_stats(&records).unwrap();
        assert_eq!(stats.mean, 4.0);
        assert_eq!(stats.min, 2);
        assert_eq!(stats.max, 6);
        assert_eq!(stats.std, 2.0);
    }

    #[test]
    fn stats_single_record() {
        let stats = triple_stats(&[record("a", 5)]).unwrap();
        assert_eq!(stats.mean, 5.0);
        assert_eq!(stats.min, 5);
        assert_eq!(stats.max, 5);
        assert_eq!(stats.std, 0.0);
    }

    #[test]
    fn stats_empty_is_domain_error() {
        assert!(triple_stats(&[]).is_err());
    }
}
