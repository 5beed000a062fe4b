//! Style-induced graph deltas and their attribution against a
//! provenance-labeled world graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphstore::{AttrNode, GlobalGraph, ImageGraph};
use crate::par::map_collect;

/// Nodes present in the stylised graph but absent from the reference:
/// `introduced = stylised.nodes \ reference.nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleDelta {
    pub pair_id: String,
    pub reference_id: String,
    pub stylised_id: String,
    pub introduced: BTreeSet<AttrNode>,
}

pub fn style_delta(reference: &ImageGraph, stylised: &ImageGraph, pair_id: &str) -> StyleDelta {
    StyleDelta {
        pair_id: pair_id.to_string(),
        reference_id: reference.image_id.clone(),
        stylised_id: stylised.image_id.clone(),
        introduced: stylised.nodes.difference(&reference.nodes).cloned().collect(),
    }
}

/// Outcome of matching delta elements against the world graph.
///
/// Totals count element instances per delta (the same node appearing in two
/// deltas counts twice); `per_label_occurrences` counts world-side frame
/// occurrences, so it can exceed `matched`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub total_delta_elements: usize,
    pub matched: usize,
    pub unmatched: usize,
    pub unmatched_elements: Vec<AttrNode>,
    /// Percentage, rounded to two decimals; 0 when there are no elements.
    pub unmatched_rate: f64,
    pub per_label_occurrences: BTreeMap<String, u64>,
}

/// How matched elements contribute to `per_label_occurrences`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelCounting {
    /// One count per world frame containing the element.
    #[default]
    FrameOccurrences,
    /// One count per (element, label) pair, regardless of frame count.
    ElementLabel,
}

impl std::str::FromStr for LabelCounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occurrences" => Ok(LabelCounting::FrameOccurrences),
            "element-label" => Ok(LabelCounting::ElementLabel),
            other => Err(Error::Config(format!(
                "label counting must be `occurrences` or `element-label`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MatchOptions {
    /// Deduplicate elements across deltas before counting.
    pub dedupe_global: bool,
    pub label_counting: LabelCounting,
}

/// Match every delta element against the world: an element is matched iff it
/// appears in at least one world image. Every world image must carry a
/// source label.
pub fn match_world(deltas: &[StyleDelta], world: &GlobalGraph) -> Result<MatchReport> {
    match_world_with(deltas, world, &MatchOptions::default())
}

pub fn match_world_with(
    deltas: &[StyleDelta],
    world: &GlobalGraph,
    options: &MatchOptions,
) -> Result<MatchReport> {
    if let Some(unlabeled) = world.images().find(|g| g.source_label.is_none()) {
        return Err(Error::MissingLabel(unlabeled.image_id.clone()));
    }
    let label_of: BTreeMap<&str, &str> = world
        .images()
        .map(|g| {
            (
                g.image_id.as_str(),
                g.source_label.as_deref().expect("checked above"),
            )
        })
        .collect();

    let elements: Vec<AttrNode> = if options.dedupe_global {
        deltas
            .iter()
            .flat_map(|d| d.introduced.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    } else {
        deltas
            .iter()
            .flat_map(|d| d.introduced.iter().cloned())
            .collect()
    };

    struct ElementOutcome {
        matched: bool,
        element: AttrNode,
        labels: Vec<(String, u64)>,
    }
    let outcomes = map_collect(&elements, |element| {
        match world.images_with(element) {
            Some(ids) if !ids.is_empty() => {
                let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
                for id in ids {
                    *counts.entry(label_of[id.as_str()]).or_default() += 1;
                }
                if options.label_counting == LabelCounting::ElementLabel {
                    for count in counts.values_mut() {
                        *count = 1;
                    }
                }
                ElementOutcome {
                    matched: true,
                    element: element.clone(),
                    labels: counts
                        .into_iter()
                        .map(|(l, c)| (l.to_string(), c))
                        .collect(),
                }
            }
            _ => ElementOutcome {
                matched: false,
                element: element.clone(),
                labels: Vec::new(),
            },
        }
    });

    let mut report = MatchReport {
        total_delta_elements: elements.len(),
        matched: 0,
        unmatched: 0,
        unmatched_elements: Vec::new(),
        unmatched_rate: 0.0,
        per_label_occurrences: BTreeMap::new(),
    };
    for outcome in outcomes {
        if outcome.matched {
            report.matched += 1;
            for (label, count) in outcome.labels {
                *report.per_label_occurrences.entry(label).or_default() += count;
            }
        } else {
            report.unmatched += 1;
            report.unmatched_elements.push(outcome.element);
        }
    }
    report.unmatched_rate = unmatched_rate(report.unmatched, report.total_delta_elements);
    Ok(report)
}

/// `100 * unmatched / total`, rounded to two decimals; 0 for an empty total.
pub fn unmatched_rate(unmatched: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    round2(100.0 * unmatched as f64 / total as f64)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// One row of the per-label contribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub label: String,
    pub occurrences: u64,
    /// Two-decimal percentage of all occurrences.
    pub percentage: f64,
}

/// Per-label occurrence table sorted by occurrences descending (label
/// ascending on ties). Percentages are apportioned by largest remainder so
/// the column sums to exactly 100.00 whenever there is at least one
/// occurrence.
pub fn label_distribution(report: &MatchReport) -> Vec<LabelRow> {
    let total: u64 = report.per_label_occurrences.values().sum();
    let mut rows: Vec<LabelRow> = report
        .per_label_occurrences
        .iter()
        .map(|(label, &occurrences)| LabelRow {
            label: label.clone(),
            occurrences,
            percentage: 0.0,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.occurrences
            .cmp(&a.occurrences)
            .then_with(|| a.label.cmp(&b.label))
    });
    if total == 0 {
        return rows;
    }

    // Largest-remainder apportionment in hundredths of a percent.
    let mut cents: Vec<u64> = Vec::with_capacity(rows.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for (idx, row) in rows.iter().enumerate() {
        let exact = 10000.0 * row.occurrences as f64 / total as f64;
        let floor = exact.floor();
        cents.push(floor as u64);
        remainders.push((exact - floor, idx));
    }
    let assigned: u64 = cents.iter().sum();
    let mut leftover = 10000u64.saturating_sub(assigned);
    remainders.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("remainders are finite")
            .then_with(|| rows[b.1].occurrences.cmp(&rows[a.1].occurrences))
            .then_with(|| rows[a.1].label.cmp(&rows[b.1].label))
    });
    for &(_, idx) in &remainders {
        if leftover == 0 {
            break;
        }
        cents[idx] += 1;
        leftover -= 1;
    }
    for (row, cent) in rows.iter_mut().zip(cents) {
        row.percentage = cent as f64 / 100.0;
    }
    rows
}

/// One line of a pairs manifest: `pair_id<TAB>reference_id<TAB>stylised_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub pair_id: String,
    pub reference_id: String,
    pub stylised_id: String,
}

pub fn load_pairs_manifest(path: &Path) -> Result<Vec<PairSpec>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [pair_id, reference_id, stylised_id] = fields.as_slice() else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        };
        if !seen.insert(pair_id.to_string()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("duplicate pair id `{pair_id}`"),
            });
        }
        pairs.push(PairSpec {
            pair_id: pair_id.to_string(),
            reference_id: reference_id.to_string(),
            stylised_id: stylised_id.to_string(),
        });
    }
    Ok(pairs)
}

/// Serialize deltas as TSV rows
/// `pair_id<TAB>reference_id<TAB>stylised_id<TAB>predicate<TAB>value`,
/// sorted by pair id. Pairs with an empty delta contribute no rows.
pub fn deltas_to_tsv(deltas: &[StyleDelta]) -> String {
    let mut sorted: Vec<&StyleDelta> = deltas.iter().collect();
    sorted.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    let mut out = String::new();
    for delta in sorted {
        for node in &delta.introduced {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                delta.pair_id, delta.reference_id, delta.stylised_id, node.predicate, node.value
            ));
        }
    }
    out
}

pub fn save_deltas(deltas: &[StyleDelta], path: &Path) -> Result<()> {
    fs::write(path, deltas_to_tsv(deltas)).map_err(|e| Error::io(path, e))
}

pub fn load_deltas(path: &Path) -> Result<Vec<StyleDelta>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut by_pair: BTreeMap<String, StyleDelta> = BTreeMap::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [pair_id, reference_id, stylised_id, predicate, value] = fields.as_slice() else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        };
        let delta = by_pair
            .entry(pair_id.to_string())
            .or_insert_with(|| StyleDelta {
                pair_id: pair_id.to_string(),
                reference_id: reference_id.to_string(),
                stylised_id: stylised_id.to_string(),
                introduced: BTreeSet::new(),
            });
        if delta.reference_id != *reference_id || delta.stylised_id != *stylised_id {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("pair `{pair_id}` has inconsistent image ids"),
            });
        }
        delta.introduced.insert(AttrNode::new(*predicate, *value));
    }
    Ok(by_pair.into_values().collect())
}
