//! Node-overlap similarity: scoring, top-k ranking against a corpus, and
//! group-level statistics including threshold clustering.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphstore::{AttrNode, GlobalGraph, ImageGraph};
use crate::par::map_collect;

/// Overlap identity: qualified `(predicate, value)` nodes by default, bare
/// values for sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    #[default]
    Qualified,
    ValueOnly,
}

impl std::str::FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qualified" => Ok(MatchMode::Qualified),
            "value-only" => Ok(MatchMode::ValueOnly),
            other => Err(Error::Config(format!(
                "match mode must be `qualified` or `value-only`, got `{other}`"
            ))),
        }
    }
}

/// Project a graph onto value-only node identity. Every node keeps its value
/// but the predicate collapses to `*`, so overlap on the projected graphs
/// counts distinct shared values regardless of relationship.
pub fn project_value_only(graph: &ImageGraph) -> ImageGraph {
    let mut projected = ImageGraph::new(&graph.image_id);
    projected.source_label = graph.source_label.clone();
    for node in &graph.nodes {
        projected.insert(AttrNode::new("*", &node.value));
    }
    projected
}

/// Shared-node count between a query and one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapScore {
    pub query_id: String,
    pub candidate_id: String,
    pub shared: usize,
    pub shared_nodes: BTreeSet<AttrNode>,
}

/// Intersection of the two node sets; the count is symmetric in `a`/`b`.
pub fn overlap(a: &ImageGraph, b: &ImageGraph) -> OverlapScore {
    let (small, large) = if a.nodes.len() <= b.nodes.len() {
        (a, b)
    } else {
        (b, a)
    };
    let shared_nodes: BTreeSet<AttrNode> = small
        .nodes
        .iter()
        .filter(|n| large.nodes.contains(*n))
        .cloned()
        .collect();
    OverlapScore {
        query_id: a.image_id.clone(),
        candidate_id: b.image_id.clone(),
        shared: shared_nodes.len(),
        shared_nodes,
    }
}

/// Shared-node count without materializing the intersection.
pub fn overlap_count(a: &ImageGraph, b: &ImageGraph) -> usize {
    let (small, large) = if a.nodes.len() <= b.nodes.len() {
        (a, b)
    } else {
        (b, a)
    };
    small.nodes.iter().filter(|n| large.nodes.contains(*n)).count()
}

/// Ranked candidates for one query, sorted by shared count descending with
/// ties broken by candidate id ascending. The query never ranks itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankResult {
    pub query_id: String,
    pub ranking: Vec<OverlapScore>,
}

#[derive(Debug, Clone)]
pub struct RankOptions {
    /// Keep zero-overlap candidates so the ranking can fill up to `k`.
    pub include_zero: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions { include_zero: true }
    }
}

/// Top-k candidates from the corpus by node overlap with the query.
pub fn rank(query: &ImageGraph, corpus: &GlobalGraph, k: usize) -> Result<RankResult> {
    rank_with(query, corpus, k, &RankOptions::default())
}

pub fn rank_with(
    query: &ImageGraph,
    corpus: &GlobalGraph,
    k: usize,
    options: &RankOptions,
) -> Result<RankResult> {
    if k == 0 {
        return Err(Error::InvalidInput("ranking size k must be >= 1".into()));
    }
    let candidates: Vec<&ImageGraph> = corpus
        .images()
        .filter(|g| g.image_id != query.image_id)
        .collect();
    let mut ranking = map_collect(&candidates, |candidate| overlap(query, candidate));
    if !options.include_zero {
        ranking.retain(|score| score.shared > 0);
    }
    ranking.sort_by(|a, b| {
        (Reverse(a.shared), &a.candidate_id).cmp(&(Reverse(b.shared), &b.candidate_id))
    });
    ranking.truncate(k);
    Ok(RankResult {
        query_id: query.image_id.clone(),
        ranking,
    })
}

/// Group-level structure of a retrieved set of image graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// Distinct predicates appearing anywhere in the group.
    pub distinct_relationships: usize,
    /// Mean, over those predicates, of the distinct-value count.
    pub avg_unique_values_per_rel: f64,
    /// Mean pairwise shared-node count over unordered member pairs.
    pub avg_shared_attributes: f64,
    /// Max over the same pairs.
    pub max_shared_attributes: usize,
    /// threshold -> size of the largest connected component when members
    /// are linked iff their pairwise overlap meets the threshold.
    pub largest_cluster_at: BTreeMap<u32, usize>,
    /// Auxiliary query-relative variants, present when a query was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_shared_with_query: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_shared_with_query: Option<usize>,
}

pub const DEFAULT_CLUSTER_THRESHOLDS: [u32; 2] = [5, 7];

pub fn group_stats(group: &[ImageGraph], thresholds: &[u32]) -> Result<GroupStats> {
    group_stats_with_query(group, None, thresholds)
}

pub fn group_stats_with_query(
    group: &[ImageGraph],
    query: Option<&ImageGraph>,
    thresholds: &[u32],
) -> Result<GroupStats> {
    if group.is_empty() {
        return Err(Error::InvalidInput("group statistics need a non-empty group".into()));
    }

    let mut values_per_rel: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for graph in group {
        for node in &graph.nodes {
            values_per_rel
                .entry(node.predicate.as_str())
                .or_default()
                .insert(node.value.as_str());
        }
    }
    let distinct_relationships = values_per_rel.len();
    let avg_unique_values_per_rel = if values_per_rel.is_empty() {
        0.0
    } else {
        values_per_rel.values().map(|v| v.len() as f64).sum::<f64>()
            / values_per_rel.len() as f64
    };

    let pair_counts = pairwise_overlap_counts(group);
    let (avg_shared_attributes, max_shared_attributes) = if pair_counts.is_empty() {
        (0.0, 0)
    } else {
        let sum: usize = pair_counts.iter().map(|&(_, _, c)| c).sum();
        let max = pair_counts.iter().map(|&(_, _, c)| c).max().unwrap_or(0);
        (sum as f64 / pair_counts.len() as f64, max)
    };

    let mut largest_cluster_at = BTreeMap::new();
    for &threshold in thresholds {
        let components = components_from_counts(group, &pair_counts, threshold);
        let largest = components.iter().map(BTreeSet::len).max().unwrap_or(0);
        largest_cluster_at.insert(threshold, largest);
    }

    let (avg_shared_with_query, max_shared_with_query) = match query {
        Some(query) => {
            let counts = map_collect(group, |member| overlap_count(query, member));
            let sum: usize = counts.iter().sum();
            (
                Some(sum as f64 / counts.len() as f64),
                Some(counts.into_iter().max().unwrap_or(0)),
            )
        }
        None => (None, None),
    };

    Ok(GroupStats {
        distinct_relationships,
        avg_unique_values_per_rel,
        avg_shared_attributes,
        max_shared_attributes,
        largest_cluster_at,
        avg_shared_with_query,
        max_shared_with_query,
    })
}

/// Partition the group into connected components of the thresholded overlap
/// graph. Components are ordered by their smallest member id; their union is
/// the whole group.
pub fn clusters(group: &[ImageGraph], threshold: u32) -> Vec<BTreeSet<String>> {
    let pair_counts = pairwise_overlap_counts(group);
    components_from_counts(group, &pair_counts, threshold)
}

/// Overlap counts for all unordered index pairs `(i, j)`, `i < j`.
fn pairwise_overlap_counts(group: &[ImageGraph]) -> Vec<(usize, usize, usize)> {
    let pairs: Vec<(usize, usize)> = (0..group.len())
        .flat_map(|i| (i + 1..group.len()).map(move |j| (i, j)))
        .collect();
    map_collect(&pairs, |&(i, j)| {
        (i, j, overlap_count(&group[i], &group[j]))
    })
}

fn components_from_counts(
    group: &[ImageGraph],
    pair_counts: &[(usize, usize, usize)],
    threshold: u32,
) -> Vec<BTreeSet<String>> {
    let mut parent: Vec<usize> = (0..group.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for &(i, j, count) in pair_counts {
        if count >= threshold as usize {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }
    let mut by_root: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (idx, graph) in group.iter().enumerate() {
        let root = find(&mut parent, idx);
        by_root.entry(root).or_default().insert(graph.image_id.clone());
    }
    let mut components: Vec<BTreeSet<String>> = by_root.into_values().collect();
    components.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
    components
}
