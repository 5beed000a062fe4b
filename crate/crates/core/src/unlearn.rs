//! Removal-list selection for external retraining, plus before/after
//! cosine-similarity reports over externally produced image embeddings.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::RankResult;
use crate::stats::mean_std_sample;

/// Images to remove before retraining, grouped by the prompt whose ranking
/// selected them. `total_removed` counts the union across prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalPlan {
    pub experiment_id: String,
    pub per_prompt: BTreeMap<String, Vec<String>>,
    pub total_removed: usize,
}

/// Take the top `k_per_prompt` candidates of every ranking (all of it when
/// shorter). Deterministic, and independent of the order rank results are
/// supplied in.
pub fn select_removals(
    rank_results: &[RankResult],
    k_per_prompt: usize,
    experiment_id: &str,
) -> Result<RemovalPlan> {
    if rank_results.is_empty() {
        return Err(Error::InvalidInput("no rank results to select from".into()));
    }
    if k_per_prompt == 0 {
        return Err(Error::InvalidInput("k_per_prompt must be >= 1".into()));
    }
    let mut per_prompt: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for result in rank_results {
        if result.ranking.is_empty() {
            return Err(Error::InvalidInput(format!(
                "ranking for prompt `{}` is empty",
                result.query_id
            )));
        }
        let mut seen = BTreeSet::new();
        let ids: Vec<String> = result
            .ranking
            .iter()
            .take(k_per_prompt)
            .map(|score| score.candidate_id.clone())
            .filter(|id| seen.insert(id.clone()))
            .collect();
        if per_prompt.insert(result.query_id.clone(), ids).is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate rank result for prompt `{}`",
                result.query_id
            )));
        }
    }
    let union: BTreeSet<&str> = per_prompt
        .values()
        .flat_map(|ids| ids.iter().map(String::as_str))
        .collect();
    Ok(RemovalPlan {
        experiment_id: experiment_id.to_string(),
        total_removed: union.len(),
        per_prompt,
    })
}

/// Removal plan file: `prompt_id<TAB>image_id` rows (prompts sorted, images
/// in ranking order) plus a trailing summary comment with the union count.
pub fn plan_to_tsv(plan: &RemovalPlan) -> String {
    let mut out = String::new();
    for (prompt_id, ids) in &plan.per_prompt {
        for id in ids {
            out.push_str(prompt_id);
            out.push('\t');
            out.push_str(id);
            out.push('\n');
        }
    }
    out.push_str(&format!("# total_removed\t{}\n", plan.total_removed));
    out
}

pub fn save_removal_plan(plan: &RemovalPlan, path: &Path) -> Result<()> {
    fs::write(path, plan_to_tsv(plan)).map_err(|e| Error::io(path, e))
}

/// Fixed-dimension embedding vectors keyed by image id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    vectors: BTreeMap<String, Vec<f64>>,
    dim: usize,
}

impl EmbeddingSet {
    pub fn new(vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        let Some(dim) = vectors.values().next().map(Vec::len) else {
            return Err(Error::InvalidInput("embedding set is empty".into()));
        };
        if dim == 0 {
            return Err(Error::InvalidInput("embedding dimension must be >= 1".into()));
        }
        for (id, vector) in &vectors {
            if vector.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "embedding `{id}` has dimension {}, expected {dim}",
                    vector.len()
                )));
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "embedding `{id}` has a non-finite component"
                )));
            }
        }
        Ok(EmbeddingSet { vectors, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }
}

/// Load an embedding TSV: a header row `image_id<TAB>d1<TAB>...<TAB>dN`
/// declaring the dimension, then one row per image.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        if dim.is_none() {
            if fields.first() != Some(&"image_id") || fields.len() < 2 {
                return Err(parse_err(
                    "expected header row `image_id<TAB>d1<TAB>...`".into(),
                ));
            }
            dim = Some(fields.len() - 1);
            continue;
        }
        let expected = dim.expect("set above");
        if fields.len() != expected + 1 {
            return Err(parse_err(format!(
                "expected {} fields, got {}",
                expected + 1,
                fields.len()
            )));
        }
        let id = fields[0].to_string();
        let mut vector = Vec::with_capacity(expected);
        for field in &fields[1..] {
            let value: f64 = field
                .parse()
                .map_err(|e| parse_err(format!("bad number `{field}`: {e}")))?;
            vector.push(value);
        }
        if vectors.insert(id.clone(), vector).is_some() {
            return Err(parse_err(format!("duplicate image id `{id}`")));
        }
    }
    EmbeddingSet::new(vectors)
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, clamped into `[-1, 1]` against
/// rounding. Errors on dimension mismatch or a zero vector.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "cosine dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut norm_u = 0.0;
    let mut norm_v = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        norm_u += a * a;
        norm_v += b * b;
    }
    if norm_u == 0.0 || norm_v == 0.0 {
        return Err(Error::InvalidInput("cosine of a zero vector".into()));
    }
    Ok((dot / (norm_u.sqrt() * norm_v.sqrt())).clamp(-1.0, 1.0))
}

/// Per-prompt cosines with mean / sample std / range aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub per_prompt: BTreeMap<String, f64>,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl SimilarityReport {
    /// Three-decimal summary, e.g. `0.546 0.051 0.465–0.606`.
    pub fn summary_row(&self) -> String {
        format!(
            "{:.3} {:.3} {:.3}\u{2013}{:.3}",
            self.mean, self.std, self.min, self.max
        )
    }

    /// Ampersand-separated variant for pasting into tabular reports.
    pub fn summary_row_tabular(&self) -> String {
        format!(
            "{:.3} & {:.3} & {:.3}\u{2013}{:.3}",
            self.mean, self.std, self.min, self.max
        )
    }
}

/// Pairing manifest content: prompt id -> (before id, after id).
pub type Pairing = BTreeMap<String, (String, String)>;

/// Load a pairing manifest: `prompt_id<TAB>before_id<TAB>after_id` rows.
pub fn load_pairing(path: &Path) -> Result<Pairing> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairing = Pairing::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [prompt_id, before_id, after_id] = fields.as_slice() else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        };
        if pairing
            .insert(
                prompt_id.to_string(),
                (before_id.to_string(), after_id.to_string()),
            )
            .is_some()
        {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("duplicate prompt id `{prompt_id}`"),
            });
        }
    }
    Ok(pairing)
}

/// Cosine between the paired before/after embeddings of every prompt, with
/// aggregates over the per-prompt values.
pub fn compare_runs(
    before: &EmbeddingSet,
    after: &EmbeddingSet,
    pairing: &Pairing,
) -> Result<SimilarityReport> {
    if pairing.is_empty() {
        return Err(Error::InvalidInput("pairing manifest is empty".into()));
    }
    let mut per_prompt = BTreeMap::new();
    for (prompt_id, (before_id, after_id)) in pairing {
        let u = before.get(before_id).ok_or_else(|| Error::UnknownId {
            id: before_id.clone(),
            context: "before-embedding".into(),
        })?;
        let v = after.get(after_id).ok_or_else(|| Error::UnknownId {
            id: after_id.clone(),
            context: "after-embedding".into(),
        })?;
        per_prompt.insert(prompt_id.clone(), cosine(u, v)?);
    }
    let values: Vec<f64> = per_prompt.values().copied().collect();
    let (mean, std) = mean_std_sample(&values);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SimilarityReport {
        per_prompt,
        mean,
        std,
        min,
        max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::OverlapScore;

    fn rank_result(query: &str, candidates: &[&str]) -> RankResult {
        RankResult {
            query_id: query.to_string(),
            ranking: candidates
                .iter()
                .enumerate()
                .map(|(idx, id)| OverlapScore {
                    query_id: query.to_string(),
                    candidate_id: id.to_string(),
                    shared: candidates.len() - idx,
                    shared_nodes: Default::default(),
                })
                .collect(),
        }
    }

    #[test]
    fn disjoint_rankings_union_is_sum() {
        let results: Vec<RankResult> = (0..15)
            .map(|p| {
                let ids: Vec<String> =
                    (0..40).map(|i| format!("p{p:02}_img{i:02}")).collect();
                let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
                rank_result(&format!("prompt{p:02}"), &refs)
            })
            .collect();
        let plan = select_removals(&results, 40, "e1").unwrap();
        assert_eq!(plan.total_removed, 600);
        assert_eq!(plan.per_prompt.len(), 15);
    }

    #[test]
    fn fully_overlapping_rankings_union_is_k() {
        let results = vec![
            rank_result("p1", &["a", "b", "c"]),
            rank_result("p2", &["a", "b", "c"]),
        ];
        let plan = select_removals(&results, 3, "e1").unwrap();
        assert_eq!(plan.total_removed, 3);
    }

    #[test]
    fn short_ranking_taken_whole() {
        let plan = select_removals(&[rank_result("p1", &["a", "b"])], 40, "e1").unwrap();
        assert_eq!(plan.per_prompt["p1"], vec!["a", "b"]);
        assert_eq!(plan.total_removed, 2);
    }

    #[test]
    fn selection_invariant_to_input_order() {
        let a = rank_result("p1", &["a", "b"]);
        let b = rank_result("p2", &["c"]);
        let plan1 = select_removals(&[a.clone(), b.clone()], 2, "e").unwrap();
        let plan2 = select_removals(&[b, a], 2, "e").unwrap();
        assert_eq!(plan1, plan2);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(select_removals(&[], 5, "e").is_err());
        let empty = RankResult {
            query_id: "p".into(),
            ranking: vec![],
        };
        assert!(select_removals(&[empty], 5, "e").is_err());
    }

    #[test]
    fn cosine_identity_orthogonal_and_diagonal() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4, "{c}");
    }

    #[test]
    fn cosine_error_cases() {
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
        assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    fn embedding_set(entries: &[(&str, &[f64])]) -> EmbeddingSet {
        EmbeddingSet::new(
            entries
                .iter()
                .map(|(id, v)| (id.to_string(), v.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn compare_runs_hand_computed() {
        // cosines 0.5 and 0.6 by construction
        let before = embedding_set(&[("b1", &[1.0, 0.0]), ("b2", &[1.0, 0.0])]);
        let s1 = (1.0f64 - 0.25).sqrt();
        let s2 = (1.0f64 - 0.36).sqrt();
        let after = embedding_set(&[("a1", &[0.5, s1]), ("a2", &[0.6, s2])]);
        let mut pairing = Pairing::new();
        pairing.insert("p1".into(), ("b1".into(), "a1".into()));
        pairing.insert("p2".into(), ("b2".into(), "a2".into()));
        let report = compare_runs(&before, &after, &pairing).unwrap();
        assert_eq!(report.summary_row(), "0.550 0.071 0.500\u{2013}0.600");
    }

    #[test]
    fn identical_embeddings_give_unit_cosines() {
        let before = embedding_set(&[("x", &[0.3, 0.4])]);
        let after = embedding_set(&[("x", &[0.3, 0.4])]);
        let mut pairing = Pairing::new();
        pairing.insert("p1".into(), ("x".into(), "x".into()));
        let report = compare_runs(&before, &after, &pairing).unwrap();
        assert_eq!(report.mean, 1.0);
        assert_eq!(report.std, 0.0);
    }

    #[test]
    fn missing_id_is_named() {
        let before = embedding_set(&[("b1", &[1.0])]);
        let after = embedding_set(&[("a1", &[1.0])]);
        let mut pairing = Pairing::new();
        pairing.insert("p1".into(), ("b1".into(), "ghost".into()));
        let err = compare_runs(&before, &after, &pairing).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn embedding_set_validation() {
        let mut map = BTreeMap::new();
        map.insert("a".to_string(), vec![1.0, 2.0]);
        map.insert("b".to_string(), vec![1.0]);
        assert!(EmbeddingSet::new(map).is_err());
        let mut map = BTreeMap::new();
        map.insert("a".to_string(), vec![f64::NAN]);
        assert!(EmbeddingSet::new(map).is_err());
    }

    #[test]
    fn plan_tsv_has_summary_line() {
        let plan = select_removals(&[rank_result("p1", &["a", "b"])], 2, "e").unwrap();
        let tsv = plan_to_tsv(&plan);
        assert!(tsv.contains("p1\ta\n"));
        assert!(tsv.ends_with("# total_removed\t2\n"));
    }
}
