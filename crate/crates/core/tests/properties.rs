//! Quick property checks for the parsing and normalization layer. The full
//! 1000-case suites over the comparison operators live in the CLI crate's
//! acceptance target.

use std::collections::BTreeSet;
use std::path::Path;

use proptest::prelude::*;

use kgtrace_core::extraction::{filter_nulls, parse_response, Triple};
use kgtrace_core::graphstore::{
    load_triples_str, merge_global, triples_to_tsv, AttrNode, ImageGraph, LoadOptions,
};
use kgtrace_core::normalize::normalize_value;
use kgtrace_core::ontology::{
    load_ontology, ontology_to_tsv, render_prompt, save_ontology, Ontology, PromptTemplate,
    RelationshipSpec,
};
use kgtrace_core::similarity::{group_stats, overlap, rank};
use kgtrace_core::unlearn::cosine;

fn arb_rel_name() -> impl Strategy<Value = String> {
    "rel_[a-z][a-z0-9]{2,6}"
}

fn arb_ontology() -> impl Strategy<Value = Ontology> {
    proptest::collection::btree_set(arb_rel_name(), 1..8).prop_flat_map(|names| {
        let names: Vec<String> = names.into_iter().collect();
        let specs = names
            .iter()
            .map(|name| {
                ("[A-Z][a-z]{2,8}", proptest::collection::vec("[a-z]{1,6}", 0..4)).prop_map({
                    let name = name.clone();
                    move |(category, vocab)| {
                        RelationshipSpec::new(&name, category).with_vocabulary(vocab)
                    }
                })
            })
            .collect::<Vec<_>>();
        specs.prop_map(|specs| Ontology::new("prop", specs).expect("distinct generated names"))
    })
}

fn arb_graph(id: &'static str) -> impl Strategy<Value = ImageGraph> {
    proptest::collection::btree_set(("p[0-5]", "v[0-9]"), 0..12).prop_map(move |nodes| {
        let mut graph = ImageGraph::new(id);
        for (p, v) in nodes {
            graph.insert(AttrNode::new(p, v));
        }
        graph
    })
}

proptest! {
    #[test]
    fn normalization_idempotent_and_case_insensitive(raw in "\\PC{0,30}") {
        let once = normalize_value(&raw);
        prop_assert_eq!(normalize_value(&once), once.clone());
        // ASCII casing is the unstable part of model output
        prop_assert_eq!(
            normalize_value(&raw.to_ascii_uppercase()),
            normalize_value(&raw.to_ascii_lowercase())
        );
    }

    #[test]
    fn ontology_file_round_trip(ontology in arb_ontology()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(format!("{}.tsv", ontology.id()));
        save_ontology(&ontology, &path).unwrap();
        let reloaded = load_ontology(&path).unwrap();
        prop_assert_eq!(&reloaded, &ontology);
        prop_assert_eq!(ontology_to_tsv(&reloaded), ontology_to_tsv(&ontology));
    }

    #[test]
    fn rendered_prompt_mentions_each_name_once(ontology in arb_ontology()) {
        let prompt = render_prompt(&ontology, &PromptTemplate::default()).unwrap();
        for rel in ontology.relationships() {
            let hits = prompt.matches(&format!("- {} (", rel.name)).count();
            prop_assert_eq!(hits, 1, "name {}", &rel.name);
        }
    }

    #[test]
    fn parser_never_emits_foreign_predicates(
        ontology in arb_ontology(),
        lines in proptest::collection::vec("[a-z_ |\\t]{0,24}", 0..10),
    ) {
        let text = lines.join("\n");
        let parsed = parse_response(&text, "img", &ontology);
        for triple in &parsed.triples {
            prop_assert!(ontology.resolve(&triple.predicate).is_some());
            prop_assert_eq!(&triple.subject, "img");
            prop_assert_eq!(normalize_value(&triple.object), triple.object.clone());
        }
    }

    #[test]
    fn filter_nulls_idempotent_on_arbitrary_objects(
        objects in proptest::collection::vec("(none|n/a|dress|NULL| x | )", 0..12),
    ) {
        let triples: Vec<Triple> = objects
            .iter()
            .map(|o| Triple::new("i", "depicts", o.as_str()))
            .collect();
        let once = filter_nulls(triples);
        prop_assert_eq!(filter_nulls(once.clone()), once);
    }

    #[test]
    fn overlap_is_symmetric_and_bounded(a in arb_graph("a"), b in arb_graph("b")) {
        let ab = overlap(&a, &b);
        let ba = overlap(&b, &a);
        prop_assert_eq!(ab.shared, ba.shared);
        prop_assert_eq!(&ab.shared_nodes, &ba.shared_nodes);
        prop_assert!(ab.shared <= a.nodes.len().min(b.nodes.len()));
    }

    #[test]
    fn largest_cluster_non_increasing_in_threshold(
        sets in proptest::collection::vec(
            proptest::collection::btree_set(("p[0-5]", "v[0-9]"), 0..12),
            1..8,
        ),
    ) {
        let group: Vec<ImageGraph> = sets
            .into_iter()
            .enumerate()
            .map(|(i, nodes)| {
                let mut graph = ImageGraph::new(format!("g{i}"));
                for (p, v) in nodes {
                    graph.insert(AttrNode::new(p, v));
                }
                graph
            })
            .collect();
        let thresholds: Vec<u32> = (0..6).collect();
        let stats = group_stats(&group, &thresholds).unwrap();
        let sizes: Vec<usize> = thresholds
            .iter()
            .map(|t| stats.largest_cluster_at[t])
            .collect();
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "{sizes:?}");
    }

    #[test]
    fn rank_invariant_under_corpus_insertion_order(
        query in arb_graph("query"),
        sets in proptest::collection::vec(
            proptest::collection::btree_set(("p[0-5]", "v[0-9]"), 0..10),
            1..7,
        ),
        k in 1usize..8,
    ) {
        let graphs: Vec<ImageGraph> = sets
            .into_iter()
            .enumerate()
            .map(|(i, nodes)| {
                let mut graph = ImageGraph::new(format!("c{i}"));
                for (p, v) in nodes {
                    graph.insert(AttrNode::new(p, v));
                }
                graph
            })
            .collect();
        let forward = merge_global(graphs.clone()).unwrap();
        let reversed = merge_global(graphs.into_iter().rev().collect()).unwrap();
        prop_assert_eq!(
            rank(&query, &forward, k).unwrap(),
            rank(&query, &reversed, k).unwrap()
        );
    }

    #[test]
    fn cosine_algebra(
        u in proptest::collection::vec(-1.0f64..1.0, 2..6),
        scale in 0.1f64..10.0,
    ) {
        let mut u = u;
        u[0] = u[0].abs().max(0.25); // keep the norm away from zero
        let mut v = u.clone();
        v.reverse();
        v[0] = v[0].abs().max(0.25);

        let self_sim = cosine(&u, &u).unwrap();
        prop_assert!((self_sim - 1.0).abs() < 1e-12, "{self_sim}");
        prop_assert_eq!(cosine(&u, &v).unwrap(), cosine(&v, &u).unwrap());

        let scaled: Vec<f64> = u.iter().map(|x| x * scale).collect();
        let direct = cosine(&u, &v).unwrap();
        let rescaled = cosine(&scaled, &v).unwrap();
        prop_assert!((direct - rescaled).abs() < 1e-12, "{direct} vs {rescaled}");
    }

    #[test]
    fn triple_tsv_round_trip(a in arb_graph("a"), b in arb_graph("b")) {
        let ontology = Ontology::new(
            "p",
            (0..6).map(|i| RelationshipSpec::new(format!("p{i}"), "C")).collect(),
        ).unwrap();
        let global = merge_global(vec![a, b]).unwrap();
        let tsv = triples_to_tsv(&global);
        let reloaded = load_triples_str(&tsv, &ontology, &LoadOptions::default(), Path::new("mem")).unwrap();
        // images with empty graphs have no rows, so they do not round-trip
        let nonempty: BTreeSet<&str> = global
            .images()
            .filter(|g| !g.is_empty())
            .map(|g| g.image_id.as_str())
            .collect();
        prop_assert_eq!(reloaded.len(), nonempty.len());
        for graph in reloaded.images() {
            prop_assert_eq!(&graph.nodes, &global.get(&graph.image_id).unwrap().nodes);
        }
        prop_assert_eq!(triples_to_tsv(&reloaded), tsv);
    }
}
