//! Extraction client against the in-repo mock model server.

use kgtrace_core::extraction::{extract_batch, triple_stats, ClientConfig, ModelClient, Triple};
use kgtrace_core::mockserver::{MockFixture, MockResponse, MockServer};
use kgtrace_core::normalize::PlaceholderSet;
use kgtrace_core::ontology::{Ontology, RelationshipSpec};

fn fashion_ontology() -> Ontology {
    Ontology::new(
        "fashion",
        vec![
            RelationshipSpec::new("depicts", "General Semantics"),
            RelationshipSpec::new("has_pattern", "Visual Qualities"),
            RelationshipSpec::new("has_color", "Visual Qualities"),
        ],
    )
    .unwrap()
}

fn response(rich: &str, plain: &str) -> MockResponse {
    MockResponse {
        rich: rich.to_string(),
        plain: plain.to_string(),
    }
}

fn fixture() -> MockFixture {
    let mut fixture = MockFixture {
        ontology_markers: vec![
            "depicts".into(),
            "has_pattern".into(),
            "has_color".into(),
        ],
        ..MockFixture::default()
    };
    fixture.responses.insert(
        "img1".into(),
        response("depicts | dress\nhas_pattern | floral", "depicts | dress"),
    );
    fixture.responses.insert(
        "img2".into(),
        response("has_pattern | None", "has_pattern | None"),
    );
    fixture
}

fn config_for(server: &MockServer) -> ClientConfig {
    ClientConfig {
        endpoint: server.url(),
        max_retries: 0,
        max_concurrent: 4,
        timeout_secs: 10,
        ..ClientConfig::default()
    }
}

/// Prompt containing all three marker tokens, selecting the rich variant.
const GUIDED_PROMPT: &str = "Use depicts, has_pattern and has_color. One per line.";

#[test]
fn replayed_response_yields_two_triples() {
    let server = MockServer::start(fixture()).unwrap();
    let client = ModelClient::new(config_for(&server)).unwrap();
    let record = client
        .extract_image(
            "img1",
            b"img1",
            &fashion_ontology(),
            GUIDED_PROMPT,
            &PlaceholderSet::default(),
        )
        .unwrap();
    assert_eq!(
        record.triples,
        vec![
            Triple::new("img1", "depicts", "dress"),
            Triple::new("img1", "has_pattern", "floral"),
        ]
    );
    assert!(record.rejected.is_empty());
    assert!(record.raw_response.contains("depicts | dress"));
}

#[test]
fn placeholder_response_is_rejected_not_fatal() {
    let server = MockServer::start(fixture()).unwrap();
    let client = ModelClient::new(config_for(&server)).unwrap();
    let record = client
        .extract_image(
            "img2",
            b"img2",
            &fashion_ontology(),
            GUIDED_PROMPT,
            &PlaceholderSet::default(),
        )
        .unwrap();
    assert!(record.triples.is_empty());
    assert_eq!(record.rejected.len(), 1);
    assert!(record.rejected[0].reason.contains("placeholder"));
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    // Bind then drop to get a port that refuses connections.
    let port = {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let config = ClientConfig {
        endpoint: format!("http://127.0.0.1:{port}/api/generate"),
        max_retries: 0,
        timeout_secs: 2,
        ..ClientConfig::default()
    };
    let client = ModelClient::new(config).unwrap();
    let err = client
        .extract_image(
            "img1",
            b"img1",
            &fashion_ontology(),
            GUIDED_PROMPT,
            &PlaceholderSet::default(),
        )
        .unwrap_err();
    assert_eq!(err.class(), kgtrace_core::ErrorClass::Transport);
    assert!(matches!(err, kgtrace_core::Error::Transport { .. }), "{err}");
}

#[test]
fn injected_500_is_an_endpoint_error() {
    let server = MockServer::start(fixture()).unwrap();
    let client = ModelClient::new(config_for(&server)).unwrap();
    let err = client
        .extract_image(
            "fail:img1",
            b"fail:img1",
            &fashion_ontology(),
            GUIDED_PROMPT,
            &PlaceholderSet::default(),
        )
        .unwrap_err();
    match err {
        kgtrace_core::Error::Endpoint { status, .. } => assert_eq!(status, 500),
        other => panic!("expected endpoint error, got {other}"),
    }
}

#[test]
fn empty_image_fails_before_any_request() {
    let server = MockServer::start(fixture()).unwrap();
    let client = ModelClient::new(config_for(&server)).unwrap();
    assert!(client
        .extract_image(
            "img1",
            b"",
            &fashion_ontology(),
            GUIDED_PROMPT,
            &PlaceholderSet::default(),
        )
        .is_err());
    assert_eq!(server.request_count(), 0);
}

#[test]
fn batch_preserves_input_order_and_isolates_failures() {
    let mut fixture = fixture();
    for i in 3..=8 {
        fixture.responses.insert(
            format!("img{i}"),
            response(
                &format!("depicts | item{i}\nhas_color | blue"),
                &format!("depicts | item{i}"),
            ),
        );
    }
    let server = MockServer::start(fixture).unwrap();
    let client = ModelClient::new(config_for(&server)).unwrap();

    let mut images: Vec<(String, Vec<u8>)> = (3..=8)
        .map(|i| (format!("img{i}"), format!("img{i}").into_bytes()))
        .collect();
    images.insert(2, ("bad".into(), b"fail:bad".to_vec()));

    let items = extract_batch(
        &client,
        &images,
        &fashion_ontology(),
        GUIDED_PROMPT,
        &PlaceholderSet::default(),
    );
    let ids: Vec<&str> = items.iter().map(|i| i.image_id.as_str()).collect();
    let expected: Vec<&str> = images.iter().map(|(id, _)| id.as_str()).collect();
    assert_eq!(ids, expected);
    assert!(items[2].outcome.is_err());
    assert_eq!(items.iter().filter(|i| i.outcome.is_ok()).count(), 6);

    let records: Vec<_> = items
        .into_iter()
        .filter_map(|i| i.outcome.ok())
        .collect();
    let stats = triple_stats(&records).unwrap();
    assert_eq!(stats.min, 2);
    assert_eq!(stats.max, 2);
}

#[test]
fn marker_poor_prompt_gets_the_plain_variant() {
    let server = MockServer::start(fixture()).unwrap();
    let client = ModelClient::new(config_for(&server)).unwrap();
    let record = client
        .extract_image(
            "img1",
            b"img1",
            &fashion_ontology(),
            "Describe the image as relationship | value lines.",
            &PlaceholderSet::default(),
        )
        .unwrap();
    assert_eq!(record.triples.len(), 1, "plain variant has one line");
}
