//! Shared fixtures: a deterministic 20-image mock fashion corpus.
//!
//! Each fixture image is a small file whose bytes are its id; the mock
//! server keys its canned responses on those bytes. Rich responses (served
//! for ontology-guided prompts) cover 4-9 attributes, plain ones 1-2, so
//! guided extraction yields strictly more triples per image.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use kgtrace_core::mockserver::{MockFixture, MockResponse};

pub const GARMENTS: [&str; 5] = ["dress", "shirt", "skirt", "jacket", "trousers"];
pub const COLORS: [&str; 7] = ["red", "blue", "green", "black", "white", "yellow", "navy"];
pub const PATTERNS: [&str; 4] = ["floral", "striped", "plain", "checked"];
pub const MATERIALS: [&str; 5] = ["cotton", "silk", "denim", "wool", "linen"];
pub const SILHOUETTES: [&str; 4] = ["a-line", "fitted", "relaxed", "straight"];

pub fn image_id(i: usize) -> String {
    format!("img{i:02}")
}

pub fn rich_response(i: usize) -> String {
    let mut lines = vec![
        format!("depicts | {}", GARMENTS[i % 5]),
        format!("has_color | {}", COLORS[i % 7]),
        format!(
            "has_pattern | {}",
            if i.is_multiple_of(5) { "None" } else { PATTERNS[i % 4] }
        ),
        format!("has_material_type | {}", MATERIALS[i % 5]),
        format!("has_silhouette | {}", SILHOUETTES[i % 4]),
    ];
    if i.is_multiple_of(3) {
        lines.push("has_sleeve_type | long".into());
    }
    if i.is_multiple_of(2) {
        lines.push("has_length | knee-length".into());
    }
    if i > 10 {
        lines.push("has_occasion | casual".into());
    }
    if i > 15 {
        lines.push("has_fit | fitted".into());
    }
    if i == 7 {
        lines.push("flies | spaceship".into());
    }
    lines.join("\n")
}

pub fn plain_response(i: usize) -> String {
    let mut lines = vec![format!("depicts | {}", GARMENTS[i % 5])];
    if i % 2 == 1 {
        lines.push(format!("has_color | {}", COLORS[i % 7]));
    }
    lines.join("\n")
}

pub fn fashion20_fixture() -> MockFixture {
    let mut fixture = MockFixture {
        ontology_markers: vec![
            "depicts".into(),
            "has_pattern".into(),
            "has_color".into(),
            "has_material_type".into(),
            "has_silhouette".into(),
        ],
        min_markers: 3,
        ..MockFixture::default()
    };
    for i in 1..=20 {
        fixture.responses.insert(
            image_id(i),
            MockResponse {
                rich: rich_response(i),
                plain: plain_response(i),
            },
        );
    }
    fixture
}

/// Write the 20 fixture images into `dir` and return it.
pub fn write_images(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for i in 1..=20 {
        let id = image_id(i);
        fs::write(dir.join(format!("{id}.png")), id.as_bytes())?;
    }
    Ok(())
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fashion_ontology_path() -> PathBuf {
    workspace_root().join("ontologies/fashion.tsv")
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn kgtrace_bin() -> &'static str {
    env!("CARGO_BIN_EXE_kgtrace")
}
