//! Serve canned model responses from a fixture JSON file, for offline runs:
//!
//! ```text
//! cargo run -p kgtrace-core --example mock_server -- demo/mock_fixture.json
//! ```

use std::fs;

use kgtrace_core::mockserver::{MockFixture, MockServer};

fn main() {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: mock_server <fixture.json>");
        std::process::exit(1);
    };
    let content = fs::read_to_string(&path).unwrap_or_else(|e| {
        eprintln!("cannot read {path}: {e}");
        std::process::exit(1);
    });
    let fixture: MockFixture = serde_json::from_str(&content).unwrap_or_else(|e| {
        eprintln!("bad fixture {path}: {e}");
        std::process::exit(1);
    });
    let server = MockServer::start(fixture).unwrap_or_else(|e| {
        eprintln!("cannot bind: {e}");
        std::process::exit(1);
    });
    println!("serving {path} at {}", server.url());
    println!("export KGTRACE_ENDPOINT={}", server.url());
    loop {
        std::thread::park();
    }
}
