//! Shared helpers for the integration test suites.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;
pub mod props;

use scrkit::model::SpecModel;
use scrkit::scenario::Scenario;
use std::path::PathBuf;

pub fn corpus_dir() -> PathBuf {
    scrkit::corpus::corpus_dir()
}

pub fn load_spec(name: &str) -> SpecModel {
    let path = corpus_dir().join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    scrkit::parse_spec(&text).unwrap_or_else(|d| panic!("{name} does not parse: {d:?}"))
}

pub fn load_scenario(spec: &SpecModel, name: &str) -> Scenario {
    let path = corpus_dir().join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    scrkit::scenario::parse_scenario(&text, spec)
        .unwrap_or_else(|d| panic!("{name} does not parse: {d:?}"))
}
