//! The mobile-phone example shipped under `fixtures/mobile-data`.

use crate::catalog::Rule;
use crate::io;
use crate::model::{ContentSpecification, Diagram};

pub const MOBILE_SPEC_JSON: &str = include_str!("../../../fixtures/mobile-data/spec.json");
pub const MOBILE_MODEL_JSON: &str = include_str!("../../../fixtures/mobile-data/model.json");
pub const MOBILE_RULES_JSON: &str = include_str!("../../../fixtures/mobile-data/rules.json");

pub fn mobile_spec() -> ContentSpecification {
    io::parse_spec(MOBILE_SPEC_JSON).expect("bundled spec fixture loads")
}

pub fn mobile_diagram() -> Diagram {
    io::parse_model(MOBILE_MODEL_JSON).expect("bundled model fixture loads")
}

pub fn mobile_rules() -> Vec<Rule> {
    crate::catalog::load_catalog(MOBILE_RULES_JSON).expect("bundled catalog fixture loads")
}
