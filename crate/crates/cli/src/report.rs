//! Versioned JSON report assembly. Key order is alphabetical (serde_json's
//! default map), so identical inputs render byte-identically apart from the
//! timing field.

use serde_json::{json, Map, Value};

pub struct Report {
    body: Map<String, Value>,
}

impl Report {
    pub fn new(schema_version: u32, seed: u64) -> Self {
        let mut body = Map::new();
        body.insert("schema_version".into(), json!(schema_version));
        body.insert("seed".into(), json!(seed));
        body.insert("command".into(), json!(""));
        body.insert("results".into(), json!({}));
        body.insert("residuals".into(), json!({}));
        body.insert("timing_ms".into(), json!(0));
        Report { body }
    }

    pub fn set_command(&mut self, echo: &str) {
        self.body.insert("command".into(), json!(echo));
    }

    pub fn results(&mut self, v: Value) {
        self.body.insert("results".into(), v);
    }

    pub fn residuals(&mut self, v: Value) {
        self.body.insert("residuals".into(), v);
    }

    pub fn set_error(&mut self, message: &str) {
        let results = self
            .body
            .entry("results")
            .or_insert_with(|| json!({}));
        if let Value::Object(map) = results {
            map.insert("error".into(), json!(message));
        }
    }

    pub fn has_error(&self) -> bool {
        self.body
            .get("results")
            .and_then(|r| r.get("error"))
            .is_some()
    }

    pub fn set_timing(&mut self, ms: u64) {
        self.body.insert("timing_ms".into(), json!(ms));
    }

    pub fn render(&self, pretty: bool) -> String {
        let v = Value::Object(self.body.clone());
        if pretty {
            serde_json::to_string_pretty(&v).expect("report serializes")
        } else {
            serde_json::to_string(&v).expect("report serializes")
        }
    }
}
