use serde::Serialize;
use serde_json::{Map, Value};

/// One verification outcome, serialized as a single JSON line.
///
/// `gap` is check-specific but always oriented so that small is good:
/// distance to the closed form for sharpness checks, absolute error for
/// agreement checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: Map<String, Value>,
    pub closed_form: Option<f64>,
    pub oracle_value: Option<f64>,
    pub gap: Option<f64>,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(check: impl Into<String>, params: Value) -> Self {
        let params = match params {
            Value::Object(map) => map,
            Value::Null => Map::new(),
            other => {
                let mut map = Map::new();
                map.insert("value".into(), other);
                map
            }
        };
        CheckRecord {
            check: check.into(),
            params,
            closed_form: None,
            oracle_value: None,
            gap: None,
            pass: false,
        }
    }

    pub fn values(mut self, closed_form: Option<f64>, oracle_value: Option<f64>) -> Self {
        self.closed_form = closed_form;
        self.oracle_value = oracle_value;
        self
    }

    pub fn gap(mut self, gap: f64) -> Self {
        self.gap = Some(gap);
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records contain only finite numbers or null")
    }
}
