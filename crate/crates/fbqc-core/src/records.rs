//! Line-delimited structured result records.
//!
//! Every persisted result is a single line: `schema=fbqc.v1 kind=<kind>`
//! followed by `key=value` fields in a fixed order. Floats print with six
//! decimals so identical runs produce byte-identical output; values
//! containing spaces are double-quoted. Result logs are append-only.

use std::fmt::Display;
use std::fmt::Write as _;

use crate::threshold::ThresholdEstimate;

pub const SCHEMA: &str = "fbqc.v1";

/// Builder for one record line. Field order is the call order, so every
/// emitter fixes its own layout.
#[derive(Debug, Clone)]
pub struct Record {
    line: String,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Record {
            line: format!("schema={SCHEMA} kind={kind}"),
        }
    }

    pub fn field(mut self, key: &str, value: impl Display) -> Self {
        let v = value.to_string();
        if v.contains(' ') || v.is_empty() {
            write!(self.line, " {key}=\"{v}\"").unwrap();
        } else {
            write!(self.line, " {key}={v}").unwrap();
        }
        self
    }

    pub fn float(self, key: &str, value: f64) -> Self {
        let v = format!("{value:.6}");
        self.field(key, v)
    }

    pub fn finish(self) -> String {
        self.line
    }
}

/// Raw (eta, L, failures, trials) rows of a threshold estimate for the
/// append-only results log.
pub fn curve_rows(estimate: &ThresholdEstimate) -> Vec<String> {
    estimate
        .curves
        .iter()
        .map(|c| {
            Record::new("threshold-curve")
                .float("eta", c.eta)
                .field("l", c.l)
                .field("failures", c.failures)
                .field("trials", c.trials)
                .finish()
        })
        .collect()
}
