//! Minimal CSV writing. Floats print in Rust's shortest round-trip form so
//! that identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::{HarnessError, Result};

#[derive(Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Csv { buf: String::new() };
        csv.buf.push_str(&header.join(","));
        csv.buf.push('\n');
        csv
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
        }
        std::fs::write(path, &self.buf).map_err(|e| HarnessError::io(path, e))
    }
}

pub fn fmt_f64(v: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{v}");
    s
}

/// Render an optional value, `na` when absent.
pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => "na".to_string(),
    }
}
