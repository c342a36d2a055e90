//! Reports, assertions, output files and exit codes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Resource(m) => write!(f, "resource error: {m}"),
        }
    }
}

impl From<vicsek::Error> for CliError {
    fn from(e: vicsek::Error) -> Self {
        match e {
            vicsek::Error::Resource(_) | vicsek::Error::Io(_) => CliError::Resource(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

/// One checked statement. Only hard assertions decide the exit code; soft
/// ones record trend expectations.
#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub hard: bool,
    pub pass: bool,
    pub observed: f64,
    pub bound: f64,
}

impl Assertion {
    /// `observed ≤ bound`.
    pub fn at_most(name: &str, observed: f64, bound: f64, hard: bool) -> Self {
        Self { name: name.into(), hard, pass: observed <= bound, observed, bound }
    }

    pub fn holds(name: &str, ok: bool, hard: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), hard, pass: ok, observed: v, bound: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub values: Value,
    pub bounds: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn new(name: &str, values: impl Serialize) -> Result<Self, CliError> {
        Ok(Self {
            name: name.into(),
            parameters: BTreeMap::new(),
            values: serde_json::to_value(values)?,
            bounds: BTreeMap::new(),
            assertions: Vec::new(),
        })
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Result<Self, CliError> {
        self.parameters.insert(key.into(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn bound(mut self, key: &str, value: impl Serialize) -> Result<Self, CliError> {
        self.bounds.insert(key.into(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn assert(mut self, a: Assertion) -> Self {
        self.assertions.push(a);
        self
    }

    pub fn hard_failures(&self) -> usize {
        self.assertions.iter().filter(|a| a.hard && !a.pass).count()
    }
}

/// Everything a command produces.
#[derive(Debug)]
pub struct Outcome {
    pub reports: Vec<Report>,
    /// Printed instead of the JSON report when set.
    pub text: Option<String>,
    pub csv: Option<Vec<u8>>,
}

impl Outcome {
    pub fn json(report: Report) -> Self {
        Self { reports: vec![report], text: None, csv: None }
    }

    pub fn with_csv(mut self, csv: Vec<u8>) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    pub fn hard_failures(&self) -> usize {
        self.reports.iter().map(Report::hard_failures).sum()
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let s = match self.reports.as_slice() {
            [one] => serde_json::to_string_pretty(one)?,
            many => serde_json::to_string_pretty(many)?,
        };
        Ok(s + "\n")
    }

    pub fn write(&self, json: Option<&Path>, csv: Option<&Path>) -> Result<(), CliError> {
        if let Some(path) = json {
            fs::write(path, self.to_json()?)?;
        }
        if let Some(path) = csv {
            match &self.csv {
                Some(bytes) => fs::write(path, bytes)?,
                None => return Err(CliError::Usage("this command has no CSV output".into())),
            }
        }
        Ok(())
    }
}

/// An RFC-4180 table.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Resource(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Resource(e.to_string()))
}
