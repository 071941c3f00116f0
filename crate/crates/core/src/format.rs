//! The on-disk space format and a plain-CSV import path.
//!
//! A space file is a single JSON document carrying the labels, the
//! row-major matrix, optional named subsets, and an optional scale set.
//! Numbers are written in shortest round-trip form, so saving and loading
//! is the identity on every produced artifact. A bare numeric CSV can be
//! imported with automatically assigned labels.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scale::ScaleSet;
use crate::space::FinMetricSpace;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub format_version: u32,
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subsets: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_set: Option<ScaleSet>,
}

impl SpaceFile {
    pub fn from_space(m: &FinMetricSpace) -> Self {
        SpaceFile {
            format_version: FORMAT_VERSION,
            labels: m.labels().to_vec(),
            matrix: m.to_rows(),
            subsets: BTreeMap::new(),
            scale_set: None,
        }
    }

    pub fn with_subset(mut self, name: &str, labels: Vec<String>) -> Self {
        self.subsets.insert(name.to_string(), labels);
        self
    }

    pub fn to_space(&self) -> Result<FinMetricSpace> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::structural(format!(
                "unsupported format version {}, expected {FORMAT_VERSION}",
                self.format_version
            )));
        }
        if let Some(s) = &self.scale_set {
            s.validate()?;
        }
        let space = FinMetricSpace::new(self.labels.clone(), self.matrix.clone())?;
        for (name, members) in &self.subsets {
            space.subset_from_labels(members).map_err(|e| {
                Error::structural(format!("subset {name:?}: {e}"))
            })?;
        }
        Ok(space)
    }

    /// Resolve a subset reference: first a named block from the file, then
    /// a comma-separated list of labels.
    pub fn resolve_subset(&self, space: &FinMetricSpace, reference: &str) -> Result<Vec<usize>> {
        if let Some(members) = self.subsets.get(reference) {
            return space.subset_from_labels(members);
        }
        let labels: Vec<&str> = reference.split(',').map(str::trim).collect();
        space.subset_from_labels(&labels)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("space files always serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(text)?;
        Ok(file)
    }

    /// Numeric CSV import: one row per line, labels assigned as p0, p1, ...
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut matrix: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .enumerate()
                .map(|(col, cell)| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        Error::structural(format!(
                            "row {lineno} column {col}: {:?} is not a number",
                            cell.trim()
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            matrix.push(row);
        }
        let labels = (0..matrix.len()).map(|i| format!("p{i}")).collect();
        Ok(SpaceFile {
            format_version: FORMAT_VERSION,
            labels,
            matrix,
            subsets: BTreeMap::new(),
            scale_set: None,
        })
    }

    /// Load from a path; `-` reads standard input, a `.csv` suffix takes
    /// the CSV route.
    pub fn load(path: &str) -> Result<Self> {
        let text = if path == "-" {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        } else {
            std::fs::read_to_string(path)?
        };
        if path != "-" && Path::new(path).extension().is_some_and(|e| e == "csv") {
            Self::parse_csv(&text)
        } else {
            Self::parse(&text)
        }
    }

    pub fn save(&self, path: &str) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Command-line shorthand for scale sets: `all`, `geometric:RATIO`, or
/// `explicit:V1,V2,...`.
pub fn parse_scale_set(spec: &str) -> Result<ScaleSet> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok(ScaleSet::all_reals());
    }
    if let Some(ratio) = spec.strip_prefix("geometric:") {
        let ratio: f64 = ratio
            .parse()
            .map_err(|_| Error::structural(format!("bad geometric ratio {ratio:?}")))?;
        return ScaleSet::geometric(ratio);
    }
    if let Some(values) = spec.strip_prefix("explicit:") {
        let values: Vec<f64> = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::structural(format!("bad scale value {v:?}")))
            })
            .collect::<Result<_>>()?;
        return ScaleSet::explicit(values);
    }
    Err(Error::structural(format!(
        "unrecognized scale set {spec:?}; use all, geometric:RATIO, or explicit:V1,V2,..."
    )))
}
