use crate::error::{Error, Result};
use std::io::BufRead;

/// Data (x_j, y_j) with strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidSamples(format!("{} nodes but {} values", nodes.len(), values.len())));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidSamples("no samples".into()));
        }
        if let Some(i) = nodes.iter().chain(&values).position(|v| !v.is_finite()) {
            return Err(Error::InvalidSamples(format!("non-finite entry at position {i}")));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSamples(format!(
                "nodes must be strictly increasing ({} then {})",
                nodes[i],
                nodes[i + 1]
            )));
        }
        Ok(SampleSet { nodes, values })
    }

    /// Samples f(j/N), j = −N..N.
    pub fn uniform(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let nodes: Vec<f64> = (-(n as i64)..=n as i64).map(|j| j as f64 / n as f64).collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        SampleSet { nodes, values }
    }

    /// Samples f at the given nodes.
    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// N if the nodes are {j/N : |j| ≤ N} up to rounding.
    pub fn uniform_level(&self) -> Option<usize> {
        let len = self.nodes.len();
        if len < 3 || len.is_multiple_of(2) {
            return None;
        }
        let n = (len - 1) / 2;
        let ok = self.nodes.iter().enumerate().all(|(i, &x)| {
            let want = (i as f64 - n as f64) / n as f64;
            (x - want).abs() <= 1e-12
        });
        ok.then_some(n)
    }

    /// Two whitespace- or comma-separated columns per line; `#` starts a comment.
    pub fn parse<R: BufRead>(r: R) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> =
                content.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 2 columns, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, message: format!("bad number '{s}': {e}") })
            };
            nodes.push(parse(fields[0])?);
            values.push(parse(fields[1])?);
        }
        Self::new(nodes, values)
    }

    pub fn parse_str(s: &str) -> Result<Self> {
        Self::parse(s.as_bytes())
    }
}
