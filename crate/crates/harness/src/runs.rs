//! Simulation-run accounting for hypothetical parallel machines.
//!
//! One run evaluates up to `P` points of the same batch at once, so a batch
//! of `b` points costs `ceil(b / P)` runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wellopt_core::EvaluationLog;

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "ProcessorsRepr", into = "ProcessorsRepr")]
pub enum Processors {
    Finite(usize),
    Unlimited,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProcessorsRepr {
    Count(usize),
    Label(String),
}

impl TryFrom<ProcessorsRepr> for Processors {
    type Error = HarnessError;

    fn try_from(r: ProcessorsRepr) -> Result<Self, HarnessError> {
        match r {
            ProcessorsRepr::Count(n) => Processors::finite(n),
            ProcessorsRepr::Label(s) => s.parse(),
        }
    }
}

impl From<Processors> for ProcessorsRepr {
    fn from(p: Processors) -> Self {
        match p {
            Processors::Finite(n) => ProcessorsRepr::Count(n),
            Processors::Unlimited => ProcessorsRepr::Label("inf".into()),
        }
    }
}

impl Processors {
    pub fn finite(n: usize) -> Result<Self, HarnessError> {
        if n == 0 {
            Err(HarnessError::Config("processor count must be at least 1".into()))
        } else {
            Ok(Self::Finite(n))
        }
    }

    /// Runs needed for one batch of `size` points.
    pub fn runs_for(&self, size: usize) -> usize {
        match *self {
            Self::Finite(p) => size.div_ceil(p),
            Self::Unlimited => usize::from(size > 0),
        }
    }
}

impl FromStr for Processors {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Self::Unlimited);
        }
        let n = s
            .parse::<usize>()
            .map_err(|_| HarnessError::Config(format!("processor count '{s}' is neither a number nor 'inf'")))?;
        Self::finite(n)
    }
}

impl fmt::Display for Processors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(n) => write!(f, "{n}"),
            Self::Unlimited => f.write_str("inf"),
        }
    }
}

pub fn parse_processor_list(s: &str) -> Result<Vec<Processors>, HarnessError> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

/// Total runs for the whole log.
pub fn parallel_runs(log: &EvaluationLog, processors: Processors) -> usize {
    log.batch_sizes().iter().map(|b| processors.runs_for(*b)).sum()
}

/// Best value after each batch against cumulative runs: `(runs, best)`.
pub fn runs_curve(log: &EvaluationLog, processors: Processors) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    let mut runs = 0;
    let mut best = f64::NEG_INFINITY;
    let mut current: Option<usize> = None;
    let mut size = 0;
    let flush = |size: usize, best: f64, runs: &mut usize, out: &mut Vec<(usize, f64)>| {
        *runs += processors.runs_for(size);
        out.push((*runs, best));
    };
    for e in log.entries() {
        if current.is_some_and(|b| b != e.batch) {
            flush(size, best, &mut runs, &mut out);
            size = 0;
        }
        current = Some(e.batch);
        size += 1;
        if e.value > best {
            best = e.value;
        }
    }
    if size > 0 {
        flush(size, best, &mut runs, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_list() {
        let got = parse_processor_list("8, 32,inf").unwrap();
        assert_eq!(got, vec![Processors::Finite(8), Processors::Finite(32), Processors::Unlimited]);
        assert!(parse_processor_list("0").is_err());
        assert!(parse_processor_list("eight").is_err());
    }

    #[test]
    fn batch_ceiling() {
        assert_eq!(Processors::Finite(32).runs_for(100), 4);
        assert_eq!(Processors::Finite(1).runs_for(100), 100);
        assert_eq!(Processors::Unlimited.runs_for(100), 1);
        assert_eq!(Processors::Finite(8).runs_for(8), 1);
    }

    #[test]
    fn serde_forms() {
        let v: Vec<Processors> = serde_json::from_str(r#"[8, "inf", "32"]"#).unwrap();
        assert_eq!(v, vec![Processors::Finite(8), Processors::Unlimited, Processors::Finite(32)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[8,"inf",32]"#);
    }
}
