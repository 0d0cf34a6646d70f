//! JSON problem files, JSON run reports, and the vector syntax used by
//! command-line flags.
//!
//! Problem file:
//!
//! ```json
//! {"m": 3, "n": 2, "entries": [{"idx": [1, 2, 1], "val": 2.0}], "q": [0, -5]}
//! ```
//!
//! Indices are 1-based; unlisted entries are zero and duplicate index tuples
//! are rejected.

use std::collections::HashSet;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TcpError};
use crate::model::TcpProblem;
use crate::tensor::{entry_count, DenseTensor};
use crate::tracer::{StepRecord, TraceResult, TraceStatus, TracerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub idx: Vec<usize>,
    pub val: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<Entry>,
    pub q: Vec<f64>,
}

impl ProblemFile {
    /// Parses and validates a problem file.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| TcpError::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn parse_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| TcpError::Parse(e.to_string()))?;
        Self::parse(text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TcpError::Parse(msg));
        if self.m < 2 {
            return bad(format!("field `m`: order must be >= 2, got {}", self.m));
        }
        if self.n < 1 {
            return bad("field `n`: dimension must be >= 1".into());
        }
        if entry_count(self.m, self.n).is_none() {
            return bad(format!(
                "fields `m`, `n`: {}^{} entries is too large",
                self.n, self.m
            ));
        }
        if self.q.len() != self.n {
            return bad(format!(
                "field `q`: expected {} values, got {}",
                self.n,
                self.q.len()
            ));
        }
        let mut seen = HashSet::new();
        for (k, e) in self.entries.iter().enumerate() {
            if e.idx.len() != self.m {
                return bad(format!(
                    "entries[{k}].idx: expected {} indices, got {}",
                    self.m,
                    e.idx.len()
                ));
            }
            if let Some(i) = e.idx.iter().find(|&&i| i < 1 || i > self.n) {
                return bad(format!(
                    "entries[{k}].idx: index {i} outside [1, {}]",
                    self.n
                ));
            }
            if !seen.insert(&e.idx) {
                return bad(format!("entries[{k}].idx: duplicate index {:?}", e.idx));
            }
        }
        Ok(())
    }

    pub fn to_problem(&self) -> Result<TcpProblem> {
        self.validate()?;
        let zero_based: Vec<Vec<usize>> = self
            .entries
            .iter()
            .map(|e| e.idx.iter().map(|i| i - 1).collect())
            .collect();
        let tensor = DenseTensor::from_entries(
            self.m,
            self.n,
            zero_based
                .iter()
                .zip(&self.entries)
                .map(|(i, e)| (i.as_slice(), e.val)),
        )?;
        TcpProblem::new(tensor, DVector::from_row_slice(&self.q))
    }

    /// Lists the nonzero entries of `p` in lexicographic order.
    pub fn from_problem(p: &TcpProblem) -> Self {
        let (m, n) = (p.order(), p.dim());
        let mut entries = Vec::new();
        let mut idx = vec![1usize; m];
        for &val in p.tensor().values() {
            if val != 0.0 {
                entries.push(Entry {
                    idx: idx.clone(),
                    val,
                });
            }
            for d in idx.iter_mut().rev() {
                *d += 1;
                if *d <= n {
                    break;
                }
                *d = 1;
            }
        }
        Self {
            m,
            n,
            entries,
            q: p.q().iter().copied().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub dt0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_newton_per_step: usize,
    pub max_newton_final: usize,
    pub max_steps: usize,
    pub guard_radius: Option<f64>,
    pub beta_estimate: Option<f64>,
}

impl From<&TracerConfig> for ConfigEcho {
    fn from(c: &TracerConfig) -> Self {
        Self {
            a: c.params.a().iter().copied().collect(),
            b: c.params.b().iter().copied().collect(),
            dt0: c.dt0,
            eps1: c.eps1,
            eps2: c.eps2,
            dt_min: c.dt_min,
            dt_max: c.dt_max,
            max_newton_per_step: c.max_newton_per_step,
            max_newton_final: c.max_newton_final,
            max_steps: c.max_steps,
            guard_radius: c.guard_radius,
            beta_estimate: c.beta_estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub solution: Vec<f64>,
    pub y: Vec<f64>,
    pub residue: f64,
    pub itr: usize,
    pub nwtitr: usize,
    pub status: TraceStatus,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<StepRecord>>,
    #[serde(default)]
    pub wall_time: f64,
}

impl RunReport {
    pub fn new(result: &TraceResult, cfg: &TracerConfig, wall_time: f64, with_trace: bool) -> Self {
        Self {
            solution: result.solution.x.iter().copied().collect(),
            y: result.solution.y.iter().copied().collect(),
            residue: result.residue,
            itr: result.itr,
            nwtitr: result.nwtitr,
            status: result.status,
            config: cfg.into(),
            trace: with_trace.then(|| result.steps.clone()),
            wall_time,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| TcpError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Recomputes the residue of the stored `(solution, y)` against `p`.
    pub fn recompute_residue(&self, p: &TcpProblem) -> Result<f64> {
        let pair = crate::model::CandidatePair::new(
            DVector::from_row_slice(&self.solution),
            DVector::from_row_slice(&self.y),
        )?;
        crate::model::reformulation_residual(p, &pair)
    }
}

/// Parses `"1.5"` (broadcast to length `n`) or `"1,2,3"` / `"[1, 2, 3]"`.
pub fn parse_vector_arg(text: &str, n: usize) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(trimmed);
    let values = inner
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TcpError::Parse(format!("not a finite number: {s:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values),
        len => Err(TcpError::Parse(format!(
            "expected 1 or {n} values, got {len}"
        ))),
    }
}
