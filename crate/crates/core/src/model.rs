//! The complementarity problem itself: find `x >= 0` with `A x^{m-1} + q >= 0`
//! and `<x, A x^{m-1} + q> = 0`, plus the residual of the equivalent
//! `(x, y)` reformulation.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::tensor::DenseTensor;

/// `TCP(A, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TcpProblem {
    tensor: DenseTensor,
    q: DVector<f64>,
}

impl TcpProblem {
    pub fn new(tensor: DenseTensor, q: DVector<f64>) -> Result<Self> {
        check_len("q", tensor.dim(), q.len())?;
        Ok(Self { tensor, q })
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.tensor
    }

    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    /// `f(x) = A x^{m-1} + q`.
    pub fn map(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.tensor.contract_vector(x)? + &self.q)
    }
}

/// A candidate `(x, y)` for the reformulated system.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePair {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl CandidatePair {
    pub fn new(x: DVector<f64>, y: DVector<f64>) -> Result<Self> {
        check_len("y", x.len(), y.len())?;
        Ok(Self { x, y })
    }

    /// Pairs `x` with `y = A x^{m-1} + q`.
    pub fn from_x(problem: &TcpProblem, x: DVector<f64>) -> Result<Self> {
        let y = problem.map(x.as_slice())?;
        Ok(Self { x, y })
    }
}

/// Stacked vector `[x∘y ; y - (A x^{m-1} + q)]`.
pub fn reformulation_residual_vector(p: &TcpProblem, c: &CandidatePair) -> Result<DVector<f64>> {
    let n = p.dim();
    check_len("x", n, c.x.len())?;
    check_len("y", n, c.y.len())?;
    let f = p.map(c.x.as_slice())?;
    let mut out = DVector::zeros(2 * n);
    for i in 0..n {
        out[i] = c.x[i] * c.y[i];
        out[n + i] = c.y[i] - f[i];
    }
    Ok(out)
}

/// Euclidean norm of [`reformulation_residual_vector`].
pub fn reformulation_residual(p: &TcpProblem, c: &CandidatePair) -> Result<f64> {
    Ok(reformulation_residual_vector(p, c)?.norm())
}

/// Which solution condition a candidate violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionFailure {
    NegativeX,
    NegativeMap,
    Complementarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub is_solution: bool,
    pub min_x: f64,
    pub min_map: f64,
    pub complementarity: f64,
    pub failures: Vec<SolutionFailure>,
}

/// Judges `x` against the original problem, recomputing `y = A x^{m-1} + q`.
///
/// Nonnegativity is checked with absolute slack `tol`; the complementarity gap
/// is scaled by `(1 + |x|∞)(1 + |q|∞)`.
pub fn is_solution(p: &TcpProblem, x: &[f64], tol: f64) -> Result<SolutionReport> {
    let f = p.map(x)?;
    let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
    let min_map = f.iter().copied().fold(f64::INFINITY, f64::min);
    let gap: f64 = x.iter().zip(f.iter()).map(|(a, b)| a * b).sum();
    let x_inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let q_inf = p.q().amax();

    let mut failures = Vec::new();
    if !(min_x >= -tol) {
        failures.push(SolutionFailure::NegativeX);
    }
    if !(min_map >= -tol) {
        failures.push(SolutionFailure::NegativeMap);
    }
    if !(gap.abs() <= tol * (1.0 + x_inf) * (1.0 + q_inf)) {
        failures.push(SolutionFailure::Complementarity);
    }
    Ok(SolutionReport {
        is_solution: failures.is_empty(),
        min_x,
        min_map,
        complementarity: gap,
        failures,
    })
}
