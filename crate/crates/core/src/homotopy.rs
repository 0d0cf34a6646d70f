//! The homotopy
//!
//! ```text
//! H(x, y, t) = [ X y - t a ; y - (1 - t)(A x^{m-1} + q) - t b ]
//! ```
//!
//! which is trivially solved at `t = 1` by `(a / b, b)` and reduces to the
//! complementarity reformulation at `t = 0`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, TcpError};
use crate::model::TcpProblem;

/// The shift vectors `a` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyParams {
    a: DVector<f64>,
    b: DVector<f64>,
    relaxed: bool,
}

impl HomotopyParams {
    /// Requires `a > 0` and `b > 0`.
    pub fn new(a: DVector<f64>, b: DVector<f64>) -> Result<Self> {
        Self::build(a, b, false)
    }

    /// Allows zeros in `a`. The traced path need not be smooth in this mode,
    /// so it is experimental.
    pub fn relaxed(a: DVector<f64>, b: DVector<f64>) -> Result<Self> {
        Self::build(a, b, true)
    }

    /// `a = b = 1`.
    pub fn ones(n: usize) -> Self {
        Self {
            a: DVector::repeat(n, 1.0),
            b: DVector::repeat(n, 1.0),
            relaxed: false,
        }
    }

    /// Same `a`, with every entry of `b` scaled by an independent factor drawn
    /// uniformly from `[0.9, 1.1]`. Used to retry when the path through the
    /// given `b` is not traceable.
    pub fn with_perturbed_b(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = self.b.map(|v| v * rng.random_range(0.9..=1.1));
        Self {
            a: self.a.clone(),
            b,
            relaxed: self.relaxed,
        }
    }

    fn build(a: DVector<f64>, b: DVector<f64>, relaxed: bool) -> Result<Self> {
        check_len("b", a.len(), b.len())?;
        if let Some(bad) = b.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(TcpError::Parameter(format!(
                "b must be strictly positive, found {bad}"
            )));
        }
        let a_ok = |v: &f64| v.is_finite() && if relaxed { *v >= 0.0 } else { *v > 0.0 };
        if let Some(bad) = a.iter().find(|v| !a_ok(v)) {
            let need = if relaxed {
                "nonnegative"
            } else {
                "strictly positive"
            };
            return Err(TcpError::Parameter(format!(
                "a must be {need}, found {bad}"
            )));
        }
        Ok(Self { a, b, relaxed })
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

/// A point `(x, y, t)` on or near the homotopy path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl HomotopyPoint {
    /// Splits a stacked `z = [x; y]`.
    pub fn from_z(z: &DVector<f64>, t: f64) -> Self {
        let n = z.len() / 2;
        Self {
            x: z.rows(0, n).iter().copied().collect(),
            y: z.rows(n, n).iter().copied().collect(),
            t,
        }
    }

    pub fn z(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.x.len() + self.y.len(),
            self.x.iter().chain(&self.y).copied(),
        )
    }
}

/// `(x0, y0, t) = (a / b, b, 1)`.
pub fn start_point(params: &HomotopyParams) -> HomotopyPoint {
    HomotopyPoint {
        x: params.a.iter().zip(&params.b).map(|(a, b)| a / b).collect(),
        y: params.b.iter().copied().collect(),
        t: 1.0,
    }
}

fn check_point(p: &TcpProblem, params: Option<&HomotopyParams>, z: &DVector<f64>) -> Result<usize> {
    let n = p.dim();
    if let Some(params) = params {
        check_len("a", n, params.dim())?;
    }
    check_len("z", 2 * n, z.len())?;
    Ok(n)
}

/// `H(z, t)` for stacked `z = [x; y]`.
pub fn evaluate(
    p: &TcpProblem,
    params: &HomotopyParams,
    z: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    let n = check_point(p, Some(params), z)?;
    let x = z.rows(0, n);
    let f = p.map(x.as_slice())?;
    let s = 1.0 - t;
    let mut h = DVector::zeros(2 * n);
    for i in 0..n {
        let y = z[n + i];
        h[i] = x[i] * y - t * params.a[i];
        h[n + i] = y - s * f[i] - t * params.b[i];
    }
    Ok(h)
}

pub fn evaluate_h(
    p: &TcpProblem,
    params: &HomotopyParams,
    pt: &HomotopyPoint,
) -> Result<DVector<f64>> {
    evaluate(p, params, &pt.z(), pt.t)
}

/// `D_z H = [Y, X ; -(1 - t)(m - 1) Â x^{m-2}, I]`.
pub fn jacobian_z_at(p: &TcpProblem, z: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = check_point(p, None, z)?;
    let x = z.rows(0, n);
    let jf = p.tensor().jacobian(x.as_slice())?;
    let s = 1.0 - t;
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, i)] = z[n + i];
        j[(i, n + i)] = x[i];
        j[(n + i, n + i)] = 1.0;
        for k in 0..n {
            j[(n + i, k)] = -s * jf[(i, k)];
        }
    }
    Ok(j)
}

pub fn jacobian_z(p: &TcpProblem, pt: &HomotopyPoint) -> Result<DMatrix<f64>> {
    jacobian_z_at(p, &pt.z(), pt.t)
}

/// `D_t H = [-a ; A x^{m-1} + q - b]`.
pub fn jacobian_t_at(
    p: &TcpProblem,
    params: &HomotopyParams,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = check_point(p, Some(params), z)?;
    let f = p.map(z.rows(0, n).as_slice())?;
    let mut d = DVector::zeros(2 * n);
    for i in 0..n {
        d[i] = -params.a[i];
        d[n + i] = f[i] - params.b[i];
    }
    Ok(d)
}

pub fn jacobian_t(
    p: &TcpProblem,
    params: &HomotopyParams,
    pt: &HomotopyPoint,
) -> Result<DVector<f64>> {
    jacobian_t_at(p, params, &pt.z())
}
