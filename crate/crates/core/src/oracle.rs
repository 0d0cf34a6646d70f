//! Brute-force solver for small problems, independent of the homotopy.
//!
//! Every complementary solution has a support `S = {i : x_i > 0}` on which
//! `f_S(x) = 0` and `x = 0` off `S`. For each of the `2^n` supports the
//! square system `f_S(x_S, 0) = 0` is solved by damped Newton from a grid of
//! starting points, and the roots that are feasible are kept.

use nalgebra::{DMatrix, DVector};

use crate::diagnostics::estimate_beta;
use crate::error::{Result, TcpError};
use crate::linalg::{pinv_solve, solve_direct};
use crate::model::{is_solution, CandidatePair, TcpProblem};

pub const MAX_ORACLE_DIM: usize = 3;

/// Solutions closer than this in max norm are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;

const MAX_NEWTON: usize = 500;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Feasibility tolerance passed to [`is_solution`].
    pub tol: f64,
    /// Total number of starting points per support.
    pub starts_per_support: usize,
    /// Side of the starting box `[0, x_max]^{|S|}`; derived from the path-norm
    /// bound when `None`.
    pub x_max: Option<f64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            starts_per_support: 64,
            x_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSetCandidate {
    /// 0-based indices with `x_i > 0` allowed.
    pub support: Vec<usize>,
    pub x: DVector<f64>,
    pub residual: f64,
    pub feasible: bool,
}

/// Default starting box: `bound^{1/(m-1)} + 1` with the path-norm bound at
/// `t = 0`, `a = b = 1`.
pub fn default_x_max(p: &TcpProblem) -> f64 {
    let (beta, _) = estimate_beta(p.tensor(), 21, 40);
    let num = 2.0 + p.q().amax();
    if beta > 0.0 {
        (num / beta).max(1.0).powf(1.0 / (p.order() - 1) as f64) + 1.0
    } else {
        10.0 * (1.0 + p.q().amax())
    }
}

/// All candidates found, one per converged root, before deduplication.
pub fn enumerate_candidates(
    p: &TcpProblem,
    opts: &OracleOptions,
) -> Result<Vec<ActiveSetCandidate>> {
    let n = p.dim();
    if n > MAX_ORACLE_DIM {
        return Err(TcpError::UnsupportedSize {
            dim: n,
            limit: MAX_ORACLE_DIM,
        });
    }
    if !(opts.tol > 0.0) {
        return Err(TcpError::Parameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let x_max = opts.x_max.unwrap_or_else(|| default_x_max(p));

    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let full: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        for start in starting_points(full.len(), opts.starts_per_support, x_max) {
            let support = full.clone();
            let Some((x, residual)) = solve_support(p, &support, &start)? else {
                continue;
            };
            let (support, x, residual) = snap_degenerate(p, &support, x, residual)?;
            let feasible = is_solution(p, x.as_slice(), opts.tol)?.is_solution;
            out.push(ActiveSetCandidate {
                support,
                x,
                residual,
                feasible,
            });
            if full.is_empty() {
                break;
            }
        }
    }
    Ok(out)
}

/// Every verified solution, deduplicated and sorted lexicographically.
pub fn solve_brute_force(p: &TcpProblem, opts: &OracleOptions) -> Result<Vec<CandidatePair>> {
    let mut sols: Vec<DVector<f64>> = Vec::new();
    for c in enumerate_candidates(p, opts)?
        .into_iter()
        .filter(|c| c.feasible)
    {
        match sols
            .iter_mut()
            .find(|s| (&**s - &c.x).amax() < DEDUP_RADIUS)
        {
            // Keep the representative with more exact zeros.
            Some(s) => {
                if zeros(&c.x) > zeros(s) {
                    *s = c.x;
                }
            }
            None => sols.push(c.x),
        }
    }
    sols.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    sols.into_iter()
        .map(|x| CandidatePair::from_x(p, x))
        .collect()
}

fn zeros(x: &DVector<f64>) -> usize {
    x.iter().filter(|v| **v == 0.0).count()
}

/// Cell-centred grid with about `total` points in `[0, x_max]^dim`.
fn starting_points(dim: usize, total: usize, x_max: f64) -> Vec<Vec<f64>> {
    if dim == 0 {
        return vec![Vec::new()];
    }
    let per_axis = ((total.max(1) as f64).powf(1.0 / dim as f64).round() as usize).max(1);
    let count = per_axis.pow(dim as u32);
    (0..count)
        .map(|mut k| {
            (0..dim)
                .map(|_| {
                    let j = k % per_axis;
                    k /= per_axis;
                    x_max * (j as f64 + 0.5) / per_axis as f64
                })
                .collect()
        })
        .collect()
}

/// Coordinates below `eps^{1/(m-1)}` (times a safety factor) are where Newton
/// stalls on a root that is degenerate in that coordinate.
fn snap_radius(p: &TcpProblem) -> f64 {
    10.0 * f64::EPSILON.powf(1.0 / (p.order() - 1) as f64) * (1.0 + p.q().amax())
}

/// Re-solves on the support with the tiny coordinates removed and returns
/// that root instead when it lies within [`snap_radius`] of `x`.
fn snap_degenerate(
    p: &TcpProblem,
    support: &[usize],
    x: DVector<f64>,
    residual: f64,
) -> Result<(Vec<usize>, DVector<f64>, f64)> {
    let radius = snap_radius(p);
    let kept: Vec<usize> = support
        .iter()
        .copied()
        .filter(|&i| x[i].abs() > radius)
        .collect();
    if kept.len() == support.len() {
        return Ok((support.to_vec(), x, residual));
    }
    let start: Vec<f64> = kept.iter().map(|&i| x[i]).collect();
    match solve_support(p, &kept, &start)? {
        Some((y, r)) if (&y - &x).amax() <= radius => Ok((kept, y, r)),
        _ => Ok((support.to_vec(), x, residual)),
    }
}

/// Damped Newton on `f_S(x) = 0` with `x` zero off the support.
///
/// Returns the full `x` and `|f_S|_2`, or `None` if the iteration failed to
/// settle to a root.
fn solve_support(
    p: &TcpProblem,
    support: &[usize],
    start: &[f64],
) -> Result<Option<(DVector<f64>, f64)>> {
    let n = p.dim();
    let mut x = DVector::zeros(n);
    for (&i, &v) in support.iter().zip(start) {
        x[i] = v;
    }
    let sub_residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let f = p.map(x.as_slice())?;
        Ok(DVector::from_iterator(
            support.len(),
            support.iter().map(|&i| f[i]),
        ))
    };
    if support.is_empty() {
        return Ok(Some((x, 0.0)));
    }

    let scale = 1.0 + p.q().amax();
    let mut r = sub_residual(&x)?;
    let mut norm = r.norm();
    for _ in 0..MAX_NEWTON {
        let j = p.tensor().jacobian(x.as_slice())?;
        let js = DMatrix::from_fn(support.len(), support.len(), |a, b| {
            j[(support[a], support[b])]
        });
        // LU keeps full accuracy on nearly singular supports; pinv handles
        // the exactly singular ones.
        let Some(step) = solve_direct(&js, &r, f64::INFINITY).or_else(|| pinv_solve(&js, &r))
        else {
            return Ok(None);
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = x.clone();
            for (k, &i) in support.iter().enumerate() {
                trial[i] -= lambda * step[k];
            }
            let tr = sub_residual(&trial)?;
            let tn = tr.norm();
            if tn.is_finite() && tn < norm {
                accepted = Some((trial, tr, tn));
                break;
            }
            lambda *= 0.5;
        }
        let Some((trial, tr, tn)) = accepted else {
            break;
        };
        let moved = (&trial - &x).amax();
        x = trial;
        r = tr;
        norm = tn;
        if moved <= 1e-15 * (1.0 + x.amax()) || norm == 0.0 {
            break;
        }
    }
    if norm <= 1e-9 * scale && x.iter().all(|v| v.is_finite()) {
        Ok(Some((x, norm)))
    } else {
        Ok(None)
    }
}
