//! Sampled structure checks on the polynomial map `f(x) = A x^{m-1} + q` over
//! the nonnegative orthant, and a grid estimate of
//!
//! ```text
//! beta(A) = min_{x >= 0, |x|∞ = 1} max_i x_i (A x^{m-1})_i
//! ```
//!
//! which is positive exactly when `A` is strictly semi-positive. A sampled
//! pass is evidence; a sampled fail comes with a witness that replays.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::tensor::DenseTensor;

/// Margin by which a non-strict inequality must be violated to count.
pub const VIOLATION_MARGIN: f64 = 1e-12;

const SAMPLE_SCALES: [f64; 3] = [0.1, 1.0, 10.0];

fn objective(a: &DenseTensor, x: &[f64]) -> f64 {
    let ax = a.contract_vector(x).expect("dimension checked by caller");
    x.iter()
        .zip(ax.iter())
        .map(|(xi, fi)| xi * fi)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Grid estimate of `beta(A)` and the point attaining it.
///
/// The nonnegative part of the unit sphere in the max norm is covered by the
/// faces `x_j = 1`, each gridded over `[0, 1]^{n-1}`. Every grid resolution
/// from 2 up to `grid_per_axis` is scanned and the best point of each is
/// refined by `refine_iters` sweeps of coordinate descent, so raising either
/// argument never raises the estimate. Because the minimization is
/// incomplete, the result is an upper bound on `beta`.
pub fn estimate_beta(
    a: &DenseTensor,
    grid_per_axis: usize,
    refine_iters: usize,
) -> (f64, Vec<f64>) {
    let n = a.dim();
    let grid_per_axis = grid_per_axis.max(2);
    let mut best = (f64::INFINITY, vec![0.0; n]);

    for level in 2..=grid_per_axis {
        let spacing = 1.0 / (level - 1) as f64;
        let mut level_best = (f64::INFINITY, vec![0.0; n], 0usize);
        let mut digits = vec![0usize; n.saturating_sub(1)];
        let points_per_face = level.pow(n as u32 - 1);
        let mut x = vec![0.0; n];
        for face in 0..n {
            digits.iter_mut().for_each(|d| *d = 0);
            for _ in 0..points_per_face {
                fill_face_point(&mut x, face, &digits, spacing);
                let v = objective(a, &x);
                if v < level_best.0 {
                    level_best = (v, x.clone(), face);
                }
                for d in digits.iter_mut().rev() {
                    *d += 1;
                    if *d < level {
                        break;
                    }
                    *d = 0;
                }
            }
        }
        let (v0, x0, face) = level_best;
        let (v, x) = coordinate_descent(a, x0, v0, face, spacing, refine_iters);
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

fn fill_face_point(x: &mut [f64], face: usize, digits: &[usize], spacing: f64) {
    let mut d = digits.iter();
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = if i == face {
            1.0
        } else {
            (*d.next().expect("n - 1 digits") as f64 * spacing).min(1.0)
        };
    }
}

fn coordinate_descent(
    a: &DenseTensor,
    mut x: Vec<f64>,
    mut value: f64,
    face: usize,
    mut step: f64,
    sweeps: usize,
) -> (f64, Vec<f64>) {
    for _ in 0..sweeps {
        let mut improved = false;
        for k in (0..x.len()).filter(|&k| k != face) {
            for dir in [-1.0, 1.0] {
                let old = x[k];
                x[k] = (old + dir * step).clamp(0.0, 1.0);
                let v = objective(a, &x);
                if v < value {
                    value = v;
                    improved = true;
                } else {
                    x[k] = old;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// Some `i` with `x_i > 0` has `(A x^{m-1})_i > 0`, for every nonzero `x >= 0`.
    Ssp,
    /// `max_i (x_i - y_i)(f_i(x) - f_i(y)) > 0` for distinct `x, y >= 0`.
    PFunction,
    /// `max_{x_i != y_i} (x_i - y_i)(f_i(x) - f_i(y)) >= 0` for distinct `x, y >= 0`.
    P0Function,
    /// `<x - y, f(x) - f(y)> >= 0` for `x, y >= 0`.
    Monotone,
}

impl Property {
    pub const ALL: [Property; 4] = [
        Property::Ssp,
        Property::PFunction,
        Property::P0Function,
        Property::Monotone,
    ];

    /// Whether the defining quantity `value` violates the property.
    pub fn violated_by(self, value: f64) -> bool {
        match self {
            Property::Ssp | Property::PFunction => !(value > 0.0),
            Property::P0Function | Property::Monotone => !(value >= -VIOLATION_MARGIN),
        }
    }
}

/// A sampled point (or pair) and the value of the defining quantity there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y: Option<Vec<f64>>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: Property,
    pub passed: bool,
    pub samples_used: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

/// The defining quantity of `property` at `x` (and `y` for pair properties).
pub fn property_value(
    a: &DenseTensor,
    q: &[f64],
    property: Property,
    x: &[f64],
    y: Option<&[f64]>,
) -> Result<f64> {
    let n = a.dim();
    check_len("q", n, q.len())?;
    check_len("x", n, x.len())?;
    if property == Property::Ssp {
        let ax = a.contract_vector(x)?;
        return Ok(x
            .iter()
            .zip(ax.iter())
            .filter(|(xi, _)| **xi > 0.0)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max));
    }
    let y = y.unwrap_or(x);
    check_len("y", n, y.len())?;
    let fx = a.contract_vector(x)?;
    let fy = a.contract_vector(y)?;
    let terms = (0..n).map(|i| (i, (x[i] - y[i]) * ((fx[i] + q[i]) - (fy[i] + q[i]))));
    Ok(match property {
        Property::PFunction => terms.map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max),
        Property::P0Function => terms
            .filter(|(i, _)| x[*i] != y[*i])
            .map(|(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max),
        Property::Monotone => terms.map(|(_, v)| v).sum(),
        Property::Ssp => unreachable!(),
    })
}

/// Re-evaluates a witness; `true` when it still violates `property`.
pub fn replay(a: &DenseTensor, q: &[f64], property: Property, w: &Witness) -> Result<bool> {
    let v = property_value(a, q, property, &w.x, w.y.as_deref())?;
    Ok(property.violated_by(v))
}

/// Random search for a violation of `property`.
///
/// Coordinates are drawn uniformly from `[0, R]` with `R` cycling through
/// 0.1, 1 and 10. Single points have each coordinate zeroed with probability
/// 1/4. For pairs, each coordinate of `y` copies `x` with probability 1/2,
/// which probes the `x_i == y_i` faces that define the P0 condition.
pub fn sampled_property_check(
    a: &DenseTensor,
    q: &[f64],
    property: Property,
    samples: usize,
    seed: u64,
) -> Result<PropertyCheck> {
    let n = a.dim();
    check_len("q", n, q.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = samples.max(1);

    for k in 0..samples {
        let r = SAMPLE_SCALES[k % SAMPLE_SCALES.len()];
        let (x, y) = if property == Property::Ssp {
            let mut x: Vec<f64> = (0..n)
                .map(|_| {
                    if rng.random_bool(0.25) {
                        0.0
                    } else {
                        r * rng.random::<f64>()
                    }
                })
                .collect();
            if x.iter().all(|v| *v == 0.0) {
                let i = rng.random_range(0..n);
                x[i] = r * (1.0 - rng.random::<f64>());
            }
            (x, None)
        } else {
            let x: Vec<f64> = (0..n).map(|_| r * rng.random::<f64>()).collect();
            let mut y: Vec<f64> = x
                .iter()
                .map(|&xi| {
                    if rng.random_bool(0.5) {
                        xi
                    } else {
                        r * rng.random::<f64>()
                    }
                })
                .collect();
            if y == x {
                let i = rng.random_range(0..n);
                while y[i] == x[i] {
                    y[i] = r * rng.random::<f64>();
                }
            }
            (x, Some(y))
        };
        let value = property_value(a, q, property, &x, y.as_deref())?;
        if property.violated_by(value) {
            return Ok(PropertyCheck {
                property,
                passed: false,
                samples_used: k + 1,
                witness: Some(Witness { x, y, value }),
            });
        }
    }
    Ok(PropertyCheck {
        property,
        passed: true,
        samples_used: samples,
        witness: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsOptions {
    pub grid_per_axis: usize,
    pub refine_iters: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            grid_per_axis: 21,
            refine_iters: 60,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub beta_estimate: f64,
    pub beta_argmin: Vec<f64>,
    pub sampled_ssp: PropertyCheck,
    pub sampled_p_function: PropertyCheck,
    pub sampled_p0_function: PropertyCheck,
    pub sampled_monotone: PropertyCheck,
    pub samples_used: usize,
}

pub fn analyze(a: &DenseTensor, q: &[f64], opts: &DiagnosticsOptions) -> Result<StructureReport> {
    check_len("q", a.dim(), q.len())?;
    let (beta_estimate, beta_argmin) = estimate_beta(a, opts.grid_per_axis, opts.refine_iters);
    let check = |p| sampled_property_check(a, q, p, opts.samples, opts.seed);
    let sampled_ssp = check(Property::Ssp)?;
    let sampled_p_function = check(Property::PFunction)?;
    let sampled_p0_function = check(Property::P0Function)?;
    let sampled_monotone = check(Property::Monotone)?;
    let samples_used = [
        &sampled_ssp,
        &sampled_p_function,
        &sampled_p0_function,
        &sampled_monotone,
    ]
    .iter()
    .map(|c| c.samples_used)
    .sum();
    Ok(StructureReport {
        beta_estimate,
        beta_argmin,
        sampled_ssp,
        sampled_p_function,
        sampled_p0_function,
        sampled_monotone,
        samples_used,
    })
}
