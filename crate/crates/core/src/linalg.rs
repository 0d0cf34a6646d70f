use nalgebra::{DMatrix, DVector};

/// Singular values at or below `PINV_RTOL * sigma_max` are treated as zero.
pub const PINV_RTOL: f64 = 1e-12;

/// Minimum-norm least-squares solution of `m x = rhs`, i.e. `m^+ rhs`.
pub fn pinv_solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    if !sigma_max.is_finite() {
        return None;
    }
    if sigma_max == 0.0 {
        return Some(DVector::zeros(m.ncols()));
    }
    let u = svd.u.as_ref()?;
    let v_t = svd.v_t.as_ref()?;
    let cutoff = PINV_RTOL * sigma_max;
    let mut coeffs = u.transpose() * rhs;
    for (c, &s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c = if s > cutoff { *c / s } else { 0.0 };
    }
    Some(v_t.transpose() * coeffs)
}

/// [`pinv_solve`] on `m D` with `D` scaling every nonzero column to unit
/// 2-norm, mapped back through `D`.
///
/// Truncation then depends on the geometry of the columns rather than on their
/// lengths, so a column that shrinks near a degenerate root is not discarded.
pub fn pinv_solve_equilibrated(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let scales: Vec<f64> = m
        .column_iter()
        .map(|c| {
            let norm = c.norm();
            if norm > 0.0 && norm.is_finite() {
                1.0 / norm
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = m.clone();
    for (mut c, s) in scaled.column_iter_mut().zip(&scales) {
        c *= *s;
    }
    let mut x = pinv_solve(&scaled, rhs)?;
    for (v, s) in x.iter_mut().zip(&scales) {
        *v *= s;
    }
    Some(x)
}

/// 2-norm condition number.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `m x = rhs` by LU with partial pivoting, rejecting matrices whose
/// condition number exceeds `max_cond`.
pub fn solve_direct(m: &DMatrix<f64>, rhs: &DVector<f64>, max_cond: f64) -> Option<DVector<f64>> {
    let cond = condition_number(m);
    if !(cond <= max_cond) {
        return None;
    }
    m.clone()
        .lu()
        .solve(rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
}
