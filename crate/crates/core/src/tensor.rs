//! Dense order-m, dimension-n real tensors and the multilinear kernels used by
//! the homotopy: contraction to a vector, semi-symmetrization over the trailing
//! indices, and the derivative matrix of the induced polynomial map.
//!
//! Entries are stored row-major over `(i1, i2, ..., im)`, so the last index varies
//! fastest. All sums run in lexicographic order of the index tuple, which makes
//! every kernel bitwise reproducible.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Result, TcpError};

/// Upper bound on `n^m` accepted by the constructors.
pub const MAX_ENTRIES: usize = 1 << 24;

/// Number of entries of an order-`order`, dimension-`dim` tensor, or `None` when it
/// overflows or exceeds [`MAX_ENTRIES`].
pub fn entry_count(order: usize, dim: usize) -> Option<usize> {
    let exp = u32::try_from(order).ok()?;
    dim.checked_pow(exp).filter(|&c| c <= MAX_ENTRIES)
}

/// A dense real tensor of order `m >= 2` and dimension `n >= 1`.
///
/// The semi-symmetric twin is computed lazily on first use and cached.
#[derive(Debug, Clone)]
pub struct DenseTensor {
    order: usize,
    dim: usize,
    values: Vec<f64>,
    semi: OnceLock<SemiSymmetricTensor>,
}

impl PartialEq for DenseTensor {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.dim == other.dim && self.values == other.values
    }
}

impl DenseTensor {
    /// Builds a tensor from row-major values.
    pub fn from_values(order: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        validate_shape(order, dim)?;
        let count = entry_count(order, dim).expect("validated above");
        check_len("tensor values", count, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TcpError::Tensor("entries must be finite".into()));
        }
        Ok(Self {
            order,
            dim,
            values,
            semi: OnceLock::new(),
        })
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        validate_shape(order, dim)?;
        let count = entry_count(order, dim).expect("validated above");
        Self::from_values(order, dim, vec![0.0; count])
    }

    /// Builds a tensor from `(0-based index tuple, value)` pairs; unlisted entries are zero.
    pub fn from_entries<'a, I>(order: usize, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [usize], f64)>,
    {
        let mut t = Self::zeros(order, dim)?;
        for (idx, val) in entries {
            let flat = t.flat_index(idx)?;
            t.values[flat] = val;
        }
        Self::from_values(order, dim, t.values)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry at a 0-based index tuple.
    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.values[self.flat_index(idx)?])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn flat_index(&self, idx: &[usize]) -> Result<usize> {
        check_len("index tuple", self.order, idx.len())?;
        let mut flat = 0;
        for &i in idx {
            if i >= self.dim {
                return Err(TcpError::Tensor(format!(
                    "index {i} out of range for dimension {}",
                    self.dim
                )));
            }
            flat = flat * self.dim + i;
        }
        Ok(flat)
    }

    /// `(A x^{m-1})_i = sum A[i, i2, ..., im] x[i2] ... x[im]`.
    pub fn contract_vector(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_len("x", self.dim, x.len())?;
        Ok(contract_rows(&self.values, self.dim, self.order - 1, x))
    }

    /// The semi-symmetric twin, computed once and cached on this handle.
    pub fn semi_symmetric(&self) -> &SemiSymmetricTensor {
        self.semi.get_or_init(|| semi_symmetrize(self))
    }

    /// Jacobian of `x -> A x^{m-1}`, i.e. `(m-1) * Â x^{m-2}`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = self.semi_symmetric().contract_matrix(x)?;
        m *= (self.order - 1) as f64;
        Ok(m)
    }
}

fn validate_shape(order: usize, dim: usize) -> Result<()> {
    if order < 2 {
        return Err(TcpError::Tensor(format!("order must be >= 2, got {order}")));
    }
    if dim < 1 {
        return Err(TcpError::Tensor("dimension must be >= 1".into()));
    }
    if entry_count(order, dim).is_none() {
        return Err(TcpError::Tensor(format!(
            "{dim}^{order} entries exceeds the limit of {MAX_ENTRIES}"
        )));
    }
    Ok(())
}

/// A tensor invariant under permutations of its trailing `m - 1` indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiSymmetricTensor {
    order: usize,
    dim: usize,
    values: Vec<f64>,
}

impl SemiSymmetricTensor {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> DenseTensor {
        DenseTensor::from_values(self.order, self.dim, self.values.clone())
            .expect("shape already validated")
    }

    pub fn contract_vector(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_len("x", self.dim, x.len())?;
        Ok(contract_rows(&self.values, self.dim, self.order - 1, x))
    }

    /// `(Â x^{m-2})_{ij} = sum Â[i, j, i3, ..., im] x[i3] ... x[im]`.
    ///
    /// For `m == 2` this is the matrix slice itself and `x` only fixes the shape.
    pub fn contract_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_len("x", self.dim, x.len())?;
        let n = self.dim;
        // Treat each (i, j) pair as a row of an order-(m-1) contraction.
        let rows = contract_rows(&self.values, n * n, self.order - 2, x);
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i * n + j]))
    }
}

/// Products `x[k1] * ... * x[kd]` over all `d`-tuples in lexicographic order.
fn monomials(x: &[f64], degree: usize) -> Vec<f64> {
    let mut prods = vec![1.0];
    for _ in 0..degree {
        let mut next = Vec::with_capacity(prods.len() * x.len());
        for &p in &prods {
            next.extend(x.iter().map(|&xj| p * xj));
        }
        prods = next;
    }
    prods
}

/// Contracts the trailing `degree` indices of a flat array with `x`, leaving
/// `rows` leading entries.
fn contract_rows(values: &[f64], rows: usize, degree: usize, x: &[f64]) -> DVector<f64> {
    let prods = monomials(x, degree);
    let width = prods.len();
    debug_assert_eq!(values.len(), rows * width);
    DVector::from_iterator(
        rows,
        values
            .chunks_exact(width)
            .map(|row| row.iter().zip(&prods).fold(0.0, |acc, (a, p)| acc + a * p)),
    )
}

/// Averages each entry over the distinct permutations of its trailing indices.
///
/// Permutation classes are keyed by the sorted trailing tuple. A class whose
/// members are already bitwise equal keeps that value unchanged, which makes
/// the operation exactly idempotent.
pub fn semi_symmetrize(a: &DenseTensor) -> SemiSymmetricTensor {
    let n = a.dim;
    let degree = a.order - 1;
    let width = entry_count(degree, n).expect("smaller than the full tensor");

    // Canonical class for every trailing tuple, in lexicographic order.
    let mut class_of = Vec::with_capacity(width);
    let mut class_ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut tuple = vec![0usize; degree];
    for _ in 0..width {
        let mut key = tuple.clone();
        key.sort_unstable();
        let next_id = class_ids.len();
        class_of.push(*class_ids.entry(key).or_insert(next_id));
        advance(&mut tuple, n);
    }
    let classes = class_ids.len();

    let mut values = vec![0.0; a.values.len()];
    let mut sum = vec![0.0; classes];
    let mut count = vec![0usize; classes];
    let mut first = vec![0.0; classes];
    let mut uniform = vec![true; classes];
    for (row_in, row_out) in a
        .values
        .chunks_exact(width)
        .zip(values.chunks_exact_mut(width))
    {
        sum.iter_mut().for_each(|s| *s = 0.0);
        count.iter_mut().for_each(|c| *c = 0);
        uniform.iter_mut().for_each(|u| *u = true);
        for (&v, &c) in row_in.iter().zip(&class_of) {
            if count[c] == 0 {
                first[c] = v;
            } else if v.to_bits() != first[c].to_bits() {
                uniform[c] = false;
            }
            sum[c] += v;
            count[c] += 1;
        }
        for (out, &c) in row_out.iter_mut().zip(&class_of) {
            *out = if uniform[c] {
                first[c]
            } else {
                sum[c] / count[c] as f64
            };
        }
    }

    SemiSymmetricTensor {
        order: a.order,
        dim: n,
        values,
    }
}

fn advance(tuple: &mut [usize], n: usize) {
    for digit in tuple.iter_mut().rev() {
        *digit += 1;
        if *digit < n {
            return;
        }
        *digit = 0;
    }
}
