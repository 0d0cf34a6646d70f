//! Built-in test problems: four small tensors with known behaviour and, for
//! each, six right-hand sides with reference solutions (rounded to four
//! decimals), prediction-step counts, Newton-iteration counts and residues.

use nalgebra::DVector;

use crate::model::TcpProblem;
use crate::tensor::DenseTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    /// Order 3, dimension 2, strong strictly semi-positive.
    CubicPair,
    /// Order 4, dimension 2, a P tensor that is strong strictly semi-positive.
    QuarticPair,
    /// Order 5, dimension 3, diagonal with entries 1, 2, 3.
    QuinticDiagonal,
    /// Order 3, dimension 2, strictly semi-positive but not a P0 map.
    CubicNonP0,
}

/// One reference row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub benchmark: Benchmark,
    pub q: &'static [f64],
    pub itr: usize,
    pub nwtitr: usize,
    pub solution: &'static [f64],
    pub residue: f64,
}

impl ReferenceRow {
    pub fn problem(&self) -> TcpProblem {
        self.benchmark.problem(self.q)
    }
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::CubicPair,
        Benchmark::QuarticPair,
        Benchmark::QuinticDiagonal,
        Benchmark::CubicNonP0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::CubicPair => "cubic-pair",
            Benchmark::QuarticPair => "quartic-pair",
            Benchmark::QuinticDiagonal => "quintic-diagonal",
            Benchmark::CubicNonP0 => "cubic-non-p0",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    /// `(order, dim, [(1-based index, value)])`.
    pub fn entries(self) -> (usize, usize, Vec<(Vec<usize>, f64)>) {
        let e = |idx: &[usize], v: f64| (idx.to_vec(), v);
        match self {
            Benchmark::CubicPair => (
                3,
                2,
                vec![
                    e(&[1, 1, 1], 1.0),
                    e(&[1, 2, 1], 1.0),
                    e(&[1, 2, 2], -1.0),
                    e(&[2, 2, 2], 1.0),
                    e(&[2, 1, 1], -1.0),
                    e(&[2, 2, 1], 1.0),
                ],
            ),
            Benchmark::QuarticPair => (
                4,
                2,
                vec![
                    e(&[1, 1, 1, 1], 1.0),
                    e(&[1, 2, 2, 2], -1.0),
                    e(&[1, 1, 2, 2], 1.0),
                    e(&[2, 2, 2, 2], 1.0),
                    e(&[2, 1, 1, 1], -1.0),
                    e(&[2, 2, 1, 1], 1.0),
                ],
            ),
            Benchmark::QuinticDiagonal => (5, 3, (1..=3).map(|k| (vec![k; 5], k as f64)).collect()),
            Benchmark::CubicNonP0 => (
                3,
                2,
                vec![
                    e(&[1, 1, 1], 1.0),
                    e(&[1, 2, 1], 2.0),
                    e(&[1, 2, 2], 1.0),
                    e(&[2, 2, 2], 1.0),
                    e(&[2, 1, 1], -1.0),
                    e(&[2, 2, 1], -1.0),
                ],
            ),
        }
    }

    pub fn tensor(self) -> DenseTensor {
        let (order, dim, entries) = self.entries();
        let zero_based: Vec<(Vec<usize>, f64)> = entries
            .into_iter()
            .map(|(idx, v)| (idx.into_iter().map(|i| i - 1).collect(), v))
            .collect();
        DenseTensor::from_entries(
            order,
            dim,
            zero_based.iter().map(|(idx, v)| (idx.as_slice(), *v)),
        )
        .expect("built-in tensors are well formed")
    }

    /// Panics if `q` has the wrong length.
    pub fn problem(self, q: &[f64]) -> TcpProblem {
        TcpProblem::new(self.tensor(), DVector::from_row_slice(q)).expect("q matches dimension")
    }

    pub fn rows(self) -> impl Iterator<Item = &'static ReferenceRow> {
        REFERENCE_ROWS.iter().filter(move |r| r.benchmark == self)
    }
}

macro_rules! row {
    ($b:ident, $q:expr, $itr:expr, $nwt:expr, $sol:expr, $res:expr) => {
        ReferenceRow {
            benchmark: Benchmark::$b,
            q: &$q,
            itr: $itr,
            nwtitr: $nwt,
            solution: &$sol,
            residue: $res,
        }
    };
}

/// All 24 reference rows, grouped by tensor.
pub static REFERENCE_ROWS: [ReferenceRow; 24] = [
    row!(CubicPair, [-5.0, -3.0], 5, 12, [2.1286, 1.8792], 8.8805e-15),
    row!(CubicPair, [-5.0, 3.0], 5, 14, [2.0582, 0.4859], 2.6746e-23),
    row!(CubicPair, [5.0, 3.0], 5, 12, [0.0, 0.0], 4.2730e-13),
    row!(CubicPair, [0.0, 3.0], 5, 36, [0.0, 0.0], 6.8709e-13),
    row!(CubicPair, [2.0, -3.0], 5, 13, [0.3103, 1.6113], 8.9179e-16),
    row!(CubicPair, [0.0, -5.0], 5, 12, [1.2430, 2.0112], 2.1817e-15),
    row!(
        QuarticPair,
        [-5.0, -3.0],
        5,
        13,
        [1.6678, 1.5096],
        1.1586e-14
    ),
    row!(
        QuarticPair,
        [-5.0, 3.0],
        5,
        14,
        [1.6714, 0.5409],
        1.9860e-15
    ),
    row!(QuarticPair, [5.0, 3.0], 5, 12, [0.0, 0.0], 1.0731e-18),
    row!(QuarticPair, [0.0, 3.0], 5, 33, [0.0, 0.0], 5.2577e-13),
    row!(
        QuarticPair,
        [2.0, -3.0],
        5,
        13,
        [0.3906, 1.4167],
        6.2804e-16
    ),
    row!(
        QuarticPair,
        [0.0, -5.0],
        5,
        13,
        [1.1143, 1.6331],
        3.8998e-15
    ),
    row!(
        QuinticDiagonal,
        [1.0, 2.0, 3.0],
        5,
        12,
        [0.0, 0.0, 0.0],
        4.0969e-21
    ),
    row!(
        QuinticDiagonal,
        [1.0, -2.0, 3.0],
        5,
        12,
        [0.0, 1.0, 0.0],
        7.6027e-23
    ),
    row!(
        QuinticDiagonal,
        [-3.0, -2.0, -3.0],
        5,
        11,
        [1.3161, 1.0, 1.0],
        3.6186e-15
    ),
    row!(
        QuinticDiagonal,
        [3.0, 3.0, 3.0],
        5,
        12,
        [0.0, 0.0, 0.0],
        4.9693e-23
    ),
    row!(
        QuinticDiagonal,
        [-3.0, -1.0, -2.0],
        5,
        11,
        [1.3161, 0.8409, 0.9036],
        3.6748e-15
    ),
    row!(
        QuinticDiagonal,
        [0.0, -1.0, -2.0],
        5,
        31,
        [0.0, 0.8409, 0.9036],
        7.1789e-13
    ),
    row!(
        CubicNonP0,
        [-5.0, -3.0],
        5,
        14,
        [0.3127, 1.9233],
        1.2942e-15
    ),
    row!(CubicNonP0, [-5.0, 3.0], 5, 11, [1.5513, 0.6847], 1.7402e-14),
    row!(CubicNonP0, [5.0, 3.0], 5, 13, [0.0, 0.0], 6.0454e-26),
    row!(CubicNonP0, [0.0, 3.0], 5, 36, [0.0, 0.0], 6.3603e-13),
    row!(CubicNonP0, [2.0, -3.0], 5, 13, [0.0, 1.7321], 9.9301e-16),
    row!(CubicNonP0, [0.0, -5.0], 5, 15, [0.0, 2.2361], 1.9860e-15),
];

/// Rows whose endpoint Jacobian is singular, so the final corrector converges slowly.
pub fn is_singular_endpoint_row(row: &ReferenceRow) -> bool {
    matches!(
        (row.benchmark, row.q),
        (
            Benchmark::CubicPair | Benchmark::QuarticPair | Benchmark::CubicNonP0,
            [0.0, 3.0]
        ) | (Benchmark::QuinticDiagonal, [0.0, -1.0, -2.0])
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_solution;

    #[test]
    fn every_reference_solution_is_near_feasible() {
        for row in &REFERENCE_ROWS {
            let p = row.problem();
            let r = is_solution(&p, row.solution, 1e-2).unwrap();
            assert!(r.is_solution, "{:?}: {:?}", row, r);
        }
    }

    #[test]
    fn six_rows_each() {
        for b in Benchmark::ALL {
            assert_eq!(b.rows().count(), 6);
            assert_eq!(Benchmark::from_name(b.name()), Some(b));
        }
        assert_eq!(
            REFERENCE_ROWS
                .iter()
                .filter(|r| is_singular_endpoint_row(r))
                .count(),
            4
        );
    }
}
