//! Homotopy continuation solver for tensor complementarity problems.
//!
//! Given an order-`m`, dimension-`n` tensor `A` and a vector `q`, find
//!
//! ```text
//! x >= 0,   A x^{m-1} + q >= 0,   <x, A x^{m-1} + q> = 0.
//! ```
//!
//! The solver deforms the trivially solvable system at `t = 1` into the
//! complementarity reformulation at `t = 0` (see [`homotopy`]) and follows the
//! solution path with an Euler-Newton predictor-corrector (see [`tracer`]).
//!
//! ```
//! use tcp_core::{benchmarks::Benchmark, tracer::{trace, TracerConfig, TraceStatus}};
//!
//! let problem = Benchmark::CubicPair.problem(&[-5.0, -3.0]);
//! let result = trace(&problem, &TracerConfig::with_defaults(2)).unwrap();
//! assert_eq!(result.status, TraceStatus::Converged);
//! assert!((result.solution.x[0] - 2.1286).abs() < 1e-3);
//! ```

pub mod benchmarks;
pub mod diagnostics;
pub mod error;
pub mod homotopy;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod tensor;
pub mod tracer;

pub use error::{Result, TcpError};
pub use model::{CandidatePair, TcpProblem};
pub use tensor::{DenseTensor, SemiSymmetricTensor};
pub use tracer::{trace, TraceResult, TraceStatus, TracerConfig};
