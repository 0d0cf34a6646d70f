use nalgebra::DVector;
use proptest::prelude::*;

use tcp_core::benchmarks::Benchmark;
use tcp_core::homotopy::{self, HomotopyParams};
use tcp_core::io::{ProblemFile, RunReport};
use tcp_core::model::{is_solution, reformulation_residual_vector};
use tcp_core::oracle::{solve_brute_force, OracleOptions};
use tcp_core::tensor::semi_symmetrize;
use tcp_core::{trace, CandidatePair, DenseTensor, TcpProblem, TracerConfig};

fn tensor_strategy(max_order: usize, max_dim: usize) -> impl Strategy<Value = DenseTensor> {
    (2..=max_order, 1..=max_dim).prop_flat_map(|(m, n)| {
        prop::collection::vec(-2.0f64..2.0, n.pow(m as u32))
            .prop_map(move |v| DenseTensor::from_values(m, n, v).unwrap())
    })
}

fn with_vector(t: DenseTensor, lo: f64, hi: f64) -> impl Strategy<Value = (DenseTensor, Vec<f64>)> {
    let n = t.dim();
    (Just(t), prop::collection::vec(lo..hi, n))
}

fn close(a: &DVector<f64>, b: &DVector<f64>, rel: f64) -> bool {
    (a - b).amax() <= rel * (1.0 + a.amax().max(b.amax()))
}

fn permuted(t: &DenseTensor, perm: &[usize]) -> DenseTensor {
    let (m, n) = (t.order(), t.dim());
    let mut values = Vec::with_capacity(t.values().len());
    let mut idx = vec![0usize; m];
    for _ in 0..t.values().len() {
        let src: Vec<usize> = idx.iter().map(|&i| perm[i]).collect();
        values.push(t.get(&src).unwrap());
        for d in idx.iter_mut().rev() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    DenseTensor::from_values(m, n, values).unwrap()
}

fn bench_and_q() -> impl Strategy<Value = (Benchmark, Vec<f64>)> {
    prop::sample::select(Benchmark::ALL.to_vec()).prop_flat_map(|b| {
        let n = b.tensor().dim();
        // Keep |q_i| >= 0.5 so the endpoint is not degenerate.
        let coord = prop_oneof![-5.0f64..-0.5, 0.5f64..5.0];
        (Just(b), prop::collection::vec(coord, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_is_homogeneous((t, x) in tensor_strategy(4, 3).prop_flat_map(|t| with_vector(t, -2.0, 2.0)), c in 0.1f64..3.0) {
        let fx = t.contract_vector(&x).unwrap();
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let fcx = t.contract_vector(&cx).unwrap();
        let scaled = fx * c.powi(t.order() as i32 - 1);
        prop_assert!(close(&fcx, &scaled, 1e-12), "{fcx} vs {scaled}");
    }

    #[test]
    fn semi_symmetrization_is_idempotent(t in tensor_strategy(4, 3)) {
        let once = semi_symmetrize(&t);
        let twice = semi_symmetrize(&once.to_dense());
        prop_assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn semi_symmetrization_keeps_the_map((t, x) in tensor_strategy(4, 3).prop_flat_map(|t| with_vector(t, -2.0, 2.0))) {
        let direct = t.contract_vector(&x).unwrap();
        let via = t.semi_symmetric().contract_vector(&x).unwrap();
        prop_assert!(close(&direct, &via, 1e-12));
    }

    #[test]
    fn homotopy_is_affine_in_t(
        (t, q) in tensor_strategy(4, 3).prop_flat_map(|t| with_vector(t, -3.0, 3.0)),
        seed in prop::collection::vec(0.05f64..2.0, 6),
        t0 in 0.0f64..1.0,
        t1 in 0.0f64..1.0,
    ) {
        let n = t.dim();
        let p = TcpProblem::new(t, DVector::from_vec(q)).unwrap();
        let params = HomotopyParams::ones(n);
        let z = DVector::from_iterator(2 * n, seed.iter().cycle().copied().take(2 * n));
        let h0 = homotopy::evaluate(&p, &params, &z, t0).unwrap();
        let h1 = homotopy::evaluate(&p, &params, &z, t1).unwrap();
        let jt = homotopy::jacobian_t_at(&p, &params, &z).unwrap();
        let predicted = &h0 + (t1 - t0) * jt;
        prop_assert!(close(&h1, &predicted, 1e-13), "{h1} vs {predicted}");
    }

    #[test]
    fn residual_is_permutation_invariant(
        (t, q) in tensor_strategy(4, 3).prop_flat_map(|t| with_vector(t, -3.0, 3.0)),
        xy in prop::collection::vec(-2.0f64..2.0, 6),
        rot in 0usize..3,
    ) {
        let n = t.dim();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let x = DVector::from_iterator(n, xy.iter().copied().take(n));
        let y = DVector::from_iterator(n, xy.iter().skip(3).copied().take(n));
        let p = TcpProblem::new(t.clone(), DVector::from_vec(q.clone())).unwrap();
        let pp = TcpProblem::new(
            permuted(&t, &perm),
            DVector::from_iterator(n, perm.iter().map(|&i| q[i])),
        ).unwrap();
        let r = reformulation_residual_vector(&p, &CandidatePair::new(x.clone(), y.clone()).unwrap()).unwrap();
        let c = CandidatePair::new(
            DVector::from_iterator(n, perm.iter().map(|&i| x[i])),
            DVector::from_iterator(n, perm.iter().map(|&i| y[i])),
        ).unwrap();
        let rp = reformulation_residual_vector(&pp, &c).unwrap();
        let back = DVector::from_iterator(2 * n, (0..2 * n).map(|k| {
            let (block, i) = (k / n, k % n);
            r[block * n + perm[i]]
        }));
        prop_assert!(close(&rp, &back, 1e-12), "{rp} vs {back}");
        prop_assert!((rp.norm() - r.norm()).abs() <= 1e-12 * (1.0 + r.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_solutions_are_solutions((t, q) in tensor_strategy(3, 2).prop_flat_map(|t| with_vector(t, -3.0, 3.0))) {
        let p = TcpProblem::new(t, DVector::from_vec(q)).unwrap();
        let opts = OracleOptions { starts_per_support: 16, ..OracleOptions::default() };
        for s in solve_brute_force(&p, &opts).unwrap() {
            prop_assert!(is_solution(&p, s.x.as_slice(), opts.tol).unwrap().is_solution);
        }
    }

    #[test]
    fn zero_is_found_for_nonnegative_q((t, q) in tensor_strategy(3, 3).prop_flat_map(|t| with_vector(t, 0.0, 3.0))) {
        let p = TcpProblem::new(t, DVector::from_vec(q)).unwrap();
        let opts = OracleOptions { starts_per_support: 8, ..OracleOptions::default() };
        let sols = solve_brute_force(&p, &opts).unwrap();
        prop_assert!(sols.iter().any(|s| s.x.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn tracing_is_deterministic((b, q) in bench_and_q()) {
        let p = b.problem(&q);
        let cfg = TracerConfig::with_defaults(q.len());
        let first = trace(&p, &cfg).unwrap();
        let second = trace(&p, &cfg).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn problem_file_round_trip_gives_identical_report((b, q) in bench_and_q()) {
        let p = b.problem(&q);
        let cfg = TracerConfig::with_defaults(q.len());
        let loaded = ProblemFile::parse(&ProblemFile::from_problem(&p).to_json())
            .unwrap()
            .to_problem()
            .unwrap();
        prop_assert_eq!(&loaded, &p);
        let direct = RunReport::new(&trace(&p, &cfg).unwrap(), &cfg, 0.0, true);
        let via_file = RunReport::new(&trace(&loaded, &cfg).unwrap(), &cfg, 0.0, true);
        prop_assert_eq!(direct.to_json(), via_file.to_json());
    }

    #[test]
    fn report_residue_survives_serialization((b, q) in bench_and_q()) {
        let p = b.problem(&q);
        let cfg = TracerConfig::with_defaults(q.len());
        let report = RunReport::new(&trace(&p, &cfg).unwrap(), &cfg, 0.25, false);
        let back = RunReport::parse(&report.to_json()).unwrap();
        prop_assert_eq!(&back, &report);
        let recomputed = back.recompute_residue(&p).unwrap();
        prop_assert!((recomputed - back.residue).abs() <= 1e-15);
    }
}
