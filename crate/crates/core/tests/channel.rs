use cqexp_core::channel::{
    e0_classical, e0_derivatives, e0_quantum, embed_classical, f_map, max_e0_over_inputs,
    CQChannel, ClassicalChannel, DensityOperator, ExponentSolver, OptimizerConfig,
    ProbabilityDistribution, DEFAULT_DERIVATIVE_STEP,
};
use cqexp_core::matops::random::{random_density, random_simplex, rng_from_seed, TrialRng};
use cqexp_core::matops::PsdMatrix;
use proptest::prelude::*;

fn random_channel(rng: &mut TrialRng, d: usize, n: usize) -> CQChannel {
    let outputs = (0..n)
        .map(|x| {
            let rank = 1 + (x * 7 + d) % d;
            DensityOperator::new(random_density(rng, d, rank, 1e4)).unwrap()
        })
        .collect();
    CQChannel::new(outputs).unwrap()
}

fn instance(seed: u64, d: usize, n: usize) -> (CQChannel, ProbabilityDistribution) {
    let mut rng = rng_from_seed(seed);
    let w = random_channel(&mut rng, d, n);
    let p = ProbabilityDistribution::new(random_simplex(&mut rng, n)).unwrap();
    (w, p)
}

/// |0⟩⟨0| and |+⟩⟨+|.
fn zero_plus() -> CQChannel {
    let zero = PsdMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap();
    let plus = PsdMatrix::from_matrix(
        cqexp_core::matops::HermitianMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])
            .unwrap()
            .into_inner(),
    )
    .unwrap();
    CQChannel::from_states(vec![zero, plus]).unwrap()
}

fn bsc(p: f64) -> ClassicalChannel {
    ClassicalChannel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
}

#[test]
fn pure_state_pair_at_s1() {
    // Mixture eigenvalues ½(1 ± 1/√2), squared and summed: 3/4.
    let oracle = -(0.75f64).log2();
    assert!((oracle - 0.415_037_499_278_843_8).abs() < 1e-15);
    let p = ProbabilityDistribution::uniform(2).unwrap();
    let v = e0_quantum(&zero_plus(), &p, 1.0).unwrap();
    assert!((v - oracle).abs() < 1e-12, "{v}");
}

#[test]
fn bsc_embedding_matches_classical() {
    let q = bsc(0.1);
    let w = embed_classical(&q);
    let mut rng = rng_from_seed(10);
    for k in 0..20 {
        let p = ProbabilityDistribution::new(random_simplex(&mut rng, 2)).unwrap();
        let s = 8.0 * (k as f64 + 0.5) / 20.0;
        let (a, b) = (
            e0_quantum(&w, &p, s).unwrap(),
            e0_classical(&q, &p, s).unwrap(),
        );
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn noiseless_f_map() {
    let w = embed_classical(&ClassicalChannel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
    let p = ProbabilityDistribution::uniform(2).unwrap();
    for t in [1.0, 1.5, 2.0, 4.0, 9.0] {
        assert!((f_map(&w, &p, t).unwrap() + (t - 1.0)).abs() < 1e-12);
    }
    assert!(f_map(&w, &p, 0.5).is_err());
}

#[test]
fn derivatives_agree_with_richardson() {
    let h = DEFAULT_DERIVATIVE_STEP;
    for seed in 0..20 {
        let (w, p) = instance(seed, 3, 3);
        let s = 0.1 + 0.15 * seed as f64;
        let (d1, d2) = e0_derivatives(&w, &p, s, h).unwrap();
        let (c1, c2) = e0_derivatives(&w, &p, s, 2e-3).unwrap();
        let (f1, f2) = e0_derivatives(&w, &p, s, 1e-3).unwrap();
        let (r1, r2) = ((4.0 * f1 - c1) / 3.0, (4.0 * f2 - c2) / 3.0);
        assert!((d1 - r1).abs() <= 1e-6, "{d1} vs {r1}");
        assert!((d2 - r2).abs() <= 1e-4 * r2.abs().max(1.0), "{d2} vs {r2}");
    }
}

/// `max_{s ∈ [0,1], p ∈ [0,1]} E₀(s, (p, 1−p)) − sR` on a dense grid.
fn grid_er(w: &CQChannel, rate: f64) -> f64 {
    let mut best = 0f64;
    for i in 0..=100 {
        let s = i as f64 / 100.0;
        for j in 0..=1000 {
            let q = j as f64 / 1000.0;
            let p = ProbabilityDistribution::new(vec![q, 1.0 - q]).unwrap();
            best = best.max(e0_quantum(w, &p, s).unwrap() - s * rate);
        }
    }
    best
}

#[test]
fn random_coding_against_dense_grid() {
    let w = zero_plus();
    let solver = ExponentSolver::new(&w, OptimizerConfig::default(), 2.0).unwrap();
    for rate in [0.0, 0.1, 0.25, 0.4] {
        let er = solver.random_coding(rate).unwrap();
        let oracle = grid_er(&w, rate);
        assert!(
            er.value >= oracle - 1e-9,
            "R={rate}: {} < {oracle}",
            er.value
        );
        assert!(
            er.value - oracle <= 1e-4,
            "R={rate}: {} vs {oracle}",
            er.value
        );
        assert!((0.0..=1.0).contains(&er.arg_s));
    }
    // Holevo capacity of this pair is h(½ + 1/(2√2)) ≈ 0.6009 bits.
    for rate in [0.7, 1.0] {
        let er = solver.random_coding(rate).unwrap();
        let esp = solver.sphere_packing(rate).unwrap();
        assert!(er.value.abs() < 1e-9 && esp.value.abs() < 1e-9 && !esp.divergent);
    }
}

#[test]
fn optimizer_is_deterministic() {
    let (w, _) = instance(77, 3, 4);
    let opt = OptimizerConfig {
        seed: 9,
        ..OptimizerConfig::default()
    };
    let a = max_e0_over_inputs(&w, 1.3, &opt).unwrap();
    let b = max_e0_over_inputs(&w, 1.3, &opt).unwrap();
    assert_eq!(a.distribution, b.distribution);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn e0_nonnegative_and_zero_at_origin(seed in any::<u64>(), d in 1usize..=6, n in 1usize..=6, s in 0.0f64..8.0) {
        let (w, p) = instance(seed, d, n);
        prop_assert!(e0_quantum(&w, &p, s).unwrap() >= -1e-10);
        prop_assert!(e0_quantum(&w, &p, 0.0).unwrap().abs() <= 1e-12);
        prop_assert!(e0_quantum(&w, &p, -0.1).is_err());
    }

    #[test]
    fn e0_is_nondecreasing_and_concave(seed in any::<u64>(), d in 1usize..=6, n in 1usize..=6, s in 0.1f64..3.0) {
        let (w, p) = instance(seed, d, n);
        let (d1, d2) = e0_derivatives(&w, &p, s, DEFAULT_DERIVATIVE_STEP).unwrap();
        prop_assert!(d1 >= -1e-6, "{}", d1);
        prop_assert!(d2 <= 1e-6, "{}", d2);
    }

    #[test]
    fn concavity_in_s(seed in any::<u64>(), d in 1usize..=6, n in 1usize..=6,
                      a in 0.0f64..8.0, b in 0.0f64..8.0, theta in 0.0f64..=1.0) {
        let (w, p) = instance(seed, d, n);
        let (s1, s2) = (a.min(b), a.max(b));
        let mid = e0_quantum(&w, &p, theta * s1 + (1.0 - theta) * s2).unwrap();
        let chord = theta * e0_quantum(&w, &p, s1).unwrap() + (1.0 - theta) * e0_quantum(&w, &p, s2).unwrap();
        prop_assert!(mid >= chord - 1e-9 * mid.abs().max(chord.abs()).max(1.0));
    }

    #[test]
    fn f_map_is_convex_and_matches_e0(seed in any::<u64>(), d in 1usize..=6, n in 1usize..=6,
                                       a in 1.0f64..9.0, b in 1.0f64..9.0, theta in 0.0f64..=1.0) {
        let (w, p) = instance(seed, d, n);
        let (l, r) = (a.min(b), a.max(b));
        let ft = f_map(&w, &p, theta * l + (1.0 - theta) * r).unwrap();
        let chord = theta * f_map(&w, &p, l).unwrap() + (1.0 - theta) * f_map(&w, &p, r).unwrap();
        prop_assert!(ft <= chord + 1e-9 * ft.abs().max(chord.abs()).max(1.0));
        prop_assert!((f_map(&w, &p, l).unwrap() + e0_quantum(&w, &p, l - 1.0).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn classical_reduction(seed in any::<u64>(), nx in 1usize..=6, ny in 1usize..=6, s in 0.0f64..8.0) {
        let mut rng = rng_from_seed(seed);
        let q = ClassicalChannel::new((0..nx).map(|_| random_simplex(&mut rng, ny)).collect()).unwrap();
        let p = ProbabilityDistribution::new(random_simplex(&mut rng, nx)).unwrap();
        let (a, b) = (e0_quantum(&embed_classical(&q), &p, s).unwrap(), e0_classical(&q, &p, s).unwrap());
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn useless_channel_is_zero(seed in any::<u64>(), d in 1usize..=6, n in 1usize..=6, s in 0.0f64..8.0) {
        let mut rng = rng_from_seed(seed);
        let state = DensityOperator::new(random_density(&mut rng, d, d, 1e3)).unwrap();
        let w = CQChannel::new(vec![state; n]).unwrap();
        let p = ProbabilityDistribution::new(random_simplex(&mut rng, n)).unwrap();
        prop_assert!(e0_quantum(&w, &p, s).unwrap().abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn exponents_are_ordered_and_nonincreasing(seed in any::<u64>(), d in 2usize..=3, n in 2usize..=3) {
        let (w, _) = instance(seed, d, n);
        let opt = OptimizerConfig::default();
        let solver = ExponentSolver::new(&w, opt.clone(), 4.0).unwrap();
        let rates: Vec<f64> = (0..=5).map(|i| i as f64 * 0.2).collect();
        let mut prev: Option<(f64, f64)> = None;
        for &r in &rates {
            let er = solver.random_coding(r).unwrap();
            let esp = solver.sphere_packing(r).unwrap();
            prop_assert!(er.value >= 0.0 && esp.value >= 0.0);
            if !esp.divergent {
                prop_assert!(esp.value >= er.value - opt.tol, "R={}: {} < {}", r, esp.value, er.value);
            }
            if let Some((pe, ps)) = prev {
                prop_assert!(er.value <= pe + opt.tol);
                prop_assert!(esp.value <= ps + opt.tol || ps.is_infinite());
            }
            prev = Some((er.value, esp.value));
        }
    }
}
