use std::f64::consts::PI;

use decohere_core::qcore::{partial_trace, DensityMatrix, StateVector};
use decohere_core::relstate::*;
use decohere_core::Cplx;
use num_rational::Ratio;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schmidt_reconstructs(d1 in 1usize..5, d2 in 1usize..5, seed in prop::collection::vec(-1.0..1.0f64, 32)) {
        let amps: Vec<Cplx<f64>> = (0..d1 * d2).map(|k| Cplx::new(seed[2 * k % 32], seed[(2 * k + 1) % 32])).collect();
        prop_assume!(amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
        let v = StateVector::normalized(amps).unwrap();
        let st = schmidt_decompose(&BipartiteState::from_vector(&v, d1, d2).unwrap()).unwrap();
        prop_assert!(st.reconstruction_error().unwrap() < 1e-12);
        let form = st.schmidt.as_ref().unwrap();
        prop_assert!(form.coefficients.windows(2).all(|w| w[0] >= w[1] - 1e-15));
        prop_assert!((form.coefficients.iter().map(|s| s * s).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phased_swap_is_undone_by_counterswap(phases in prop::collection::vec(0.0..2.0 * PI, 2..7), a in 0usize..7, b in 0usize..7) {
        let n = phases.len();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let st = BipartiteState::equal_amplitude(&phases).unwrap();
        let s = swap_phased(&st, Side::One, a, b, phases[b] - phases[a]).unwrap();
        prop_assert!(s.reduced(Side::Two).unwrap().max_abs_diff(&st.reduced(Side::Two).unwrap()).unwrap() < 1e-12);
        let back = swap(&s, Side::Two, a, b).unwrap();
        prop_assert!(1.0 - back.fidelity(&st).unwrap() < 1e-12);
    }

    #[test]
    fn fine_grain_counts_exactly(num in prop::collection::vec(1u64..20, 2..5)) {
        let total: u64 = num.iter().sum();
        let weights: Vec<Ratio<u64>> = num.iter().map(|&m| Ratio::new(m, total)).collect();
        let fg = fine_grain::<f64>(&weights).unwrap();
        prop_assert_eq!(&fg.probabilities, &weights);
        prop_assert_eq!(fg.counts.iter().sum::<u64>(), fg.denominator);
        prop_assert_eq!(fg.branch_of.len() as u64, fg.denominator);
    }

    #[test]
    fn chain_coherence_is_half_the_product(p in 0.0..=1.0f64, r in 0.0..=1.0f64, n in 0.0..=1.0f64) {
        let ch = build_chain(ChainOverlaps { photon: p, rhodopsin: r, neurons: n }).unwrap();
        let explicit = partial_trace(&DensityMatrix::from_pure(&ch.state), &ch.dims(), 0).unwrap().get(0, 1).norm();
        prop_assert!((explicit - 0.5 * p * r * n).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_is_bounded(n in 1usize..6, overlap in 0.0..=1.0f64, k in 1usize..6) {
        prop_assume!(k <= n);
        let st = BranchingState::qubit_records(n, overlap).unwrap();
        let hs = st.system_entropy().unwrap();
        let frag: Vec<usize> = (0..k).collect();
        let i = st.mutual_information(&frag).unwrap();
        prop_assert!(i > -1e-12 && i <= 2.0 * hs + 1e-12);
    }
}

#[test]
fn darwinism_plateau_over_eight_fragments() {
    let st = BranchingState::<f64>::perfect_records(8).unwrap();
    let prof = redundancy_profile(&st, 8, 3).unwrap();
    for (k, i) in prof.fragment_sizes.iter().zip(&prof.mutual_information) {
        let want = if *k < 8 { 1.0 } else { 2.0 };
        assert!((i - want).abs() < 1e-9, "size {k}: {i}");
    }
}

#[test]
fn noisy_records_need_more_fragments() {
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let (n, eps) = (6, 0.6f64);
    let st = BranchingState::<f64>::qubit_records(n, eps).unwrap();
    let prof = redundancy_profile(&st, 5, 0).unwrap();
    // Two branches: every entropy is binary with eigenvalues (1 +- overlap) / 2.
    let single = h((1.0 + eps.powi(n as i32)) / 2.0) + h((1.0 + eps) / 2.0) - h((1.0 + eps.powi(n as i32 - 1)) / 2.0);
    assert!((prof.mutual_information[0] - single).abs() < 1e-12);
    assert!(prof.deficits[0] > 0.2);
    assert!(prof.mutual_information.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn unequal_weights_are_refused_by_envariance() {
    let st = BipartiteState::diagonal(&[Cplx::new(0.6f64, 0.0), Cplx::new(0.8, 0.0)]).unwrap();
    match envariant_probabilities(&st) {
        Err(decohere_core::Error::Precondition(m)) => assert!(m.contains("fine_grain")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn large_subset_families_are_sampled_by_seed() {
    let (a, exhaustive) = fragment_subsets(16, 8, 11);
    assert!(!exhaustive);
    assert_eq!(a.len(), SAMPLED_SUBSETS);
    assert_eq!(fragment_subsets(16, 8, 11).0, a);
    assert_ne!(fragment_subsets(16, 8, 12).0, a);
    assert!(a.iter().all(|s| s.len() == 8 && s.windows(2).all(|w| w[0] < w[1]) && s[7] < 16));
    let (all, exhaustive) = fragment_subsets(16, 6, 11);
    assert!(exhaustive && all.len() == 8008);
}
