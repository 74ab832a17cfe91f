use obsent::coarse::{
    alpha_oe, measurement_channel, merge_indices, observational_entropy, outcomes, sequential, tensor_cg,
};
use obsent::divergence::{classical_petz_renyi, petz_renyi, renyi_entropy, von_neumann};
use obsent::operator::{max_abs_diff, op_power, spectral, support_projector, Propagator};
use obsent::random::{
    random_basis_cg, random_density, random_hermitian, random_partition, random_povm, random_projective_cg, rng_for,
};
use obsent::state::{
    coarse_grained_state, decompose_alpha_oe, is_coarse_grained, post_measurement_state, renyi_post_measurement,
};
use obsent::thermo::{jackson_check, LevelSystem};
use obsent::{CoarseGraining, DensityOperator, Operator};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const GRID: [f64; 5] = [0.3, 0.7, 1.5, 2.0, 3.0];

fn rng(seed: u64) -> ChaCha8Rng {
    rng_for(seed, "properties", 0)
}

fn state(r: &mut ChaCha8Rng, d: usize, deficient: bool) -> DensityOperator {
    let rank = if deficient { Some(r.random_range(1..=d)) } else { None };
    random_density(r, d, rank)
}

fn cg(r: &mut ChaCha8Rng, d: usize, kind: u8) -> CoarseGraining {
    match kind % 3 {
        0 => random_projective_cg(r, d),
        1 => random_basis_cg(r, d),
        _ => {
            let n = r.random_range(2..=d + 2);
            random_povm(r, d, n)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_reconstruction(seed: u64, d in 1usize..=8) {
        let h = random_hermitian(&mut rng(seed), d, 2.0);
        let es = spectral(&h, 1e-9);
        prop_assert!(max_abs_diff(&es.reconstruct(), h.matrix()) <= 1e-8);
    }

    #[test]
    fn powers_cancel_on_support(seed: u64, d in 1usize..=6, deficient: bool, s in 0.1f64..2.5) {
        let rho = state(&mut rng(seed), d, deficient);
        let prod = op_power(&rho, s).matrix() * op_power(&rho, -s).matrix();
        prop_assert!(max_abs_diff(&prod, &support_projector(&rho)) <= 1e-8);
    }

    #[test]
    fn propagation_preserves_spectrum(seed: u64, d in 1usize..=6, t in 0.0f64..10.0) {
        let mut r = rng(seed);
        let rho = state(&mut r, d, false);
        let h = random_hermitian(&mut r, d, 1.0);
        let out = Propagator::new(&h).evolve(&rho, t).unwrap();
        prop_assert!((out.purity() - rho.purity()).abs() <= 1e-9);
        for (a, b) in out.eigenvalues().iter().zip(rho.eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn petz_ordering_and_nonnegativity(seed: u64, d in 1usize..=6, deficient: bool) {
        let mut r = rng(seed);
        let rho = state(&mut r, d, deficient);
        let sigma = state(&mut r, d, false);
        let values: Vec<f64> = GRID.iter().map(|&a| petz_renyi(&rho, &sigma, a).unwrap().value()).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10);
        }
        prop_assert!(values.iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn measurement_data_processing(seed: u64, d in 1usize..=6, kind: u8, deficient: bool) {
        let mut r = rng(seed);
        let rho = state(&mut r, d, deficient);
        let sigma = state(&mut r, d, false);
        let c = cg(&mut r, d, kind);
        let (p, q) = (measurement_channel(&c, &rho).unwrap(), measurement_channel(&c, &sigma).unwrap());
        for &a in &GRID {
            let quantum = petz_renyi(&rho, &sigma, a).unwrap().value();
            let classical = classical_petz_renyi(&p.weights, &q.weights, a).unwrap().value();
            prop_assert!(classical <= quantum + 1e-10, "α={} {} > {}", a, classical, quantum);
        }
    }

    #[test]
    fn renyi_meets_von_neumann(seed: u64, d in 1usize..=6, deficient: bool) {
        let rho = state(&mut rng(seed), d, deficient);
        let s = von_neumann(&rho);
        for a in [1.0 - 1e-7, 1.0 + 1e-7] {
            prop_assert!((renyi_entropy(&rho, a).unwrap() - s).abs() <= 1e-5);
        }
    }

    #[test]
    fn oe_bounds_and_ordering(seed: u64, d in 1usize..=6, kind: u8, deficient: bool) {
        let mut r = rng(seed);
        let rho = state(&mut r, d, deficient);
        let c = cg(&mut r, d, kind);
        let logd = (d as f64).ln();
        let mut prev = f64::INFINITY;
        for &a in &GRID {
            let s = alpha_oe(&c, &rho, a).unwrap();
            prop_assert!(s >= renyi_entropy(&rho, a).unwrap() - 1e-10);
            prop_assert!(s <= logd + 1e-10);
            prop_assert!(s <= prev + 1e-10);
            prev = s;
        }
    }

    #[test]
    fn concavity_and_quasi_concavity(seed: u64, d in 1usize..=6, kind: u8, l in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let (a, b) = (state(&mut r, d, false), state(&mut r, d, true));
        let c = cg(&mut r, d, kind);
        let m = a.mix(&b, l).unwrap();
        for alpha in [0.3, 0.7] {
            let (sa, sb, sm) = (alpha_oe(&c, &a, alpha).unwrap(), alpha_oe(&c, &b, alpha).unwrap(), alpha_oe(&c, &m, alpha).unwrap());
            prop_assert!(sm >= l * sa + (1.0 - l) * sb - 1e-10);
        }
        for alpha in [2.0, 3.0] {
            let (sa, sb, sm) = (alpha_oe(&c, &a, alpha).unwrap(), alpha_oe(&c, &b, alpha).unwrap(), alpha_oe(&c, &m, alpha).unwrap());
            prop_assert!(sm >= sa.min(sb) - 1e-10);
        }
    }

    #[test]
    fn sequential_chains_descend(seed: u64, d in 2usize..=5, kinds: [u8; 4]) {
        let mut r = rng(seed);
        let rho = state(&mut r, d, false);
        let mut c = cg(&mut r, d, kinds[0]);
        for &k in &kinds[1..] {
            let next = sequential(&c, &cg(&mut r, d, k)).unwrap();
            for &a in &GRID {
                prop_assert!(alpha_oe(&next, &rho, a).unwrap() <= alpha_oe(&c, &rho, a).unwrap() + 1e-10);
            }
            c = next;
        }
        for &a in &GRID {
            prop_assert!(alpha_oe(&c, &rho, a).unwrap() >= renyi_entropy(&rho, a).unwrap() - 1e-10);
        }
    }

    #[test]
    fn sequential_equality_when_ratios_match(seed: u64, d in 2usize..=5, kind: u8) {
        let mut r = rng(seed);
        let first = random_projective_cg(&mut r, d);
        let rho = coarse_grained_state(&first, &state(&mut r, d, false)).unwrap();
        let both = sequential(&first, &cg(&mut r, d, kind)).unwrap();
        for &a in &GRID {
            prop_assert!((alpha_oe(&both, &rho, a).unwrap() - alpha_oe(&first, &rho, a).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn merging_never_lowers_entropy(seed: u64, d in 2usize..=6, kind: u8, deficient: bool) {
        let mut r = rng(seed);
        let fine = cg(&mut r, d, kind);
        let rho = state(&mut r, d, deficient);
        let groups = random_partition(&mut r, fine.len());
        let (coarse, _) = merge_indices(&fine, &groups).unwrap();
        for a in [1.5, 2.0, 3.0] {
            prop_assert!(alpha_oe(&coarse, &rho, a).unwrap() >= alpha_oe(&fine, &rho, a).unwrap() - 1e-10);
        }
    }

    #[test]
    fn product_additivity(seed: u64, ka: u8, kb: u8) {
        let mut r = rng(seed);
        let (ra, rb) = (state(&mut r, 2, false), state(&mut r, 3, true));
        let (ca, cb) = (cg(&mut r, 2, ka), cg(&mut r, 3, kb));
        let prod = tensor_cg(&[ca.clone(), cb.clone()]).unwrap();
        for &a in &GRID {
            let lhs = alpha_oe(&prod, &ra.tensor(&rb), a).unwrap();
            prop_assert!((lhs - alpha_oe(&ca, &ra, a).unwrap() - alpha_oe(&cb, &rb, a).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn decompositions_hold_for_rank_one_projectors(seed: u64, d in 1usize..=6, deficient: bool) {
        let mut r = rng(seed);
        let c = random_basis_cg(&mut r, d);
        let rho = state(&mut r, d, deficient);
        let post = post_measurement_state(&c, &rho).unwrap();
        for a in [0.5, 1.0, 2.0, 3.0] {
            prop_assert!((renyi_post_measurement(&c, &rho, a).unwrap() - renyi_entropy(&post, a).unwrap()).abs() <= 1e-9);
            let (pt, dt) = decompose_alpha_oe(&c, &rho, a).unwrap();
            prop_assert!((pt + dt - alpha_oe(&c, &rho, a).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn von_neumann_decomposition_holds(seed: u64, d in 1usize..=6, deficient: bool) {
        let mut r = rng(seed);
        let c = random_projective_cg(&mut r, d);
        let rho = state(&mut r, d, deficient);
        let (pt, dt) = decompose_alpha_oe(&c, &rho, 1.0).unwrap();
        prop_assert!((pt + dt - observational_entropy(&c, &rho).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn coarse_grained_biconditional(seed: u64, d in 1usize..=6, eps in 0.05f64..0.5) {
        let mut r = rng(seed);
        let c = random_projective_cg(&mut r, d);
        let eq = coarse_grained_state(&c, &state(&mut r, d, true)).unwrap();
        let rep = is_coarse_grained(&c, &eq, 2.0).unwrap();
        prop_assert!(rep.state_test && rep.entropy_test);
        let pert = eq.mix(&state(&mut r, d, false), 1.0 - eps).unwrap();
        let far = max_abs_diff(pert.matrix(), coarse_grained_state(&c, &pert).unwrap().matrix()) >= 1e-3;
        let rep = is_coarse_grained(&c, &pert, 2.0).unwrap();
        prop_assert!(rep.agree);
        if far {
            prop_assert!(!rep.state_test && !rep.entropy_test);
        }
    }

    #[test]
    fn jackson_identity(energies in prop::collection::vec(0.0f64..4.0, 1..8), v in 1u32..6, t0 in 0.2f64..3.0) {
        let lv = LevelSystem::new(energies, f64::from(v)).unwrap();
        for a in [0.5, 2.0, 3.0, 5.0] {
            prop_assert!(jackson_check(&lv, t0, a).unwrap().gap.abs() <= 1e-9);
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one(seed: u64, d in 1usize..=6, kind: u8, deficient: bool) {
        let mut r = rng(seed);
        let rho = state(&mut r, d, deficient);
        let o = outcomes(&cg(&mut r, d, kind), &rho).unwrap();
        prop_assert!((o.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }
}
