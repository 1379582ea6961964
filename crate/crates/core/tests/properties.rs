use faer::c64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttnet::audit::dense_entropy;
use ttnet::decompose::{decompose_tensor, heat_bath_probabilities, DecomposeParams, StructureMode};
use ttnet::linalg::{full_svd, truncate_spectrum, truncation_rank, NOISE_FLOOR};
use ttnet::state::isometry_defect;
use ttnet::sweep::{sweep, Identity};
use ttnet::tensor::{adjoint_mul, identity, max_abs_diff};
use ttnet::testing::{random_matrix, random_state, random_tensor};
use ttnet::topology::Topology;

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    // Values drawn from a small set so that exact and near multiplets are common.
    prop::collection::vec(prop::sample::select(vec![1.0, 0.9, 0.9 + 1e-10, 0.5, 0.5, 0.3, 0.1, 1e-3, 1e-9]), 1..12)
        .prop_map(|mut v| {
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs(m in 1usize..10, n in 1usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix::<c64>(m, n, &mut rng);
        let s = full_svd(a.as_ref()).unwrap();
        prop_assert!(max_abs_diff(s.recompose().as_ref(), a.as_ref()) < 1e-12);
        let k = s.rank();
        prop_assert!(max_abs_diff(adjoint_mul(s.left.as_ref(), s.left.as_ref()).as_ref(), identity::<c64>(k).as_ref()) < 1e-12);
        prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn truncation_error_is_discarded_weight(values in spectrum(), chi in 1usize..12, delta in prop::sample::select(vec![0.0, 1e-8, 1e-3])) {
        let r = truncation_rank(&values, chi, 0.0, delta).unwrap();
        let total: f64 = values.iter().map(|x| x * x).sum();
        let dropped: f64 = values[r.kept..].iter().map(|x| x * x).sum();
        prop_assert!((r.error - dropped / total).abs() < 1e-15);
        prop_assert!(r.kept >= 1 && r.kept <= chi.min(values.len()));
        // Never cut inside a multiplet unless the whole kept range is one.
        if r.kept < values.len() && !r.forced_split {
            let (a, b) = (values[r.kept - 1], values[r.kept]);
            prop_assert!((a - b) / a >= delta);
        }
        if r.forced_split {
            prop_assert_eq!(r.kept, chi.min(values.len()));
        }
        prop_assert!(values[..r.kept].iter().all(|&x| x / values[0] > NOISE_FLOOR));
    }

    #[test]
    fn kept_values_are_renormalized(m in 2usize..8, n in 2usize..8, chi in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix::<f64>(m, n, &mut rng);
        let t = truncate_spectrum(full_svd(a.as_ref()).unwrap(), chi, 0.0, 1e-8).unwrap();
        let norm2: f64 = t.spectrum.values.iter().map(|x| x * x).sum();
        prop_assert!((norm2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn heat_bath_is_normalized_and_shift_invariant(
        s in prop::array::uniform3(0.0f64..3.0),
        t in 1e-4f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        let p = heat_bath_probabilities(&s, t).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let q = heat_bath_probabilities(&s.map(|x| x + shift), t).unwrap();
        for k in 0..3 {
            prop_assert!((p[k] - q[k]).abs() < 1e-12);
        }
        // The lowest entropy is the most likely choice.
        let best = (0..3).min_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap()).unwrap();
        prop_assert!(p.iter().all(|&x| x <= p[best] + 1e-15));
    }

    #[test]
    fn decomposition_gives_isometries(
        dims in prop::array::uniform4(1usize..5),
        mode in prop::sample::select(vec![StructureMode::Fixed, StructureMode::Entanglement, StructureMode::Truncation]),
        temperature in prop::sample::select(vec![0.0, 0.5]),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = random_tensor::<c64>(&dims, &mut rng);
        psi.normalize();
        let chi = dims.iter().product::<usize>();
        let params = DecomposeParams { chi, mode, temperature, eps_s: 1e-8, sigma: 0.0, delta_s: 1e-8 };
        let dec = decompose_tensor(&psi, &params, &mut rng).unwrap();
        prop_assert!(isometry_defect(&dec.left) < 1e-12);
        prop_assert!(isometry_defect(&dec.right) < 1e-12);
        let back = dec.recompose();
        let err = back.data().iter().zip(psi.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12, "{}", err);
        if let Some(p) = dec.choice.probabilities {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sweep_entropies_match_dense_bipartitions(
        n in 4usize..=10,
        pbt in any::<bool>(),
        chi in 1usize..9,
        seed in any::<u64>(),
    ) {
        let topo = if pbt && n == 8 { Topology::pbt(8).unwrap() } else { Topology::mpn(n).unwrap() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = random_state::<c64>(topo, 2, chi, &mut rng);
        let chi_max = st.max_bond_dim();
        let r = sweep(&mut st, &mut Identity, &DecomposeParams::fixed(chi_max), &mut rng).unwrap();
        let dense = st.to_dense().unwrap();
        for (&b, &s) in &r.entropies {
            let exact = dense_entropy(&dense, &st.topology.split(b).0).unwrap();
            prop_assert!((exact - s).abs() < 1e-8, "bond {}: {} vs {}", b, s, exact);
        }
        prop_assert_eq!(r.entropies.len(), st.topology.n_bonds());
    }
}
