use faer::c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttnet::decompose::StructureMode;
use ttnet::factorize::{
    dense_to_ttn, embed_environment, environment, factorize, fidelity, normalize_target, reconstruct,
    sequential_svd_to_mpn, FactorizeConfig, FidelityConfig, StructureSearch, TargetTensor,
};
use ttnet::linalg::{entropy, singular_values};
use ttnet::state::TtnState;
use ttnet::sweep::NoObserver;
use ttnet::testing::random_tensor;
use ttnet::topology::Topology;
use ttnet::{Error, Scalar, Tensor};

fn unit_dense<T: Scalar>(s: &TtnState<T>) -> Tensor<T> {
    let mut d = s.to_dense().unwrap();
    d.scale(T::from_real(1.0 / s.norm));
    d
}

fn dense_overlap<T: Scalar>(t: &TargetTensor<T>, s: &TtnState<T>) -> T {
    unit_dense(s).inner(&t.data)
}

/// Bell pairs (0, n-1), (1, n-2), ...
fn rainbow(n: usize) -> Tensor<f64> {
    Tensor::from_fn(&vec![2; n], |idx| if (0..n / 2).all(|k| idx[k] == idx[n - 1 - k]) { 1.0 } else { 0.0 })
}

fn cut_rank(t: &Tensor<f64>, left: &[usize]) -> usize {
    let mut perm = left.to_vec();
    perm.extend((0..t.rank()).filter(|k| !left.contains(k)));
    let m = t.permute(&perm);
    let sv = singular_values(m.matrix(left.len())).unwrap();
    sv.iter().filter(|&&x| x > 1e-12 * sv[0]).count()
}

fn cut_entropy<T: Scalar>(t: &Tensor<T>, left: &[usize]) -> f64 {
    let mut perm = left.to_vec();
    perm.extend((0..t.rank()).filter(|k| !left.contains(k)));
    let m = t.permute(&perm);
    entropy(&singular_values(m.matrix(left.len())).unwrap())
}

#[test]
fn normalization_keeps_direction_and_records_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut raw: Tensor<f64> = random_tensor(&[2; 6], &mut rng);
    raw.normalize();
    let unit = normalize_target(raw.clone()).unwrap();
    assert!((unit.norm - 1.0).abs() < 1e-14);
    let mut seven = raw.clone();
    seven.scale(7.0);
    let t = normalize_target(seven).unwrap();
    assert!((t.norm - 7.0).abs() < 1e-12);
    assert!((t.data.norm() - 1.0).abs() < 1e-14);
    assert!(t.data.data().iter().zip(raw.data()).all(|(a, b)| (a - b).abs() < 1e-14));
    assert!(matches!(normalize_target(Tensor::<f64>::zeros(&[2; 4])), Err(Error::InvalidArgument(_))));
}

#[test]
fn product_tensor_gives_unit_bonds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut t: Tensor<c64> = random_tensor(&[3], &mut rng);
    for _ in 1..6 {
        t = t.contract(&[], &random_tensor(&[2], &mut rng), &[]);
    }
    let target = normalize_target(t).unwrap();
    let s = sequential_svd_to_mpn(&target, 8, 0.0).unwrap();
    for b in s.topology.aux_bonds() {
        assert_eq!(s.bond_dim(b), 1, "bond {b}");
    }
    assert!((fidelity(&target, &s).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn random_six_leg_tensor_is_exact_at_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let target = normalize_target(random_tensor::<c64>(&[2; 6], &mut rng)).unwrap();
    let s = sequential_svd_to_mpn(&target, 8, 0.0).unwrap();
    s.validate(1e-10).unwrap();
    assert!((fidelity(&target, &s).unwrap() - 1.0).abs() < 1e-10);
    let d = unit_dense(&s);
    assert!(d.data().iter().zip(target.data.data()).all(|(a, b)| (a - b).norm() < 1e-10));
    assert!((s.to_dense().unwrap().norm() - target.norm).abs() < 1e-10);
}

#[test]
fn rainbow_chain_needs_full_rank_at_the_middle() {
    let target = normalize_target(rainbow(6)).unwrap();
    let s = sequential_svd_to_mpn(&target, 64, 0.0).unwrap();
    let mid = s.topology.center();
    let (left, _) = s.topology.split(mid);
    assert_eq!(s.bond_dim(mid), cut_rank(&target.data, &left));
    assert_eq!(s.bond_dim(mid), 8);
}

#[test]
fn any_tree_reproduces_the_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let target = normalize_target(random_tensor::<f64>(&[2; 8], &mut rng)).unwrap();
    let s = dense_to_ttn(&target, Topology::pbt(8).unwrap(), 16, 0.0).unwrap();
    s.validate(1e-10).unwrap();
    assert!((fidelity(&target, &s).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn environment_inner_product_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [6, 7, 8] {
        let target = normalize_target(random_tensor::<c64>(&vec![2; n], &mut rng)).unwrap();
        let other = normalize_target(random_tensor::<c64>(&vec![2; n], &mut rng)).unwrap();
        let s = sequential_svd_to_mpn(&other, 3, 0.0).unwrap();
        let (p, q) = s.topology.center_tensors();
        let m = s.merge_pair(p, q).unwrap();
        let env = environment(&target, &s, [p, q], &m.legs).unwrap();
        let via_env = m.psi.inner(&env);
        let dense = dense_overlap(&target, &s);
        assert!((via_env - dense).norm() < 1e-10, "n={n}");
    }
}

#[test]
fn environment_of_an_exact_state_is_its_center() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let target = normalize_target(random_tensor::<f64>(&[2; 6], &mut rng)).unwrap();
    let s = sequential_svd_to_mpn(&target, 8, 0.0).unwrap();
    let (p, q) = s.topology.center_tensors();
    let m = s.merge_pair(p, q).unwrap();
    let e = embed_environment(environment(&target, &s, [p, q], &m.legs).unwrap()).unwrap();
    assert!(e.data().iter().zip(m.psi.data()).all(|(a, b)| (a - b).abs() < 1e-10));
}

#[test]
fn orthogonal_target_has_no_environment() {
    let mut a = Tensor::<f64>::zeros(&[2; 6]);
    a.set(&[0; 6], 1.0);
    let mut b = Tensor::<f64>::zeros(&[2; 6]);
    b.set(&[1; 6], 1.0);
    let ta = normalize_target(a).unwrap();
    let tb = normalize_target(b).unwrap();
    let s = sequential_svd_to_mpn(&ta, 4, 0.0).unwrap();
    assert_eq!(fidelity(&tb, &s).unwrap(), 0.0);
    let (p, q) = s.topology.center_tensors();
    let m = s.merge_pair(p, q).unwrap();
    let env = environment(&tb, &s, [p, q], &m.legs).unwrap();
    assert!(matches!(embed_environment(env), Err(Error::DegenerateEnvironment)));
}

#[test]
fn embedding_never_lowers_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let target = normalize_target(random_tensor::<c64>(&[2; 6], &mut rng)).unwrap();
        let s = sequential_svd_to_mpn(&target, 2, 0.0).unwrap();
        let before = fidelity(&target, &s).unwrap();
        let (p, q) = s.topology.center_tensors();
        let m = s.merge_pair(p, q).unwrap();
        let env = environment(&target, &s, [p, q], &m.legs).unwrap();
        let after = embed_environment(env.clone()).unwrap().inner(&env).modulus();
        assert!(after >= before - 1e-12, "{after} < {before}");
    }
}

#[test]
fn reconstruction_untangles_the_rainbow() {
    let target = normalize_target(rainbow(6)).unwrap();
    let mut s = sequential_svd_to_mpn(&target, 64, 0.0).unwrap();
    let max_before =
        s.topology.aux_bonds().map(|b| cut_entropy(&target.data, &s.topology.split(b).0)).fold(0.0, f64::max);
    let cfg = FactorizeConfig {
        structure: StructureSearch { mode: StructureMode::Entanglement, ..StructureSearch::default() },
        ..FactorizeConfig::default()
    };
    let stage = reconstruct(&mut s, 64, &cfg, &mut NoObserver).unwrap();
    let max_after = stage.last().entropies.values().copied().fold(0.0, f64::max);
    assert!(max_after < max_before - 0.5, "{max_after} vs {max_before}");
    assert!((fidelity(&target, &s).unwrap() - 1.0).abs() < 1e-10);
    for pair in [[0usize, 5], [1, 4], [2, 3]] {
        assert!(s.topology.has_split(&pair), "Bell pair {pair:?} grouped");
    }
}

#[test]
fn fixed_structure_reconstruction_is_a_no_op() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let target = normalize_target(random_tensor::<f64>(&[2; 7], &mut rng)).unwrap();
    let mut s = sequential_svd_to_mpn(&target, 16, 0.0).unwrap();
    let splits = s.topology.splits();
    let cfg = FactorizeConfig { max_sweeps: 2, ..FactorizeConfig::default() };
    let stage = reconstruct(&mut s, 16, &cfg, &mut NoObserver).unwrap();
    assert_eq!(s.topology.splits(), splits);
    for (b, e) in &stage.last().entropies {
        let (left, _) = s.topology.split(*b);
        assert!((e - cut_entropy(&target.data, &left)).abs() < 1e-12, "bond {b}");
    }
}

#[test]
fn fidelity_sweeps_reach_exactness_at_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let raw: Tensor<c64> = random_tensor(&[2; 6], &mut rng);
    let cfg = FactorizeConfig {
        chi_init: 2,
        fidelity: Some(FidelityConfig {
            chi_schedule: vec![2, 8],
            max_sweeps: vec![3, 3],
            ..FidelityConfig::default()
        }),
        ..FactorizeConfig::default()
    };
    let (target, out) = factorize(raw, &cfg).unwrap();
    assert_eq!(out.fidelity_stages.len(), 2);
    let f = fidelity(&target, &out.state).unwrap();
    assert!(f > 1.0 - 1e-8, "{f}");
    let recorded = out.fidelity_stages[1].value(out.state.topology.origin()).unwrap();
    assert!((recorded - f).abs() < 1e-10);
}

#[test]
fn fidelity_rises_at_fixed_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let raw: Tensor<f64> = random_tensor(&[2; 8], &mut rng);
    let cfg = FactorizeConfig {
        chi_init: 3,
        fidelity: Some(FidelityConfig { chi_schedule: vec![3], max_sweeps: vec![4], ..FidelityConfig::default() }),
        ..FactorizeConfig::default()
    };
    let (target, out) = factorize(raw.clone(), &cfg).unwrap();
    let mpn = sequential_svd_to_mpn(&target, 3, 0.0).unwrap();
    let f0 = fidelity(&target, &mpn).unwrap();
    let origin = out.state.topology.origin();
    let per_sweep: Vec<f64> = out.fidelity_stages[0].reports.iter().map(|r| r.values[&origin]).collect();
    assert!(per_sweep[0] >= f0 - 1e-10);
    for w in per_sweep.windows(2) {
        let trunc = 1e-10;
        assert!(w[1] >= w[0] - trunc, "{per_sweep:?}");
    }
}

#[test]
fn distance_identity_holds_for_truncated_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let target = normalize_target(random_tensor::<c64>(&[2; 8], &mut rng)).unwrap();
    let s = sequential_svd_to_mpn(&target, 3, 0.0).unwrap();
    let d = unit_dense(&s);
    let mut diff = target.data.clone();
    for (a, b) in diff.data_mut().iter_mut().zip(d.data()) {
        *a -= *b;
    }
    let overlap = d.inner(&target.data);
    assert!((diff.norm().powi(2) - (2.0 - 2.0 * overlap.re)).abs() < 1e-10);
    assert!(fidelity(&target, &s).unwrap() <= 1.0 + 1e-12);
}
