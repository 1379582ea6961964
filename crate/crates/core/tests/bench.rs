use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttnet::bench::ed::{ed_ground_state, EdOptions};
use ttnet::bench::generators::{
    grid_point, hierarchical_chain, hierarchy_level, multivariate_normal, CovarianceTree, QuanticsFunction,
    QuanticsOrder,
};
use ttnet::decompose::StructureMode;
use ttnet::factorize::{factorize, survey, FactorizeConfig, StructureSearch};
use ttnet::linalg::full_eigh;
use ttnet::spin::{Exchange, SpinModel, SpinSize, XxzRow};

fn bonds(m: &SpinModel) -> Vec<XxzRow> {
    match &m.exchange {
        Exchange::Xxz(r) => r.clone(),
        _ => panic!("hierarchical chain is XXZ"),
    }
}

#[test]
fn hierarchy_levels_for_eight_sites() {
    let m = hierarchical_chain(3, 1.0, 0.5).unwrap();
    let rows = bonds(&m);
    assert_eq!(rows.len(), 7);
    let level = |h: i32| -> Vec<usize> { rows.iter().filter(|r| r.coupling == 0.5f64.powi(h)).map(|r| r.i).collect() };
    assert_eq!(level(0), vec![0, 2, 4, 6]);
    assert_eq!(level(1), vec![1, 5]);
    assert_eq!(level(2), vec![3]);
    assert!(rows.iter().all(|r| r.j == r.i + 1 && r.anisotropy == 1.0));
}

#[test]
fn hierarchy_sets_partition_the_chain() {
    for d in 2..=9u32 {
        let n = 1usize << d;
        let mut count = vec![0; n - 1];
        for h in 0..d {
            // I(h) = { 2^h (2k + 1) - 1 }
            let mut k = 0;
            while (1usize << h) * (2 * k + 1) - 1 < n - 1 {
                let i = (1usize << h) * (2 * k + 1) - 1;
                assert_eq!(hierarchy_level(i), h);
                count[i] += 1;
                k += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 1), "depth {d}");
        assert_eq!(bonds(&hierarchical_chain(d, 1.0, 0.5).unwrap()).len(), n - 1);
    }
    assert!(hierarchical_chain(1, 1.0, 0.5).is_err());
    assert!(hierarchical_chain(3, 1.0, 0.0).is_err());
}

#[test]
fn uniform_alpha_is_the_open_heisenberg_chain() {
    let m = hierarchical_chain(2, 1.0, 1.0).unwrap();
    assert!(bonds(&m).iter().all(|r| r.coupling == 1.0));
    let e = ed_ground_state(&m, &EdOptions::default()).unwrap().energy;
    let mut chain = SpinModel::uniform(4, SpinSize::HALF);
    chain.exchange = Exchange::Xxz((0..3).map(|i| XxzRow { i, j: i + 1, coupling: 1.0, anisotropy: 1.0 }).collect());
    assert_eq!(e, ed_ground_state(&chain, &EdOptions::default()).unwrap().energy);
    // Four-site open chain: E0 = -(3 + 2 sqrt 3) / 4.
    assert!((e + (3.0 + 2.0 * 3f64.sqrt()) / 4.0).abs() < 1e-12);
}

/// Independent decode: variable-major legs, bit `l` worth `2^-(l+1)`.
fn direct_eval(f: &QuanticsFunction, index: usize) -> f64 {
    let legs = f.vars * f.bits;
    let mut x = vec![0.0; f.vars];
    for leg in 0..legs {
        let bit = (index >> (legs - 1 - leg)) & 1;
        let (v, l) = (leg / f.bits, leg % f.bits);
        x[v] += bit as f64 * 0.5f64.powi(l as i32 + 1);
    }
    let mut total = 0.0;
    for (j, k) in f.k.iter().enumerate() {
        let dot: f64 = k.iter().zip(&x).map(|(a, b)| a * b).sum();
        total += ((j + 1) as f64 * dot).cos();
    }
    total
}

#[test]
fn quantics_entries_match_pointwise_evaluation() {
    let f = QuanticsFunction::random(30, 3, 5, QuanticsOrder::VariableMajor, 0);
    let t = f.tensor().unwrap();
    assert_eq!(t.shape(), &[2; 15]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let idx = rng.random_range(0..t.len());
        assert!((t.data()[idx] - direct_eval(&f, idx)).abs() < 1e-12);
    }
    let g = QuanticsFunction { order: QuanticsOrder::Interleaved, ..f.clone() };
    // Interleaved leg 3 is the second bit of variable 0.
    assert_eq!(QuanticsOrder::Interleaved.decode(3, 3, 5), (0, 1));
    let mut digits = vec![0; 15];
    digits[3] = 1;
    assert_eq!(g.point(&digits), vec![0.25, 0.0, 0.0]);
}

#[test]
fn quantics_zero_wave_vector_is_constant_and_guarded() {
    let f = QuanticsFunction { k: vec![vec![0.0; 3]], vars: 3, bits: 2, order: QuanticsOrder::VariableMajor };
    assert!(f.tensor().unwrap().data().iter().all(|&x| x == 1.0));
    let big = QuanticsFunction { bits: 9, ..f };
    let err = big.tensor().unwrap_err().to_string();
    assert!(err.contains("lower the bit count"), "{err}");
}

#[test]
fn covariance_rules() {
    let pair = CovarianceTree::new(2, vec![(0, 1)], vec![0, 1]).unwrap();
    let k = pair.covariance(0.2).unwrap();
    assert_eq!([k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]], [1.0, 0.2, 0.2, 1.0]);
    let t = CovarianceTree::balanced(&[0, 2, 1, 3]).unwrap();
    let k = t.covariance(0.2).unwrap();
    // Leaves 0 and 2 share a parent; 0 and 1 meet at the root.
    assert!((k[(0, 2)] - 0.04).abs() < 1e-15);
    assert!((k[(0, 1)] - 0.2f64.powi(4)).abs() < 1e-15);
    assert!(CovarianceTree::new(3, vec![(0, 1)], vec![0, 2]).is_err());
    assert!(CovarianceTree::new(3, vec![(0, 1), (0, 1)], vec![0, 2]).is_err());
    let err = multivariate_normal(&pair, 1.0, 2).unwrap_err().to_string();
    assert!(err.contains("not positive definite"), "{err}");
}

#[test]
fn covariance_positive_definite_up_to_depth_four() {
    for depth in 1..=4u32 {
        let d = 1usize << depth;
        let t = CovarianceTree::balanced(&(0..d).collect::<Vec<_>>()).unwrap();
        for k in 0..=10 {
            let rho = 0.05 * k as f64;
            let m = t.covariance(rho).unwrap();
            for a in 0..d {
                for b in 0..d {
                    assert_eq!(m[(a, b)], m[(b, a)]);
                }
            }
            assert!(full_eigh(m.as_ref()).unwrap().values[0] > 0.0, "depth {depth} rho {rho}");
        }
    }
}

#[test]
fn gaussian_grid_values() {
    let pair = CovarianceTree::new(2, vec![(0, 1)], vec![0, 1]).unwrap();
    let t = multivariate_normal(&pair, 0.2, 3).unwrap();
    assert_eq!(t.shape(), &[8, 8]);
    assert_eq!(grid_point(0, 3), -5.0);
    assert_eq!(grid_point(4, 3), 0.0);
    // K^-1 = [[1, -0.2], [-0.2, 1]] / 0.96
    let (x, y) = (grid_point(5, 3), grid_point(2, 3));
    let q = (x * x - 0.4 * x * y + y * y) / 0.96;
    assert!((t.get(&[5, 2]) - (-0.5 * q).exp()).abs() < 1e-14);
    assert_eq!(t.get(&[4, 4]), 1.0);
}

#[test]
fn independent_gaussians_factorize_without_entanglement() {
    let tree = CovarianceTree::balanced(&[0, 1, 2, 3]).unwrap();
    let t = multivariate_normal(&tree, 0.0, 2).unwrap();
    let cfg = FactorizeConfig {
        chi_init: 16,
        structure: StructureSearch { mode: StructureMode::Entanglement, ..Default::default() },
        max_sweeps: 2,
        ..Default::default()
    };
    let (_, out) = factorize(t, &cfg).unwrap();
    let report = survey(&out.state).unwrap();
    for b in out.state.topology.aux_bonds() {
        assert!(report.entropies[&b].abs() < 1e-12, "bond {b}: {}", report.entropies[&b]);
        assert_eq!(out.state.bond_dim(b), 1);
    }
}
