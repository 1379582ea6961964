use faer::{c64, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttnet::decompose::{
    cooled_temperature, decompose_tensor, heat_bath_probabilities, leg_entropy, DecomposeParams, Pairing, StructureMode,
};
use ttnet::linalg::{
    entropy, full_eigh, full_svd, lanczos_lowest, truncate_spectrum, truncation_rank, LanczosOptions, SingularSpectrum,
};
use ttnet::state::isometry_defect;
use ttnet::tensor::{adjoint, mat_mul, max_abs_diff};
use ttnet::testing::{random_matrix, random_tensor};
use ttnet::{Error, Tensor};

const LN2: f64 = std::f64::consts::LN_2;

fn diag_spectrum(values: &[f64]) -> SingularSpectrum<f64> {
    let n = values.len();
    SingularSpectrum { values: values.to_vec(), left: Mat::identity(n, n), right: Mat::identity(n, n) }
}

#[test]
fn truncation_of_exact_product_loses_nothing() {
    let t = truncate_spectrum(diag_spectrum(&[1.0, 0.0, 0.0]), 1, 0.0, 1e-8).unwrap();
    assert_eq!(t.spectrum.values, vec![1.0]);
    assert_eq!(t.error, 0.0);
    assert!(!t.forced_split);
}

#[test]
fn degenerate_pair_under_a_hard_cap_keeps_the_cap() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = truncation_rank(&[h, h], 1, 0.0, 1e-8).unwrap();
    assert_eq!(r.kept, 1);
    assert!(r.forced_split);
    assert!((r.error - 0.5).abs() < 1e-15);
}

#[test]
fn near_degenerate_pair_survives_whole() {
    let v = [0.9, 0.3, 0.3 * (1.0 - 1e-9), 0.1];
    let r = truncation_rank(&v, 3, 0.0, 1e-8).unwrap();
    assert_eq!(r.kept, 3);
    let total: f64 = v.iter().map(|x| x * x).sum();
    let kept: f64 = v[..3].iter().map(|x| x * x).sum();
    assert!((r.error - (1.0 - kept / total)).abs() < 1e-15);
    // A cap of 2 would split the pair, so the cut falls back to 1.
    let r2 = truncation_rank(&v, 2, 0.0, 1e-8).unwrap();
    assert_eq!(r2.kept, 1);
    assert!(!r2.forced_split);
}

#[test]
fn relative_cutoff_drops_small_values() {
    let r = truncation_rank(&[1.0, 0.5, 1e-3, 1e-4], 4, 1e-2, 0.0).unwrap();
    assert_eq!(r.kept, 2);
    let r = truncation_rank(&[1.0, 0.5], 4, 0.5, 0.0).unwrap();
    assert_eq!(r.kept, 1, "values with ratio equal to sigma are dropped");
}

#[test]
fn truncation_rejects_zero_cap() {
    assert!(matches!(truncation_rank(&[1.0], 0, 0.0, 0.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn kept_values_are_renormalized() {
    let t = truncate_spectrum(diag_spectrum(&[0.8, 0.5, 0.3]), 2, 0.0, 1e-8).unwrap();
    let n: f64 = t.spectrum.values.iter().map(|x| x * x).sum();
    assert!((n - 1.0).abs() < 1e-14);
}

#[test]
fn svd_reconstructs_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (m, n) in [(5, 3), (3, 7), (8, 8)] {
        let a: Mat<c64> = random_matrix(m, n, &mut rng);
        let s = full_svd(a.as_ref()).unwrap();
        assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        let err = max_abs_diff(s.recompose().as_ref(), a.as_ref());
        assert!(err < 1e-12, "{err}");
    }
}

#[test]
fn svd_rejects_non_finite_input() {
    let mut a = Mat::<f64>::zeros(2, 2);
    a[(0, 1)] = f64::NAN;
    assert!(matches!(full_svd(a.as_ref()), Err(Error::Numerical(_))));
}

#[test]
fn eigh_sorts_a_diagonal_matrix() {
    let mut h = Mat::<f64>::zeros(3, 3);
    for (i, v) in [3.0, 1.0, 2.0].into_iter().enumerate() {
        h[(i, i)] = v;
    }
    assert_eq!(full_eigh(h.as_ref()).unwrap().values, vec![1.0, 2.0, 3.0]);
}

#[test]
fn eigh_residual_on_random_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a: Mat<c64> = random_matrix(10, 10, &mut rng);
    let h = &a + adjoint(a.as_ref());
    let e = full_eigh(h.as_ref()).unwrap();
    let hv = mat_mul(h.as_ref(), e.vectors.as_ref());
    let mut vl = e.vectors.clone();
    for j in 0..10 {
        for i in 0..10 {
            vl[(i, j)] *= e.values[j];
        }
    }
    assert!(max_abs_diff(hv.as_ref(), vl.as_ref()) < 1e-10);
}

#[test]
fn eigh_rejects_non_hermitian() {
    let mut h = Mat::<f64>::zeros(2, 2);
    h[(0, 1)] = 1.0;
    assert!(full_eigh(h.as_ref()).is_err());
}

fn diag_apply(d: &'static [f64]) -> impl FnMut(&[f64], &mut [f64]) -> ttnet::Result<()> {
    move |x, y| {
        for i in 0..d.len() {
            y[i] = d[i] * x[i];
        }
        Ok(())
    }
}

#[test]
fn lanczos_finds_lowest_diagonal_entry() {
    let s = 1.0 / 3f64.sqrt();
    let r = lanczos_lowest(diag_apply(&[-1.0, 0.0, 3.0]), &[s, s, s], &LanczosOptions::default()).unwrap();
    assert!((r.energy + 1.0).abs() < 1e-12);
    assert!((r.vector[0].abs() - 1.0).abs() < 1e-10);
    assert!(r.converged);
}

#[test]
fn lanczos_stops_at_once_on_an_eigenvector() {
    let r = lanczos_lowest(diag_apply(&[-1.0, 0.0, 3.0]), &[1.0, 0.0, 0.0], &LanczosOptions::default()).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.energy, -1.0);
}

#[test]
fn lanczos_reports_non_finite_application() {
    let r = lanczos_lowest(
        |_: &[f64], y: &mut [f64]| {
            y.fill(f64::INFINITY);
            Ok(())
        },
        &[1.0, 0.0],
        &LanczosOptions::default(),
    );
    assert!(matches!(r, Err(Error::Numerical(_))));
}

#[test]
fn lanczos_matches_dense_on_random_hermitian_with_restarts() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a: Mat<c64> = random_matrix(60, 60, &mut rng);
    let h = &a + adjoint(a.as_ref());
    let exact = full_eigh(h.as_ref()).unwrap().values[0];
    let opts = LanczosOptions { max_krylov: 12, tol: 1e-11, max_restarts: 200 };
    let init: Vec<c64> = (0..60).map(|i| c64::new(1.0, 0.1 * i as f64)).collect();
    let r = lanczos_lowest(
        |x, y| {
            for i in 0..60 {
                y[i] = (0..60).map(|j| h[(i, j)] * x[j]).sum();
            }
            Ok(())
        },
        &init,
        &opts,
    )
    .unwrap();
    assert!((r.energy - exact).abs() < 1e-8, "{} vs {exact}", r.energy);
}

#[test]
fn entropy_of_uniform_pair_is_ln2() {
    assert!((entropy(&[1.0, 1.0]) - LN2).abs() < 1e-15);
    assert_eq!(entropy(&[1.0, 0.0]), 0.0);
}

fn bell() -> Tensor<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Tensor::from_vec(&[2, 2], vec![h, 0.0, 0.0, h]).unwrap()
}

/// Bell pairs joining legs (0, 2) and (1, 3).
fn rainbow() -> Tensor<f64> {
    let b = bell();
    let t = b.contract(&[], &b, &[]);
    t.permute(&[0, 2, 1, 3])
}

#[test]
fn product_block_keeps_original_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v: Vec<Tensor<f64>> = (0..4).map(|_| random_tensor(&[2], &mut rng)).collect();
    let mut psi = v[0].contract(&[], &v[1], &[]).contract(&[], &v[2], &[]).contract(&[], &v[3], &[]);
    psi.normalize();
    let p = DecomposeParams { mode: StructureMode::Entanglement, ..DecomposeParams::fixed(4) };
    let d = decompose_tensor(&psi, &p, &mut rng).unwrap();
    assert_eq!(d.choice.pairing, Pairing::Original);
    for s in d.choice.entropies {
        assert!(s.abs() < 1e-12);
    }
}

#[test]
fn rainbow_block_reconnects_to_the_bell_pairs() {
    let psi = rainbow();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = DecomposeParams { mode: StructureMode::Entanglement, ..DecomposeParams::fixed(4) };
    let d = decompose_tensor(&psi, &p, &mut rng).unwrap();
    assert_eq!(d.choice.pairing, Pairing::Parallel);
    let e = d.choice.entropies;
    assert!((e[0] - 2.0 * LN2).abs() < 1e-12 && (e[1] - 2.0 * LN2).abs() < 1e-12 && e[2].abs() < 1e-12);
    assert_eq!(d.weights.len(), 1);
    let back = d.recompose();
    assert!(back.data().iter().zip(psi.data()).all(|(a, b)| (a - b).abs() < 1e-12));
    for k in 0..4 {
        assert!((leg_entropy(&psi, k).unwrap() - LN2).abs() < 1e-12);
    }
}

#[test]
fn truncation_mode_prefers_exact_pairing() {
    let psi = rainbow();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = DecomposeParams { mode: StructureMode::Truncation, ..DecomposeParams::fixed(2) };
    let d = decompose_tensor(&psi, &p, &mut rng).unwrap();
    assert_eq!(d.choice.pairing, Pairing::Parallel);
    assert_eq!(d.truncation_error, 0.0);
    assert!((d.choice.errors[0] - 0.5).abs() < 1e-12);
}

#[test]
fn fixed_mode_keeps_pairing_and_isometries() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut psi: Tensor<c64> = random_tensor(&[2, 3, 3, 2], &mut rng);
    psi.normalize();
    let d = decompose_tensor(&psi, &DecomposeParams::fixed(36), &mut rng).unwrap();
    assert_eq!(d.choice.pairing, Pairing::Original);
    assert!(isometry_defect(&d.left) < 1e-12 && isometry_defect(&d.right) < 1e-12);
    let back = d.recompose();
    assert!(back.data().iter().zip(psi.data()).all(|(a, b)| (a - b).norm() < 1e-12));
}

#[test]
fn small_entropy_gain_keeps_original_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut psi: Tensor<f64> = random_tensor(&[2, 2, 2, 2], &mut rng);
    psi.normalize();
    let greedy = DecomposeParams { mode: StructureMode::Entanglement, eps_s: 0.0, ..DecomposeParams::fixed(4) };
    let d = decompose_tensor(&psi, &greedy, &mut rng).unwrap();
    let e = d.choice.entropies;
    let best = (0..3).fold(0, |b, i| if e[i] < e[b] { i } else { b });
    assert_eq!(d.choice.pairing.index(), best);
    let lazy = DecomposeParams { eps_s: (e[0] - e[best]) + 1e-9, ..greedy };
    assert_eq!(decompose_tensor(&psi, &lazy, &mut rng).unwrap().choice.pairing, Pairing::Original);
}

#[test]
fn heat_bath_limits() {
    let s = [0.3, 0.1, 0.7];
    let cold = heat_bath_probabilities(&s, 1e-6).unwrap();
    assert!((cold[1] - 1.0).abs() < 1e-12);
    let hot = heat_bath_probabilities(&s, 1e9).unwrap();
    assert!(hot.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-6));
    assert!(heat_bath_probabilities(&s, 0.0).is_err());
}

#[test]
fn cooling_schedule() {
    assert_eq!(cooled_temperature(0.0, 7, 3), 0.0);
    assert_eq!(cooled_temperature(1.0, 4, 4), 0.5);
    assert_eq!(cooled_temperature(2.0, 8, 4), 0.5);
    assert_eq!(cooled_temperature(1.5, 0, 4), 1.5);
}

#[test]
fn decompose_rejects_bad_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(decompose_tensor(&Tensor::<f64>::zeros(&[2, 2, 2]), &DecomposeParams::fixed(2), &mut rng).is_err());
    assert!(decompose_tensor(&Tensor::<f64>::zeros(&[2, 2, 2, 2]), &DecomposeParams::fixed(2), &mut rng).is_err());
    assert!(decompose_tensor(&rainbow(), &DecomposeParams::fixed(0), &mut rng).is_err());
}
