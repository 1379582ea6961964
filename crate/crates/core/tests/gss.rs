use faer::c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttnet::audit::Auditor;
use ttnet::bench::ed::{ed_gap, ed_ground_state, EdOptions, EdResult};
use ttnet::decompose::{DecomposeParams, Decomposition, StructureMode};
use ttnet::gss::{
    build_initial_topology, degenerate_cut, initialize_ttn, run, run_observed, GroundStateUpdate, GssConfig,
    InitParams, InitTree,
};
use ttnet::linalg::LanczosOptions;
use ttnet::spin::{Couplings, Exchange, SpinModel, SpinSize, XxzRow};
use ttnet::state::TtnState;
use ttnet::sweep::{sweep, LocalUpdate, StepContext};
use ttnet::testing::{random_model, ModelRecipe};
use ttnet::Tensor;

fn heisenberg(n: usize) -> SpinModel {
    let mut m = SpinModel::uniform(n, SpinSize::HALF);
    m.exchange = Exchange::Xxz((0..n - 1).map(|i| XxzRow { i, j: i + 1, coupling: 1.0, anisotropy: 1.0 }).collect());
    m
}

fn exact_config(chi: usize, mode: StructureMode, tree: InitTree) -> GssConfig {
    GssConfig {
        init_tree: tree,
        chi_init: chi,
        chi_schedule: vec![chi],
        max_sweeps: vec![12],
        opt_mode: mode,
        single_site: true,
        two_site: true,
        ..GssConfig::default()
    }
}

/// Random model whose ground state is separated from the first excitation.
fn gapped_model(n: usize, recipe: &ModelRecipe, seed: u64) -> (SpinModel, EdResult) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = random_model(n, recipe, &mut rng);
        let ed = ed_ground_state(&m, &EdOptions::default()).unwrap();
        if ed_gap(&m, &ed, &EdOptions::default()).unwrap() > 1e-2 {
            return (m, ed);
        }
    }
}

fn assert_observables(out: &ttnet::gss::Observables, ed: &EdResult, tol: f64) {
    for (r, (a, b)) in out.single_site.iter().zip(&ed.single_site).enumerate() {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < tol, "site {r} component {k}: {} vs {}", a[k], b[k]);
        }
    }
    assert_eq!(out.two_site.len(), ed.two_site.len());
    for (key, a) in &out.two_site {
        let b = &ed.two_site[key];
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() < tol, "pair {key:?} [{i}][{j}]: {} vs {}", a[i][j], b[i][j]);
            }
        }
    }
}

#[test]
fn singlet_triplet_block_keeps_only_the_singlet() {
    assert_eq!(degenerate_cut(&[-0.75, 0.25, 0.25, 0.25], 2, 1e-8), (1, false));
    assert_eq!(degenerate_cut(&[-0.75, 0.25, 0.25, 0.25], 4, 1e-8), (4, false));
    assert_eq!(degenerate_cut(&[0.0, 0.0, 1.0], 1, 1e-8), (1, true));
}

#[test]
fn pbt_request_falls_back_to_chain() {
    let t = build_initial_topology(6, InitTree::Pbt).unwrap();
    assert_eq!(t.edges(), ttnet::topology::Topology::mpn(6).unwrap().edges());
    let p = build_initial_topology(8, InitTree::Pbt).unwrap();
    assert_eq!(p.edges(), ttnet::topology::Topology::pbt(8).unwrap().edges());
    assert!(build_initial_topology(3, InitTree::Mpn).is_err());
}

#[test]
fn initial_energy_of_four_site_chain_is_exact() {
    let m = heisenberg(4);
    let ed = ed_ground_state(&m, &EdOptions::default()).unwrap();
    let c = Couplings::<f64>::new(&m).unwrap();
    let p = InitParams { chi: 4, delta_e: 1e-8, delta_s: 1e-8, lanczos: LanczosOptions::default() };
    let init = initialize_ttn(&c, build_initial_topology(4, InitTree::Mpn).unwrap(), &p).unwrap();
    assert!((init.energy - ed.energy).abs() < 1e-10, "{} vs {}", init.energy, ed.energy);
    init.state.validate(1e-10).unwrap();
}

#[test]
fn field_only_model_gives_product_state() {
    let mut m = SpinModel::uniform(6, SpinSize::HALF);
    m.fields[2] = (0..6).map(|i| (i, 0.3 + 0.1 * i as f64)).collect();
    let mut cfg = exact_config(4, StructureMode::Fixed, InitTree::Mpn);
    cfg.max_sweeps = vec![2];
    let out = run::<f64>(&m, &cfg).unwrap();
    for s in &out.stages {
        for e in s.last().entropies.values() {
            assert!(e.abs() < 1e-10, "entropy {e}");
        }
    }
    for (i, v) in out.observables.single_site.iter().enumerate() {
        assert!((v[2] - 0.5).abs() < 1e-10, "site {i} is polarized along the field");
    }
}

#[test]
fn heisenberg_chain_matches_exact_diagonalization() {
    let m = heisenberg(8);
    let ed = ed_ground_state(&m, &EdOptions::default()).unwrap();
    let out = run::<f64>(&m, &exact_config(16, StructureMode::Fixed, InitTree::Mpn)).unwrap();
    assert!((out.energy - ed.energy).abs() < 1e-9, "{} vs {}", out.energy, ed.energy);
    assert_observables(&out.observables, &ed, 1e-7);
}

#[test]
fn complex_random_models_match_exact_diagonalization() {
    let recipe = ModelRecipe {
        max_two_s: 2,
        extra_pair_prob: 0.3,
        xyz: true,
        fields: true,
        sia: true,
        dm_and_sod: true,
        real_only: false,
    };
    for (n, seed, mode) in
        [(6, 1, StructureMode::Fixed), (6, 2, StructureMode::Entanglement), (7, 3, StructureMode::Truncation)]
    {
        let (m, ed) = gapped_model(n, &recipe, seed);
        let dim: usize = m.local_dims().iter().product();
        let chi = (dim as f64).sqrt().ceil() as usize;
        let out = run::<c64>(&m, &exact_config(chi, mode, InitTree::Mpn)).unwrap();
        assert!((out.energy - ed.energy).abs() < 1e-8, "n={n}: {} vs {}", out.energy, ed.energy);
        assert_observables(&out.observables, &ed, 1e-6);
    }
}

#[test]
fn structural_search_on_binary_tree_matches_exact_diagonalization() {
    let recipe = ModelRecipe {
        max_two_s: 1,
        extra_pair_prob: 0.4,
        xyz: false,
        fields: true,
        sia: false,
        dm_and_sod: false,
        real_only: true,
    };
    let (m, ed) = gapped_model(8, &recipe, 11);
    let out = run::<f64>(&m, &exact_config(16, StructureMode::Entanglement, InitTree::Pbt)).unwrap();
    assert!((out.energy - ed.energy).abs() < 1e-8, "{} vs {}", out.energy, ed.energy);
    assert_observables(&out.observables, &ed, 1e-6);
    out.state.validate(1e-10).unwrap();
}

#[test]
fn single_sweep_limit_runs_one_sweep() {
    let m = heisenberg(6);
    let mut cfg = exact_config(8, StructureMode::Entanglement, InitTree::Mpn);
    cfg.max_sweeps = vec![1];
    cfg.single_site = false;
    cfg.two_site = false;
    let out = run::<f64>(&m, &cfg).unwrap();
    assert_eq!(out.stages[0].sweeps, 1);
    assert!(out.observable_sweep.is_none());
}

#[test]
fn converged_state_stops_after_the_streak() {
    let m = heisenberg(6);
    let mut cfg = exact_config(8, StructureMode::Fixed, InitTree::Mpn);
    cfg.max_sweeps = vec![50];
    cfg.single_site = false;
    cfg.two_site = false;
    let out = run::<f64>(&m, &cfg).unwrap();
    let s = &out.stages[0];
    assert!(s.converged);
    // First sweep sets the reference, then more than `streak` matching sweeps are needed.
    assert!(s.sweeps >= cfg.streak + 2, "{} sweeps", s.sweeps);
    let e: Vec<f64> = s.reports.iter().map(|r| r.values[&out.state.topology.origin()]).collect();
    let last = e[e.len() - 1];
    for w in e[e.len() - cfg.streak - 2..].iter() {
        assert!((1.0 - w / last).abs() < 1e-8);
    }
}

#[test]
fn later_stages_keep_the_structure() {
    let recipe = ModelRecipe {
        max_two_s: 1,
        extra_pair_prob: 0.5,
        xyz: false,
        fields: false,
        sia: false,
        dm_and_sod: false,
        real_only: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_model(8, &recipe, &mut rng);
    let mut cfg = exact_config(4, StructureMode::Entanglement, InitTree::Mpn);
    cfg.chi_schedule = vec![4, 8];
    cfg.max_sweeps = vec![6, 4];
    cfg.t0 = 0.2;
    let out = run::<f64>(&m, &cfg).unwrap();
    let after_first = out.stages[0].last().edges.clone();
    for r in &out.stages[1].reports {
        assert!(ttnet::topology::same_bonds(&r.edges, &after_first));
        assert_eq!(r.reconnections, 0);
    }
}

#[test]
fn runs_are_reproducible_for_a_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let recipe = ModelRecipe {
        max_two_s: 1,
        extra_pair_prob: 0.5,
        xyz: true,
        fields: true,
        sia: false,
        dm_and_sod: false,
        real_only: true,
    };
    let m = random_model(8, &recipe, &mut rng);
    let mut cfg = exact_config(6, StructureMode::Entanglement, InitTree::Mpn);
    cfg.t0 = 0.5;
    cfg.seed = 42;
    let a = run::<f64>(&m, &cfg).unwrap();
    let b = run::<f64>(&m, &cfg).unwrap();
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert_eq!(a.state.topology.edges(), b.state.topology.edges());
}

struct Checked<'a>(GroundStateUpdate<'a, f64>);

impl LocalUpdate<f64> for Checked<'_> {
    fn refresh(&mut self, s: &TtnState<f64>, b: usize, t: usize) -> ttnet::Result<()> {
        self.0.refresh(s, b, t)
    }

    fn optimize(&mut self, s: &TtnState<f64>, ctx: &StepContext, psi: Tensor<f64>) -> ttnet::Result<Tensor<f64>> {
        let out = self.0.optimize(s, ctx, psi)?;
        let (rq, e) = self.0.last.unwrap();
        assert!(e <= rq + 1e-12, "Lanczos raised the energy: {rq} -> {e}");
        Ok(out)
    }

    fn bond_value(
        &mut self,
        s: &TtnState<f64>,
        ctx: &StepContext,
        d: &Decomposition<f64>,
    ) -> ttnet::Result<Option<f64>> {
        self.0.bond_value(s, ctx, d)
    }
}

#[test]
fn every_lanczos_update_is_variational() {
    let m = heisenberg(8);
    let c = Couplings::<f64>::new(&m).unwrap();
    let p = InitParams { chi: 4, delta_e: 1e-8, delta_s: 1e-8, lanczos: LanczosOptions::default() };
    let init = initialize_ttn(&c, build_initial_topology(8, InitTree::Mpn).unwrap(), &p).unwrap();
    let (mut state, mut cache) = (init.state, init.cache);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut prev_origin = f64::INFINITY;
    for _ in 0..4 {
        let mut u = Checked(GroundStateUpdate {
            couplings: &c,
            cache: &mut cache,
            lanczos: p.lanczos,
            collector: None,
            last: None,
        });
        let r = sweep(&mut state, &mut u, &DecomposeParams::fixed(16), &mut rng).unwrap();
        let e = r.values[&state.topology.origin()];
        assert!(e <= prev_origin + 1e-10);
        prev_origin = e;
    }
}

#[test]
fn every_step_leaves_a_valid_canonical_tree() {
    let recipe = ModelRecipe {
        max_two_s: 1,
        extra_pair_prob: 0.6,
        xyz: false,
        fields: true,
        sia: false,
        dm_and_sod: false,
        real_only: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = random_model(10, &recipe, &mut rng);
    let c = Couplings::<f64>::new(&m).unwrap();
    let mut cfg = exact_config(8, StructureMode::Entanglement, InitTree::Mpn);
    cfg.t0 = 0.3;
    let mut audit = Auditor::default();
    run_observed(&c, &cfg, &mut audit).unwrap();
    assert!(audit.passed(), "{:?}", audit.failures);
    assert!(audit.steps > 0 && audit.worst.entropy_checks == audit.steps, "{}", audit.summary());
    assert!(audit.worst.probability_sum <= 1e-14);
}
