//! Variational ground-state search over tree tensor networks with structural moves.

mod init;
mod observables;

pub use init::{build_initial_topology, degenerate_cut, initialize_ttn, InitParams, InitTree, Initialized};
pub use observables::{ObservableCollector, Observables};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use crate::convergence::StageResult;
use crate::convergence::{run_stage, Convergence, Tolerances};
use crate::decompose::{cooled_temperature, DecomposeParams, Decomposition, StructureMode};
use crate::error::{Error, Result};
use crate::linalg::{lanczos_lowest, LanczosOptions};
use crate::scalar::Scalar;
use crate::spin::{BondOperators, Couplings, OperatorCache, SpinModel, Superblock};
use crate::state::TtnState;
use crate::sweep::{sweep_observed, LocalUpdate, NoObserver, StepContext, StepObserver, SweepReport};
use crate::tensor::Tensor;
use crate::topology::Bond;

#[derive(Clone, Debug)]
pub struct GssConfig {
    pub init_tree: InitTree,
    pub chi_init: usize,
    pub chi_schedule: Vec<usize>,
    pub max_sweeps: Vec<usize>,
    pub opt_mode: StructureMode,
    pub t0: f64,
    /// Defaults to half the first stage's sweep limit.
    pub n_tau: Option<usize>,
    pub seed: u64,
    pub eps_e: f64,
    pub eps_s: f64,
    pub delta_e: f64,
    pub delta_s: f64,
    pub streak: usize,
    pub lanczos: LanczosOptions,
    pub single_site: bool,
    pub two_site: bool,
}

impl Default for GssConfig {
    fn default() -> Self {
        GssConfig {
            init_tree: InitTree::Mpn,
            chi_init: 16,
            chi_schedule: vec![16],
            max_sweeps: vec![20],
            opt_mode: StructureMode::Fixed,
            t0: 0.0,
            n_tau: None,
            seed: 0,
            eps_e: 1e-8,
            eps_s: 1e-8,
            delta_e: 1e-8,
            delta_s: 1e-8,
            streak: 2,
            lanczos: LanczosOptions::default(),
            single_site: false,
            two_site: false,
        }
    }
}

impl GssConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.chi_init == 0 {
            return bad("initial bond dimension must be positive".into());
        }
        if self.chi_schedule.is_empty() {
            return bad("at least one stage is required".into());
        }
        if self.chi_schedule.len() != self.max_sweeps.len() {
            return bad(format!(
                "{} bond dimensions but {} sweep limits",
                self.chi_schedule.len(),
                self.max_sweeps.len()
            ));
        }
        if self.chi_schedule[0] == 0 || self.chi_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("bond dimensions {:?} must be positive and strictly ascending", self.chi_schedule));
        }
        if self.max_sweeps.contains(&0) {
            return bad("sweep limits must be positive".into());
        }
        for (name, v) in
            [("eps_E", self.eps_e), ("eps_S", self.eps_s), ("delta_E", self.delta_e), ("delta_S", self.delta_s)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("threshold {name} must be positive, got {v}"));
            }
        }
        if !(self.t0 >= 0.0) || !self.t0.is_finite() {
            return bad(format!("temperature must be non-negative, got {}", self.t0));
        }
        if self.n_tau == Some(0) {
            return bad("temperature decay must be at least 1".into());
        }
        Ok(())
    }

    pub fn decay(&self) -> usize {
        self.n_tau.unwrap_or((self.max_sweeps[0] / 2).max(1))
    }
}

/// Lanczos on the merged block, operators taken from the bond cache.
pub struct GroundStateUpdate<'a, T: Scalar> {
    pub couplings: &'a Couplings<T>,
    pub cache: &'a mut OperatorCache<T>,
    pub lanczos: LanczosOptions,
    pub collector: Option<&'a mut ObservableCollector>,
    /// Rayleigh quotient of the merged block before and energy after the last update.
    pub last: Option<(f64, f64)>,
}

impl<T: Scalar> LocalUpdate<T> for GroundStateUpdate<'_, T> {
    fn refresh(&mut self, state: &TtnState<T>, _bond: Bond, tensor: usize) -> Result<()> {
        self.cache.refresh(self.couplings, state, tensor)
    }

    fn optimize(&mut self, _state: &TtnState<T>, ctx: &StepContext, psi: Tensor<T>) -> Result<Tensor<T>> {
        let legs: Vec<&BondOperators<T>> = ctx.legs.iter().map(|&b| self.cache.get(b)).collect::<Result<_>>()?;
        let sb = Superblock::new(self.couplings, &legs)?;
        let h_psi = sb.apply_tensor(&psi)?;
        let rq = psi.inner(&h_psi).re() / psi.inner(&psi).re();
        let r = lanczos_lowest(|x, y| sb.apply(x, y), psi.data(), &self.lanczos)?;
        let out = Tensor::from_vec(psi.shape(), r.vector)?;
        if let Some(c) = self.collector.as_deref_mut() {
            c.collect(&out, &legs)?;
        }
        self.last = Some((rq, r.energy));
        Ok(out)
    }

    fn bond_value(&mut self, _: &TtnState<T>, _: &StepContext, _: &Decomposition<T>) -> Result<Option<f64>> {
        Ok(self.last.map(|l| l.1))
    }
}

#[derive(Clone, Debug)]
pub struct GssOutput<T: Scalar> {
    pub state: TtnState<T>,
    pub initial_energy: f64,
    pub stages: Vec<StageResult>,
    pub observable_sweep: Option<SweepReport>,
    pub observables: Observables,
    pub energy: f64,
    pub forced_splits: usize,
}

pub fn run<T: Scalar>(model: &SpinModel, cfg: &GssConfig) -> Result<GssOutput<T>> {
    let c = Couplings::<T>::new(model)?;
    run_observed(&c, cfg, &mut NoObserver)
}

/// Runs every stage, then the observable pass if any observable is requested.
pub fn run_observed<T: Scalar>(
    c: &Couplings<T>,
    cfg: &GssConfig,
    observer: &mut dyn StepObserver<T>,
) -> Result<GssOutput<T>> {
    cfg.validate()?;
    let topology = build_initial_topology(c.n_sites(), cfg.init_tree)?;
    let origin = topology.origin();
    let init = initialize_ttn(
        c,
        topology,
        &InitParams { chi: cfg.chi_init, delta_e: cfg.delta_e, delta_s: cfg.delta_s, lanczos: cfg.lanczos },
    )?;
    let Initialized { mut state, mut cache, energy: initial_energy, mut forced_splits } = init;
    log::info!("initial energy {initial_energy:.12}");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_tau = cfg.decay();
    let mut stages = Vec::new();
    for (m, (&chi, &n_max)) in cfg.chi_schedule.iter().zip(&cfg.max_sweeps).enumerate() {
        let mode = if m == 0 { cfg.opt_mode } else { StructureMode::Fixed };
        let tol = Tolerances { energy: Some(cfg.eps_e), entropy: cfg.eps_s, fidelity: None };
        let mut conv = Convergence::new(tol, cfg.streak);
        let params = |n: usize| DecomposeParams {
            chi,
            mode,
            temperature: if mode == StructureMode::Entanglement { cooled_temperature(cfg.t0, n, n_tau) } else { 0.0 },
            eps_s: cfg.eps_s,
            sigma: 0.0,
            delta_s: cfg.delta_s,
        };
        let mut update =
            GroundStateUpdate { couplings: c, cache: &mut cache, lanczos: cfg.lanczos, collector: None, last: None };
        let stage = run_stage(&mut state, &mut update, chi, n_max, params, &mut conv, &mut rng, observer)?;
        forced_splits += stage.reports.iter().map(|r| r.forced_splits).sum::<usize>();
        stages.push(stage);
    }
    let mut energy = stages.last().and_then(|s| s.value(origin)).unwrap_or(initial_energy);
    let mut collector = ObservableCollector::new(c.n_sites(), cfg.single_site, cfg.two_site);
    let mut observable_sweep = None;
    if collector.is_active() {
        let chi = *cfg.chi_schedule.last().expect("validated");
        let params = DecomposeParams { delta_s: cfg.delta_s, ..DecomposeParams::fixed(chi) };
        cache.set_keep_all_sites(true);
        cache.rebuild(c, &state)?;
        let before = state.topology.edges().to_vec();
        let mut update = GroundStateUpdate {
            couplings: c,
            cache: &mut cache,
            lanczos: cfg.lanczos,
            collector: Some(&mut collector),
            last: None,
        };
        let report = sweep_observed(&mut state, &mut update, &params, &mut rng, observer)?;
        if !crate::topology::same_bonds(&report.edges, &before) {
            return Err(Error::Internal("structure changed during the observable pass".into()));
        }
        cache.set_keep_all_sites(false);
        if let Some(e) = report.values.get(&origin) {
            energy = *e;
        }
        observable_sweep = Some(report);
    }
    let observables = collector.finish()?;
    Ok(GssOutput { state, initial_energy, stages, observable_sweep, observables, energy, forced_splits })
}
