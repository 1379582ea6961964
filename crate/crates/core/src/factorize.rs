//! Factorizing a dense tensor into a tree, reconstructing tree structures, and fidelity sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convergence::{run_stage, Convergence, StageResult, Tolerances};
use crate::decompose::{cooled_temperature, DecomposeParams, Decomposition, StructureMode};
use crate::error::{Error, Result};
use crate::linalg::{full_svd, truncate_spectrum};
use crate::scalar::Scalar;
use crate::state::TtnState;
use crate::sweep::{Identity, LocalUpdate, NoObserver, StepContext, StepObserver, SweepReport};
use crate::tensor::Tensor;
use crate::topology::{Bond, Topology};

/// Unit-norm target together with the norm it had on input.
#[derive(Clone, Debug)]
pub struct TargetTensor<T: Scalar> {
    pub data: Tensor<T>,
    pub norm: f64,
}

pub fn normalize_target<T: Scalar>(mut raw: Tensor<T>) -> Result<TargetTensor<T>> {
    if raw.rank() < 4 {
        return Err(Error::Unsupported(format!("a tree needs at least 4 legs, tensor has {}", raw.rank())));
    }
    if let Some(d) = raw.shape().iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!("every leg needs dimension at least 2, found {d}")));
    }
    if raw.data().iter().any(|x| !x.finite()) {
        return Err(Error::Domain("target tensor has non-finite entries".into()));
    }
    let norm = raw.normalize();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("target tensor is zero".into()));
    }
    Ok(TargetTensor { data: raw, norm })
}

/// Splits `target` onto `topology` by SVDs from the leaves inward, keeping at most `chi` values
/// per cut. For a chain this is the usual sequential SVD from both ends.
pub fn dense_to_ttn<T: Scalar>(
    target: &TargetTensor<T>,
    topology: Topology,
    chi: usize,
    sigma: f64,
) -> Result<TtnState<T>> {
    topology.validate()?;
    let n = topology.n_sites();
    if target.data.rank() != n {
        return Err(Error::InvalidArgument(format!("tensor has {} legs, tree has {n} sites", target.data.rank())));
    }
    let center = topology.center();
    let dist = topology.distances(center)?;
    let (p, q) = topology.center_tensors();
    let mut order: Vec<usize> = (0..topology.n_tensors()).filter(|&i| i != p && i != q).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(dist[topology.edge(i)[2]]), i));
    let mut w = target.data.clone();
    let mut legs: Vec<Bond> = (0..n).collect();
    let mut tensors: Vec<Tensor<T>> = vec![Tensor::zeros(&[1, 1, 1]); topology.n_tensors()];
    for i in order {
        let e = topology.edge(i);
        let (a, b) = (pos(&legs, e[0])?, pos(&legs, e[1])?);
        let mut perm = vec![a, b];
        perm.extend((0..legs.len()).filter(|&k| k != a && k != b));
        let moved = w.permute(&perm);
        let sh = moved.shape().to_vec();
        let spec = truncate_spectrum(full_svd(moved.matrix(2))?, chi, sigma, 0.0)?;
        let k = spec.spectrum.values.len();
        tensors[i] = Tensor::from_matrix(spec.spectrum.left.as_ref(), &[sh[0], sh[1], k])?;
        let mut rest = spec.spectrum.right;
        for r in 0..k {
            for c in 0..rest.ncols() {
                rest[(r, c)] = rest[(r, c)].scale(spec.spectrum.values[r]);
            }
        }
        let mut shape = vec![k];
        shape.extend_from_slice(&sh[2..]);
        w = Tensor::from_matrix(rest.as_ref(), &shape)?;
        let mut next = vec![e[2]];
        next.extend(perm[2..].iter().map(|&k| legs[k]));
        legs = next;
    }
    let (ep, eq) = (topology.edge(p), topology.edge(q));
    let order4 = [ep[0], ep[1], eq[0], eq[1]];
    let perm: Vec<usize> = order4.iter().map(|&b| pos(&legs, b)).collect::<Result<_>>()?;
    let psi = w.permute(&perm);
    let sh = psi.shape().to_vec();
    let m = psi.reshape(&[sh[0] * sh[1], sh[2] * sh[3]])?;
    let spec = truncate_spectrum(full_svd(m.matrix(1))?, chi, sigma, 0.0)?;
    let k = spec.spectrum.values.len();
    tensors[p] = Tensor::from_matrix(spec.spectrum.left.as_ref(), &[sh[0], sh[1], k])?;
    tensors[q] = Tensor::from_matrix(spec.spectrum.right.transpose(), &[sh[2], sh[3], k])?;
    TtnState::new(topology, tensors, spec.spectrum.values, target.norm)
}

fn pos(legs: &[Bond], b: Bond) -> Result<usize> {
    legs.iter().position(|&x| x == b).ok_or_else(|| Error::Invariant(format!("bond {b} is not an open leg")))
}

pub fn sequential_svd_to_mpn<T: Scalar>(target: &TargetTensor<T>, chi: usize, sigma: f64) -> Result<TtnState<T>> {
    dense_to_ttn(target, Topology::mpn(target.data.rank())?, chi, sigma)
}

/// `target` contracted with the conjugates of every tensor outside `block`, returned with
/// one leg per bond of `legs` in that order. Contraction runs from the sites inward.
pub fn environment<T: Scalar>(
    target: &TargetTensor<T>,
    state: &TtnState<T>,
    block: [usize; 2],
    legs: &[Bond],
) -> Result<Tensor<T>> {
    let topo = &state.topology;
    if target.data.shape() != state.physical_dims().as_slice() {
        return Err(Error::Invariant(format!(
            "target shape {:?} does not match the tree's sites {:?}",
            target.data.shape(),
            state.physical_dims()
        )));
    }
    let eb = topo.edge(block[0]);
    let shared = eb
        .iter()
        .copied()
        .find(|b| topo.edge(block[1]).contains(b))
        .ok_or_else(|| Error::InvalidArgument(format!("tensors {} and {} are not adjacent", block[0], block[1])))?;
    let dist = topo.distances(shared)?;
    let mut order: Vec<usize> = (0..topo.n_tensors()).filter(|i| !block.contains(i)).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(dist[topo.edge(i)[2]]), i));
    let mut w = target.data.clone();
    let mut open: Vec<Bond> = (0..topo.n_sites()).collect();
    for i in order {
        let e = topo.edge(i);
        let (a, b) = (pos(&open, e[0])?, pos(&open, e[1])?);
        w = w.contract(&[a, b], &state.tensors[i].conj(), &[0, 1]);
        open.retain(|&x| x != e[0] && x != e[1]);
        open.push(e[2]);
    }
    if open.len() != legs.len() {
        return Err(Error::Invariant(format!("environment has open bonds {open:?}, expected {legs:?}")));
    }
    let perm: Vec<usize> = legs.iter().map(|&b| pos(&open, b)).collect::<Result<_>>()?;
    Ok(w.permute(&perm))
}

pub fn embed_environment<T: Scalar>(mut env: Tensor<T>) -> Result<Tensor<T>> {
    let n = env.normalize();
    if !(n > 1e-300) {
        return Err(Error::DegenerateEnvironment);
    }
    Ok(env)
}

/// `|<state|target>|` for unit-norm tensors.
pub fn fidelity<T: Scalar>(target: &TargetTensor<T>, state: &TtnState<T>) -> Result<f64> {
    let (p, q) = state.topology.center_tensors();
    let m = state.merge_pair(p, q)?;
    let env = environment(target, state, [p, q], &m.legs)?;
    Ok(m.psi.inner(&env).modulus())
}

/// Replaces the block by its normalized environment; records the post-truncation fidelity.
pub struct FidelityUpdate<'a, T: Scalar> {
    pub target: &'a TargetTensor<T>,
    env: Option<Tensor<T>>,
}

impl<'a, T: Scalar> FidelityUpdate<'a, T> {
    pub fn new(target: &'a TargetTensor<T>) -> Self {
        FidelityUpdate { target, env: None }
    }
}

impl<T: Scalar> LocalUpdate<T> for FidelityUpdate<'_, T> {
    fn optimize(&mut self, state: &TtnState<T>, ctx: &StepContext, psi: Tensor<T>) -> Result<Tensor<T>> {
        let env = environment(self.target, state, [ctx.t, ctx.t_next], &ctx.legs)?;
        if env.shape() != psi.shape() {
            return Err(Error::Invariant("environment and block shapes differ".into()));
        }
        let out = embed_environment(env.clone())?;
        self.env = Some(env);
        Ok(out)
    }

    fn bond_value(&mut self, _: &TtnState<T>, _: &StepContext, dec: &Decomposition<T>) -> Result<Option<f64>> {
        let env = self.env.take().ok_or_else(|| Error::Internal("no environment for this step".into()))?;
        Ok(Some(dec.recompose().inner(&env).modulus()))
    }
}

#[derive(Clone, Debug)]
pub struct StructureSearch {
    pub mode: StructureMode,
    pub t0: f64,
    pub n_tau: Option<usize>,
    pub seed: u64,
}

impl Default for StructureSearch {
    fn default() -> Self {
        StructureSearch { mode: StructureMode::Fixed, t0: 0.0, n_tau: None, seed: 0 }
    }
}

impl StructureSearch {
    fn params(
        &self,
        chi: usize,
        mode: StructureMode,
        n: usize,
        n_tau: usize,
        eps_s: f64,
        sigma: f64,
        delta_s: f64,
    ) -> DecomposeParams {
        let temperature = if mode == StructureMode::Entanglement { cooled_temperature(self.t0, n, n_tau) } else { 0.0 };
        DecomposeParams { chi, mode, temperature, eps_s, sigma, delta_s }
    }
}

#[derive(Clone, Debug)]
pub struct FidelityConfig {
    pub structure: StructureSearch,
    pub chi_schedule: Vec<usize>,
    pub max_sweeps: Vec<usize>,
    pub eps_f: f64,
    pub eps_s: f64,
    /// Move the structure at every stage instead of only the first.
    pub structure_every_stage: bool,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        FidelityConfig {
            structure: StructureSearch::default(),
            chi_schedule: vec![16],
            max_sweeps: vec![10],
            eps_f: 1e-8,
            eps_s: 1e-8,
            structure_every_stage: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FactorizeConfig {
    pub chi_init: usize,
    pub structure: StructureSearch,
    pub max_sweeps: usize,
    pub eps_s: f64,
    pub sigma: f64,
    pub delta_s: f64,
    pub streak: usize,
    pub fidelity: Option<FidelityConfig>,
}

impl Default for FactorizeConfig {
    fn default() -> Self {
        FactorizeConfig {
            chi_init: 16,
            structure: StructureSearch::default(),
            max_sweeps: 10,
            eps_s: 1e-8,
            sigma: 0.0,
            delta_s: 1e-8,
            streak: 0,
            fidelity: None,
        }
    }
}

impl FactorizeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.chi_init == 0 {
            return bad("initial bond dimension must be positive".into());
        }
        if !(0.0..1.0).contains(&self.sigma) {
            return bad(format!("singular value cutoff must lie in [0, 1), got {}", self.sigma));
        }
        if !(self.eps_s > 0.0) || !(self.delta_s > 0.0) {
            return bad("thresholds must be positive".into());
        }
        for s in std::iter::once(&self.structure).chain(self.fidelity.as_ref().map(|f| &f.structure)) {
            if !(s.t0 >= 0.0) || s.n_tau == Some(0) {
                return bad("temperature must be non-negative and its decay at least 1".into());
            }
        }
        if let Some(f) = &self.fidelity {
            if f.chi_schedule.is_empty() || f.chi_schedule.len() != f.max_sweeps.len() {
                return bad("fidelity bond dimensions and sweep limits must be non-empty lists of equal length".into());
            }
            if f.chi_schedule[0] == 0 || f.chi_schedule.windows(2).any(|w| w[1] <= w[0]) {
                return bad(format!(
                    "fidelity bond dimensions {:?} must be positive and strictly ascending",
                    f.chi_schedule
                ));
            }
            if !(f.eps_f > 0.0) || !(f.eps_s > 0.0) {
                return bad("fidelity thresholds must be positive".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FactorizeOutput<T: Scalar> {
    pub state: TtnState<T>,
    pub reconstruction: Option<StageResult>,
    pub fidelity_stages: Vec<StageResult>,
}

/// Structure sweeps without any reference to the original tensor.
pub fn reconstruct<T: Scalar>(
    state: &mut TtnState<T>,
    chi: usize,
    cfg: &FactorizeConfig,
    observer: &mut dyn StepObserver<T>,
) -> Result<StageResult> {
    let s = &cfg.structure;
    let n_tau = s.n_tau.unwrap_or((cfg.max_sweeps / 2).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut conv = Convergence::new(Tolerances { energy: None, entropy: cfg.eps_s, fidelity: None }, cfg.streak);
    let params = |n| s.params(chi, s.mode, n, n_tau, cfg.eps_s, cfg.sigma, cfg.delta_s);
    run_stage(state, &mut Identity, chi, cfg.max_sweeps.max(1), params, &mut conv, &mut rng, observer)
}

pub fn fidelity_sweep_run<T: Scalar>(
    target: &TargetTensor<T>,
    state: &mut TtnState<T>,
    cfg: &FactorizeConfig,
    observer: &mut dyn StepObserver<T>,
) -> Result<Vec<StageResult>> {
    let f = cfg.fidelity.as_ref().ok_or_else(|| Error::Config("fidelity sweeps are not configured".into()))?;
    let s = &f.structure;
    let n_tau = s.n_tau.unwrap_or((f.max_sweeps[0] / 2).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut stages = Vec::new();
    for (m, (&chi, &n_max)) in f.chi_schedule.iter().zip(&f.max_sweeps).enumerate() {
        let mode = if m == 0 || f.structure_every_stage { s.mode } else { StructureMode::Fixed };
        let tol = Tolerances { energy: None, entropy: f.eps_s, fidelity: Some(f.eps_f) };
        let mut conv = Convergence::new(tol, cfg.streak);
        let params = |n| s.params(chi, mode, n, n_tau, f.eps_s, cfg.sigma, cfg.delta_s);
        let mut update = FidelityUpdate::new(target);
        stages.push(run_stage(state, &mut update, chi, n_max, params, &mut conv, &mut rng, observer)?);
    }
    Ok(stages)
}

/// Dense tensor to tree: sequential SVD, optional structure sweeps, optional fidelity sweeps.
pub fn factorize<T: Scalar>(raw: Tensor<T>, cfg: &FactorizeConfig) -> Result<(TargetTensor<T>, FactorizeOutput<T>)> {
    factorize_observed(raw, cfg, &mut NoObserver)
}

pub fn factorize_observed<T: Scalar>(
    raw: Tensor<T>,
    cfg: &FactorizeConfig,
    observer: &mut dyn StepObserver<T>,
) -> Result<(TargetTensor<T>, FactorizeOutput<T>)> {
    cfg.validate()?;
    let target = normalize_target(raw)?;
    let mut state = sequential_svd_to_mpn(&target, cfg.chi_init, cfg.sigma)?;
    let reconstruction = if cfg.structure.mode != StructureMode::Fixed {
        Some(reconstruct(&mut state, cfg.chi_init, cfg, observer)?)
    } else {
        None
    };
    let fidelity_stages =
        if cfg.fidelity.is_some() { fidelity_sweep_run(&target, &mut state, cfg, observer)? } else { Vec::new() };
    Ok((target, FactorizeOutput { state, reconstruction, fidelity_stages }))
}

/// Entropies and bonds of `state` from one fixed-structure sweep on a copy, without truncation.
pub fn survey<T: Scalar>(state: &TtnState<T>) -> Result<SweepReport> {
    let mut copy = state.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    crate::sweep::sweep(&mut copy, &mut Identity, &DecomposeParams::fixed(state.max_bond_dim()), &mut rng)
}

/// Structure sweeps on a given tree, keeping up to its current largest bond dimension.
pub fn reconstruct_ttn<T: Scalar>(
    mut state: TtnState<T>,
    cfg: &FactorizeConfig,
    observer: &mut dyn StepObserver<T>,
) -> Result<FactorizeOutput<T>> {
    cfg.validate()?;
    if cfg.structure.mode == StructureMode::Fixed {
        log::warn!("reconstructing a tree with structure mode 0 leaves its structure unchanged");
    }
    let chi = state.max_bond_dim();
    let stage = reconstruct(&mut state, chi, cfg, observer)?;
    Ok(FactorizeOutput { state, reconstruction: Some(stage), fidelity_stages: Vec::new() })
}
