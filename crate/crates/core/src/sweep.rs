//! One sweep over all auxiliary bonds, moving the canonical center by two-tensor updates.

use std::collections::BTreeMap;

use rand::Rng;

use crate::decompose::{decompose_tensor, leg_entropy, DecomposeParams, Decomposition, ReconnectChoice};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::TtnState;
use crate::tensor::Tensor;
use crate::topology::Bond;

#[derive(Clone, Copy, Debug)]
pub struct StepContext {
    pub step: usize,
    pub prev_center: Bond,
    pub next_center: Bond,
    pub t: usize,
    pub t_next: usize,
    pub legs: [Bond; 4],
}

/// What happens to the merged block between contraction and splitting.
pub trait LocalUpdate<T: Scalar> {
    /// `tensor` now points at `bond` with its final content for this step.
    fn refresh(&mut self, _state: &TtnState<T>, _bond: Bond, _tensor: usize) -> Result<()> {
        Ok(())
    }

    fn optimize(&mut self, state: &TtnState<T>, ctx: &StepContext, psi: Tensor<T>) -> Result<Tensor<T>>;

    /// Quantity recorded on the new bond (energy, fidelity).
    fn bond_value(&mut self, _state: &TtnState<T>, _ctx: &StepContext, _dec: &Decomposition<T>) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// Leaves the block unchanged.
pub struct Identity;

impl<T: Scalar> LocalUpdate<T> for Identity {
    fn optimize(&mut self, _: &TtnState<T>, _: &StepContext, psi: Tensor<T>) -> Result<Tensor<T>> {
        Ok(psi)
    }
}

/// Seen after every step, once the new tensors are in place.
pub trait StepObserver<T: Scalar> {
    fn after_step(&mut self, state: &TtnState<T>, ctx: &StepContext, dec: &Decomposition<T>) -> Result<()>;
}

pub struct NoObserver;

impl<T: Scalar> StepObserver<T> for NoObserver {
    fn after_step(&mut self, _: &TtnState<T>, _: &StepContext, _: &Decomposition<T>) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    /// Every bond, physical ones included.
    pub entropies: BTreeMap<Bond, f64>,
    pub truncation_errors: BTreeMap<Bond, f64>,
    pub values: BTreeMap<Bond, f64>,
    pub choices: Vec<(Bond, ReconnectChoice)>,
    pub steps: usize,
    pub reconnections: usize,
    pub forced_splits: usize,
    pub edges: Vec<[Bond; 3]>,
}

impl SweepReport {
    pub fn max_truncation_error(&self) -> f64 {
        self.truncation_errors.values().copied().fold(0.0, f64::max)
    }
}

/// Walks every auxiliary bond once outward and once back, starting and ending at the origin.
pub fn sweep<T: Scalar, U: LocalUpdate<T>>(
    state: &mut TtnState<T>,
    update: &mut U,
    params: &DecomposeParams,
    rng: &mut impl Rng,
) -> Result<SweepReport> {
    sweep_observed(state, update, params, rng, &mut NoObserver)
}

pub fn sweep_observed<T: Scalar, U: LocalUpdate<T>>(
    state: &mut TtnState<T>,
    update: &mut U,
    params: &DecomposeParams,
    rng: &mut impl Rng,
    observer: &mut dyn StepObserver<T>,
) -> Result<SweepReport> {
    let topo = &state.topology;
    let origin = topo.origin();
    if topo.center() != origin {
        return Err(Error::InvalidArgument(format!(
            "sweep must start at the origin {origin}, center is {}",
            topo.center()
        )));
    }
    let nb = topo.n_bonds();
    let max_steps = 4 * topo.n_tensors();
    let mut flags: Vec<bool> = (0..nb).map(|b| topo.is_physical(b)).collect();
    let mut dist = topo.distances(origin)?;
    let mut report = SweepReport::default();
    let mut center = origin;
    loop {
        if state.topology.candidate_edges(center, &flags).is_empty() {
            break;
        }
        if report.steps >= max_steps {
            return Err(Error::Internal(format!("sweep exceeded {max_steps} steps")));
        }
        let lp = state.topology.local_two_tensor(center, &flags, &dist)?;
        let ep = state.topology.edge(lp.t_prev);
        if center != origin && flags[ep[0]] && flags[ep[1]] {
            flags[center] = true;
        }
        update.refresh(state, center, lp.t_prev)?;
        let merged = state.merge_pair(lp.t, lp.t_next)?;
        let ctx = StepContext {
            step: report.steps,
            prev_center: center,
            next_center: lp.next_center,
            t: lp.t,
            t_next: lp.t_next,
            legs: merged.legs,
        };
        step(state, update, params, rng, observer, &ctx, merged.psi, &mut report)?;
        center = lp.next_center;
        dist = state.topology.distances(origin)?;
    }
    if report.steps == 0 {
        // Two tensors only: optimize the block at the origin itself.
        let (p, q) = state.topology.center_tensors();
        let merged = state.merge_pair(p, q)?;
        let ctx = StepContext { step: 0, prev_center: origin, next_center: origin, t: p, t_next: q, legs: merged.legs };
        step(state, update, params, rng, observer, &ctx, merged.psi, &mut report)?;
    }
    if state.topology.center() != origin {
        return Err(Error::Internal(format!("sweep ended at bond {}", state.topology.center())));
    }
    report.edges = state.topology.edges().to_vec();
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn step<T: Scalar, U: LocalUpdate<T>>(
    state: &mut TtnState<T>,
    update: &mut U,
    params: &DecomposeParams,
    rng: &mut impl Rng,
    observer: &mut dyn StepObserver<T>,
    ctx: &StepContext,
    psi: Tensor<T>,
    report: &mut SweepReport,
) -> Result<()> {
    let psi = update.optimize(state, ctx, psi)?;
    let dec = decompose_tensor(&psi, params, rng)?;
    for (pos, &b) in ctx.legs.iter().enumerate() {
        if state.topology.is_physical(b) {
            report.entropies.insert(b, leg_entropy(&psi, pos)?);
        }
    }
    let value = update.bond_value(state, ctx, &dec)?;
    let e = ctx.next_center;
    let (g0, g1) = dec.groups();
    state.topology.set_edge(ctx.t, [ctx.legs[g0[0]], ctx.legs[g0[1]], e]);
    state.topology.set_edge(ctx.t_next, [ctx.legs[g1[0]], ctx.legs[g1[1]], e]);
    state.topology.set_center(e);
    let c = &dec.choice;
    report.entropies.insert(e, c.entropies[c.pairing.index()]);
    report.truncation_errors.insert(e, dec.truncation_error);
    if let Some(v) = value {
        report.values.insert(e, v);
    }
    if c.pairing != crate::decompose::Pairing::Original {
        report.reconnections += 1;
    }
    if dec.forced_split {
        report.forced_splits += 1;
    }
    report.choices.push((e, c.clone()));
    report.steps += 1;
    state.tensors[ctx.t] = dec.left.clone();
    state.tensors[ctx.t_next] = dec.right.clone();
    state.weights = dec.weights.clone();
    observer.after_step(state, ctx, &dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::random_state;
    use crate::topology::Topology;
    use faer::c64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_err(a: &Tensor<c64>, b: &Tensor<c64>) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn six_site_walk_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut st = random_state::<c64>(Topology::mpn(6).unwrap(), 2, 8, &mut rng);
        let before = st.to_dense().unwrap();
        let r = sweep(&mut st, &mut Identity, &DecomposeParams::fixed(64), &mut rng).unwrap();
        let visited: Vec<Bond> = r.choices.iter().map(|c| c.0).collect();
        assert_eq!(visited, vec![6, 7, 8, 7]);
        assert_eq!(r.entropies.len(), 9);
        st.validate(1e-10).unwrap();
        assert!(dense_err(&before, &st.to_dense().unwrap()) < 1e-12);
    }

    #[test]
    fn identity_sweeps_preserve_state_on_larger_trees() {
        for (topo, seed) in
            [(Topology::pbt(8).unwrap(), 1), (Topology::mpn(9).unwrap(), 2), (Topology::mpn(4).unwrap(), 3)]
        {
            let nt = topo.n_tensors();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut st = random_state::<c64>(topo, 2, 16, &mut rng);
            let before = st.to_dense().unwrap();
            let r = sweep(&mut st, &mut Identity, &DecomposeParams::fixed(64), &mut rng).unwrap();
            assert!(r.steps <= 4 * nt && r.steps >= 1);
            let aux: std::collections::BTreeSet<Bond> = r.choices.iter().map(|c| c.0).collect();
            assert_eq!(aux.len(), nt - 1, "every auxiliary bond is visited");
            st.validate(1e-10).unwrap();
            assert!(dense_err(&before, &st.to_dense().unwrap()) < 1e-11);
        }
    }
}
