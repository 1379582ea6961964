//! Sweep-to-sweep convergence bookkeeping shared by the optimizers.

use rand::Rng;

use crate::decompose::DecomposeParams;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::state::TtnState;
use crate::sweep::{sweep_observed, LocalUpdate, StepObserver, SweepReport};

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Relative change of bond energies, when energies are tracked.
    pub energy: Option<f64>,
    pub entropy: f64,
    /// Absolute change of bond fidelities, when fidelities are tracked.
    pub fidelity: Option<f64>,
}

/// Counts consecutive sweeps that reproduce the previous one; stops after more than `streak`.
#[derive(Clone, Debug)]
pub struct Convergence {
    tol: Tolerances,
    streak: usize,
    count: usize,
    prev: Option<SweepReport>,
}

impl Convergence {
    pub fn new(tol: Tolerances, streak: usize) -> Self {
        Convergence { tol, streak, count: 0, prev: None }
    }

    /// Records a sweep and returns true when the optimization should stop.
    pub fn update(&mut self, report: &SweepReport) -> bool {
        let pass = match &self.prev {
            Some(prev) => self.matches(prev, report),
            None => {
                self.prev = Some(report.clone());
                return false;
            }
        };
        self.count = if pass { self.count + 1 } else { 0 };
        self.prev = Some(report.clone());
        self.count > self.streak
    }

    fn matches(&self, prev: &SweepReport, cur: &SweepReport) -> bool {
        if !crate::topology::same_bonds(&prev.edges, &cur.edges) {
            return false;
        }
        let both =
            |a: &std::collections::BTreeMap<usize, f64>,
             b: &std::collections::BTreeMap<usize, f64>,
             f: &dyn Fn(f64, f64) -> bool| { a.iter().all(|(k, x)| b.get(k).is_none_or(|y| f(*x, *y))) };
        if let Some(eps) = self.tol.energy {
            let ok = both(&prev.values, &cur.values, &|e0, e1| {
                if e0 == 0.0 {
                    (e1 - e0).abs() < eps
                } else {
                    (1.0 - e1 / e0).abs() < eps
                }
            });
            if !ok {
                return false;
            }
        }
        if let Some(eps) = self.tol.fidelity {
            if !both(&prev.values, &cur.values, &|f0, f1| (f1 - f0).abs() < eps) {
                return false;
            }
        }
        let eps = self.tol.entropy;
        both(&prev.entropies, &cur.entropies, &|s0, s1| (s1 - s0).abs() < eps)
    }
}

#[derive(Clone, Debug)]
pub struct StageResult {
    pub chi: usize,
    pub sweeps: usize,
    pub converged: bool,
    /// Every sweep of the stage in order; the last one is reported.
    pub reports: Vec<SweepReport>,
}

impl StageResult {
    pub fn last(&self) -> &SweepReport {
        self.reports.last().expect("a stage runs at least one sweep")
    }

    /// Value recorded by the final update, at the origin bond.
    pub fn value(&self, origin: usize) -> Option<f64> {
        self.last().values.get(&origin).copied()
    }
}

/// Sweeps with bond dimension `chi` until converged or `n_max` sweeps ran. `params` gives the
/// decomposition settings for zero-based sweep `n`.
#[allow(clippy::too_many_arguments)]
pub fn run_stage<T: Scalar, U: LocalUpdate<T>>(
    state: &mut TtnState<T>,
    update: &mut U,
    chi: usize,
    n_max: usize,
    params: impl Fn(usize) -> DecomposeParams,
    conv: &mut Convergence,
    rng: &mut impl Rng,
    observer: &mut dyn StepObserver<T>,
) -> Result<StageResult> {
    let mut stage = StageResult { chi, sweeps: 0, converged: false, reports: Vec::new() };
    let origin = state.topology.origin();
    for n in 0..n_max {
        let report = sweep_observed(state, update, &params(n), rng, observer)?;
        log::info!(
            "chi {chi} sweep {}: value {:.12}, max entropy {:.6}, {} reconnections",
            n + 1,
            report.values.get(&origin).copied().unwrap_or(f64::NAN),
            report.entropies.values().copied().fold(0.0, f64::max),
            report.reconnections
        );
        stage.sweeps += 1;
        let stop = conv.update(&report);
        stage.reports.push(report);
        if stop {
            stage.converged = true;
            break;
        }
    }
    Ok(stage)
}
