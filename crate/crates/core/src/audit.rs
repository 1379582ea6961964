//! Invariant checks run after every sweep step.

use crate::decompose::Decomposition;
use crate::error::Result;
use crate::linalg::{entropy, singular_values};
use crate::scalar::Scalar;
use crate::state::{isometry_defect, TtnState};
use crate::sweep::{StepContext, StepObserver};
use crate::tensor::Tensor;
use crate::topology::Bond;

#[derive(Clone, Copy, Debug)]
pub struct AuditTolerances {
    pub isometry: f64,
    pub weight_norm: f64,
    pub probability_sum: f64,
    pub entropy: f64,
    /// Dense entropy checks run only up to this many amplitudes.
    pub max_dense: usize,
}

impl Default for AuditTolerances {
    fn default() -> Self {
        AuditTolerances {
            isometry: 1e-10,
            weight_norm: 1e-12,
            probability_sum: 1e-14,
            entropy: 1e-8,
            max_dense: 1 << 14,
        }
    }
}

/// Largest deviation seen for each check.
#[derive(Clone, Copy, Debug, Default)]
pub struct AuditStats {
    pub isometry: f64,
    pub weight_norm: f64,
    pub probability_sum: f64,
    pub entropy: f64,
    pub entropy_checks: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Auditor {
    pub tol: AuditTolerances,
    pub steps: usize,
    pub worst: AuditStats,
    pub failures: Vec<String>,
}

/// Entanglement entropy of a dense tensor (leg `k` on site `k`) across `sites | rest`.
pub fn dense_entropy<T: Scalar>(dense: &Tensor<T>, sites: &[usize]) -> Result<f64> {
    let n = dense.rank();
    let mut perm: Vec<usize> = sites.to_vec();
    perm.extend((0..n).filter(|k| !sites.contains(k)));
    let t = dense.permute(&perm);
    let s = singular_values(t.matrix(sites.len()))?;
    let norm2: f64 = s.iter().map(|x| x * x).sum();
    let s: Vec<f64> = s.iter().map(|x| x / norm2.sqrt()).collect();
    Ok(entropy(&s))
}

impl Auditor {
    pub fn new(tol: AuditTolerances) -> Self {
        Auditor { tol, ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, step: usize, msg: String) {
        if self.failures.len() < 50 {
            self.failures.push(format!("step {step}: {msg}"));
        }
    }

    /// Checks that do not depend on a particular step.
    pub fn check_state<T: Scalar>(&mut self, state: &TtnState<T>, step: usize) {
        if let Err(e) = state.topology.validate() {
            self.fail(step, format!("topology: {e}"));
        }
        for (i, t) in state.tensors.iter().enumerate() {
            let d = isometry_defect(t);
            self.worst.isometry = self.worst.isometry.max(d);
            if d > self.tol.isometry {
                self.fail(step, format!("tensor {i} isometry defect {d:e}"));
            }
        }
        let w = &state.weights;
        let dev = (w.iter().map(|x| x * x).sum::<f64>() - 1.0).abs();
        self.worst.weight_norm = self.worst.weight_norm.max(dev);
        if dev > self.tol.weight_norm {
            self.fail(step, format!("center weights off unit norm by {dev:e}"));
        }
        if w.windows(2).any(|p| p[1] > p[0]) || w.iter().any(|&x| x < 0.0) {
            self.fail(step, "center weights are not non-increasing and non-negative".into());
        }
    }

    /// Compares `(bond, entropy)` pairs with a dense bipartition of `state`.
    pub fn check_entropies<T: Scalar>(&mut self, state: &TtnState<T>, entropies: &[(Bond, f64)], step: usize) {
        let total: usize = state.physical_dims().iter().product();
        if total > self.tol.max_dense {
            return;
        }
        let dense = match state.to_dense() {
            Ok(d) => d,
            Err(e) => return self.fail(step, format!("dense contraction: {e}")),
        };
        for &(b, s) in entropies {
            let side = state.topology.split(b).0;
            match dense_entropy(&dense, &side) {
                Ok(exact) => {
                    let dev = (exact - s).abs();
                    self.worst.entropy = self.worst.entropy.max(dev);
                    self.worst.entropy_checks += 1;
                    if dev > self.tol.entropy {
                        self.fail(step, format!("bond {b} entropy {s} but dense bipartition gives {exact}"));
                    }
                }
                Err(e) => self.fail(step, format!("bond {b}: {e}")),
            }
        }
    }

    pub fn summary(&self) -> String {
        let w = &self.worst;
        format!(
            "{} steps audited, {} failures; worst isometry defect {:.1e}, weight norm {:.1e}, probability sum {:.1e}, entropy {:.1e} over {} dense checks",
            self.steps,
            self.failures.len(),
            w.isometry,
            w.weight_norm,
            w.probability_sum,
            w.entropy,
            w.entropy_checks
        )
    }
}

impl<T: Scalar> StepObserver<T> for Auditor {
    fn after_step(&mut self, state: &TtnState<T>, ctx: &StepContext, dec: &Decomposition<T>) -> Result<()> {
        let step = self.steps;
        self.steps += 1;
        self.check_state(state, step);
        if let Some(p) = dec.choice.probabilities {
            let dev = (p.iter().sum::<f64>() - 1.0).abs();
            self.worst.probability_sum = self.worst.probability_sum.max(dev);
            if dev > self.tol.probability_sum {
                self.fail(step, format!("heat-bath probabilities {p:?} sum off by {dev:e}"));
            }
        }
        // With nothing truncated the reported entropy is that of the new state; otherwise the
        // kept weights must still describe it.
        let e = ctx.next_center;
        let reported = dec.choice.entropies[dec.choice.pairing.index()];
        let s = if dec.truncation_error == 0.0 { reported } else { entropy(&state.weights) };
        self.check_entropies(state, &[(e, s)], step);
        Ok(())
    }
}
