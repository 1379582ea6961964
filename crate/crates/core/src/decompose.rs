//! Splitting a merged two-tensor block along one of its three leg pairings.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{entropy, full_svd, singular_values, truncate_spectrum, truncation_rank};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Which legs of a block `(p1, p2, q1, q2)` stay together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// `(p1 p2 | q1 q2)`
    Original,
    /// `(p1 q2 | p2 q1)`
    Cross,
    /// `(p1 q1 | p2 q2)`
    Parallel,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::Original, Pairing::Cross, Pairing::Parallel];

    pub fn groups(self) -> ([usize; 2], [usize; 2]) {
        match self {
            Pairing::Original => ([0, 1], [2, 3]),
            Pairing::Cross => ([0, 3], [1, 2]),
            Pairing::Parallel => ([0, 2], [1, 3]),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Pairing::Original => 0,
            Pairing::Cross => 1,
            Pairing::Parallel => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureMode {
    Fixed,
    /// Least bond entanglement.
    Entanglement,
    /// Least truncation error, entanglement as tie-break.
    Truncation,
}

impl StructureMode {
    pub fn from_code(c: i64) -> Result<Self> {
        match c {
            0 => Ok(StructureMode::Fixed),
            1 => Ok(StructureMode::Entanglement),
            2 => Ok(StructureMode::Truncation),
            _ => Err(Error::InvalidArgument(format!("structure mode must be 0, 1 or 2, got {c}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DecomposeParams {
    pub chi: usize,
    pub mode: StructureMode,
    pub temperature: f64,
    pub eps_s: f64,
    pub sigma: f64,
    pub delta_s: f64,
}

impl DecomposeParams {
    pub fn fixed(chi: usize) -> Self {
        DecomposeParams { chi, mode: StructureMode::Fixed, temperature: 0.0, eps_s: 1e-8, sigma: 0.0, delta_s: 1e-8 }
    }
}

/// Truncation-error differences below this are treated as ties.
pub const ERROR_TIE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct ReconnectChoice {
    pub pairing: Pairing,
    pub entropies: [f64; 3],
    pub errors: [f64; 3],
    pub probabilities: Option<[f64; 3]>,
}

#[derive(Clone, Debug)]
pub struct Decomposition<T: Scalar> {
    /// Legs `(groups.0, new bond)`.
    pub left: Tensor<T>,
    /// Legs `(groups.1, new bond)`.
    pub right: Tensor<T>,
    pub weights: Vec<f64>,
    pub choice: ReconnectChoice,
    pub truncation_error: f64,
    pub forced_split: bool,
}

impl<T: Scalar> Decomposition<T> {
    pub fn groups(&self) -> ([usize; 2], [usize; 2]) {
        self.choice.pairing.groups()
    }

    /// `left . diag(weights) . right` back in the block's original leg order.
    pub fn recompose(&self) -> Tensor<T> {
        let mut l = self.left.clone();
        crate::state::scale_leg(&mut l, 2, &self.weights);
        let b = l.contract(&[2], &self.right, &[2]);
        let (g0, g1) = self.groups();
        let order = [g0[0], g0[1], g1[0], g1[1]];
        let mut perm = [0; 4];
        for (pos, &leg) in order.iter().enumerate() {
            perm[leg] = pos;
        }
        b.permute(&perm)
    }
}

fn pairing_matrix<T: Scalar>(psi: &Tensor<T>, p: Pairing) -> Tensor<T> {
    let (g0, g1) = p.groups();
    psi.permute(&[g0[0], g0[1], g1[0], g1[1]])
}

/// Boltzmann weights `exp(-(S_i - S_min) / T)`, normalized.
pub fn heat_bath_probabilities(entropies: &[f64; 3], temperature: f64) -> Result<[f64; 3]> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {temperature}")));
    }
    let smin = entropies.iter().copied().fold(f64::INFINITY, f64::min);
    let w = entropies.map(|s| (-(s - smin) / temperature).exp());
    let z: f64 = w.iter().sum();
    Ok(w.map(|x| x / z))
}

/// `T0 * 2^(-n / n_tau)` for zero-based sweep `n`.
pub fn cooled_temperature(t0: f64, sweep: usize, n_tau: usize) -> f64 {
    if t0 <= 0.0 {
        return 0.0;
    }
    t0 * (-(sweep as f64) / n_tau.max(1) as f64).exp2()
}

fn argmin(x: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if x[i] < x[best] {
            best = i;
        }
    }
    best
}

/// Chooses a pairing, then splits the block with the chosen truncation rule.
pub fn decompose_tensor<T: Scalar>(
    psi: &Tensor<T>,
    params: &DecomposeParams,
    rng: &mut impl Rng,
) -> Result<Decomposition<T>> {
    if psi.rank() != 4 {
        return Err(Error::InvalidArgument(format!("block must have 4 legs, got {}", psi.rank())));
    }
    let n = psi.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Numerical(format!("block has norm {n}")));
    }
    let mut entropies = [0.0; 3];
    let mut errors = [0.0; 3];
    if params.mode != StructureMode::Fixed {
        for p in Pairing::ALL {
            let m = pairing_matrix(psi, p);
            let sv = singular_values(m.matrix(2))?;
            entropies[p.index()] = entropy(&sv);
            errors[p.index()] = truncation_rank(&sv, params.chi, params.sigma, params.delta_s)?.error;
        }
    }
    let mut probabilities = None;
    let chosen = match params.mode {
        StructureMode::Fixed => 0,
        StructureMode::Entanglement if params.temperature > 0.0 => {
            let pr = heat_bath_probabilities(&entropies, params.temperature)?;
            probabilities = Some(pr);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = 2;
            for (i, p) in pr.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        }
        StructureMode::Entanglement => {
            let best = argmin(&entropies);
            if (entropies[0] - entropies[best]).abs() < params.eps_s {
                0
            } else {
                best
            }
        }
        StructureMode::Truncation => {
            let emin = errors.iter().copied().fold(f64::INFINITY, f64::min);
            let tied: Vec<usize> = (0..3).filter(|&i| errors[i] - emin < ERROR_TIE).collect();
            tied.iter().copied().fold(tied[0], |b, i| if entropies[i] < entropies[b] { i } else { b })
        }
    };
    let pairing = Pairing::ALL[chosen];
    let m = pairing_matrix(psi, pairing);
    let sh = m.shape().to_vec();
    let spec = full_svd(m.matrix(2))?;
    if params.mode == StructureMode::Fixed {
        entropies[0] = entropy(&spec.values);
        errors[0] = truncation_rank(&spec.values, params.chi, params.sigma, params.delta_s)?.error;
    }
    let tr = truncate_spectrum(spec, params.chi, params.sigma, params.delta_s)?;
    let k = tr.spectrum.values.len();
    let left = Tensor::from_matrix(tr.spectrum.left.as_ref(), &[sh[0], sh[1], k])?;
    let right = Tensor::from_matrix(tr.spectrum.right.transpose(), &[sh[2], sh[3], k])?;
    Ok(Decomposition {
        left,
        right,
        weights: tr.spectrum.values,
        choice: ReconnectChoice { pairing, entropies, errors, probabilities },
        truncation_error: tr.error,
        forced_split: tr.forced_split,
    })
}

/// Entanglement of one leg of a block with the other three.
pub fn leg_entropy<T: Scalar>(psi: &Tensor<T>, leg: usize) -> Result<f64> {
    let mut perm: Vec<usize> = vec![leg];
    perm.extend((0..psi.rank()).filter(|&k| k != leg));
    let m = psi.permute(&perm);
    Ok(entropy(&singular_values(m.matrix(1))?))
}
