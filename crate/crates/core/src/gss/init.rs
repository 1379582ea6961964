//! Real-space renormalization start for the ground-state search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decompose::{decompose_tensor, DecomposeParams};
use crate::error::{Error, Result};
use crate::linalg::{full_eigh, lanczos_lowest, LanczosOptions};
use crate::scalar::Scalar;
use crate::spin::{two_block_hamiltonian, BondOperators, Couplings, OperatorCache, Superblock};
use crate::state::TtnState;
use crate::tensor::Tensor;
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitTree {
    Mpn,
    Pbt,
}

/// Falls back to the chain when a perfect binary tree does not fit `n`.
pub fn build_initial_topology(n: usize, kind: InitTree) -> Result<Topology> {
    if n < 4 {
        return Err(Error::Unsupported(format!("{n} sites give fewer than two tensors")));
    }
    match kind {
        InitTree::Pbt if n.is_power_of_two() => Topology::pbt(n),
        InitTree::Pbt => {
            log::warn!("{n} is not a power of two; starting from a chain instead of a binary tree");
            Topology::mpn(n)
        }
        InitTree::Mpn => Topology::mpn(n),
    }
}

/// Number of lowest eigenvectors to keep: at most `chi`, never cutting through a level
/// spacing below `delta`.
pub fn degenerate_cut(energies: &[f64], chi: usize, delta: f64) -> (usize, bool) {
    let top = chi.min(energies.len());
    let mut k = top;
    while k > 0 && k < energies.len() && (energies[k] - energies[k - 1]).abs() < delta {
        k -= 1;
    }
    if k == 0 {
        log::warn!("initial bond dimension {chi} splits a degenerate level");
        (top, true)
    } else {
        (k, false)
    }
}

#[derive(Clone, Debug)]
pub struct Initialized<T: Scalar> {
    pub state: TtnState<T>,
    pub cache: OperatorCache<T>,
    pub energy: f64,
    pub forced_splits: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct InitParams {
    pub chi: usize,
    pub delta_e: f64,
    pub delta_s: f64,
    pub lanczos: LanczosOptions,
}

pub fn initialize_ttn<T: Scalar>(c: &Couplings<T>, topology: Topology, p: &InitParams) -> Result<Initialized<T>> {
    topology.validate()?;
    if topology.n_sites() != c.n_sites() {
        return Err(Error::InvalidArgument("topology and model disagree on the site count".into()));
    }
    let origin = topology.origin();
    let dist = topology.distances(origin)?;
    let mut order: Vec<usize> = (0..topology.n_tensors()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(dist[topology.edge(i)[2]]), topology.edge(i)[2], i));
    let mut cache = OperatorCache::new(c, topology.n_bonds());
    let mut tensors: Vec<Tensor<T>> = vec![Tensor::zeros(&[1, 1, 1]); topology.n_tensors()];
    let mut forced = 0;
    for &i in &order {
        let e = topology.edge(i);
        let (x, y) = (cache.get(e[0])?, cache.get(e[1])?);
        let h = two_block_hamiltonian(c, x, y)?;
        let eig = full_eigh(h.as_ref())?;
        let (k, f) = degenerate_cut(&eig.values, p.chi, p.delta_e);
        forced += f as usize;
        let v = Tensor::from_matrix(eig.vectors.subcols(0, k), &[x.dim(), y.dim(), k])?;
        if e[2] != origin {
            let ops = crate::spin::renormalize_block(c, x, y, &v, cache.keep_all_sites())?;
            cache.insert(e[2], ops);
        }
        tensors[i] = v;
    }
    let (pi, qi) = topology.center_tensors();
    let kc = tensors[pi].shape()[2].min(tensors[qi].shape()[2]);
    for &i in &[pi, qi] {
        let s = tensors[i].shape().to_vec();
        if s[2] > kc {
            let m = tensors[i].matrix(2).subcols(0, kc).to_owned();
            tensors[i] = Tensor::from_matrix(m.as_ref(), &[s[0], s[1], kc])?;
        }
    }
    let w = vec![1.0 / (kc as f64).sqrt(); kc];
    let mut state = TtnState::new(topology, tensors, w, 1.0)?;
    let merged = state.merge_center()?;
    let legs: Vec<&BondOperators<T>> = merged.legs.iter().map(|&b| cache.get(b)).collect::<Result<_>>()?;
    let sb = Superblock::new(c, &legs)?;
    let r = lanczos_lowest(|x, y| sb.apply(x, y), merged.psi.data(), &p.lanczos)?;
    let psi = Tensor::from_vec(merged.psi.shape(), r.vector)?;
    let params = DecomposeParams { chi: p.chi, delta_s: p.delta_s, ..DecomposeParams::fixed(p.chi) };
    let dec = decompose_tensor(&psi, &params, &mut ChaCha8Rng::seed_from_u64(0))?;
    forced += dec.forced_split as usize;
    state.tensors[pi] = dec.left;
    state.tensors[qi] = dec.right;
    state.weights = dec.weights;
    Ok(Initialized { state, cache, energy: r.energy, forced_splits: forced })
}
