//! Random fixtures shared by unit, property and integration tests.

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::full_svd;
use crate::scalar::Scalar;
use crate::state::{isometry_from_matrix, TtnState};
use crate::tensor::Tensor;
use crate::topology::Topology;

pub fn random_scalar<T: Scalar>(rng: &mut impl Rng) -> T {
    let re: f64 = rng.sample(StandardNormal);
    if T::IS_COMPLEX {
        let im: f64 = rng.sample(StandardNormal);
        T::from_c64(faer::c64::new(re, im))
    } else {
        T::from_real(re)
    }
}

pub fn random_tensor<T: Scalar>(shape: &[usize], rng: &mut impl Rng) -> Tensor<T> {
    Tensor::from_fn(shape, |_| random_scalar(rng))
}

pub fn random_matrix<T: Scalar>(m: usize, n: usize, rng: &mut impl Rng) -> Mat<T> {
    Mat::from_fn(m, n, |_, _| random_scalar(rng))
}

/// Random isometries on `topo` with bond dimensions capped at `chi` and random
/// decreasing center weights.
pub fn random_state<T: Scalar>(topo: Topology, d: usize, chi: usize, rng: &mut impl Rng) -> TtnState<T> {
    let mut dims = vec![d; topo.n_bonds()];
    let dist = topo.distances(topo.center()).unwrap();
    let mut order: Vec<usize> = (0..topo.n_tensors()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(dist[topo.edge(i)[2]]));
    let (p, q) = topo.center_tensors();
    let mut tensors = vec![Tensor::zeros(&[1, 1, 1]); topo.n_tensors()];
    for &i in &order {
        let e = topo.edge(i);
        let (a, b) = (dims[e[0]], dims[e[1]]);
        let mut k = chi.min(a * b);
        if i == p || i == q {
            let other = if i == p { q } else { p };
            let eo = topo.edge(other);
            k = k.min(dims[eo[0]] * dims[eo[1]]);
        }
        dims[e[2]] = k;
        let m = random_matrix::<T>(a * b, k, rng);
        tensors[i] = isometry_from_matrix(&full_svd(m.as_ref()).unwrap().left, a, b).unwrap();
    }
    let dc = dims[topo.center()];
    let mut w: Vec<f64> = (0..dc).map(|_| rng.random::<f64>() + 0.05).collect();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= n);
    TtnState::new(topo, tensors, w, 1.0).unwrap()
}

use crate::spin::{Exchange, PairRow, SpinModel, SpinSize, XxzRow, XyzRow};

#[derive(Clone, Copy, Debug)]
pub struct ModelRecipe {
    pub max_two_s: u32,
    /// Probability of coupling each pair beyond the chain bonds.
    pub extra_pair_prob: f64,
    pub xyz: bool,
    pub fields: bool,
    pub sia: bool,
    pub dm_and_sod: bool,
    /// Keep only terms with real matrix elements.
    pub real_only: bool,
}

/// Random couplings on an open chain plus random long-range pairs.
pub fn random_model(n: usize, recipe: &ModelRecipe, rng: &mut impl Rng) -> SpinModel {
    let spins = (0..n).map(|_| SpinSize::from_twice(rng.random_range(1..=recipe.max_two_s)).unwrap()).collect();
    let mut m = SpinModel::new(spins);
    let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    for i in 0..n {
        for j in i + 2..n {
            if rng.random::<f64>() < recipe.extra_pair_prob {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    let u = |rng: &mut dyn rand::RngCore, a: f64, b: f64| a + (b - a) * rng.random::<f64>();
    m.exchange = if recipe.xyz {
        Exchange::Xyz(
            pairs
                .iter()
                .map(|&(i, j)| XyzRow { i, j, jx: u(rng, 0.2, 1.2), jy: u(rng, 0.2, 1.2), jz: u(rng, -0.5, 1.2) })
                .collect(),
        )
    } else {
        Exchange::Xxz(
            pairs
                .iter()
                .map(|&(i, j)| XxzRow { i, j, coupling: u(rng, 0.2, 1.2), anisotropy: u(rng, -0.5, 1.5) })
                .collect(),
        )
    };
    if recipe.fields {
        for a in 0..3 {
            if a == 1 && recipe.real_only {
                continue;
            }
            for i in 0..n {
                if rng.random::<f64>() < 0.7 {
                    let h = u(rng, -0.6, 0.6);
                    m.fields[a].push((i, h));
                }
            }
        }
    }
    if recipe.sia {
        m.sia = (0..n).filter(|&i| m.spins[i].twice() > 1).map(|i| (i, u(rng, -0.5, 0.5))).collect();
    }
    if recipe.dm_and_sod {
        for a in 0..3 {
            if a != 1 && recipe.real_only {
                continue;
            }
            for &(i, j) in &pairs {
                if rng.random::<f64>() < 0.5 {
                    let value = u(rng, -0.3, 0.3);
                    m.dm[a].push(PairRow { i, j, value });
                }
                if rng.random::<f64>() < 0.5 {
                    let value = u(rng, -0.3, 0.3);
                    m.sod[a].push(PairRow { i, j, value });
                }
            }
        }
    }
    m
}
