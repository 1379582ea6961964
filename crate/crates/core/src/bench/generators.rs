//! Inputs for the three demonstration workloads.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::full_eigh;
use crate::spin::{Exchange, SpinModel, SpinSize, XxzRow};
use crate::tensor::Tensor;

/// Largest dense tensor the generators will build, in log2 entries.
pub const MAX_DENSE_BITS: usize = 24;

/// Level of the bond `(i, i + 1)`: the number of trailing zero bits of `i + 1`.
pub fn hierarchy_level(i: usize) -> u32 {
    (i + 1).trailing_zeros()
}

/// Spin-1/2 Heisenberg chain on `2^depth` sites whose bond `(i, i + 1)` has strength
/// `j * alpha^h` with `h` its hierarchy level.
pub fn hierarchical_chain(depth: u32, j: f64, alpha: f64) -> Result<SpinModel> {
    if depth < 2 {
        return Err(Error::InvalidArgument(format!("depth must be at least 2, got {depth}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let n = 1usize << depth;
    let mut m = SpinModel::uniform(n, SpinSize::HALF);
    m.exchange = Exchange::Xxz(
        (0..n - 1)
            .map(|i| XxzRow { i, j: i + 1, coupling: j * alpha.powi(hierarchy_level(i) as i32), anisotropy: 1.0 })
            .collect(),
    );
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuanticsOrder {
    /// Leg `l * m + v` is bit `l` of variable `v`; equal significance sits together.
    Interleaved,
    /// Leg `v * bits + l` is bit `l` of variable `v`.
    VariableMajor,
}

impl QuanticsOrder {
    /// `(variable, bit)` of leg `leg`, bit 0 being the most significant.
    pub fn decode(self, leg: usize, vars: usize, bits: usize) -> (usize, usize) {
        match self {
            QuanticsOrder::Interleaved => (leg % vars, leg / vars),
            QuanticsOrder::VariableMajor => (leg / bits, leg % bits),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuanticsFunction {
    /// One wave vector per term.
    pub k: Vec<Vec<f64>>,
    pub vars: usize,
    pub bits: usize,
    pub order: QuanticsOrder,
}

impl QuanticsFunction {
    /// Wave vectors drawn from a standard normal with the given seed.
    pub fn random(terms: usize, vars: usize, bits: usize, order: QuanticsOrder, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = (0..terms).map(|_| (0..vars).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        QuanticsFunction { k, vars, bits, order }
    }

    /// `sum_j cos(j k_j . x)`, terms numbered from 1.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.k
            .iter()
            .enumerate()
            .map(|(j, k)| ((j + 1) as f64 * k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).cos())
            .sum()
    }

    /// Point of `[0, 1)^vars` addressed by one binary digit per leg.
    pub fn point(&self, digits: &[usize]) -> Vec<f64> {
        let mut x = vec![0.0; self.vars];
        for (leg, &d) in digits.iter().enumerate() {
            let (v, l) = self.order.decode(leg, self.vars, self.bits);
            x[v] += d as f64 / (1u64 << (l + 1)) as f64;
        }
        x
    }

    pub fn tensor(&self) -> Result<Tensor<f64>> {
        let legs = self.vars * self.bits;
        if legs > MAX_DENSE_BITS {
            return Err(Error::InvalidArgument(format!(
                "2^{legs} entries exceed the dense limit 2^{MAX_DENSE_BITS}; lower the bit count"
            )));
        }
        Ok(Tensor::from_fn(&vec![2; legs], |idx| self.eval(&self.point(idx))))
    }
}

/// Undirected tree on `n_vertices` vertices, some of which carry the random variables.
#[derive(Clone, Debug)]
pub struct CovarianceTree {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// Vertex of variable `a`.
    pub variables: Vec<usize>,
}

impl CovarianceTree {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>, variables: Vec<usize>) -> Result<Self> {
        if n_vertices == 0 || edges.len() + 1 != n_vertices {
            return Err(Error::InvalidArgument(format!(
                "a tree on {n_vertices} vertices has {} edges",
                n_vertices.saturating_sub(1)
            )));
        }
        if edges.iter().any(|&(a, b)| a >= n_vertices || b >= n_vertices || a == b) {
            return Err(Error::InvalidArgument("edge endpoint out of range".into()));
        }
        let mut seen = variables.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != variables.len() || variables.iter().any(|&v| v >= n_vertices) {
            return Err(Error::InvalidArgument("variables must sit on distinct vertices".into()));
        }
        let t = CovarianceTree { n_vertices, edges, variables };
        if t.distances_from(0).contains(&usize::MAX) {
            return Err(Error::InvalidArgument("covariance tree is disconnected".into()));
        }
        Ok(t)
    }

    /// Balanced binary tree whose leaves, left to right, are the variables in `leaf_order`.
    pub fn balanced(leaf_order: &[usize]) -> Result<Self> {
        let d = leaf_order.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("balanced tree needs a power-of-two leaf count, got {d}")));
        }
        let mut sorted = leaf_order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..d).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("leaf order must be a permutation of the variables".into()));
        }
        let mut edges = Vec::new();
        let mut level: Vec<usize> = (0..d).collect();
        let mut next_id = d;
        while level.len() > 1 {
            let mut up = Vec::new();
            for pair in level.chunks(2) {
                edges.push((pair[0], next_id));
                edges.push((pair[1], next_id));
                up.push(next_id);
                next_id += 1;
            }
            level = up;
        }
        let mut variables = vec![0; d];
        for (slot, &v) in leaf_order.iter().enumerate() {
            variables[v] = slot;
        }
        Ok(CovarianceTree { n_vertices: next_id, edges, variables })
    }

    fn distances_from(&self, start: usize) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut dist = vec![usize::MAX; self.n_vertices];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// `K_ab = rho^(path length)`, unit diagonal.
    pub fn covariance(&self, rho: f64) -> Result<Mat<f64>> {
        let d = self.variables.len();
        let mut k = Mat::<f64>::zeros(d, d);
        for a in 0..d {
            let dist = self.distances_from(self.variables[a]);
            for b in 0..d {
                let l = dist[self.variables[b]];
                if l == usize::MAX {
                    return Err(Error::InvalidArgument("covariance tree is disconnected".into()));
                }
                k[(a, b)] = rho.powi(l as i32);
            }
        }
        Ok(k)
    }
}

/// Grid coordinate of bit pattern `b` with `bits` bits on `[-5, 5)`.
pub fn grid_point(b: usize, bits: usize) -> f64 {
    -5.0 + 10.0 * b as f64 / (1u64 << bits) as f64
}

/// Unnormalized zero-mean Gaussian `exp(-x^T K^-1 x / 2)` on the grid, one leg of dimension
/// `2^bits` per variable.
pub fn multivariate_normal(tree: &CovarianceTree, rho: f64, bits: usize) -> Result<Tensor<f64>> {
    let d = tree.variables.len();
    if d * bits > MAX_DENSE_BITS {
        return Err(Error::InvalidArgument(format!("2^{} entries exceed the dense limit", d * bits)));
    }
    let k = tree.covariance(rho)?;
    let eig = full_eigh(k.as_ref())?;
    if eig.values[0] <= 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "covariance is not positive definite: smallest eigenvalue {:e}",
            eig.values[0]
        )));
    }
    let v = &eig.vectors;
    let inv = Mat::<f64>::from_fn(d, d, |a, b| (0..d).map(|c| v[(a, c)] * v[(b, c)] / eig.values[c]).sum());
    let grid = vec![1usize << bits; d];
    Ok(Tensor::from_fn(&grid, |idx| {
        let x: Vec<f64> = idx.iter().map(|&b| grid_point(b, bits)).collect();
        let mut q = 0.0;
        for a in 0..d {
            for b in 0..d {
                q += x[a] * inv[(a, b)] * x[b];
            }
        }
        (-0.5 * q).exp()
    }))
}
