//! A tree tensor network in canonical form: isometries plus the Schmidt weights on the center.

use faer::Mat;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{adjoint_mul, identity, max_abs_diff, Tensor};
use crate::topology::{Bond, Topology};

#[derive(Clone, Debug)]
pub struct TtnState<T: Scalar> {
    pub topology: Topology,
    /// Rank-3 tensors with legs in slot order of the matching edge.
    pub tensors: Vec<Tensor<T>>,
    /// Non-increasing, unit 2-norm.
    pub weights: Vec<f64>,
    /// Scale of the represented object (1 for quantum states).
    pub norm: f64,
}

/// Two neighbouring tensors contracted into one four-leg block.
#[derive(Clone, Debug)]
pub struct Merged<T: Scalar> {
    pub psi: Tensor<T>,
    pub legs: [Bond; 4],
}

/// Largest entry of `V^dagger V - 1` with `V` the tensor reshaped to `(chi1 chi2, chi3)`.
pub fn isometry_defect<T: Scalar>(v: &Tensor<T>) -> f64 {
    let m = v.matrix(2);
    let g = adjoint_mul(m, m);
    max_abs_diff(g.as_ref(), identity::<T>(g.nrows()).as_ref())
}

impl<T: Scalar> TtnState<T> {
    pub fn new(topology: Topology, tensors: Vec<Tensor<T>>, weights: Vec<f64>, norm: f64) -> Result<Self> {
        let s = TtnState { topology, tensors, weights, norm };
        s.check_shapes()?;
        Ok(s)
    }

    pub fn bond_dim(&self, b: Bond) -> usize {
        let i = self.topology.tensors_with_bond(b)[0];
        let slot = self.topology.edge(i).iter().position(|&x| x == b).unwrap();
        self.tensors[i].shape()[slot]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        (0..self.topology.n_bonds()).map(|b| self.bond_dim(b)).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.topology.aux_bonds().map(|b| self.bond_dim(b)).max().unwrap_or(1)
    }

    pub fn physical_dims(&self) -> Vec<usize> {
        (0..self.topology.n_sites()).map(|b| self.bond_dim(b)).collect()
    }

    fn check_shapes(&self) -> Result<()> {
        let topo = &self.topology;
        if self.tensors.len() != topo.n_tensors() {
            return Err(Error::Invariant(format!("{} tensors for {} edges", self.tensors.len(), topo.n_tensors())));
        }
        let mut dims = vec![None::<usize>; topo.n_bonds()];
        for (i, (t, e)) in self.tensors.iter().zip(topo.edges()).enumerate() {
            if t.rank() != 3 {
                return Err(Error::Invariant(format!("tensor {i} has rank {}", t.rank())));
            }
            for (slot, &b) in e.iter().enumerate() {
                let d = t.shape()[slot];
                match dims[b] {
                    None => dims[b] = Some(d),
                    Some(x) if x != d => return Err(Error::Invariant(format!("bond {b} has dimensions {x} and {d}"))),
                    _ => {}
                }
            }
        }
        let dc = dims[topo.center()].unwrap_or(0);
        if self.weights.len() != dc {
            return Err(Error::Invariant(format!("{} center weights for bond dimension {dc}", self.weights.len())));
        }
        Ok(())
    }

    /// Shape, isometry, and weight invariants.
    pub fn validate(&self, tol: f64) -> Result<()> {
        self.topology.validate()?;
        self.check_shapes()?;
        for (i, t) in self.tensors.iter().enumerate() {
            let d = isometry_defect(t);
            if d > tol {
                return Err(Error::Invariant(format!("tensor {i} is not an isometry (defect {d:e})")));
            }
        }
        let w = &self.weights;
        if w.windows(2).any(|p| p[1] > p[0] + tol) || w.iter().any(|&x| x < 0.0) {
            return Err(Error::Invariant("center weights are not non-increasing and non-negative".into()));
        }
        let n2: f64 = w.iter().map(|x| x * x).sum();
        if (n2 - 1.0).abs() > tol {
            return Err(Error::Invariant(format!("center weights have squared norm {n2}")));
        }
        Ok(())
    }

    /// Contracts tensors `a` and `b` over their shared bond, with the center weights placed
    /// on the current center. Legs of `a` come first, each side in slot order.
    pub fn merge_pair(&self, a: usize, b: usize) -> Result<Merged<T>> {
        let ea = self.topology.edge(a);
        let eb = self.topology.edge(b);
        let shared = ea
            .iter()
            .copied()
            .find(|x| eb.contains(x))
            .ok_or_else(|| Error::InvalidArgument(format!("tensors {a} and {b} are not adjacent")))?;
        let sa = ea.iter().position(|&x| x == shared).unwrap();
        let sb = eb.iter().position(|&x| x == shared).unwrap();
        let center = self.topology.center();
        let mut ta = self.tensors[a].clone();
        let mut tb = self.tensors[b].clone();
        if shared == center || ea.contains(&center) {
            let slot = ea.iter().position(|&x| x == center).unwrap();
            scale_leg(&mut ta, slot, &self.weights);
        } else if eb.contains(&center) {
            let slot = eb.iter().position(|&x| x == center).unwrap();
            scale_leg(&mut tb, slot, &self.weights);
        } else {
            return Err(Error::InvalidArgument(format!("neither tensor {a} nor {b} touches the center")));
        }
        let psi = ta.contract(&[sa], &tb, &[sb]);
        let mut legs = [0; 4];
        let mut k = 0;
        for (e, s) in [(ea, sa), (eb, sb)] {
            for (slot, &x) in e.iter().enumerate() {
                if slot != s {
                    legs[k] = x;
                    k += 1;
                }
            }
        }
        Ok(Merged { psi, legs })
    }

    /// Contracts a block whose legs are `legs` with every tensor outside `block` and returns
    /// the full tensor with leg `k` on site `k`. Tensors are expanded along their slot 3.
    pub fn expand_block(&self, psi: Tensor<T>, legs: &[Bond], block: &[usize]) -> Result<Tensor<T>> {
        let mut w = psi;
        let mut legs: Vec<Bond> = legs.to_vec();
        while let Some(pos) = legs.iter().position(|&b| !self.topology.is_physical(b)) {
            let b = legs[pos];
            let i = (0..self.tensors.len())
                .find(|&i| !block.contains(&i) && self.topology.edge(i)[2] == b)
                .ok_or_else(|| Error::Invariant(format!("no tensor below bond {b}")))?;
            w = w.contract(&[pos], &self.tensors[i], &[2]);
            legs.remove(pos);
            let e = self.topology.edge(i);
            legs.push(e[0]);
            legs.push(e[1]);
        }
        let mut perm = vec![0; legs.len()];
        for (pos, &b) in legs.iter().enumerate() {
            perm[b] = pos;
        }
        Ok(w.permute(&perm))
    }

    pub fn merge_center(&self) -> Result<Merged<T>> {
        let (p, q) = self.topology.center_tensors();
        self.merge_pair(p, q)
    }

    /// Full tensor with leg `k` on site `k`, scaled by `norm`.
    pub fn to_dense(&self) -> Result<Tensor<T>> {
        let total: usize = self.physical_dims().iter().product();
        if total > 1 << 26 {
            return Err(Error::InvalidArgument(format!("dense tensor with {total} entries is too large")));
        }
        let m = self.merge_center()?;
        let (p, q) = self.topology.center_tensors();
        let mut out = self.expand_block(m.psi, &m.legs, &[p, q])?;
        if self.norm != 1.0 {
            out.scale(T::from_real(self.norm));
        }
        Ok(out)
    }
}

pub(crate) fn scale_leg<T: Scalar>(t: &mut Tensor<T>, leg: usize, w: &[f64]) {
    let shape = t.shape().to_vec();
    let post: usize = shape[leg + 1..].iter().product();
    let d = shape[leg];
    for (idx, x) in t.data_mut().iter_mut().enumerate() {
        *x = x.scale(w[(idx / post) % d]);
    }
}

/// Reshapes a `(chi1 chi2, k)` matrix into an isometry tensor.
pub fn isometry_from_matrix<T: Scalar>(m: &Mat<T>, chi1: usize, chi2: usize) -> Result<Tensor<T>> {
    Tensor::from_matrix(m.as_ref(), &[chi1, chi2, m.ncols()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::c64;
    use rand::SeedableRng;

    fn random_state(n: usize, d: usize, chi: usize, seed: u64) -> TtnState<c64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        crate::testing::random_state(Topology::mpn(n).unwrap(), d, chi, &mut rng)
    }

    #[test]
    fn random_state_is_canonical_and_normalized() {
        let st = random_state(6, 2, 3, 1);
        st.validate(1e-12).unwrap();
        let dense = st.to_dense().unwrap();
        assert_eq!(dense.shape(), &[2; 6]);
        assert!((dense.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merged_block_reproduces_dense_tensor() {
        let st = random_state(6, 2, 4, 3);
        let dense = st.to_dense().unwrap();
        // Same network, merged across bond 6 (center stays on 7).
        let m = st.merge_pair(1, 0).unwrap();
        assert_eq!(m.legs, [2, 7, 0, 1]);
        assert_eq!(st.topology.center_tensors(), (1, 2));
        let right = st.tensors[2].clone();
        let r = st.tensors[3].clone();
        // psi[2,7,0,1] x v2[3,8,7] x v3[4,5,8]
        let full = m.psi.contract(&[1], &right, &[2]).contract(&[4], &r, &[2]);
        let full = full.permute(&[1, 2, 0, 3, 4, 5]);
        let err: f64 = full.data().iter().zip(dense.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}
