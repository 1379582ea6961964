//! Hamiltonian of a four-leg block, applied term by term.

use faer::{Accum, Mat};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{apply_leg_into, Tensor};

use super::operators::{cross_terms, BondOperators, Couplings, LegOps};

#[derive(Clone, Debug)]
pub struct Superblock<T: Scalar> {
    dims: Vec<usize>,
    singles: Vec<(usize, Mat<T>)>,
    pairs: Vec<(usize, Mat<T>, usize, Mat<T>)>,
}

impl<T: Scalar> Superblock<T> {
    /// Block Hamiltonians of every leg plus all couplings between pairs of legs.
    pub fn new(c: &Couplings<T>, legs: &[&BondOperators<T>]) -> Result<Self> {
        for a in 0..legs.len() {
            for b in a + 1..legs.len() {
                if legs[a].region.iter().any(|&r| legs[b].contains(r)) {
                    return Err(Error::Invariant(format!("legs {a} and {b} overlap")));
                }
            }
        }
        let views: Vec<LegOps<'_, T>> = legs.iter().map(|l| LegOps::new(l)).collect();
        let mut pairs = Vec::new();
        for a in 0..legs.len() {
            for b in a + 1..legs.len() {
                for (x, y) in cross_terms(c, &views[a], &views[b])? {
                    pairs.push((a, x, b, y));
                }
            }
        }
        Ok(Superblock {
            dims: legs.iter().map(|l| l.dim()).collect(),
            singles: legs.iter().enumerate().map(|(k, l)| (k, l.hamiltonian.clone())).collect(),
            pairs,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_terms(&self) -> usize {
        self.singles.len() + self.pairs.len()
    }

    fn geometry(&self, leg: usize) -> (usize, usize, usize) {
        let pre = self.dims[..leg].iter().product();
        let post = self.dims[leg + 1..].iter().product();
        (pre, self.dims[leg], post)
    }

    pub fn apply(&self, psi: &[T], out: &mut [T]) -> Result<()> {
        if psi.len() != self.len() || out.len() != self.len() {
            return Err(Error::InvalidArgument("vector length does not match the block".into()));
        }
        out.fill(T::zero());
        for (leg, h) in &self.singles {
            let (pre, d, post) = self.geometry(*leg);
            apply_leg_into(psi, pre, d, post, h.as_ref(), out, Accum::Add);
        }
        let mut tmp = vec![T::zero(); psi.len()];
        for (a, x, b, y) in &self.pairs {
            let (pre, d, post) = self.geometry(*b);
            apply_leg_into(psi, pre, d, post, y.as_ref(), &mut tmp, Accum::Replace);
            let (pre, d, post) = self.geometry(*a);
            apply_leg_into(&tmp, pre, d, post, x.as_ref(), out, Accum::Add);
        }
        if out.iter().any(|x| !x.finite()) {
            return Err(Error::Numerical("non-finite value in block Hamiltonian application".into()));
        }
        Ok(())
    }

    pub fn apply_tensor(&self, psi: &Tensor<T>) -> Result<Tensor<T>> {
        let mut out = Tensor::zeros(psi.shape());
        self.apply(psi.data(), out.data_mut())?;
        Ok(out)
    }

    /// Dense matrix, for tests on small blocks.
    pub fn dense(&self) -> Result<Mat<T>> {
        let n = self.len();
        let mut m = Mat::zeros(n, n);
        let mut e = vec![T::zero(); n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            e.fill(T::zero());
            e[j] = T::one();
            self.apply(&e, &mut col)?;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }
}
