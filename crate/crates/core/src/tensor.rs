//! Dense row-major tensors and the few leg operations the networks need.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor { shape: shape.to_vec(), data: vec![T::zero(); shape.iter().product()] }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::InvalidArgument(format!("shape {shape:?} holds {n} elements, got {}", data.len())));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let mut t = Self::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for x in t.data.iter_mut() {
            *x = f(&idx);
            for k in (0..shape.len()).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        t
    }

    /// Copies a matrix into a tensor whose leading legs index rows.
    pub fn from_matrix(m: MatRef<'_, T>, shape: &[usize]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != m.nrows() * m.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix cannot fill shape {shape:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut data = Vec::with_capacity(n);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn rank(&self) -> usize {
        self.shape.len()
    }
    pub fn len(&self) -> usize {
        self.data.len()
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, a: T) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    /// Scales to unit norm and returns the old norm.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.scale(T::from_real(1.0 / n));
        }
        n
    }

    pub fn conj(&self) -> Self {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|x| x.conjugate()).collect() }
    }

    /// `<self|other>` with the complex conjugate on `self`.
    pub fn inner(&self, other: &Self) -> T {
        debug_assert_eq!(self.shape, other.shape);
        self.data.iter().zip(&other.data).map(|(a, b)| a.conjugate() * *b).sum()
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::InvalidArgument(format!("cannot reshape {:?} into {shape:?}", self.shape)));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Output leg `k` is input leg `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let r = self.rank();
        debug_assert_eq!(perm.len(), r);
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return self.clone();
        }
        let mut in_strides = vec![1usize; r];
        for k in (0..r.saturating_sub(1)).rev() {
            in_strides[k] = in_strides[k + 1] * self.shape[k + 1];
        }
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        if self.data.is_empty() {
            return Tensor { shape: out_shape, data };
        }
        let last = r - 1;
        let (dl, sl) = (out_shape[last], strides[last]);
        let mut idx = vec![0usize; r];
        let mut base = 0usize;
        loop {
            for i in 0..dl {
                data.push(self.data[base + i * sl]);
            }
            let mut k = last;
            loop {
                if k == 0 {
                    return Tensor { shape: out_shape, data };
                }
                k -= 1;
                idx[k] += 1;
                base += strides[k];
                if idx[k] < out_shape[k] {
                    break;
                }
                base -= strides[k] * out_shape[k];
                idx[k] = 0;
            }
        }
    }

    /// Row-major matrix view with the first `split` legs as rows.
    pub fn matrix(&self, split: usize) -> MatRef<'_, T> {
        let rows: usize = self.shape[..split].iter().product();
        let cols: usize = self.shape[split..].iter().product();
        MatRef::from_row_major_slice(&self.data, rows, cols)
    }

    pub fn matrix_mut(&mut self, split: usize) -> MatMut<'_, T> {
        let rows: usize = self.shape[..split].iter().product();
        let cols: usize = self.shape[split..].iter().product();
        MatMut::from_row_major_slice_mut(&mut self.data, rows, cols)
    }

    /// Applies `op` to leg `leg`: `out[.., i, ..] = sum_j op[i, j] self[.., j, ..]`.
    pub fn apply_on_leg(&self, leg: usize, op: MatRef<'_, T>) -> Self {
        let dk = self.shape[leg];
        assert_eq!(op.ncols(), dk, "operator does not match leg dimension");
        let m = op.nrows();
        let pre: usize = self.shape[..leg].iter().product();
        let post: usize = self.shape[leg + 1..].iter().product();
        let mut shape = self.shape.clone();
        shape[leg] = m;
        let mut out = Tensor::zeros(&shape);
        apply_leg_into(&self.data, pre, dk, post, op, &mut out.data, Accum::Replace);
        out
    }

    /// Contracts `self` and `other` over the listed leg pairs. Free legs of `self` come first,
    /// then those of `other`, both in their original order.
    pub fn contract(&self, legs_a: &[usize], other: &Self, legs_b: &[usize]) -> Self {
        let free_a: Vec<usize> = (0..self.rank()).filter(|k| !legs_a.contains(k)).collect();
        let free_b: Vec<usize> = (0..other.rank()).filter(|k| !legs_b.contains(k)).collect();
        let pa: Vec<usize> = free_a.iter().chain(legs_a).copied().collect();
        let pb: Vec<usize> = legs_b.iter().chain(&free_b).copied().collect();
        let a = self.permute(&pa);
        let b = other.permute(&pb);
        let ma = a.matrix(free_a.len());
        let mb = b.matrix(legs_b.len());
        let shape: Vec<usize> =
            free_a.iter().map(|&k| self.shape[k]).chain(free_b.iter().map(|&k| other.shape[k])).collect();
        let mut out = Tensor::zeros(&shape);
        let nfree = free_a.len();
        matmul(out.matrix_mut(nfree), Accum::Replace, ma, mb, T::one(), Par::Seq);
        out
    }
}

/// `out (+)= op` applied on the middle axis of a `(pre, dk, post)` row-major block.
pub(crate) fn apply_leg_into<T: Scalar>(
    input: &[T],
    pre: usize,
    dk: usize,
    post: usize,
    op: MatRef<'_, T>,
    out: &mut [T],
    accum: Accum,
) {
    let m = op.nrows();
    if pre == 0 || post == 0 || m == 0 {
        return;
    }
    if pre <= post {
        for p in 0..pre {
            let src = MatRef::from_row_major_slice(&input[p * dk * post..(p + 1) * dk * post], dk, post);
            let dst = MatMut::from_row_major_slice_mut(&mut out[p * m * post..(p + 1) * m * post], m, post);
            matmul(dst, accum, op, src, T::one(), Par::Seq);
        }
    } else {
        for q in 0..post {
            // SAFETY: views stay inside the buffers; rows step over whole (dk|m, post) slabs.
            let src =
                unsafe { MatRef::from_raw_parts(input.as_ptr().add(q), pre, dk, (dk * post) as isize, post as isize) };
            let dst = unsafe {
                MatMut::from_raw_parts_mut(out.as_mut_ptr().add(q), pre, m, (m * post) as isize, post as isize)
            };
            matmul(dst, accum, src, op.transpose(), T::one(), Par::Seq);
        }
    }
}

/// Kronecker product with the row index of `a` most significant.
pub fn kron<T: Scalar>(a: MatRef<'_, T>, b: MatRef<'_, T>) -> Mat<T> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn identity<T: Scalar>(n: usize) -> Mat<T> {
    Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
}

pub fn adjoint<T: Scalar>(a: MatRef<'_, T>) -> Mat<T> {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conjugate())
}

pub fn mat_mul<T: Scalar>(a: MatRef<'_, T>, b: MatRef<'_, T>) -> Mat<T> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, T::one(), Par::Seq);
    out
}

/// `a^dagger b` without materializing the adjoint.
pub fn adjoint_mul<T: Scalar>(a: MatRef<'_, T>, b: MatRef<'_, T>) -> Mat<T> {
    let mut out = Mat::zeros(a.ncols(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.adjoint(), b, T::one(), Par::Seq);
    out
}

pub fn max_abs_diff<T: Scalar>(a: MatRef<'_, T>, b: MatRef<'_, T>) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] - b[(i, j)]).modulus());
        }
    }
    m
}

pub fn convert_mat<A: Scalar, B: Scalar>(a: MatRef<'_, A>) -> Mat<B> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| B::from_c64(a[(i, j)].to_c64()))
}
