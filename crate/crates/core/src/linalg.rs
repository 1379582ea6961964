//! Dense decompositions, spectrum truncation and the Lanczos ground-state solver.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{adjoint, max_abs_diff};

/// Thin SVD `A = U diag(values) Vh`, values non-increasing.
#[derive(Clone, Debug)]
pub struct SingularSpectrum<T: Scalar> {
    pub values: Vec<f64>,
    pub left: Mat<T>,
    pub right: Mat<T>,
}

impl<T: Scalar> SingularSpectrum<T> {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn recompose(&self) -> Mat<T> {
        let (m, n, k) = (self.left.nrows(), self.right.ncols(), self.values.len());
        let mut us = self.left.clone();
        for j in 0..k {
            for i in 0..m {
                us[(i, j)] = us[(i, j)].scale(self.values[j]);
            }
        }
        let mut out = Mat::zeros(m, n);
        faer::linalg::matmul::matmul(
            out.as_mut(),
            faer::Accum::Replace,
            us.as_ref(),
            self.right.as_ref(),
            T::one(),
            faer::Par::Seq,
        );
        out
    }
}

fn check_finite<T: Scalar>(a: MatRef<'_, T>, what: &str) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].finite() {
                return Err(Error::Numerical(format!("non-finite entry in {what}")));
            }
        }
    }
    Ok(())
}

pub fn full_svd<T: Scalar>(a: MatRef<'_, T>) -> Result<SingularSpectrum<T>> {
    check_finite(a, "SVD input")?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidArgument("SVD of an empty matrix".into()));
    }
    let svd = a.thin_svd().map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let values: Vec<f64> = (0..s.nrows()).map(|i| s[i].re()).collect();
    Ok(SingularSpectrum { values, left: svd.U().to_owned(), right: adjoint(svd.V()) })
}

pub fn singular_values<T: Scalar>(a: MatRef<'_, T>) -> Result<Vec<f64>> {
    check_finite(a, "SVD input")?;
    a.singular_values().map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))
}

/// Outcome of choosing how many singular values survive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationRank {
    pub kept: usize,
    /// Discarded weight relative to the total, before renormalization.
    pub error: f64,
    /// Set when every candidate cut fell inside a multiplet and the multiplet had to be split.
    pub forced_split: bool,
}

/// Singular values this far below the largest are rounding noise and never kept.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Picks the cut for a non-increasing spectrum: relative cutoff `sigma`, cap `chi`, then
/// move the cut down while it would separate values closer than `delta` (relative).
pub fn truncation_rank(values: &[f64], chi: usize, sigma: f64, delta: f64) -> Result<TruncationRank> {
    if chi == 0 {
        return Err(Error::InvalidArgument("bond dimension must be positive".into()));
    }
    if values.is_empty() || values[0] <= 0.0 {
        return Err(Error::Numerical("spectrum has no positive weight".into()));
    }
    let top = values[0];
    let alive = values.iter().take_while(|&&d| d / top > sigma.max(NOISE_FLOOR)).count().max(1);
    let mut k = chi.min(alive);
    let start = k;
    let mut forced = false;
    if k < values.len() {
        while k > 0 && degenerate(values[k - 1], values[k], delta) {
            k -= 1;
        }
        if k == 0 {
            forced = true;
            k = start;
            log::warn!("truncation at {start} splits a multiplet spanning the whole kept spectrum");
        }
    }
    let total: f64 = values.iter().map(|d| d * d).sum();
    let kept: f64 = values[..k].iter().map(|d| d * d).sum();
    Ok(TruncationRank { kept: k, error: ((total - kept) / total).max(0.0), forced_split: forced })
}

fn degenerate(above: f64, below: f64, delta: f64) -> bool {
    if above == 0.0 {
        return true;
    }
    ((above - below).abs() / above) < delta
}

#[derive(Clone, Debug)]
pub struct Truncated<T: Scalar> {
    pub spectrum: SingularSpectrum<T>,
    pub error: f64,
    pub forced_split: bool,
}

/// Truncates and renormalizes the kept values to unit 2-norm.
pub fn truncate_spectrum<T: Scalar>(
    spec: SingularSpectrum<T>,
    chi: usize,
    sigma: f64,
    delta: f64,
) -> Result<Truncated<T>> {
    let r = truncation_rank(&spec.values, chi, sigma, delta)?;
    let k = r.kept;
    let norm = spec.values[..k].iter().map(|d| d * d).sum::<f64>().sqrt();
    let values = spec.values[..k].iter().map(|d| d / norm).collect();
    let left = spec.left.subcols(0, k).to_owned();
    let right = spec.right.subrows(0, k).to_owned();
    Ok(Truncated { spectrum: SingularSpectrum { values, left, right }, error: r.error, forced_split: r.forced_split })
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenSpectrum<T: Scalar> {
    pub values: Vec<f64>,
    pub vectors: Mat<T>,
}

pub fn full_eigh<T: Scalar>(h: MatRef<'_, T>) -> Result<EigenSpectrum<T>> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidArgument("eigendecomposition needs a square matrix".into()));
    }
    check_finite(h, "eigensolver input")?;
    let scale = (0..h.nrows())
        .flat_map(|i| (0..h.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| h[(i, j)].modulus())
        .fold(1.0f64, f64::max);
    let herm = max_abs_diff(h, adjoint(h).as_ref());
    if herm > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!("matrix is not Hermitian (deviation {herm:e})")));
    }
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    Ok(EigenSpectrum { values: (0..s.nrows()).map(|i| s[i].re()).collect(), vectors: eig.U().to_owned() })
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_krylov: usize,
    pub tol: f64,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_krylov: 200, tol: 1e-12, max_restarts: 20 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult<T> {
    pub energy: f64,
    pub vector: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| x.conjugate() * *y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// Lowest eigenpair of the Hermitian map `apply` (writes `H x` into its second argument),
/// Krylov space grown from `init` with full reorthogonalization and thick-free restarts.
pub fn lanczos_lowest<T: Scalar>(
    mut apply: impl FnMut(&[T], &mut [T]) -> Result<()>,
    init: &[T],
    opts: &LanczosOptions,
) -> Result<LanczosResult<T>> {
    let n = init.len();
    if n == 0 {
        return Err(Error::InvalidArgument("Lanczos on an empty space".into()));
    }
    let n0 = norm(init);
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::InvalidArgument("Lanczos start vector has zero or non-finite norm".into()));
    }
    let mut start: Vec<T> = init.iter().map(|x| x.scale(1.0 / n0)).collect();
    let kmax = opts.max_krylov.max(2).min(n);
    let mut iterations = 0;
    let mut best: Option<(f64, Vec<T>)> = None;

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<T>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![T::zero(); n];
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w)?;
            iterations += 1;
            if w.iter().any(|x| !x.finite()) {
                return Err(Error::Numerical("Hamiltonian application produced non-finite values".into()));
            }
            let a = dot(&basis[j], &w).re();
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    axpy(&mut w, -c, b);
                }
            }
            let b = norm(&w);
            let k = alpha.len();
            let (theta, s) = tridiagonal_lowest(&alpha, &beta)?;
            let residual = b * s[k - 1].abs();
            let breakdown = b <= 1e-14 * a.abs().max(1.0);
            let done = residual <= opts.tol * theta.abs().max(1.0) || breakdown;
            if done || k >= kmax {
                let mut y = vec![T::zero(); n];
                for (si, v) in s.iter().zip(&basis) {
                    axpy(&mut y, T::from_real(*si), v);
                }
                let ny = norm(&y);
                for x in &mut y {
                    *x = x.scale(1.0 / ny);
                }
                if done || k == n {
                    return Ok(LanczosResult { energy: theta, vector: y, iterations, converged: true });
                }
                best = Some((theta, y.clone()));
                start = y;
                break;
            }
            beta.push(b);
            let next: Vec<T> = w.iter().map(|x| x.scale(1.0 / b)).collect();
            basis.push(next);
        }
    }
    let (energy, vector) = best.expect("at least one restart cycle ran");
    log::warn!("Lanczos stopped after {iterations} iterations without reaching tolerance {:e}", opts.tol);
    Ok(LanczosResult { energy, vector, iterations, converged: false })
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = alpha.len();
    if k == 1 {
        return Ok((alpha[0], vec![1.0]));
    }
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("tridiagonal eigensolver failed: {e:?}")))?;
    let u = eig.U();
    Ok((eig.S().column_vector()[0], (0..k).map(|i| u[(i, 0)]).collect()))
}

/// `-sum p ln p` over `p = d^2 / sum d^2`, with `0 ln 0 = 0`.
pub fn entropy(values: &[f64]) -> f64 {
    let total: f64 = values.iter().map(|d| d * d).sum();
    if total <= 0.0 {
        return 0.0;
    }
    values.iter().map(|d| d * d / total).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
}
