//! Exact diagonalization on the full Hilbert space (site 0 most significant).

use std::collections::BTreeMap;

use faer::{c64, Accum, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{full_eigh, lanczos_lowest, LanczosOptions};
use crate::spin::{local_spin_matrices, Cartesian, SpinModel};
use crate::tensor::apply_leg_into;
use crate::testing::random_scalar;

#[derive(Clone, Copy, Debug)]
pub struct EdOptions {
    pub max_dim: usize,
    /// Dimensions up to this size are diagonalized densely.
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for EdOptions {
    fn default() -> Self {
        EdOptions { max_dim: 1 << 14, dense_limit: 1 << 10, lanczos: LanczosOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct EdResult {
    pub energy: f64,
    pub vector: Vec<c64>,
    /// `<s^x>, <s^y>, <s^z>` per site.
    pub single_site: Vec<[f64; 3]>,
    /// `<s_i^a s_j^b>` for `i < j`.
    pub two_site: BTreeMap<(usize, usize), [[f64; 3]; 3]>,
}

/// Full-space Hamiltonian built from Cartesian spin matrices.
pub struct FullHamiltonian {
    dims: Vec<usize>,
    ops: Vec<[Mat<c64>; 3]>,
    onsite: Vec<Mat<c64>>,
    pairs: Vec<((usize, usize), Cartesian)>,
}

impl FullHamiltonian {
    pub fn new(model: &SpinModel, max_dim: usize) -> Result<Self> {
        model.validate()?;
        let dims = model.local_dims();
        let total = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
        if total > max_dim {
            return Err(Error::InvalidArgument(format!(
                "Hilbert space of dimension {total} exceeds the limit {max_dim}"
            )));
        }
        let ops = model
            .spins
            .iter()
            .map(|&s| {
                let m = local_spin_matrices(s);
                let d = m.z.nrows();
                [m.x, m.y, Mat::from_fn(d, d, |i, j| c64::new(m.z[(i, j)], 0.0))]
            })
            .collect();
        Ok(FullHamiltonian {
            onsite: (0..model.n_sites()).map(|i| model.onsite(i)).collect(),
            pairs: model.cartesian_couplings().into_iter().collect(),
            dims,
            ops,
        })
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn geometry(&self, site: usize) -> (usize, usize, usize) {
        (self.dims[..site].iter().product(), self.dims[site], self.dims[site + 1..].iter().product())
    }

    fn apply_site(&self, site: usize, op: &Mat<c64>, x: &[c64], out: &mut [c64], accum: Accum) {
        let (pre, d, post) = self.geometry(site);
        apply_leg_into(x, pre, d, post, op.as_ref(), out, accum);
    }

    /// `out = (a on site i)(b on site j) x`.
    pub fn apply_pair(&self, i: usize, a: &Mat<c64>, j: usize, b: &Mat<c64>, x: &[c64], out: &mut [c64]) {
        let mut tmp = vec![c64::new(0.0, 0.0); x.len()];
        self.apply_site(j, b, x, &mut tmp, Accum::Replace);
        self.apply_site(i, a, &tmp, out, Accum::Replace);
    }

    pub fn apply(&self, x: &[c64], out: &mut [c64]) {
        out.fill(c64::new(0.0, 0.0));
        for (i, h) in self.onsite.iter().enumerate() {
            if h.norm_l2() > 0.0 {
                self.apply_site(i, h, x, out, Accum::Add);
            }
        }
        let mut tmp = vec![c64::new(0.0, 0.0); x.len()];
        let mut tmp2 = vec![c64::new(0.0, 0.0); x.len()];
        for &((i, j), c) in &self.pairs {
            for b in 0..3 {
                let mut first = true;
                for a in 0..3 {
                    if c[a][b] == 0.0 {
                        continue;
                    }
                    if first {
                        self.apply_site(j, &self.ops[j][b], x, &mut tmp, Accum::Replace);
                        first = false;
                    }
                    self.apply_site(i, &self.ops[i][a], &tmp, &mut tmp2, Accum::Replace);
                    for (o, t) in out.iter_mut().zip(&tmp2) {
                        *o += t * c[a][b];
                    }
                }
            }
        }
    }

    pub fn dense(&self) -> Mat<c64> {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        let mut e = vec![c64::new(0.0, 0.0); n];
        let mut col = vec![c64::new(0.0, 0.0); n];
        for j in 0..n {
            e.fill(c64::new(0.0, 0.0));
            e[j] = c64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    fn expectation(&self, v: &[c64], w: &[c64]) -> c64 {
        v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn observables(&self, v: &[c64]) -> (Vec<[f64; 3]>, BTreeMap<(usize, usize), [[f64; 3]; 3]>) {
        let n = self.dims.len();
        let mut w = vec![c64::new(0.0, 0.0); v.len()];
        let mut single = vec![[0.0; 3]; n];
        for i in 0..n {
            for a in 0..3 {
                self.apply_site(i, &self.ops[i][a], v, &mut w, Accum::Replace);
                single[i][a] = self.expectation(v, &w).re;
            }
        }
        let mut two = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut c = [[0.0; 3]; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        self.apply_pair(i, &self.ops[i][a], j, &self.ops[j][b], v, &mut w);
                        c[a][b] = self.expectation(v, &w).re;
                    }
                }
                two.insert((i, j), c);
            }
        }
        (single, two)
    }
}

fn lowest(h: &FullHamiltonian, opts: &EdOptions, deflate: Option<(&[c64], f64)>) -> Result<(f64, Vec<c64>)> {
    let n = h.dim();
    if n <= opts.dense_limit {
        let mut m = h.dense();
        if let Some((v, shift)) = deflate {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj() * shift;
                }
            }
        }
        let e = full_eigh(m.as_ref())?;
        return Ok((e.values[0], (0..n).map(|i| e.vectors[(i, 0)]).collect()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let init: Vec<c64> = (0..n).map(|_| random_scalar::<c64>(&mut rng)).collect();
    let r = lanczos_lowest(
        |x: &[c64], y: &mut [c64]| {
            h.apply(x, y);
            if let Some((v, shift)) = deflate {
                let ov: c64 = v.iter().zip(x).map(|(a, b)| a.conj() * b).sum::<c64>() * shift;
                for (yi, vi) in y.iter_mut().zip(v) {
                    *yi += vi * ov;
                }
            }
            Ok(())
        },
        &init,
        &opts.lanczos,
    )?;
    Ok((r.energy, r.vector))
}

pub fn ed_ground_state(model: &SpinModel, opts: &EdOptions) -> Result<EdResult> {
    let h = FullHamiltonian::new(model, opts.max_dim)?;
    let (energy, vector) = lowest(&h, opts, None)?;
    let (single_site, two_site) = h.observables(&vector);
    Ok(EdResult { energy, vector, single_site, two_site })
}

/// Difference between the two lowest eigenvalues.
pub fn ed_gap(model: &SpinModel, ground: &EdResult, opts: &EdOptions) -> Result<f64> {
    let h = FullHamiltonian::new(model, opts.max_dim)?;
    let shift = 10.0 * (1.0 + ground.energy.abs());
    let (e1, _) = lowest(&h, opts, Some((&ground.vector, shift)))?;
    Ok(e1 - ground.energy)
}
