//! Renormalized spin operators and block Hamiltonians kept per bond.

use std::collections::BTreeMap;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::TtnState;
use crate::tensor::{adjoint, adjoint_mul, convert_mat, identity, kron, Tensor};
use crate::topology::Bond;

use super::{local_spin_matrices, SpinModel};

/// Model terms converted to the working field, couplings in the ladder basis `(+, -, z)`.
#[derive(Clone, Debug)]
pub struct Couplings<T: Scalar> {
    pub dims: Vec<usize>,
    pub pairs: BTreeMap<(usize, usize), [[T; 3]; 3]>,
    pub partners: Vec<Vec<usize>>,
    pub onsite: Vec<Mat<T>>,
    pub sz: Vec<Mat<T>>,
    pub sp: Vec<Mat<T>>,
}

impl<T: Scalar> Couplings<T> {
    pub fn new(model: &SpinModel) -> Result<Self> {
        model.validate()?;
        if !T::IS_COMPLEX && !model.is_real() {
            return Err(Error::InvalidArgument("model has complex terms; use complex arithmetic".into()));
        }
        let n = model.n_sites();
        let mut partners = vec![Vec::new(); n];
        let mut pairs = BTreeMap::new();
        for ((i, j), k) in model.ladder_couplings() {
            partners[i].push(j);
            partners[j].push(i);
            pairs.insert((i, j), k.map(|row| row.map(T::from_c64)));
        }
        let mut sz = Vec::with_capacity(n);
        let mut sp = Vec::with_capacity(n);
        for s in &model.spins {
            let m = local_spin_matrices(*s);
            sz.push(convert_mat(m.z.as_ref()));
            sp.push(convert_mat(m.plus.as_ref()));
        }
        Ok(Couplings {
            dims: model.local_dims(),
            pairs,
            partners,
            onsite: (0..n).map(|i| convert_mat(model.onsite(i).as_ref())).collect(),
            sz,
            sp,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    /// Coupling oriented as `s_r^T C s_p`.
    pub fn coupling(&self, r: usize, p: usize) -> Option<[[T; 3]; 3]> {
        if r < p {
            self.pairs.get(&(r, p)).copied()
        } else {
            self.pairs.get(&(p, r)).map(|k| {
                let mut t = *k;
                for a in 0..3 {
                    for b in 0..3 {
                        t[a][b] = k[b][a];
                    }
                }
                t
            })
        }
    }
}

/// Operators on the space of one bond, describing the sites behind it.
#[derive(Clone, Debug)]
pub struct BondOperators<T: Scalar> {
    /// Every site behind the bond, sorted.
    pub region: Vec<usize>,
    /// Sites whose spin operators are stored, sorted.
    pub sites: Vec<usize>,
    pub sz: Vec<Mat<T>>,
    pub sp: Vec<Mat<T>>,
    pub hamiltonian: Mat<T>,
}

impl<T: Scalar> BondOperators<T> {
    pub fn physical(c: &Couplings<T>, r: usize) -> Self {
        BondOperators {
            region: vec![r],
            sites: vec![r],
            sz: vec![c.sz[r].clone()],
            sp: vec![c.sp[r].clone()],
            hamiltonian: c.onsite[r].clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn position(&self, r: usize) -> Option<usize> {
        self.sites.binary_search(&r).ok()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.region.binary_search(&r).is_ok()
    }

    /// `[S^+, S^-, S^z]` for stored site index `k`.
    pub fn ladders(&self, k: usize) -> [Mat<T>; 3] {
        [self.sp[k].clone(), adjoint(self.sp[k].as_ref()), self.sz[k].clone()]
    }
}

pub(crate) struct LegOps<'a, T: Scalar> {
    pub ops: &'a BondOperators<T>,
    pub ladders: Vec<[Mat<T>; 3]>,
}

impl<'a, T: Scalar> LegOps<'a, T> {
    pub fn new(ops: &'a BondOperators<T>) -> Self {
        LegOps { ops, ladders: (0..ops.sites.len()).map(|k| ops.ladders(k)).collect() }
    }
}

fn add_scaled<T: Scalar>(acc: &mut Mat<T>, a: T, m: &Mat<T>) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc[(i, j)] += a * m[(i, j)];
        }
    }
}

/// Interaction terms `A (x) B` between two disjoint blocks. Couplings are pre-summed on the
/// side holding more sites so that each term carries one operator of the smaller side.
pub(crate) fn cross_terms<T: Scalar>(
    c: &Couplings<T>,
    x: &LegOps<'_, T>,
    y: &LegOps<'_, T>,
) -> Result<Vec<(Mat<T>, Mat<T>)>> {
    let swap = x.ops.sites.len() > y.ops.sites.len();
    let (small, large) = if swap { (y, x) } else { (x, y) };
    let mut acc: BTreeMap<(usize, usize), Mat<T>> = BTreeMap::new();
    for (ks, &r) in small.ops.sites.iter().enumerate() {
        for &p in &c.partners[r] {
            if !large.ops.contains(p) {
                continue;
            }
            let kl =
                large.ops.position(p).ok_or_else(|| Error::Internal(format!("site {p} has no cached operators")))?;
            let k = c.coupling(r, p).expect("partner implies coupling");
            for mu in 0..3 {
                for nu in 0..3 {
                    if k[mu][nu] == T::zero() {
                        continue;
                    }
                    let l = &large.ladders[kl][nu];
                    let e = acc.entry((ks, mu)).or_insert_with(|| Mat::zeros(l.nrows(), l.ncols()));
                    add_scaled(e, k[mu][nu], l);
                }
            }
        }
    }
    // Both sides must hold every site that couples across.
    for &r in &large.ops.sites {
        for &p in &c.partners[r] {
            if small.ops.contains(p) && small.ops.position(p).is_none() {
                return Err(Error::Internal(format!("site {p} has no cached operators")));
            }
        }
    }
    Ok(acc
        .into_iter()
        .map(|((ks, mu), o)| {
            let s = small.ladders[ks][mu].clone();
            if swap {
                (o, s)
            } else {
                (s, o)
            }
        })
        .collect())
}

/// `V^dagger (op on slot) V` for an isometry `v` with legs `(chi1, chi2, chi3)`.
pub fn renormalize_spin<T: Scalar>(op: MatRef<'_, T>, v: &Tensor<T>, slot: usize) -> Result<Mat<T>> {
    if slot > 1 || op.ncols() != v.shape()[slot] || op.nrows() != v.shape()[slot] {
        return Err(Error::Invariant(format!(
            "operator of size {}x{} does not fit slot {slot} of {:?}",
            op.nrows(),
            op.ncols(),
            v.shape()
        )));
    }
    let w = v.apply_on_leg(slot, op);
    Ok(adjoint_mul(v.matrix(2), w.matrix(2)))
}

/// `V^dagger H V` with `H` acting on the `chi1 chi2` space.
pub fn project_block_h<T: Scalar>(h: MatRef<'_, T>, v: &Tensor<T>) -> Result<Mat<T>> {
    let m = v.matrix(2);
    if h.nrows() != m.nrows() || h.ncols() != m.nrows() {
        return Err(Error::Invariant("block Hamiltonian does not match the isometry".into()));
    }
    let hv = crate::tensor::mat_mul(h, m);
    Ok(hermitize(adjoint_mul(m, hv.as_ref())))
}

pub(crate) fn hermitize<T: Scalar>(h: Mat<T>) -> Mat<T> {
    let n = h.nrows();
    Mat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conjugate()).scale(0.5))
}

/// Dense `sum A (x) B` over all couplings between the two blocks.
pub fn build_block_interaction<T: Scalar>(
    c: &Couplings<T>,
    x: &BondOperators<T>,
    y: &BondOperators<T>,
) -> Result<Mat<T>> {
    let terms = cross_terms(c, &LegOps::new(x), &LegOps::new(y))?;
    let n = x.dim() * y.dim();
    let mut out = Mat::zeros(n, n);
    for (a, b) in terms {
        out += kron(a.as_ref(), b.as_ref());
    }
    Ok(out)
}

/// Dense Hamiltonian of the union of two blocks, `x` index most significant.
pub fn two_block_hamiltonian<T: Scalar>(
    c: &Couplings<T>,
    x: &BondOperators<T>,
    y: &BondOperators<T>,
) -> Result<Mat<T>> {
    let mut h = build_block_interaction(c, x, y)?;
    h += kron(x.hamiltonian.as_ref(), identity::<T>(y.dim()).as_ref());
    h += kron(identity::<T>(x.dim()).as_ref(), y.hamiltonian.as_ref());
    Ok(h)
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

/// Operators of the parent bond of isometry `v` whose children carry `x` and `y`.
/// With `keep_all` false only sites coupled to the outside keep their spin operators.
pub fn renormalize_block<T: Scalar>(
    c: &Couplings<T>,
    x: &BondOperators<T>,
    y: &BondOperators<T>,
    v: &Tensor<T>,
    keep_all: bool,
) -> Result<BondOperators<T>> {
    if v.rank() != 3 || v.shape()[0] != x.dim() || v.shape()[1] != y.dim() {
        return Err(Error::Invariant(format!(
            "isometry {:?} does not match child dimensions ({}, {})",
            v.shape(),
            x.dim(),
            y.dim()
        )));
    }
    let region = merge_sorted(&x.region, &y.region);
    let mut inside = vec![false; c.n_sites()];
    for &r in &region {
        inside[r] = true;
    }
    let needed = |r: usize| keep_all || c.partners[r].iter().any(|&p| !inside[p]);
    let mut sites = Vec::new();
    let mut sz = Vec::new();
    let mut sp = Vec::new();
    let mut entries: Vec<(usize, usize, usize)> = Vec::new();
    for (slot, ops) in [(0usize, x), (1usize, y)] {
        if keep_all && ops.sites.len() != ops.region.len() {
            return Err(Error::Internal("child bond lacks operators for part of its region".into()));
        }
        for (k, &r) in ops.sites.iter().enumerate() {
            if needed(r) {
                entries.push((r, slot, k));
            }
        }
    }
    entries.sort_unstable();
    for (r, slot, k) in entries {
        let ops = if slot == 0 { x } else { y };
        sites.push(r);
        sz.push(renormalize_spin(ops.sz[k].as_ref(), v, slot)?);
        sp.push(renormalize_spin(ops.sp[k].as_ref(), v, slot)?);
    }
    let mut w = v.apply_on_leg(0, x.hamiltonian.as_ref());
    w.add_assign(&v.apply_on_leg(1, y.hamiltonian.as_ref()));
    for (a, b) in cross_terms(c, &LegOps::new(x), &LegOps::new(y))? {
        let t = v.apply_on_leg(1, b.as_ref()).apply_on_leg(0, a.as_ref());
        w.add_assign(&t);
    }
    let h = hermitize(adjoint_mul(v.matrix(2), w.matrix(2)));
    Ok(BondOperators { region, sites, sz, sp, hamiltonian: h })
}

/// Per-bond operators, each describing the sites on the side away from the center.
#[derive(Clone, Debug)]
pub struct OperatorCache<T: Scalar> {
    bonds: Vec<Option<BondOperators<T>>>,
    keep_all: bool,
}

impl<T: Scalar> OperatorCache<T> {
    pub fn new(c: &Couplings<T>, n_bonds: usize) -> Self {
        let mut bonds: Vec<Option<BondOperators<T>>> = (0..n_bonds).map(|_| None).collect();
        for r in 0..c.n_sites() {
            bonds[r] = Some(BondOperators::physical(c, r));
        }
        OperatorCache { bonds, keep_all: false }
    }

    pub fn keep_all_sites(&self) -> bool {
        self.keep_all
    }

    pub fn set_keep_all_sites(&mut self, on: bool) {
        self.keep_all = on;
    }

    pub fn get(&self, b: Bond) -> Result<&BondOperators<T>> {
        self.bonds
            .get(b)
            .and_then(|x| x.as_ref())
            .ok_or_else(|| Error::Internal(format!("no cached operators for bond {b}")))
    }

    pub fn insert(&mut self, b: Bond, ops: BondOperators<T>) {
        self.bonds[b] = Some(ops);
    }

    /// Recomputes the bond in slot 3 of `tensor` from its children.
    pub fn refresh(&mut self, c: &Couplings<T>, state: &TtnState<T>, tensor: usize) -> Result<()> {
        let e = state.topology.edge(tensor);
        let ops = renormalize_block(c, self.get(e[0])?, self.get(e[1])?, &state.tensors[tensor], self.keep_all)?;
        self.bonds[e[2]] = Some(ops);
        Ok(())
    }

    /// Recomputes every non-center auxiliary bond, leaves first.
    pub fn rebuild(&mut self, c: &Couplings<T>, state: &TtnState<T>) -> Result<()> {
        let topo = &state.topology;
        let dist = topo.distances(topo.center())?;
        let mut order: Vec<usize> = (0..topo.n_tensors()).filter(|&i| topo.edge(i)[2] != topo.center()).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(dist[topo.edge(i)[2]]), topo.edge(i)[2]));
        for i in order {
            self.refresh(c, state, i)?;
        }
        Ok(())
    }
}
