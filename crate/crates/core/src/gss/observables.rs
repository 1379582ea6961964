//! Spin expectation values read off the optimized two-tensor block during a sweep.

use std::collections::BTreeMap;

use faer::c64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spin::BondOperators;
use crate::tensor::Tensor;

/// Ladder-to-Cartesian weights: row `a` gives `s^a` in terms of `[S^+, S^-, S^z]`.
const CARTESIAN: [[c64; 3]; 3] = [
    [c64 { re: 0.5, im: 0.0 }, c64 { re: 0.5, im: 0.0 }, c64 { re: 0.0, im: 0.0 }],
    [c64 { re: 0.0, im: -0.5 }, c64 { re: 0.0, im: 0.5 }, c64 { re: 0.0, im: 0.0 }],
    [c64 { re: 0.0, im: 0.0 }, c64 { re: 0.0, im: 0.0 }, c64 { re: 1.0, im: 0.0 }],
];

const ADJOINT: [usize; 3] = [1, 0, 2];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Observables {
    /// `(<s^x>, <s^y>, <s^z>)` per site; empty when not requested.
    pub single_site: Vec<[f64; 3]>,
    /// `<s^a_i s^b_j>` at `[a][b]` for `i < j`; empty when not requested.
    pub two_site: BTreeMap<(usize, usize), [[f64; 3]; 3]>,
}

#[derive(Clone, Debug)]
pub struct ObservableCollector {
    n: usize,
    single: Option<Vec<Option<[f64; 3]>>>,
    pairs: Option<BTreeMap<(usize, usize), [[f64; 3]; 3]>>,
}

impl ObservableCollector {
    pub fn new(n: usize, single_site: bool, two_site: bool) -> Self {
        ObservableCollector { n, single: single_site.then(|| vec![None; n]), pairs: two_site.then(BTreeMap::new) }
    }

    pub fn is_active(&self) -> bool {
        self.single.is_some() || self.pairs.is_some()
    }

    /// `legs` must carry operators for every site of their regions.
    pub fn collect<T: Scalar>(&mut self, psi: &Tensor<T>, legs: &[&BondOperators<T>]) -> Result<()> {
        if legs.len() != psi.rank() {
            return Err(Error::Internal("one operator set per block leg expected".into()));
        }
        for ops in legs {
            if ops.sites.len() != ops.region.len() {
                return Err(Error::Internal("observable pass needs operators for every site".into()));
            }
        }
        if let Some(single) = &mut self.single {
            for (a, ops) in legs.iter().enumerate() {
                if ops.region.len() != 1 || single[ops.region[0]].is_some() {
                    continue;
                }
                let [sp, _, sz] = ops.ladders(0);
                let plus = psi.inner(&psi.apply_on_leg(a, sp.as_ref())).to_c64();
                let z = psi.inner(&psi.apply_on_leg(a, sz.as_ref())).to_c64();
                single[ops.region[0]] = Some([plus.re, plus.im, z.re]);
            }
        }
        let Some(pairs) = &mut self.pairs else {
            return Ok(());
        };
        let mut applied: BTreeMap<usize, [Tensor<T>; 3]> = BTreeMap::new();
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for (a, ops) in legs.iter().enumerate() {
            for &r in &ops.region {
                owner.insert(r, a);
            }
        }
        let mut todo = Vec::new();
        for (&i, &a) in &owner {
            for (&j, &b) in owner.range(i + 1..) {
                if a != b && !pairs.contains_key(&(i, j)) {
                    todo.push((i, j));
                }
            }
        }
        for (i, j) in todo {
            for r in [i, j] {
                if !applied.contains_key(&r) {
                    let a = owner[&r];
                    let k = legs[a].position(r).expect("site is in its leg");
                    let [p, m, z] = legs[a].ladders(k);
                    applied.insert(
                        r,
                        [
                            psi.apply_on_leg(a, p.as_ref()),
                            psi.apply_on_leg(a, m.as_ref()),
                            psi.apply_on_leg(a, z.as_ref()),
                        ],
                    );
                }
            }
            let (xi, xj) = (&applied[&i], &applied[&j]);
            let mut ladder = [[c64::new(0.0, 0.0); 3]; 3];
            for (mu, row) in ladder.iter_mut().enumerate() {
                for (nu, v) in row.iter_mut().enumerate() {
                    *v = xi[ADJOINT[mu]].inner(&xj[nu]).to_c64();
                }
            }
            let mut out = [[0.0; 3]; 3];
            for (al, row) in out.iter_mut().enumerate() {
                for (be, v) in row.iter_mut().enumerate() {
                    let mut acc = c64::new(0.0, 0.0);
                    for mu in 0..3 {
                        for nu in 0..3 {
                            acc += CARTESIAN[al][mu] * CARTESIAN[be][nu] * ladder[mu][nu];
                        }
                    }
                    *v = acc.re;
                }
            }
            if pairs.insert((i, j), out).is_some() {
                return Err(Error::Internal(format!("pair ({i}, {j}) evaluated twice")));
            }
        }
        Ok(())
    }

    /// Fails unless every requested site and pair was reached.
    pub fn finish(self) -> Result<Observables> {
        let mut out = Observables::default();
        if let Some(single) = self.single {
            for (r, v) in single.into_iter().enumerate() {
                out.single_site.push(v.ok_or_else(|| Error::Internal(format!("site {r} never evaluated")))?);
            }
        }
        if let Some(pairs) = self.pairs {
            let expected = self.n * (self.n - 1) / 2;
            if pairs.len() != expected {
                return Err(Error::Internal(format!("{} of {expected} pairs evaluated", pairs.len())));
            }
            out.two_site = pairs;
        }
        Ok(out)
    }
}
