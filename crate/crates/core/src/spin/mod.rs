//! Spin Hamiltonians with pairwise bilinear couplings and on-site terms.

mod operators;
mod superblock;

use std::collections::BTreeMap;
use std::fmt;

use faer::{c64, Mat};

use crate::error::{Error, Result};

pub use operators::{
    build_block_interaction, project_block_h, renormalize_block, renormalize_spin, two_block_hamiltonian,
    BondOperators, Couplings, OperatorCache,
};
pub use superblock::Superblock;

/// Spin magnitude stored as `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinSize(u32);

impl SpinSize {
    pub fn from_twice(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidArgument("spin size must be positive".into()));
        }
        Ok(SpinSize(two_s))
    }

    pub const HALF: SpinSize = SpinSize(1);

    pub fn twice(self) -> u32 {
        self.0
    }
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Accepts `"1/2"`-style fractions and integers; non-integer decimals are rejected.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad spin size {s:?}")))?;
            return match den.trim() {
                "1" => SpinSize::from_twice(2 * num),
                "2" => SpinSize::from_twice(num),
                _ => Err(Error::InvalidArgument(format!("spin size {s:?} is not a multiple of 1/2"))),
            };
        }
        if let Ok(n) = s.parse::<u32>() {
            return SpinSize::from_twice(2 * n);
        }
        match s.parse::<f64>() {
            Ok(x) if x.fract() == 0.0 && x > 0.0 => SpinSize::from_twice(2 * x as u32),
            Ok(_) => Err(Error::InvalidArgument(format!(
                "spin size {s:?}: half-odd values must be written as fractions such as 1/2"
            ))),
            Err(_) => Err(Error::InvalidArgument(format!("bad spin size {s:?}"))),
        }
    }
}

impl fmt::Display for SpinSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Local spin operators in the basis `m = s, s-1, ..., -s`.
#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub z: Mat<f64>,
    pub plus: Mat<f64>,
    pub x: Mat<c64>,
    pub y: Mat<c64>,
}

pub fn local_spin_matrices(s: SpinSize) -> SpinMatrices {
    let d = s.dim();
    let sv = s.value();
    let m = |k: usize| sv - k as f64;
    let z = Mat::from_fn(d, d, |i, j| if i == j { m(i) } else { 0.0 });
    let plus = Mat::from_fn(d, d, |i, j| if j == i + 1 { (sv * (sv + 1.0) - m(j) * (m(j) + 1.0)).sqrt() } else { 0.0 });
    let x = Mat::from_fn(d, d, |i, j| c64::new(0.5 * (plus[(i, j)] + plus[(j, i)]), 0.0));
    let y = Mat::from_fn(d, d, |i, j| c64::new(0.0, -0.5 * (plus[(i, j)] - plus[(j, i)])));
    SpinMatrices { z, plus, x, y }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn name(self) -> char {
        ['x', 'y', 'z'][self as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XxzRow {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
    pub anisotropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XyzRow {
    pub i: usize,
    pub j: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRow {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Exchange {
    Xxz(Vec<XxzRow>),
    Xyz(Vec<XyzRow>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinModel {
    pub spins: Vec<SpinSize>,
    pub exchange: Exchange,
    /// `-h s^a` per axis.
    pub fields: [Vec<(usize, f64)>; 3],
    /// `D (s^z)^2`.
    pub sia: Vec<(usize, f64)>,
    /// `D (s_i x s_j)^a` per axis.
    pub dm: [Vec<PairRow>; 3],
    /// `G (s_i^b s_j^c + s_i^c s_j^b)` per axis `a`, with `b, c` the other two axes.
    pub sod: [Vec<PairRow>; 3],
}

/// Cartesian coupling `s_i^T C s_j`.
pub type Cartesian = [[f64; 3]; 3];

/// Coupling in the ladder basis `(+, -, z)`.
pub type Ladder = [[c64; 3]; 3];

/// Columns map ladder operators to Cartesian ones: `s^a = sum_mu M[a][mu] S^mu`.
pub fn ladder_transform() -> [[c64; 3]; 3] {
    let h = 0.5;
    [
        [c64::new(h, 0.0), c64::new(h, 0.0), c64::new(0.0, 0.0)],
        [c64::new(0.0, -h), c64::new(0.0, h), c64::new(0.0, 0.0)],
        [c64::new(0.0, 0.0), c64::new(0.0, 0.0), c64::new(1.0, 0.0)],
    ]
}

pub fn to_ladder(c: &Cartesian) -> Ladder {
    let m = ladder_transform();
    let mut k = [[c64::new(0.0, 0.0); 3]; 3];
    for mu in 0..3 {
        for nu in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    k[mu][nu] += m[a][mu] * m[b][nu] * c[a][b];
                }
            }
        }
    }
    k
}

impl SpinModel {
    /// Uniform spin sizes and no couplings.
    pub fn new(spins: Vec<SpinSize>) -> Self {
        SpinModel {
            spins,
            exchange: Exchange::Xxz(Vec::new()),
            fields: Default::default(),
            sia: Vec::new(),
            dm: Default::default(),
            sod: Default::default(),
        }
    }

    pub fn uniform(n: usize, s: SpinSize) -> Self {
        SpinModel::new(vec![s; n])
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.spins.iter().map(|s| s.dim()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        let check_pairs = |name: &str, pairs: &mut dyn Iterator<Item = (usize, usize)>| -> Result<()> {
            let mut seen = std::collections::BTreeSet::new();
            for (i, j) in pairs {
                if !(i < j && j < n) {
                    return Err(Error::InvalidArgument(format!("{name}: pair ({i}, {j}) needs 0 <= i < j < {n}")));
                }
                if !seen.insert((i, j)) {
                    return Err(Error::InvalidArgument(format!("{name}: duplicate pair ({i}, {j})")));
                }
            }
            Ok(())
        };
        match &self.exchange {
            Exchange::Xxz(rows) => check_pairs("exchange", &mut rows.iter().map(|r| (r.i, r.j)))?,
            Exchange::Xyz(rows) => check_pairs("exchange", &mut rows.iter().map(|r| (r.i, r.j)))?,
        }
        for a in Axis::ALL {
            check_pairs(&format!("DM_{}", a.name()), &mut self.dm[a as usize].iter().map(|r| (r.i, r.j)))?;
            check_pairs(&format!("SOD_{}", a.name()), &mut self.sod[a as usize].iter().map(|r| (r.i, r.j)))?;
        }
        let check_sites = |name: &str, rows: &[(usize, f64)]| -> Result<()> {
            let mut seen = std::collections::BTreeSet::new();
            for &(i, _) in rows {
                if i >= n || !seen.insert(i) {
                    return Err(Error::InvalidArgument(format!("{name}: bad or repeated site {i}")));
                }
            }
            Ok(())
        };
        for a in Axis::ALL {
            check_sites(&format!("MF_{}", a.name()), &self.fields[a as usize])?;
        }
        check_sites("SIA", &self.sia)
    }

    /// Summed Cartesian coupling matrices keyed by `(i, j)`, `i < j`.
    pub fn cartesian_couplings(&self) -> BTreeMap<(usize, usize), Cartesian> {
        let mut out: BTreeMap<(usize, usize), Cartesian> = BTreeMap::new();
        let mut add = |i: usize, j: usize, a: usize, b: usize, v: f64| {
            out.entry((i, j)).or_insert([[0.0; 3]; 3])[a][b] += v;
        };
        match &self.exchange {
            Exchange::Xxz(rows) => {
                for r in rows {
                    add(r.i, r.j, 0, 0, r.coupling);
                    add(r.i, r.j, 1, 1, r.coupling);
                    add(r.i, r.j, 2, 2, r.coupling * r.anisotropy);
                }
            }
            Exchange::Xyz(rows) => {
                for r in rows {
                    add(r.i, r.j, 0, 0, r.jx);
                    add(r.i, r.j, 1, 1, r.jy);
                    add(r.i, r.j, 2, 2, r.jz);
                }
            }
        }
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for r in &self.dm[a] {
                add(r.i, r.j, b, c, r.value);
                add(r.i, r.j, c, b, -r.value);
            }
            for r in &self.sod[a] {
                add(r.i, r.j, b, c, r.value);
                add(r.i, r.j, c, b, r.value);
            }
        }
        out.retain(|_, c| c.iter().flatten().any(|&x| x != 0.0));
        out
    }

    pub fn ladder_couplings(&self) -> BTreeMap<(usize, usize), Ladder> {
        self.cartesian_couplings().iter().map(|(&k, c)| (k, to_ladder(c))).collect()
    }

    /// `-h . s + D (s^z)^2` on site `i`.
    pub fn onsite(&self, i: usize) -> Mat<c64> {
        let s = local_spin_matrices(self.spins[i]);
        let d = s.z.nrows();
        let mut h = Mat::<c64>::zeros(d, d);
        let ops = [s.x.clone(), s.y.clone(), Mat::from_fn(d, d, |r, c| c64::new(s.z[(r, c)], 0.0))];
        for a in 0..3 {
            for &(site, v) in &self.fields[a] {
                if site == i {
                    for r in 0..d {
                        for c in 0..d {
                            h[(r, c)] -= ops[a][(r, c)] * v;
                        }
                    }
                }
            }
        }
        for &(site, v) in &self.sia {
            if site == i {
                for r in 0..d {
                    h[(r, r)] += c64::new(v * s.z[(r, r)] * s.z[(r, r)], 0.0);
                }
            }
        }
        h
    }

    /// Whether every term has a real matrix representation.
    pub fn is_real(&self) -> bool {
        if self.fields[1].iter().any(|&(_, v)| v != 0.0) {
            return false;
        }
        self.ladder_couplings().values().all(|k| k.iter().flatten().all(|z| z.im == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_parsing() {
        assert_eq!(SpinSize::parse("1/2").unwrap().value(), 0.5);
        assert_eq!(SpinSize::parse("3/2").unwrap().value(), 1.5);
        assert_eq!(SpinSize::parse("1").unwrap().dim(), 3);
        assert_eq!(SpinSize::parse("2.0").unwrap().dim(), 5);
        assert!(SpinSize::parse("0.5").is_err());
        assert!(SpinSize::parse("1/3").is_err());
        assert!(SpinSize::parse("0").is_err());
    }

    #[test]
    fn spin_half_and_one_matrices() {
        let h = local_spin_matrices(SpinSize::HALF);
        assert_eq!((h.z[(0, 0)], h.z[(1, 1)]), (0.5, -0.5));
        let one = local_spin_matrices(SpinSize::parse("1").unwrap());
        assert!((one.plus[(0, 1)] - 2f64.sqrt()).abs() < 1e-15);
        assert!((one.plus[(1, 2)] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(one.plus[(1, 0)], 0.0);
    }

    #[test]
    fn commutators_for_several_spins() {
        for two_s in 1..=6 {
            let s = local_spin_matrices(SpinSize::from_twice(two_s).unwrap());
            let d = s.z.nrows();
            let comm = &s.z * &s.plus - &s.plus * &s.z;
            for i in 0..d {
                for j in 0..d {
                    assert!((comm[(i, j)] - s.plus[(i, j)]).abs() < 1e-12);
                }
            }
            // [s^x, s^y] = i s^z
            let c = &s.x * &s.y - &s.y * &s.x;
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { c64::new(0.0, s.z[(i, i)]) } else { c64::new(0.0, 0.0) };
                    assert!((c[(i, j)] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn realness_by_term_type() {
        let base = SpinModel::uniform(4, SpinSize::HALF);
        let with_dm = |a: usize| {
            let mut m = base.clone();
            m.dm[a].push(PairRow { i: 0, j: 1, value: 0.3 });
            m.is_real()
        };
        let with_sod = |a: usize| {
            let mut m = base.clone();
            m.sod[a].push(PairRow { i: 0, j: 1, value: 0.3 });
            m.is_real()
        };
        assert_eq!([with_dm(0), with_dm(1), with_dm(2)], [false, true, false]);
        assert_eq!([with_sod(0), with_sod(1), with_sod(2)], [false, true, false]);
        let mut m = base.clone();
        m.fields[1].push((0, 1.0));
        assert!(!m.is_real());
        let mut m = base;
        m.fields[0].push((0, 1.0));
        m.fields[2].push((1, 1.0));
        m.sia.push((2, 0.5));
        m.exchange = Exchange::Xyz(vec![XyzRow { i: 0, j: 3, jx: 1.0, jy: 0.5, jz: -0.2 }]);
        assert!(m.is_real());
    }
}
