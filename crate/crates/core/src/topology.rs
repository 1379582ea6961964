//! Edge-list description of a binary tree tensor network.
//!
//! Tensor `i` carries bonds `[e1, e2, e3]`; `e3` points toward the canonical center, which is
//! the one bond sitting in slot 3 of two tensors. Bonds `0..n` are physical.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

pub type Bond = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    n_sites: usize,
    edges: Vec<[Bond; 3]>,
    center: Bond,
    origin: Bond,
}

/// The two tensors merged at one sweep step. `t` holds both the current and the next
/// center, `t_next` only the next one, `t_prev` only the current one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalPair {
    pub next_center: Bond,
    pub t: usize,
    pub t_next: usize,
    pub t_prev: usize,
}

impl Topology {
    pub fn new(n_sites: usize, edges: Vec<[Bond; 3]>, center: Bond, origin: Bond) -> Result<Self> {
        let t = Topology { n_sites, edges, center, origin };
        t.validate()?;
        Ok(t)
    }

    /// Derives center and origin from the slot-3 labels.
    pub fn from_edges(n_sites: usize, edges: Vec<[Bond; 3]>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut center = None;
        for e in &edges {
            if !seen.insert(e[2]) {
                if center.is_some() {
                    return Err(Error::Invariant(format!("bond {} is a second shared slot-3 label", e[2])));
                }
                center = Some(e[2]);
            }
        }
        let center = center.ok_or_else(|| Error::Invariant("no bond is shared in slot 3".into()))?;
        Topology::new(n_sites, edges, center, center)
    }

    /// Chain of isometries (matrix-product network) centered near the middle.
    pub fn mpn(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!("a tree network needs at least 4 sites, got {n}")));
        }
        let nt = n - 2;
        let b = |k: usize| n + k - 1;
        let c = (nt / 2).max(1);
        let mut edges = Vec::with_capacity(nt);
        edges.push([0, 1, b(1)]);
        for j in 1..c {
            edges.push([b(j), j + 1, b(j + 1)]);
        }
        for j in c..nt - 1 {
            edges.push([j + 1, b(j + 1), b(j)]);
        }
        edges.push([n - 2, n - 1, b(n - 3)]);
        Topology::new(n, edges, b(c), b(c))
    }

    /// Perfect binary tree over `n = 2^d` sites.
    pub fn pbt(n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("a perfect binary tree needs 2^d >= 4 sites, got {n}")));
        }
        let mut level: Vec<Bond> = (0..n).collect();
        let mut next_label = n;
        let mut edges = Vec::with_capacity(n - 2);
        while level.len() > 4 {
            let mut up = Vec::with_capacity(level.len() / 2);
            for pair in level.chunks(2) {
                edges.push([pair[0], pair[1], next_label]);
                up.push(next_label);
                next_label += 1;
            }
            level = up;
        }
        let center = next_label;
        edges.push([level[0], level[1], center]);
        edges.push([level[2], level[3], center]);
        Topology::new(n, edges, center, center)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn n_tensors(&self) -> usize {
        self.edges.len()
    }
    pub fn n_bonds(&self) -> usize {
        2 * self.edges.len() + 1
    }
    pub fn edges(&self) -> &[[Bond; 3]] {
        &self.edges
    }
    pub fn edge(&self, i: usize) -> [Bond; 3] {
        self.edges[i]
    }
    pub fn center(&self) -> Bond {
        self.center
    }
    pub fn origin(&self) -> Bond {
        self.origin
    }
    pub fn is_physical(&self, b: Bond) -> bool {
        b < self.n_sites
    }
    pub fn aux_bonds(&self) -> std::ops::Range<Bond> {
        self.n_sites..self.n_bonds()
    }

    pub(crate) fn set_edge(&mut self, i: usize, e: [Bond; 3]) {
        self.edges[i] = e;
    }
    pub(crate) fn set_center(&mut self, b: Bond) {
        self.center = b;
    }

    /// The two tensors sharing the center in slot 3, in index order.
    pub fn center_tensors(&self) -> (usize, usize) {
        let v: Vec<usize> = (0..self.edges.len()).filter(|&i| self.edges[i][2] == self.center).collect();
        (v[0], v[1])
    }

    pub fn tensors_with_bond(&self, b: Bond) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].contains(&b)).collect()
    }

    /// Tensor whose slot 3 is `b`, other than `except`.
    pub fn tensor_pointing_to(&self, b: Bond, except: Option<usize>) -> Option<usize> {
        (0..self.edges.len()).find(|&i| self.edges[i][2] == b && Some(i) != except)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        if n < 4 {
            return Err(Error::Invariant(format!("{n} sites, need at least 4")));
        }
        if self.edges.len() != n - 2 {
            return Err(Error::Invariant(format!("{} tensors for {n} sites, expected {}", self.edges.len(), n - 2)));
        }
        let nb = self.n_bonds();
        let mut count = vec![0usize; nb];
        let mut slot3 = vec![0usize; nb];
        for (i, e) in self.edges.iter().enumerate() {
            for &b in e {
                if b >= nb {
                    return Err(Error::Invariant(format!("tensor {i} uses label {b} outside 0..{nb}")));
                }
                count[b] += 1;
            }
            if e[0] == e[1] || e[0] == e[2] || e[1] == e[2] {
                return Err(Error::Invariant(format!("tensor {i} repeats a bond: {e:?}")));
            }
            if e[2] < n {
                return Err(Error::Invariant(format!("tensor {i} has physical bond {} in slot 3", e[2])));
            }
            slot3[e[2]] += 1;
        }
        for b in 0..nb {
            let want = if b < n { 1 } else { 2 };
            if count[b] != want {
                return Err(Error::Invariant(format!("bond {b} appears {} times, expected {want}", count[b])));
            }
        }
        let shared: Vec<Bond> = (n..nb).filter(|&b| slot3[b] == 2).collect();
        if shared != vec![self.center] {
            return Err(Error::Invariant(format!(
                "canonical center {} does not match slot-3 sharing {shared:?}",
                self.center
            )));
        }
        for b in n..nb {
            if slot3[b] == 0 {
                return Err(Error::Invariant(format!("auxiliary bond {b} is never in slot 3")));
            }
        }
        if self.origin < n || self.origin >= nb {
            return Err(Error::Invariant(format!("origin {} is not an auxiliary bond", self.origin)));
        }
        let d = self.raw_distances(self.center);
        if let Some(b) = d.iter().position(|x| x.is_none()) {
            return Err(Error::Invariant(format!("bond {b} is disconnected from the center")));
        }
        Ok(())
    }

    fn raw_distances(&self, root: Bond) -> Vec<Option<usize>> {
        let nb = self.n_bonds();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nb];
        for (i, e) in self.edges.iter().enumerate() {
            for &b in e {
                if b < nb {
                    adj[b].push(i);
                }
            }
        }
        let mut dist = vec![None; nb];
        let mut visited = vec![false; self.edges.len()];
        dist[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(b) = queue.pop_front() {
            let db = dist[b].unwrap_or(0);
            for &i in &adj[b] {
                if visited[i] {
                    continue;
                }
                visited[i] = true;
                for &b2 in &self.edges[i] {
                    if b2 < nb && dist[b2].is_none() {
                        dist[b2] = Some(db + 1);
                        queue.push_back(b2);
                    }
                }
            }
        }
        dist
    }

    /// Number of tensors crossed from `root` to each bond.
    pub fn distances(&self, root: Bond) -> Result<Vec<usize>> {
        if root >= self.n_bonds() {
            return Err(Error::InvalidArgument(format!("bond {root} does not exist")));
        }
        self.raw_distances(root)
            .into_iter()
            .enumerate()
            .map(|(b, d)| d.ok_or_else(|| Error::Invariant(format!("bond {b} unreachable from {root}"))))
            .collect()
    }

    /// Unflagged slot-1/2 bonds of the tensors that point at `center`, ascending.
    pub fn candidate_edges(&self, center: Bond, flags: &[bool]) -> Vec<Bond> {
        let mut out: Vec<Bond> =
            self.edges.iter().filter(|e| e[2] == center).flat_map(|e| [e[0], e[1]]).filter(|&b| !flags[b]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Chooses the next center (farthest candidate from the origin, smallest label on ties)
    /// and the tensors around it.
    pub fn local_two_tensor(&self, center: Bond, flags: &[bool], dist: &[usize]) -> Result<LocalPair> {
        let cands = self.candidate_edges(center, flags);
        let next = cands
            .iter()
            .copied()
            .fold(None::<Bond>, |best, b| match best {
                Some(x) if dist[x] >= dist[b] => Some(x),
                _ => Some(b),
            })
            .ok_or_else(|| Error::InvalidArgument(format!("no unflagged candidate around bond {center}")))?;
        let find = |pred: &dyn Fn(&[Bond; 3]) -> bool| self.edges.iter().position(pred);
        let t = find(&|e| e.contains(&center) && e.contains(&next));
        let t_next = find(&|e| e.contains(&next) && !e.contains(&center));
        let t_prev = find(&|e| e.contains(&center) && !e.contains(&next));
        match (t, t_next, t_prev) {
            (Some(t), Some(t_next), Some(t_prev)) => Ok(LocalPair { next_center: next, t, t_next, t_prev }),
            _ => Err(Error::Invariant(format!("bonds {center} and {next} do not frame a two-tensor block"))),
        }
    }

    /// Sites on either side of bond `b`, each sorted; the side containing site 0 comes first.
    pub fn split(&self, b: Bond) -> (Vec<usize>, Vec<usize>) {
        let holders = self.tensors_with_bond(b);
        if holders.len() == 1 {
            let mut rest: Vec<usize> = (0..self.n_sites).filter(|&s| s != b).collect();
            rest.sort_unstable();
            return if b == 0 { (vec![0], rest) } else { (rest, vec![b]) };
        }
        let side = self.sites_behind(holders[0], b);
        let other: Vec<usize> = (0..self.n_sites).filter(|s| !side.contains(s)).collect();
        if side.contains(&0) {
            (side, other)
        } else {
            (other, side)
        }
    }

    /// Sites reachable from tensor `start` without crossing bond `cut`.
    pub fn sites_behind(&self, start: usize, cut: Bond) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(start, cut)];
        while let Some((i, from)) = stack.pop() {
            for &b in &self.edges[i] {
                if b == from {
                    continue;
                }
                if self.is_physical(b) {
                    out.push(b);
                } else if let Some(j) = (0..self.edges.len()).find(|&j| j != i && self.edges[j].contains(&b)) {
                    stack.push((j, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Sites on the far side of `b` as seen from the center. Physical bonds map to themselves.
    pub fn region(&self, b: Bond) -> Vec<usize> {
        if self.is_physical(b) {
            return vec![b];
        }
        match self.tensor_pointing_to(b, None) {
            Some(i) if b != self.center => self.sites_behind(i, b),
            _ => Vec::new(),
        }
    }

    /// Bipartitions induced by the auxiliary bonds, each as the side without site 0.
    pub fn splits(&self) -> BTreeSet<Vec<usize>> {
        self.aux_bonds().map(|b| self.split(b).1).collect()
    }

    pub fn same_structure(&self, other: &Topology) -> bool {
        self.n_sites == other.n_sites && self.splits() == other.splits()
    }

    /// Whether some bond separates exactly `sites` from the rest.
    pub fn has_split(&self, sites: &[usize]) -> bool {
        let mut s: Vec<usize> = sites.to_vec();
        s.sort_unstable();
        let comp: Vec<usize> = (0..self.n_sites).filter(|x| !s.contains(x)).collect();
        (0..self.n_bonds()).any(|b| {
            let (a, c) = self.split(b);
            a == s || c == s || a == comp || c == comp
        })
    }

    /// For bond `b`, the pair of node ids written to output tables: a physical bond joins its
    /// site to the tensor (numbered `n + i`); an auxiliary bond joins its two tensors.
    pub fn bond_nodes(&self, b: Bond) -> (usize, usize) {
        let h = self.tensors_with_bond(b);
        if self.is_physical(b) {
            (b, self.n_sites + h[0])
        } else {
            (self.n_sites + h[0], self.n_sites + h[1])
        }
    }
}

/// Same tensors joined by the same bond labels, ignoring slot order within each tensor.
pub fn same_bonds(a: &[[Bond; 3]], b: &[[Bond; 3]]) -> bool {
    let sorted = |e: &[Bond; 3]| {
        let mut e = *e;
        e.sort_unstable();
        e
    };
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| sorted(x) == sorted(y))
}
