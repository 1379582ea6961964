//! Result files: `basic.csv`, `graph.dat`, observables, per-stage directories and tensor bundles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use faer::c64;

use super::npy::{read_npy, write_npy, NpyArray};
use super::OutputFlags;
use crate::error::{Error, Result};
use crate::factorize::FactorizeOutput;
use crate::gss::{GssOutput, Observables};
use crate::scalar::Scalar;
use crate::state::TtnState;
use crate::sweep::SweepReport;
use crate::tensor::Tensor;
use crate::topology::{Bond, Topology};

/// Component order of the nine correlation columns, as `(a, b)` in `<s^a_i s^b_j>`.
pub const TWO_SITE_ORDER: [(usize, usize); 9] =
    [(0, 0), (1, 1), (2, 2), (1, 2), (2, 1), (2, 0), (0, 2), (0, 1), (1, 0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunKind {
    GroundState,
    Factorize { fidelity: bool },
}

impl RunKind {
    pub fn header(self) -> &'static str {
        match self {
            RunKind::GroundState => "node1,node2,entanglement_entropy,energy,truncation_error",
            RunKind::Factorize { fidelity: false } => "node1,node2,entanglement_entropy,truncation_error",
            RunKind::Factorize { fidelity: true } => "node1,node2,entanglement_entropy,truncation_error,fidelity",
        }
    }
}

/// Output directory plus `run{m}` subdirectories, all created up front.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub dir: PathBuf,
    pub stages: usize,
}

impl RunManifest {
    pub fn prepare(dir: &Path, stages: usize) -> Result<Self> {
        let m = RunManifest { dir: dir.to_path_buf(), stages };
        for d in std::iter::once(m.dir.clone()).chain((1..=stages).map(|k| m.stage_dir(k))) {
            std::fs::create_dir_all(&d).map_err(|e| io_context(&d, e))?;
            let probe = d.join(".write_probe");
            std::fs::write(&probe, b"").and_then(|_| std::fs::remove_file(&probe)).map_err(|e| io_context(&d, e))?;
        }
        Ok(m)
    }

    /// `m` counts from 1.
    pub fn stage_dir(&self, m: usize) -> PathBuf {
        self.dir.join(format!("run{m}"))
    }
}

fn io_context(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_context(path, e))
}

fn num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:e}"),
        _ => "nan".into(),
    }
}

/// One row per bond in label order. Cells that do not apply to a physical bond hold `nan`.
pub fn basic_csv(report: &SweepReport, kind: RunKind) -> Result<String> {
    let n = report.edges.len() + 2;
    let topo = Topology::from_edges(n, report.edges.clone())?;
    let mut out = String::from(kind.header());
    out.push('\n');
    for b in 0..topo.n_bonds() {
        let (i, j) = topo.bond_nodes(b);
        let (i, j) = (i.min(j), i.max(j));
        let ee = report.entropies.get(&b).copied();
        let err = report.truncation_errors.get(&b).copied();
        let value = report.values.get(&b).copied();
        let _ = write!(out, "{i},{j},{}", num(ee));
        match kind {
            RunKind::GroundState => {
                let _ = write!(out, ",{},{}", num(value), num(err));
            }
            RunKind::Factorize { fidelity } => {
                let _ = write!(out, ",{}", num(err));
                if fidelity {
                    let _ = write!(out, ",{}", num(value));
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn graph_dat(edges: &[[Bond; 3]]) -> String {
    edges.iter().map(|e| format!("{} {} {}\n", e[0], e[1], e[2])).collect()
}

pub fn parse_graph_dat(path: &Path) -> Result<Vec<[Bond; 3]>> {
    let mut edges = Vec::new();
    for (line, cols) in super::dat::read_rows(path)? {
        let e: Vec<Bond> = cols
            .iter()
            .map(|c| c.parse().map_err(|_| Error::load(path, line, format!("expected a bond label, got {c:?}"))))
            .collect::<Result<_>>()?;
        let e: [Bond; 3] = e.try_into().map_err(|_| Error::load(path, line, "expected three bond labels"))?;
        edges.push(e);
    }
    if edges.len() < 2 {
        return Err(Error::load(path, 0, format!("a tree needs at least 2 tensors, found {}", edges.len())));
    }
    Ok(edges)
}

pub fn single_site_csv(obs: &Observables) -> String {
    let mut out = String::from("i,sx,sy,sz\n");
    for (i, s) in obs.single_site.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{},{}", num(Some(s[0])), num(Some(s[1])), num(Some(s[2])));
    }
    out
}

pub fn two_site_csv(obs: &Observables) -> String {
    let mut out = String::from("i,j,xx,yy,zz,yz,zy,zx,xz,xy,yx\n");
    for (&(i, j), c) in &obs.two_site {
        let cells: Vec<String> = TWO_SITE_ORDER.iter().map(|&(a, b)| num(Some(c[a][b]))).collect();
        let _ = writeln!(out, "{i},{j},{}", cells.join(","));
    }
    out
}

/// `graph.dat`, `isometry{i}.npy`, `singular_values.npy` and `norm.npy`.
pub fn write_bundle<T: Scalar>(dir: &Path, state: &TtnState<T>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_context(dir, e))?;
    write_file(&dir.join("graph.dat"), &graph_dat(state.topology.edges()))?;
    for (i, t) in state.tensors.iter().enumerate() {
        write_npy(&dir.join(format!("isometry{i}.npy")), t)?;
    }
    write_npy(&dir.join("singular_values.npy"), &Tensor::from_vec(&[state.weights.len()], state.weights.clone())?)?;
    write_npy(&dir.join("norm.npy"), &Tensor::from_vec(&[], vec![state.norm])?)
}

#[derive(Clone, Debug)]
pub enum LoadedTtn {
    Real(TtnState<f64>),
    Complex(TtnState<c64>),
}

/// Loads a bundle; any complex isometry makes the whole tree complex.
pub fn read_bundle(dir: &Path) -> Result<LoadedTtn> {
    let edges = parse_graph_dat(&dir.join("graph.dat"))?;
    let n = edges.len() + 2;
    let topo = Topology::from_edges(n, edges).map_err(|e| Error::load(dir.join("graph.dat"), 0, e.to_string()))?;
    let arrays: Vec<NpyArray> =
        (0..topo.n_tensors()).map(|i| read_npy(&dir.join(format!("isometry{i}.npy")))).collect::<Result<_>>()?;
    for (i, a) in arrays.iter().enumerate() {
        if a.shape().len() != 3 {
            return Err(Error::load(
                dir.join(format!("isometry{i}.npy")),
                0,
                format!("expected rank 3, got shape {:?}", a.shape()),
            ));
        }
    }
    let sv_path = dir.join("singular_values.npy");
    let weights = read_npy(&sv_path)?.into_real().map_err(|e| Error::load(&sv_path, 0, e.to_string()))?;
    if weights.rank() != 1 {
        return Err(Error::load(&sv_path, 0, format!("expected a vector, got shape {:?}", weights.shape())));
    }
    let norm_path = dir.join("norm.npy");
    let norm = read_npy(&norm_path)?.into_real().map_err(|e| Error::load(&norm_path, 0, e.to_string()))?;
    if norm.len() != 1 {
        return Err(Error::load(&norm_path, 0, format!("expected a scalar, got shape {:?}", norm.shape())));
    }
    let (weights, norm) = (weights.into_data(), norm.data()[0]);
    let check = |e: Error| Error::load(dir, 0, e.to_string());
    let loaded = if arrays.iter().any(NpyArray::is_complex) {
        let t = arrays.into_iter().map(NpyArray::into_complex).collect();
        LoadedTtn::Complex(TtnState::new(topo, t, weights, norm).map_err(check)?)
    } else {
        let t = arrays.into_iter().map(|a| a.into_real()).collect::<Result<_>>()?;
        LoadedTtn::Real(TtnState::new(topo, t, weights, norm).map_err(check)?)
    };
    match &loaded {
        LoadedTtn::Real(s) => s.validate(1e-8),
        LoadedTtn::Complex(s) => s.validate(1e-8),
    }
    .map_err(check)?;
    Ok(loaded)
}

/// `run{m}/basic.csv` and `run{m}/graph.dat` per stage; observables and tensors go to the last one.
pub fn write_gss_outputs<T: Scalar>(manifest: &RunManifest, out: &GssOutput<T>, flags: &OutputFlags) -> Result<()> {
    if manifest.stages != out.stages.len() {
        return Err(Error::Internal(format!("{} stage directories for {} stages", manifest.stages, out.stages.len())));
    }
    for (k, stage) in out.stages.iter().enumerate() {
        let dir = manifest.stage_dir(k + 1);
        let report = stage.last();
        write_file(&dir.join("basic.csv"), &basic_csv(report, RunKind::GroundState)?)?;
        write_file(&dir.join("graph.dat"), &graph_dat(&report.edges))?;
    }
    let last = manifest.stage_dir(manifest.stages);
    if flags.single_site {
        write_file(&last.join("single_site.csv"), &single_site_csv(&out.observables))?;
    }
    if flags.two_site {
        write_file(&last.join("two_site.csv"), &two_site_csv(&out.observables))?;
    }
    if flags.tensors {
        write_bundle(&last, &out.state)?;
    }
    Ok(())
}

/// Final `basic.csv` and `graph.dat` in the output directory, one `run{m}` per fidelity stage.
pub fn write_ft_outputs<T: Scalar>(
    manifest: &RunManifest,
    out: &FactorizeOutput<T>,
    final_report: &SweepReport,
    flags: &OutputFlags,
) -> Result<()> {
    let kind = RunKind::Factorize { fidelity: !out.fidelity_stages.is_empty() };
    for (k, stage) in out.fidelity_stages.iter().enumerate() {
        let dir = manifest.stage_dir(k + 1);
        write_file(&dir.join("basic.csv"), &basic_csv(stage.last(), kind)?)?;
        write_file(&dir.join("graph.dat"), &graph_dat(&stage.last().edges))?;
    }
    write_file(&manifest.dir.join("basic.csv"), &basic_csv(final_report, kind)?)?;
    write_file(&manifest.dir.join("graph.dat"), &graph_dat(&final_report.edges))?;
    if flags.tensors {
        write_bundle(&manifest.dir, &out.state)?;
    }
    Ok(())
}
