//! YAML run descriptions for the `gss` and `ft` commands.
//!
//! Relative file names are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde_yaml::Value;

use super::dat;
use crate::decompose::StructureMode;
use crate::error::{Error, Result};
use crate::factorize::{FactorizeConfig, FidelityConfig, StructureSearch};
use crate::gss::{GssConfig, InitTree};
use crate::spin::{Exchange, PairRow, SpinModel, SpinSize, XxzRow, XyzRow};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFlags {
    pub dir: PathBuf,
    pub single_site: bool,
    pub two_site: bool,
    pub tensors: bool,
}

#[derive(Clone, Debug)]
pub struct GssJob {
    pub model: SpinModel,
    pub config: GssConfig,
    pub output: OutputFlags,
    /// Unknown or ignored keys, already logged.
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetSource {
    /// A dense `.npy` tensor.
    Tensor(PathBuf),
    /// A directory with `graph.dat`, `isometry{i}.npy`, `singular_values.npy` and `norm.npy`.
    Ttn(PathBuf),
}

#[derive(Clone, Debug)]
pub struct FtJob {
    pub target: TargetSource,
    pub config: FactorizeConfig,
    pub output: OutputFlags,
    pub warnings: Vec<String>,
}

const GSS_KEYS: &[&str] = &[
    "system.N",
    "system.spin_size",
    "system.model.type",
    "system.model.file",
    "system.MF_X",
    "system.MF_Y",
    "system.MF_Z",
    "system.SIA",
    "system.DM_X",
    "system.DM_Y",
    "system.DM_Z",
    "system.SOD_X",
    "system.SOD_Y",
    "system.SOD_Z",
    "numerics.init_tree",
    "numerics.initial_bond_dimension",
    "numerics.total_magnetization",
    "numerics.opt_structure.type",
    "numerics.opt_structure.temperature",
    "numerics.opt_structure.tau",
    "numerics.opt_structure.seed",
    "numerics.max_bond_dimensions",
    "numerics.max_num_sweeps",
    "numerics.energy_convergence_threshold",
    "numerics.entanglement_convergence_threshold",
    "numerics.energy_degeneracy_threshold",
    "numerics.entanglement_degeneracy_threshold",
    "numerics.convergence_streak",
    "output.dir",
    "output.single_site",
    "output.two_site",
    "output.tensors",
];

const FT_KEYS: &[&str] = &[
    "target.tensor",
    "target.type",
    "numerics.initial_bond_dimension",
    "numerics.opt_structure.type",
    "numerics.opt_structure.temperature",
    "numerics.opt_structure.tau",
    "numerics.opt_structure.seed",
    "numerics.max_sweep_num",
    "numerics.entanglement_convergence_threshold",
    "numerics.entanglement_degeneracy_threshold",
    "numerics.max_truncated_singularvalue",
    "numerics.convergence_streak",
    "numerics.fidelity.opt_structure.type",
    "numerics.fidelity.opt_structure.temperature",
    "numerics.fidelity.opt_structure.tau",
    "numerics.fidelity.opt_structure.seed",
    "numerics.fidelity.max_bond_dimensions",
    "numerics.fidelity.max_num_sweeps",
    "numerics.fidelity.convergence_threshold",
    "numerics.fidelity.structure_every_stage",
    "output.dir",
    "output.tensors",
];

struct Doc<'a> {
    root: Value,
    file: &'a Path,
    base: PathBuf,
    warnings: Vec<String>,
}

impl<'a> Doc<'a> {
    fn parse(text: &str, file: &'a Path, known: &[&str]) -> Result<Self> {
        let root: Value = serde_yaml::from_str(text).map_err(|e| {
            let line = e.location().map(|l| l.line()).unwrap_or(0);
            Error::load(file, line, e.to_string())
        })?;
        if !root.is_mapping() {
            return Err(Error::load(file, 0, "the config must be a mapping of sections"));
        }
        let base = file.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut doc = Doc { root, file, base, warnings: Vec::new() };
        let mut unknown = Vec::new();
        collect_unknown(&doc.root, "", known, &mut unknown);
        for key in unknown {
            doc.warn(format!("unknown key `{key}` ignored"));
        }
        Ok(doc)
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{}: {msg}", self.file.display());
        self.warnings.push(msg);
    }

    fn get(&self, key: &str) -> Option<&Value> {
        let mut v = &self.root;
        for part in key.split('.') {
            v = v.as_mapping()?.get(part)?;
        }
        (!v.is_null()).then_some(v)
    }

    fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    fn err(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("{}: `{key}` {msg}", self.file.display()))
    }

    fn require(&self, key: &str) -> Result<&Value> {
        self.get(key).ok_or_else(|| self.err(key, "is required"))
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                as_uint(v).ok_or_else(|| self.err(key, format!("must be a non-negative integer, got {}", show(v))))
            })
            .transpose()
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.uint(key)?.map(|x| x as usize).unwrap_or(default))
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| as_real(v).ok_or_else(|| self.err(key, format!("must be a number, got {}", show(v)))))
            .transpose()
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(v) => match as_uint(v) {
                Some(0) => Ok(false),
                Some(1) => Ok(true),
                _ => Err(self.err(key, format!("must be 0 or 1, got {}", show(v)))),
            },
        }
    }

    fn uint_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let bad = || self.err(key, format!("must be a list of non-negative integers, got {}", show(v)));
        match v {
            Value::Sequence(s) => {
                s.iter().map(|x| as_uint(x).map(|u| u as usize).ok_or_else(bad)).collect::<Result<_>>().map(Some)
            }
            v => as_uint(v).map(|u| Some(vec![u as usize])).ok_or_else(bad),
        }
    }

    fn text(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(self.err(key, format!("must be a string, got {}", show(v)))),
        }
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.text(key)?.map(|s| self.base.join(s)))
    }

    fn mode(&self, key: &str) -> Result<StructureMode> {
        match self.uint(key)? {
            None => Ok(StructureMode::Fixed),
            Some(c) => StructureMode::from_code(c as i64).map_err(|e| self.err(key, e)),
        }
    }

    fn structure(&self, prefix: &str) -> Result<StructureSearch> {
        let k = |s: &str| format!("{prefix}opt_structure.{s}");
        let s = StructureSearch {
            mode: self.mode(&k("type"))?,
            t0: self.real_or(&k("temperature"), 0.0)?,
            n_tau: self.uint(&k("tau"))?.map(|x| x as usize),
            seed: self.uint(&k("seed"))?.unwrap_or(0),
        };
        if s.t0 > 0.0 && s.mode != StructureMode::Entanglement {
            let msg = format!("`{}` only acts with structure type 1 and is ignored", k("temperature"));
            log::warn!("{}: {msg}", self.file.display());
        }
        Ok(s)
    }

    fn output(&self, tensors_key: bool) -> Result<OutputFlags> {
        let dir = self.path("output.dir")?.unwrap_or_else(|| self.base.join("output"));
        Ok(OutputFlags {
            dir,
            single_site: self.flag("output.single_site")?,
            two_site: self.flag("output.two_site")?,
            tensors: tensors_key && self.flag("output.tensors")?,
        })
    }

    /// A number applied to every site, or a two-column file of per-site values.
    fn site_values(&self, key: &str, n: usize) -> Result<Vec<(usize, f64)>> {
        let Some(v) = self.get(key) else { return Ok(Vec::new()) };
        if let Some(x) = as_real(v) {
            return Ok(if x == 0.0 { Vec::new() } else { (0..n).map(|i| (i, x)).collect() });
        }
        match v {
            Value::String(s) => dat::read_site_values(&self.base.join(s), n),
            _ => Err(self.err(key, format!("must be a number or a file name, got {}", show(v)))),
        }
    }

    fn pair_values(&self, key: &str, n: usize, antisymmetric: bool) -> Result<Vec<PairRow>> {
        let Some(path) = self.path(key)? else { return Ok(Vec::new()) };
        Ok(dat::read_pair_table(&path, 1, n)?
            .into_iter()
            .map(|(i, j, v)| {
                let sign = if antisymmetric && i > j { -1.0 } else { 1.0 };
                PairRow { i: i.min(j), j: i.max(j), value: sign * v[0] }
            })
            .collect())
    }
}

fn collect_unknown(v: &Value, prefix: &str, known: &[&str], out: &mut Vec<String>) {
    let Some(map) = v.as_mapping() else { return };
    for (k, child) in map {
        let name = match k {
            Value::String(s) => s.clone(),
            other => show(other),
        };
        let full = if prefix.is_empty() { name } else { format!("{prefix}.{name}") };
        if known.contains(&full.as_str()) {
            continue;
        }
        let section = format!("{full}.");
        if known.iter().any(|k| k.starts_with(&section)) && child.is_mapping() {
            collect_unknown(child, &full, known, out);
        } else {
            out.push(full);
        }
    }
}

fn as_uint(v: &Value) -> Option<u64> {
    match v {
        Value::Number(n) => {
            n.as_u64().or_else(|| n.as_f64().filter(|x| *x >= 0.0 && x.fract() == 0.0).map(|x| x as u64))
        }
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn as_real(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn show(v: &Value) -> String {
    serde_yaml::to_string(v).map(|s| s.trim().to_string()).unwrap_or_else(|_| format!("{v:?}"))
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::load(path, 0, e.to_string()))
}

pub fn parse_gss_config(path: &Path) -> Result<GssJob> {
    parse_gss_str(&read_config(path)?, path)
}

/// `path` names the config for messages and relative file names; it is not read.
pub fn parse_gss_str(text: &str, path: &Path) -> Result<GssJob> {
    let mut doc = Doc::parse(text, path, GSS_KEYS)?;
    if doc.has("numerics.total_magnetization") {
        return Err(Error::Unsupported(
            "`numerics.total_magnetization`: fixed-magnetization sectors are not implemented".into(),
        ));
    }
    let model = parse_model(&doc)?;
    let d = GssConfig::default();
    let chi_schedule = doc.uint_list("numerics.max_bond_dimensions")?.unwrap_or(d.chi_schedule);
    let max_sweeps = doc.uint_list("numerics.max_num_sweeps")?.unwrap_or(d.max_sweeps);
    let init_tree = match doc.uint("numerics.init_tree")? {
        None | Some(0) => InitTree::Mpn,
        Some(1) => InitTree::Pbt,
        Some(x) => return Err(doc.err("numerics.init_tree", format!("must be 0 or 1, got {x}"))),
    };
    let s = doc.structure("numerics.")?;
    let config = GssConfig {
        init_tree,
        chi_init: doc
            .usize_or("numerics.initial_bond_dimension", chi_schedule.first().copied().unwrap_or(d.chi_init))?,
        chi_schedule,
        max_sweeps,
        opt_mode: s.mode,
        t0: s.t0,
        n_tau: s.n_tau,
        seed: s.seed,
        eps_e: doc.real_or("numerics.energy_convergence_threshold", d.eps_e)?,
        eps_s: doc.real_or("numerics.entanglement_convergence_threshold", d.eps_s)?,
        delta_e: doc.real_or("numerics.energy_degeneracy_threshold", d.delta_e)?,
        delta_s: doc.real_or("numerics.entanglement_degeneracy_threshold", d.delta_s)?,
        streak: doc.usize_or("numerics.convergence_streak", d.streak)?,
        lanczos: d.lanczos,
        single_site: doc.flag("output.single_site")?,
        two_site: doc.flag("output.two_site")?,
    };
    config.validate().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let output = doc.output(true)?;
    let warnings = std::mem::take(&mut doc.warnings);
    Ok(GssJob { model, config, output, warnings })
}

fn parse_model(doc: &Doc) -> Result<SpinModel> {
    let n = doc.uint("system.N")?.ok_or_else(|| doc.err("system.N", "is required"))? as usize;
    if n < 4 {
        return Err(doc.err("system.N", format!("must be at least 4, got {n}")));
    }
    let spins = parse_spins(doc, n)?;
    let mut m = SpinModel::new(spins);
    let kind = match doc.require("system.model.type")? {
        Value::String(s) => s.to_ascii_uppercase(),
        v => return Err(doc.err("system.model.type", format!("must be XXZ or XYZ, got {}", show(v)))),
    };
    let file = doc.path("system.model.file")?.ok_or_else(|| doc.err("system.model.file", "is required"))?;
    let ordered = |i: usize, j: usize| (i.min(j), i.max(j));
    m.exchange = match kind.as_str() {
        "XXZ" => Exchange::Xxz(
            dat::read_pair_table(&file, 2, n)?
                .into_iter()
                .map(|(i, j, v)| {
                    let (i, j) = ordered(i, j);
                    XxzRow { i, j, coupling: v[0], anisotropy: v[1] }
                })
                .collect(),
        ),
        "XYZ" => Exchange::Xyz(
            dat::read_pair_table(&file, 3, n)?
                .into_iter()
                .map(|(i, j, v)| {
                    let (i, j) = ordered(i, j);
                    XyzRow { i, j, jx: v[0], jy: v[1], jz: v[2] }
                })
                .collect(),
        ),
        other => return Err(doc.err("system.model.type", format!("must be XXZ or XYZ, got {other}"))),
    };
    for (a, c) in ['X', 'Y', 'Z'].into_iter().enumerate() {
        m.fields[a] = doc.site_values(&format!("system.MF_{c}"), n)?;
        m.dm[a] = doc.pair_values(&format!("system.DM_{c}"), n, true)?;
        m.sod[a] = doc.pair_values(&format!("system.SOD_{c}"), n, false)?;
    }
    m.sia = doc.site_values("system.SIA", n)?;
    m.validate().map_err(|e| Error::Config(format!("{}: {e}", doc.file.display())))?;
    Ok(m)
}

fn parse_spins(doc: &Doc, n: usize) -> Result<Vec<SpinSize>> {
    let key = "system.spin_size";
    let v = doc.require(key)?;
    let text = match v {
        Value::Number(x) => x.to_string(),
        Value::String(s) => s.clone(),
        v => return Err(doc.err(key, format!("must be a spin value or a file name, got {}", show(v)))),
    };
    let looks_numeric = text.trim().chars().all(|c| c.is_ascii_digit() || c == '/' || c == '.');
    if looks_numeric {
        return Ok(vec![SpinSize::parse(&text).map_err(|e| doc.err(key, e))?; n]);
    }
    let path = doc.base.join(&text);
    let rows = dat::read_site_table(&path, n)?;
    if rows.len() != n {
        return Err(Error::load(&path, 0, format!("spin sizes given for {} of {n} sites", rows.len())));
    }
    let mut spins = vec![SpinSize::HALF; n];
    for (line, i, s) in rows {
        spins[i] = SpinSize::parse(&s).map_err(|e| Error::load(&path, line, e.to_string()))?;
    }
    Ok(spins)
}

pub fn parse_ft_config(path: &Path) -> Result<FtJob> {
    parse_ft_str(&read_config(path)?, path)
}

pub fn parse_ft_str(text: &str, path: &Path) -> Result<FtJob> {
    let mut doc = Doc::parse(text, path, FT_KEYS)?;
    let tensor = doc.path("target.tensor")?.ok_or_else(|| doc.err("target.tensor", "is required"))?;
    let declared = doc.text("target.type")?.map(|s| s.to_ascii_lowercase());
    let target = detect_target(&tensor, declared.as_deref())?;
    let d = FactorizeConfig::default();
    let eps_s = doc.real_or("numerics.entanglement_convergence_threshold", d.eps_s)?;
    let fidelity = if doc.has("numerics.fidelity") {
        let fd = FidelityConfig::default();
        Some(FidelityConfig {
            structure: doc.structure("numerics.fidelity.")?,
            chi_schedule: doc.uint_list("numerics.fidelity.max_bond_dimensions")?.unwrap_or(fd.chi_schedule),
            max_sweeps: doc.uint_list("numerics.fidelity.max_num_sweeps")?.unwrap_or(fd.max_sweeps),
            eps_f: doc.real_or("numerics.fidelity.convergence_threshold", fd.eps_f)?,
            eps_s,
            structure_every_stage: doc.flag("numerics.fidelity.structure_every_stage")?,
        })
    } else {
        None
    };
    let mut config = FactorizeConfig {
        chi_init: doc.usize_or("numerics.initial_bond_dimension", d.chi_init)?,
        structure: doc.structure("numerics.")?,
        max_sweeps: doc.usize_or("numerics.max_sweep_num", d.max_sweeps)?,
        eps_s,
        sigma: doc.real_or("numerics.max_truncated_singularvalue", d.sigma)?,
        delta_s: doc.real_or("numerics.entanglement_degeneracy_threshold", d.delta_s)?,
        streak: doc.usize_or("numerics.convergence_streak", d.streak)?,
        fidelity,
    };
    if matches!(target, TargetSource::Ttn(_)) && config.fidelity.take().is_some() {
        doc.warn("`numerics.fidelity` needs a dense target and is ignored for a tree input".into());
    }
    config.validate().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let output = doc.output(true)?;
    let warnings = std::mem::take(&mut doc.warnings);
    Ok(FtJob { target, config, output, warnings })
}

/// A `.npy` file or a directory holding exactly one is a tensor; a directory with
/// `graph.dat` is a tree.
fn detect_target(path: &Path, declared: Option<&str>) -> Result<TargetSource> {
    let found = if path.is_dir() {
        if path.join("graph.dat").is_file() {
            TargetSource::Ttn(path.to_path_buf())
        } else {
            let npys: Vec<PathBuf> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "npy"))
                .collect();
            match npys.as_slice() {
                [one] => TargetSource::Tensor(one.clone()),
                _ => {
                    return Err(Error::load(
                        path,
                        0,
                        format!("expected graph.dat or exactly one .npy file, found {} .npy files", npys.len()),
                    ))
                }
            }
        }
    } else if path.is_file() {
        TargetSource::Tensor(path.to_path_buf())
    } else {
        return Err(Error::load(path, 0, "target does not exist"));
    };
    match (declared, &found) {
        (None, _) | (Some("tensor"), TargetSource::Tensor(_)) | (Some("ttn"), TargetSource::Ttn(_)) => Ok(found),
        (Some(kind @ ("tensor" | "ttn")), _) => {
            let what = if matches!(found, TargetSource::Ttn(_)) { "a tree bundle" } else { "a dense tensor" };
            Err(Error::load(path, 0, format!("`target.type` is {kind} but the target is {what}")))
        }
        (Some(other), _) => Err(Error::Config(format!("`target.type` must be tensor or ttn, got {other}"))),
    }
}
