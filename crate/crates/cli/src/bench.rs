//! Ready-to-run workspaces for the three demonstrations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ttnet::bench::generators::{
    hierarchical_chain, multivariate_normal, CovarianceTree, QuanticsFunction, QuanticsOrder,
};
use ttnet::io;
use ttnet::spin::Exchange;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// Sizes that finish in seconds to minutes.
    Desk,
    /// The sizes of the reference runs (N = 256 chain, 2^24-entry quantics tensor).
    Paper,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn mkdir(path: PathBuf) -> Result<PathBuf> {
    fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(path)
}

/// Writes `hierarchical_a*/`, `quantics/` and `normal/` under `dir`; returns the config files.
pub fn write_workspace(dir: &Path, scale: Scale, seed: u64) -> Result<Vec<PathBuf>> {
    let mut configs = Vec::new();
    let (depth, chi) = if scale == Scale::Paper { (8, 20) } else { (4, 16) };
    for alpha in [0.5, 1.0] {
        let d = mkdir(dir.join(format!("hierarchical_a{alpha:.1}")))?;
        let model = hierarchical_chain(depth, 1.0, alpha)?;
        let Exchange::Xxz(rows) = &model.exchange else { unreachable!("the chain is XXZ") };
        let mut table = String::new();
        for r in rows {
            writeln!(table, "{} {} {} {}", r.i, r.j, r.coupling, r.anisotropy)?;
        }
        write(&d.join("couplings.dat"), &table)?;
        let cfg = d.join("input.yml");
        write(
            &cfg,
            &format!(
                "system:\n  N: {}\n  spin_size: 1/2\n  model:\n    type: XXZ\n    file: couplings.dat\n\
                 numerics:\n  initial_bond_dimension: {chi}\n  opt_structure:\n    type: 1\n    seed: {seed}\n\
                 \x20 max_bond_dimensions: [{chi}]\n  max_num_sweeps: [50]\n\
                 \x20 energy_convergence_threshold: 1.0e-11\n  entanglement_convergence_threshold: 1.0e-10\n\
                 output:\n  dir: output\n  single_site: 1\n  two_site: 0\n",
                model.n_sites()
            ),
        )?;
        configs.push(cfg);
    }

    let bits = if scale == Scale::Paper { 8 } else { 6 };
    let d = mkdir(dir.join("quantics"))?;
    let f = QuanticsFunction::random(30, 3, bits, QuanticsOrder::VariableMajor, seed);
    io::write_npy(&d.join("psi.npy"), &f.tensor()?)?;
    let cfg = d.join("input.yml");
    write(
        &cfg,
        &format!(
            "target:\n  tensor: psi.npy\n  type: tensor\n\
             numerics:\n  initial_bond_dimension: 4\n  entanglement_convergence_threshold: 1.0e-14\n\
             \x20 fidelity:\n    opt_structure:\n      type: 2\n      seed: {seed}\n\
             \x20   max_bond_dimensions: [4, 8, 16]\n    max_num_sweeps: [10, 10, 10]\n    convergence_threshold: 1.0e-10\n\
             output:\n  dir: output\n  tensors: 1\n"
        ),
    )?;
    configs.push(cfg);

    // Four variables on a balanced tree; the chain order 0,1,2,3 differs from the tree's 0,2 | 1,3.
    let d = mkdir(dir.join("normal"))?;
    let tree = CovarianceTree::balanced(&[0, 2, 1, 3])?;
    io::write_npy(&d.join("psi.npy"), &multivariate_normal(&tree, 0.2, 3)?)?;
    let cfg = d.join("input.yml");
    write(
        &cfg,
        &format!(
            "target:\n  tensor: psi.npy\n  type: tensor\n\
             numerics:\n  initial_bond_dimension: 64\n  opt_structure:\n    type: 1\n    seed: {seed}\n  max_sweep_num: 10\n\
             output:\n  dir: output\n  tensors: 1\n"
        ),
    )?;
    configs.push(cfg);
    Ok(configs)
}
