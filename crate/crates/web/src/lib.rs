//! Browser bindings: JSON in, JSON out.

use serde_json::{json, Value};
use ttnet::bench::generators::{
    hierarchical_chain, multivariate_normal, CovarianceTree, QuanticsFunction, QuanticsOrder,
};
use ttnet::decompose::StructureMode;
use ttnet::factorize::{
    factorize, fidelity, normalize_target, reconstruct, sequential_svd_to_mpn, survey, FactorizeConfig, FidelityConfig,
    StructureSearch,
};
use ttnet::gss::{self, GssConfig};
use ttnet::state::TtnState;
use ttnet::sweep::{NoObserver, SweepReport};
use ttnet::Scalar;
use wasm_bindgen::prelude::*;

struct Params(Value);

impl Params {
    fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map(Params).map_err(|e| format!("bad request: {e}"))
    }

    fn num(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).and_then(Value::as_f64).unwrap_or(default)
    }

    fn int(&self, key: &str, default: u64, max: u64) -> Result<u64, String> {
        let v = self.0.get(key).and_then(Value::as_u64).unwrap_or(default);
        if v > max {
            return Err(format!("{key} is limited to {max} in the browser"));
        }
        Ok(v)
    }

    fn mode(&self) -> Result<StructureMode, String> {
        StructureMode::from_code(self.int("mode", 1, 2)? as i64).map_err(|e| e.to_string())
    }
}

/// Nodes 0..N are sites, N+i is tensor i; one entry per bond.
fn describe<T: Scalar>(state: &TtnState<T>, report: &SweepReport) -> Value {
    let topo = &state.topology;
    let bonds: Vec<Value> = (0..topo.n_bonds())
        .map(|b| {
            let (u, v) = topo.bond_nodes(b);
            json!({
                "bond": b,
                "nodes": [u, v],
                "physical": topo.is_physical(b),
                "entropy": report.entropies.get(&b).copied().unwrap_or(0.0),
                "dim": state.bond_dim(b),
            })
        })
        .collect();
    let aux: Vec<f64> = topo.aux_bonds().filter_map(|b| report.entropies.get(&b).copied()).collect();
    json!({
        "sites": topo.n_sites(),
        "tensors": topo.n_tensors(),
        "center": topo.center(),
        "bonds": bonds,
        "max_aux_entropy": aux.iter().copied().fold(0.0, f64::max),
        "mean_aux_entropy": aux.iter().sum::<f64>() / aux.len().max(1) as f64,
    })
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// `{depth, alpha, chi, mode, sweeps}` → ground state of the hierarchical chain.
#[wasm_bindgen]
pub fn ground_state(request: &str) -> String {
    respond((|| {
        let p = Params::parse(request)?;
        let depth = p.int("depth", 3, 4)? as u32;
        let chi = p.int("chi", 8, 32)? as usize;
        let model = hierarchical_chain(depth, 1.0, p.num("alpha", 0.5)).map_err(|e| e.to_string())?;
        let cfg = GssConfig {
            chi_init: chi,
            chi_schedule: vec![chi],
            max_sweeps: vec![p.int("sweeps", 10, 30)? as usize],
            opt_mode: p.mode()?,
            t0: p.num("temperature", 0.0),
            ..GssConfig::default()
        };
        let out = gss::run::<f64>(&model, &cfg).map_err(|e| e.to_string())?;
        let stage = &out.stages[0];
        let mut v = describe(&out.state, stage.last());
        v["energy"] = json!(out.energy);
        v["sweeps"] = json!(stage.sweeps);
        v["converged"] = json!(stage.converged);
        Ok(v)
    })())
}

/// `{rho, bits, mode}` → four-variable Gaussian on the tree pairing (0,2) and (1,3), as a chain
/// and after structure sweeps.
#[wasm_bindgen]
pub fn reconstruct_gaussian(request: &str) -> String {
    respond((|| {
        let p = Params::parse(request)?;
        let bits = p.int("bits", 3, 3)? as usize;
        let tree = CovarianceTree::balanced(&[0, 2, 1, 3]).map_err(|e| e.to_string())?;
        let raw = multivariate_normal(&tree, p.num("rho", 0.2), bits).map_err(|e| e.to_string())?;
        let target = normalize_target(raw).map_err(|e| e.to_string())?;
        let chi = 1 << (2 * bits);
        let mut state = sequential_svd_to_mpn(&target, chi, 0.0).map_err(|e| e.to_string())?;
        let before = describe(&state, &survey(&state).map_err(|e| e.to_string())?);
        let cfg = FactorizeConfig {
            chi_init: chi,
            structure: StructureSearch { mode: p.mode()?, ..StructureSearch::default() },
            ..FactorizeConfig::default()
        };
        let stage = reconstruct(&mut state, chi, &cfg, &mut NoObserver).map_err(|e| e.to_string())?;
        Ok(json!({ "before": before, "after": describe(&state, stage.last()), "sweeps": stage.sweeps }))
    })())
}

/// `{bits, terms, seed, chi}` → fidelity sweeps on a three-variable quantics function, with the
/// chain kept fixed and with structure search.
#[wasm_bindgen]
pub fn compress_quantics(request: &str) -> String {
    respond((|| {
        let p = Params::parse(request)?;
        let bits = p.int("bits", 4, 5)? as usize;
        let chi = p.int("chi", 4, 16)? as usize;
        let f = QuanticsFunction::random(
            p.int("terms", 30, 100)? as usize,
            3,
            bits,
            QuanticsOrder::VariableMajor,
            p.int("seed", 0, u64::MAX)?,
        );
        let raw = f.tensor().map_err(|e| e.to_string())?;
        let run = |mode| -> Result<Value, String> {
            let cfg = FactorizeConfig {
                chi_init: chi,
                fidelity: Some(FidelityConfig {
                    structure: StructureSearch { mode, ..StructureSearch::default() },
                    chi_schedule: vec![chi],
                    max_sweeps: vec![8],
                    eps_f: 1e-10,
                    eps_s: 1e-14,
                    ..FidelityConfig::default()
                }),
                ..FactorizeConfig::default()
            };
            let (target, out) = factorize(raw.clone(), &cfg).map_err(|e| e.to_string())?;
            let mut v = describe(&out.state, out.fidelity_stages[0].last());
            v["fidelity"] = json!(fidelity(&target, &out.state).map_err(|e| e.to_string())?);
            Ok(v)
        };
        Ok(json!({ "chain": run(StructureMode::Fixed)?, "tree": run(p.mode()?)?, "legs_per_variable": bits }))
    })())
}
