//! Command implementations shared by the `ttnet`, `gss` and `ft` binaries.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ttnet::audit::Auditor;
use ttnet::factorize::{factorize_observed, fidelity, reconstruct_ttn, survey, FactorizeOutput};
use ttnet::gss::{run_observed, GssOutput};
use ttnet::io::{self, FtJob, LoadedTtn, NpyArray, RunManifest, TargetSource};
use ttnet::spin::Couplings;
use ttnet::state::TtnState;
use ttnet::sweep::{NoObserver, StepObserver, SweepReport};
use ttnet::{c64, Scalar, Tensor};

pub mod bench;

/// Holds the audit when `--verify` is given.
struct Verify(Option<Auditor>, NoObserver);

impl Verify {
    fn new(on: bool) -> Self {
        Verify(on.then(Auditor::default), NoObserver)
    }

    fn observer<T: Scalar>(&mut self) -> &mut dyn StepObserver<T> {
        match &mut self.0 {
            Some(a) => a,
            None => &mut self.1,
        }
    }

    fn finish<T: Scalar>(self, state: &TtnState<T>) -> Result<()> {
        let Some(mut audit) = self.0 else { return Ok(()) };
        audit.check_state(state, audit.steps);
        eprintln!("verify: {}", audit.summary());
        if !audit.passed() {
            for f in &audit.failures {
                eprintln!("verify: {f}");
            }
            bail!("invariant audit failed");
        }
        Ok(())
    }
}

pub fn gss(config: &Path, verify: bool) -> Result<()> {
    let job = io::parse_gss_config(config)?;
    let manifest = RunManifest::prepare(&job.output.dir, job.config.chi_schedule.len())?;
    if job.model.is_real() {
        gss_run::<f64>(&job, &manifest, verify)
    } else {
        gss_run::<c64>(&job, &manifest, verify)
    }
}

fn gss_run<T: Scalar>(job: &io::GssJob, manifest: &RunManifest, verify: bool) -> Result<()> {
    let c = Couplings::<T>::new(&job.model)?;
    let mut check = Verify::new(verify);
    let out: GssOutput<T> = run_observed(&c, &job.config, check.observer())?;
    io::write_gss_outputs(manifest, &out, &job.output)?;
    for (m, s) in out.stages.iter().enumerate() {
        let state = if s.converged { "converged" } else { "sweep limit" };
        println!("run{}: chi {} after {} sweeps ({state})", m + 1, s.chi, s.sweeps);
    }
    println!("energy {:.12}", out.energy);
    println!("results in {}", manifest.dir.display());
    check.finish(&out.state)
}

pub fn ft(config: &Path, verify: bool) -> Result<()> {
    let job = io::parse_ft_config(config)?;
    match &job.target {
        TargetSource::Tensor(path) => match io::read_npy(path)? {
            NpyArray::Real(t) => ft_dense(t, &job, verify),
            NpyArray::Complex(t) => ft_dense(t, &job, verify),
        },
        TargetSource::Ttn(dir) => match io::read_bundle(dir)? {
            LoadedTtn::Real(s) => ft_tree(s, &job, verify),
            LoadedTtn::Complex(s) => ft_tree(s, &job, verify),
        },
    }
}

fn ft_dense<T: Scalar>(tensor: Tensor<T>, job: &FtJob, verify: bool) -> Result<()> {
    let stages = job.config.fidelity.as_ref().map_or(0, |f| f.chi_schedule.len());
    let manifest = RunManifest::prepare(&job.output.dir, stages)?;
    println!("target: {} legs, shape {:?}", tensor.rank(), tensor.shape());
    let mut check = Verify::new(verify);
    let (target, out) = factorize_observed(tensor, &job.config, check.observer())?;
    let report = final_report(&out)?;
    io::write_ft_outputs(&manifest, &out, &report, &job.output)?;
    summarize(&out, &manifest);
    println!("fidelity {:.10}", fidelity(&target, &out.state)?);
    check.finish(&out.state)
}

fn ft_tree<T: Scalar>(state: TtnState<T>, job: &FtJob, verify: bool) -> Result<()> {
    let manifest = RunManifest::prepare(&job.output.dir, 0)?;
    println!("target: tree with {} sites", state.topology.n_sites());
    let mut check = Verify::new(verify);
    let out = reconstruct_ttn(state, &job.config, check.observer())?;
    let report = final_report(&out)?;
    io::write_ft_outputs(&manifest, &out, &report, &job.output)?;
    summarize(&out, &manifest);
    check.finish(&out.state)
}

/// Last fidelity sweep, else the last reconstruction sweep, else a survey of the chain.
fn final_report<T: Scalar>(out: &FactorizeOutput<T>) -> Result<SweepReport> {
    if let Some(s) = out.fidelity_stages.last().or(out.reconstruction.as_ref()) {
        return Ok(s.last().clone());
    }
    survey(&out.state).context("surveying the factorized chain")
}

fn summarize<T: Scalar>(out: &FactorizeOutput<T>, manifest: &RunManifest) {
    if let Some(r) = &out.reconstruction {
        println!(
            "reconstruction: {} sweeps, {} reconnections",
            r.sweeps,
            r.reports.iter().map(|x| x.reconnections).sum::<usize>()
        );
    }
    for (m, s) in out.fidelity_stages.iter().enumerate() {
        let state = if s.converged { "converged" } else { "sweep limit" };
        println!("run{}: chi {} after {} sweeps ({state})", m + 1, s.chi, s.sweeps);
    }
    println!("results in {}", manifest.dir.display());
}

pub fn init_logging(verbose: bool) {
    let level = if verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
}
