//! Config files, input tables and tensors, and result files.

pub mod config;
pub mod dat;
pub mod npy;
pub mod output;

pub use config::{parse_ft_config, parse_gss_config, FtJob, GssJob, OutputFlags, TargetSource};
pub use npy::{read_npy, write_npy, NpyArray};
pub use output::{
    basic_csv, graph_dat, read_bundle, write_bundle, write_ft_outputs, write_gss_outputs, LoadedTtn, RunKind,
    RunManifest,
};
