pub mod ed;
pub mod generators;
