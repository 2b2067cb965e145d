//! Command-line tools, output formats and the parallel sampling harness
//! built on `quadbound-core`.

pub mod cli;
pub mod figures;
pub mod format;
pub mod harness;
