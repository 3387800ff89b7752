//! Single runs, convergence sweeps over `R` and result files.

mod config;
mod output;
mod run;
mod sweep;

pub use config::{desk_r_grid, full_r_grid, parse_config, read_config_file, ConfigMap, RunConfig, SweepConfig};
pub use output::{emit_results, format_float, write_csv, write_json, OutputFormat, CSV_HEADER};
pub use run::{compute_reference, reference_tensor, run_once, RunRecord, CACHE_ENV};
pub use sweep::{fit_loglog, reference_slope, run_sweep, SlopeFit, SweepReport, SweepRow};
