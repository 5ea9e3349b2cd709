//! Experiment protocols: single realizations, the two sweeps, and reports.
//!
//! A sweep directory looks like
//!
//! ```text
//! sweep-known/
//!   sweep.json  config.json
//!   n_known_10/r3/ova/{checkpoint,thresholds,scores,metrics}.json
//!   realizations.csv  summary.json  fig_auc.svg  fig_acc.svg
//! ```

mod config;
mod plot;
mod realization;
mod report;
mod sweep;

pub use config::{CorpusSource, ExperimentConfig};
pub use plot::{line_plot_svg, Series};
pub use realization::{prepare, realization_seed, run_arch, run_realization, ArchResult, Prepared, RealizationResult, ScoreRecord};
pub use report::{read_csv, report, summarize, CsvRow, Stat, SummaryRow, SummaryTable, CSV_FILE, SUMMARY_FILE};
pub use sweep::{run_sweep, sweep_authorized, sweep_known, SweepKind, SweepPlan, SweepPoint};
