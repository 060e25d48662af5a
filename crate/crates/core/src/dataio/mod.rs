//! Input tables, run configuration and report output.

mod config;
mod datasets;
mod notionals;
mod report;

use std::path::PathBuf;

use thiserror::Error;

use crate::market::MarketError;

pub use config::{PreparedRun, RunConfig, MIRROR_SUFFIX, SCENARIO_IDS};
pub use datasets::{builtin_credit_exposures, builtin_notionals, BUILTIN_NOTIONALS, OCC_CLASSES};
pub use notionals::{load_notionals, NotionalRow, NotionalTable};
pub use report::{
    format_sig, read_dump, render_csv, render_histograms, render_mean_max, render_ratio_tables, to_json,
    write_epsilon_csv, write_report, DUMP_FILE, EPSILON_FILE, HISTOGRAM_FILE, MEAN_MAX_FILE, RATIO_TABLES_FILE,
    REPORT_CSV_FILE,
};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: negative notional for `{dealer}` in `{class}`")]
    NegativeNotional { line: u64, dealer: String, class: String },
    #[error("{0}: no data rows")]
    Empty(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("unknown asset class `{0}`")]
    UnknownClass(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
