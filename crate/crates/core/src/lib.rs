//! Counterparty exposure of derivatives dealers under bilateral netting and
//! central clearing.
//!
//! * [`market`]: dealers, asset classes, correlation and clearing scenarios.
//! * [`analytic`]: closed-form expected exposures and the minimum number of
//!   clearing members for a CCP to pay off.
//! * [`montecarlo`]: deterministic parallel simulation of exposures, VaR,
//!   expected shortfall and mean-max exposure.
//! * [`dataio`]: notional tables, run configuration and report files.
//! * [`cli`]: the `ccp-netting` command line.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod dataio;
pub mod market;
pub mod montecarlo;
