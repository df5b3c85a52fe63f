//! File formats, solver dispatch, the `ceppc` command line and the HTTP cost
//! service on top of `cepp-core`.

pub mod bench;
pub mod cli;
pub mod formats;
pub mod pricing;
pub mod service;
pub mod solve;
