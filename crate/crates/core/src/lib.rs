//! Cost-efficient placement of integration processes on multicloud container
//! offerings.
//!
//! The crate is split along the life of a process model:
//!
//! - [`ipcg`]: integration pattern contract graphs, structural validation,
//!   isomorphism and derived placement attributes.
//! - [`rewrite`]: correctness-preserving graph rewrites (decomposition into
//!   shareable / non-shareable parts, pattern combination, routing slips) and
//!   cost-annotated change proposals.
//! - [`model`]: the placement problem, its constraints, an exact
//!   branch-and-bound solver and CPLEX-LP export.
//! - [`heuristic`]: first-fit-decreasing construction plus hill climbing.
//! - [`catalog`]: container variant catalogs and their normalization.
//! - [`workload`]: synthetic workloads, region scoping and flattening.
//!
//! Everything here is `no_std` with `alloc`; file formats, IO and the service
//! live in the companion `cepp` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod fixtures;
pub mod heuristic;
pub mod ipcg;
pub mod model;
pub mod report;
pub mod rewrite;
pub mod units;
pub mod workload;

pub use catalog::Catalog;
pub use ipcg::{Contract, Ipcg, PatternNode, PatternType};
pub use model::{ContainerVariant, Placement, PlacementItem, ProblemInstance};
pub use report::{ValidationReport, Violation};
pub use units::{Cents, Mb};
