//! First-fit-decreasing construction and hill climbing over move, swap and
//! shrink transformations.
//!
//! Containers are typed when FFD opens them: shareable containers only ever
//! hold shareable items, tenant-exclusive containers only the items of
//! their tenant. Transformations respect the typing, so conflict freedom
//! holds in every state by construction and acceptance only has to check
//! capacity and item count.

mod ffd;
mod search;
mod state;

use alloc::string::String;

pub use ffd::{ffd_initial, ffd_pack, ffd_pack_limited, hosting_baseline, PackedContainer};
pub use search::{local_search, local_search_observed, HeuristicSolution, SearchConfig, TransformKind};
pub use state::{Change, ContainerState, SearchState};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ContainerKind {
    Shareable,
    TenantExclusive(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HeuristicError {
    #[error("item `{0}` is larger than every container variant")]
    ItemTooLarge(String),
    #[error("catalog has no variant with positive capacity")]
    EmptyCatalog,
    #[error("first-fit-decreasing needs {needed} containers but only {allowed} are allowed")]
    TooManyContainers { needed: usize, allowed: usize },
}
