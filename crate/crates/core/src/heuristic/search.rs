use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ffd_initial, HeuristicError, SearchState};
use crate::model::{Placement, ProblemInstance};
use crate::units::Cents;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Move,
    Swap,
    Shrink,
}

impl TransformKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::Move => "move",
            TransformKind::Swap => "swap",
            TransformKind::Shrink => "shrink",
        }
    }
}

impl FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "move" => Ok(TransformKind::Move),
            "swap" => Ok(TransformKind::Swap),
            "shrink" => Ok(TransformKind::Shrink),
            other => Err(alloc::format!("unknown transformation `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Attempts allowed in total, no-ops included.
    pub max_transformations: u64,
    pub seed: u64,
    pub cycle: Vec<TransformKind>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_transformations: 10_000,
            seed: 0,
            cycle: alloc::vec![TransformKind::Move, TransformKind::Swap, TransformKind::Shrink],
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig {
            seed,
            ..SearchConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicSolution {
    pub placement: Placement,
    pub cost: Cents,
    pub initial_cost: Cents,
    pub attempts: u64,
    pub accepted: u64,
}

/// Hill climbing from the FFD start: each pass applies every kind in the
/// cycle once; a candidate is kept iff feasible and not more expensive.
pub fn local_search(inst: &ProblemInstance, cfg: &SearchConfig) -> Result<HeuristicSolution, HeuristicError> {
    local_search_observed(inst, cfg, |_| {})
}

/// [`local_search`] calling `observer` after every accepted transformation.
pub fn local_search_observed<F>(
    inst: &ProblemInstance,
    cfg: &SearchConfig,
    mut observer: F,
) -> Result<HeuristicSolution, HeuristicError>
where
    F: FnMut(&SearchState),
{
    let mut state = ffd_initial(inst)?;
    let initial_cost = state.cost();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut attempts = 0u64;
    let mut accepted = 0u64;

    'outer: while attempts < cfg.max_transformations && !cfg.cycle.is_empty() {
        for &kind in &cfg.cycle {
            if attempts >= cfg.max_transformations {
                break 'outer;
            }
            attempts += 1;
            let proposal = match kind {
                TransformKind::Move => state.propose_move(inst, &mut rng),
                TransformKind::Swap => state.propose_swap(&mut rng),
                TransformKind::Shrink => state.propose_shrink(&mut rng),
            };
            let Some(change) = proposal else {
                continue;
            };
            let before = state.cost();
            state.apply(change);
            if state.feasible_after(change) && state.cost() <= before {
                accepted += 1;
                observer(&state);
            } else {
                state.revert(change);
            }
        }
    }

    Ok(HeuristicSolution {
        placement: state.to_placement(),
        cost: state.cost(),
        initial_cost,
        attempts,
        accepted,
    })
}
