//! Solver dispatch with wall-clock budgets.

use std::cell::Cell;
use std::time::{Duration, Instant};

use cepp_core::heuristic::{local_search, HeuristicError, SearchConfig};
use cepp_core::model::{solve_exact, Budget, ExactError};
use cepp_core::{Cents, Placement, ProblemInstance};

/// Budget that runs out at a fixed instant. The clock is read every 256
/// checks.
pub struct Deadline {
    at: Instant,
    calls: Cell<u32>,
    hit: Cell<bool>,
}

impl Deadline {
    pub fn after(d: Duration) -> Self {
        Deadline {
            at: Instant::now() + d,
            calls: Cell::new(0),
            hit: Cell::new(false),
        }
    }
}

impl Budget for Deadline {
    fn exhausted(&self) -> bool {
        if self.hit.get() {
            return true;
        }
        let n = self.calls.get().wrapping_add(1);
        self.calls.set(n);
        if n.is_multiple_of(256) && Instant::now() >= self.at {
            self.hit.set(true);
        }
        self.hit.get()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Heuristic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Heuristic => "heuristic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub method: Method,
    pub search: SearchConfig,
    pub exact_cap: usize,
    pub exact_timeout: Option<Duration>,
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub method: Method,
    pub placement: Placement,
    pub cost: Cents,
    /// Exact runs only: false when the time budget ran out first.
    pub proven_optimal: Option<bool>,
    pub wall: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
}

impl SolveError {
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            SolveError::Exact(ExactError::Infeasible)
                | SolveError::Heuristic(HeuristicError::ItemTooLarge(_))
                | SolveError::Heuristic(HeuristicError::TooManyContainers { .. })
                | SolveError::Heuristic(HeuristicError::EmptyCatalog)
        )
    }
}

pub fn solve(inst: &ProblemInstance, opts: &SolveOptions) -> Result<Solved, SolveError> {
    let start = Instant::now();
    match opts.method {
        Method::Exact => {
            let sol = match opts.exact_timeout {
                Some(t) => solve_exact(inst, &Deadline::after(t), opts.exact_cap)?,
                None => solve_exact(inst, &cepp_core::model::Unlimited, opts.exact_cap)?,
            };
            Ok(Solved {
                method: Method::Exact,
                placement: sol.placement,
                cost: sol.cost,
                proven_optimal: Some(sol.proven_optimal),
                wall: start.elapsed(),
            })
        }
        Method::Heuristic => {
            let sol = local_search(inst, &opts.search)?;
            Ok(Solved {
                method: Method::Heuristic,
                placement: sol.placement,
                cost: sol.cost,
                proven_optimal: None,
                wall: start.elapsed(),
            })
        }
    }
}
