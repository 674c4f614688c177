//! Backward solvers for the reduced dynamic-programming systems and policy
//! extraction.

mod check;
mod grid;
mod scheme;
mod surface;

pub use check::{check_solution, max_excess, Diagnostics};
pub use grid::{Objective, Penalty, SolverGrid, SolverParams, DEFAULT_INVENTORY_UNIT};
pub use scheme::{intervention_operator, terminal_condition, Intervention, MAX_JUMP_PROBABILITY};
pub use surface::{PolicyGrid, PolicyTable, ValueSurface};

use crate::error::{Error, Result};
use crate::model::MarketModel;
use crate::scalar::Real;

/// Mean criterion with quadratic inventory penalty. Never reads the price model.
pub fn solve_mean_criterion<T: Real>(
    model: &MarketModel<T>,
    grid: &SolverGrid,
    params: &SolverParams,
) -> Result<(ValueSurface<T>, PolicyTable)> {
    if params.objective != Objective::MeanPenalty {
        return Err(Error::InvalidConfig("solve_mean_criterion needs objective mean_penalty".into()));
    }
    let surface = scheme::solve_surface(model, grid, params)?;
    let policy = extract_policy(&surface, model, grid, params)?;
    Ok((surface, policy))
}

/// Exponential utility with Bachelier mid price (drift and volatility from `params`).
pub fn solve_exponential<T: Real>(
    model: &MarketModel<T>,
    grid: &SolverGrid,
    params: &SolverParams,
) -> Result<(ValueSurface<T>, PolicyTable)> {
    if params.objective != Objective::Exponential {
        return Err(Error::InvalidConfig("solve_exponential needs objective exponential".into()));
    }
    let surface = scheme::solve_surface(model, grid, params)?;
    let policy = extract_policy(&surface, model, grid, params)?;
    Ok((surface, policy))
}

/// Dispatches on `params.objective`.
pub fn solve<T: Real>(
    model: &MarketModel<T>,
    grid: &SolverGrid,
    params: &SolverParams,
) -> Result<(ValueSurface<T>, PolicyTable)> {
    match params.objective {
        Objective::MeanPenalty => solve_mean_criterion(model, grid, params),
        Objective::Exponential => solve_exponential(model, grid, params),
    }
}

/// Materializes the argmax recorded at every stored slice during the solve.
pub fn extract_policy<T: Real>(
    surface: &ValueSurface<T>,
    model: &MarketModel<T>,
    grid: &SolverGrid,
    params: &SolverParams,
) -> Result<PolicyTable> {
    let same_grid = surface.grid.horizon == grid.horizon
        && surface.grid.n_out == grid.n_out
        && surface.grid.y_min == grid.y_min
        && surface.grid.y_max == grid.y_max
        && surface.grid.dy == grid.dy;
    if !same_grid || surface.m != model.grid.m() || surface.objective != params.objective {
        return Err(Error::InvalidConfig("surface was not produced on this grid, model and objective".into()));
    }
    let policy = PolicyTable {
        grid: PolicyGrid {
            objective: params.objective,
            horizon: grid.horizon,
            n_out: grid.n_out,
            y_min: grid.y_min,
            y_max: grid.y_max,
            dy: grid.dy,
            m: surface.m,
            lbar: params.lbar,
            ebar: params.ebar,
            gamma: params.gamma,
        },
        actions: surface.decisions.clone(),
    };
    policy.validate()?;
    if params.ebar == 0 && policy.take_count() > 0 {
        return Err(Error::Numerical("market order recorded with ebar = 0".into()));
    }
    Ok(policy)
}
