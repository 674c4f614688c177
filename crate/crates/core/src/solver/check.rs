use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::MarketModel;
use crate::scalar::Real;
use crate::solver::grid::{Objective, SolverGrid, SolverParams};
use crate::solver::scheme::{intervention_operator, terminal_condition};
use crate::solver::surface::ValueSurface;

/// Invariant audit of a solved surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Mean: `max(M phi - phi)`. Exponential: `max((phi - M phi) / phi)`.
    pub obstacle_violation: f64,
    /// Largest absolute deviation of the last slice from the terminal condition.
    pub terminal_error: f64,
    /// `max |v(t, y, i) - v(t, -y, i)|` when the inventory grid is symmetric.
    pub symmetry_residual: Option<f64>,
    /// Nodes whose recorded action is not the mirror of the action at `-y`.
    pub policy_mirror_mismatches: Option<usize>,
    pub min_value: f64,
    pub floor_hits: usize,
}

pub fn check_solution<T: Real>(
    surface: &ValueSurface<T>,
    model: &MarketModel<T>,
    grid: &SolverGrid,
    params: &SolverParams,
) -> Result<Diagnostics> {
    if surface.grid.n_y() != grid.n_y() || surface.grid.n_out != grid.n_out || surface.m != model.grid.m() {
        return Err(Error::InvalidConfig("surface does not match grid or model".into()));
    }
    let m = surface.m;
    let n_y = grid.n_y();
    let mut obstacle = f64::NEG_INFINITY;
    let mut sym: Option<f64> = grid.is_symmetric().then_some(0.0);
    let mut min_value = f64::INFINITY;
    for k in 0..surface.n_slices() {
        for i in 1..=m {
            let col = surface.column(k, i);
            let ops = intervention_operator(&col, i, &model.grid, &model.fees, grid, params)?;
            for (n, (v, op)) in col.iter().zip(&ops).enumerate() {
                let v = v.as_f64();
                min_value = min_value.min(v);
                if let Some(mv) = op.value {
                    let mv = mv.as_f64();
                    let gap = match surface.objective {
                        Objective::MeanPenalty => mv - v,
                        Objective::Exponential => (v - mv) / v,
                    };
                    obstacle = obstacle.max(gap);
                }
                if let Some(s) = sym.as_mut() {
                    *s = s.max((v - col[n_y - 1 - n].as_f64()).abs());
                }
            }
        }
    }
    let mut terminal_error = 0.0f64;
    for n in 0..n_y {
        for i in 1..=m {
            let exact = terminal_condition(surface.objective, grid.y_at(n), i, &model.grid, &model.fees, params);
            let got = surface.value(grid.n_out, n, i);
            terminal_error = terminal_error.max((got - exact).abs().as_f64());
        }
    }
    let mismatches = grid.is_symmetric().then(|| {
        let mut bad = 0;
        for k in 0..grid.n_out {
            for n in 0..n_y {
                for i in 0..m {
                    let a = surface.decisions[(k * n_y + n) * m + i];
                    let b = surface.decisions[(k * n_y + n_y - 1 - n) * m + i];
                    bad += usize::from(b != a.mirror());
                }
            }
        }
        bad
    });
    Ok(Diagnostics {
        obstacle_violation: obstacle.max(0.0),
        terminal_error,
        symmetry_residual: sym,
        policy_mirror_mismatches: mismatches,
        min_value,
        floor_hits: surface.floor_hits,
    })
}

/// `max(lower - upper)` over all stored nodes; nonpositive when `lower <= upper` everywhere.
pub fn max_excess<T: Real>(lower: &ValueSurface<T>, upper: &ValueSurface<T>) -> Result<f64> {
    if lower.values.len() != upper.values.len() {
        return Err(Error::InvalidConfig("surfaces have different shapes".into()));
    }
    Ok(lower.values.iter().zip(&upper.values).map(|(a, b)| (*a - *b).as_f64()).fold(f64::NEG_INFINITY, f64::max))
}
