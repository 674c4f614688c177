use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Action;
use crate::scalar::Real;
use crate::solver::grid::{Objective, SolverGrid};

/// Value function on the solver grid, slice-major then inventory then spread.
///
/// Also carries the argmax recorded at each stored slice, which
/// [`extract_policy`](crate::solver::extract_policy) turns into a [`PolicyTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurface<T> {
    pub objective: Objective,
    pub grid: SolverGrid,
    pub m: usize,
    pub(crate) values: Vec<T>,
    pub(crate) decisions: Vec<Action>,
    /// Internal steps used per output slice.
    pub substeps: usize,
    /// Nodes raised to the positivity floor (exponential only).
    pub floor_hits: usize,
}

impl<T: Real> ValueSurface<T> {
    pub fn n_slices(&self) -> usize {
        self.grid.n_out + 1
    }

    fn slice_len(&self) -> usize {
        self.grid.n_y() * self.m
    }

    /// Values at slice `k`, indexed `[y_node * m + (i - 1)]`.
    pub fn slice(&self, k: usize) -> &[T] {
        let n = self.slice_len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn terminal(&self) -> &[T] {
        self.slice(self.grid.n_out)
    }

    pub fn value(&self, k: usize, y_node: usize, i: usize) -> T {
        self.slice(k)[y_node * self.m + i - 1]
    }

    /// Value of state `i` across inventory at slice `k`.
    pub fn column(&self, k: usize, i: usize) -> Vec<T> {
        self.slice(k).iter().skip(i - 1).step_by(self.m).copied().collect()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `t,y,i,value` rows for every stored node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,y,i,value")?;
        for (k, t) in self.grid.times().iter().enumerate() {
            for n in 0..self.grid.n_y() {
                for i in 1..=self.m {
                    writeln!(out, "{},{},{},{}", t, self.grid.y_at(n), i, self.value(k, n, i))?;
                }
            }
        }
        Ok(())
    }
}

/// Grid metadata stored with a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyGrid {
    pub objective: Objective,
    pub horizon: f64,
    pub n_out: usize,
    pub y_min: i64,
    pub y_max: i64,
    pub dy: i64,
    pub m: usize,
    pub lbar: i64,
    pub ebar: i64,
    pub gamma: f64,
}

impl PolicyGrid {
    pub fn solver_grid(&self) -> SolverGrid {
        SolverGrid {
            horizon: self.horizon,
            n_out: self.n_out,
            y_min: self.y_min,
            y_max: self.y_max,
            dy: self.dy,
            ..SolverGrid::default()
        }
    }
}

/// Optimal action per `(slice, inventory node, spread state)`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    pub grid: PolicyGrid,
    pub actions: Vec<Action>,
}

impl PolicyTable {
    pub fn n_y(&self) -> usize {
        self.grid.solver_grid().n_y()
    }

    pub fn action(&self, slice: usize, y_node: usize, i: usize) -> &Action {
        &self.actions[(slice * self.n_y() + y_node) * self.grid.m + i - 1]
    }

    /// Action at time `t`, inventory `y` and spread state `i`, with nearest
    /// node lookup. The flag is set when `y` lies outside the grid.
    pub fn lookup(&self, t: f64, y: f64, i: usize) -> (&Action, bool) {
        let g = self.grid.solver_grid();
        let (node, clamped) = g.nearest_node(y);
        (self.action(g.slice_at(t), node, i), clamped)
    }

    pub fn take_count(&self) -> usize {
        self.actions.iter().filter(|a| a.is_take()).count()
    }

    /// Checks shape, admissibility and inventory bounds of every action.
    pub fn validate(&self) -> Result<()> {
        let g = self.grid.solver_grid();
        g.validate()?;
        let expected = self.grid.n_out * g.n_y() * self.grid.m;
        if self.actions.len() != expected {
            return Err(Error::InvalidConfig(format!(
                "policy holds {} actions, grid needs {expected}",
                self.actions.len()
            )));
        }
        for (idx, a) in self.actions.iter().enumerate() {
            let i = idx % self.grid.m + 1;
            let y = g.y_at((idx / self.grid.m) % g.n_y()) as f64;
            let ok = match *a {
                Action::Make { qb, qa, lb, la } => {
                    (i > 1 || (!qb.is_improved() && !qa.is_improved()))
                        && lb >= 0.0
                        && la >= 0.0
                        && y + lb <= g.y_max as f64
                        && y - la >= g.y_min as f64
                }
                Action::Take { e } => e != 0.0 && y + e >= g.y_min as f64 && y + e <= g.y_max as f64,
            };
            if !ok {
                return Err(Error::InvalidConfig(format!("inadmissible action {a:?} at node {idx}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    /// Number of nodes whose action differs from the mirror of the action at `-y`.
    pub fn mirror_mismatches(&self) -> Option<usize> {
        let g = self.grid.solver_grid();
        if !g.is_symmetric() {
            return None;
        }
        let n = g.n_y();
        let mut bad = 0;
        for k in 0..self.grid.n_out {
            for node in 0..n {
                for i in 1..=self.grid.m {
                    if *self.action(k, n - 1 - node, i) != self.action(k, node, i).mirror() {
                        bad += 1;
                    }
                }
            }
        }
        Some(bad)
    }
}
