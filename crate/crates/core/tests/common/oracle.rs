//! Brute-force reference values for the backward scheme, written from the
//! discrete recursion alone and sharing no code with the solver.

#![allow(dead_code)]

use lobmm::model::MarketModel;
use lobmm::solver::{Objective, SolverGrid, SolverParams};

#[derive(Debug, Clone)]
pub struct Instance {
    pub model: MarketModel<f64>,
    pub grid: SolverGrid,
    pub params: SolverParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeAction {
    /// Bid level, ask level (0 best, 1 improved) and sizes in grid steps.
    Make { bl: usize, al: usize, bs: usize, as_: usize },
    /// Signed market order in grid steps.
    Take(i64),
}

impl Instance {
    fn mean(&self) -> bool {
        self.params.objective == Objective::MeanPenalty
    }

    pub fn n_y(&self) -> usize {
        ((self.grid.y_max - self.grid.y_min) / self.grid.dy) as usize + 1
    }

    fn y(&self, k: usize) -> f64 {
        (self.grid.y_min + k as i64 * self.grid.dy) as f64
    }

    fn m(&self) -> usize {
        self.model.rho.len()
    }

    fn half(&self, i: usize) -> f64 {
        i as f64 * self.model.grid.delta() / 2.0
    }

    fn unwind(&self, i: usize) -> f64 {
        self.half(i) + self.model.fees.take_fee_per_share
    }

    fn substeps(&self) -> usize {
        self.grid.substeps.expect("oracle instances fix the substep count")
    }

    pub fn steps(&self) -> usize {
        self.grid.n_out * self.substeps()
    }

    fn dtau(&self) -> f64 {
        self.grid.horizon / self.grid.n_out as f64 / self.substeps() as f64
    }

    /// Clock rate for the `n`-th step counted from maturity (1-based).
    fn clock(&self, n: usize) -> f64 {
        let per = self.substeps();
        let slice = self.grid.n_out - 1 - (n - 1) / per;
        let s = (n - 1) % per;
        let t_hi = if slice + 1 == self.grid.n_out {
            self.grid.horizon
        } else {
            (slice + 1) as f64 * (self.grid.horizon / self.grid.n_out as f64)
        };
        let mid = t_hi - (s as f64 + 0.5) * self.dtau();
        self.model.tick_clock.rate_at(self.grid.clock_offset + mid)
    }

    pub fn terminal(&self, k: usize, i: usize) -> f64 {
        let y = self.y(k).abs();
        if self.mean() {
            -(y * self.unwind(i) + self.model.fees.fixed_fee)
        } else {
            (self.params.eta * y * self.unwind(i)).exp()
        }
    }

    fn margin(&self, improved: usize, i: usize) -> f64 {
        self.half(i) - self.model.grid.delta() * improved as f64 + self.model.fees.rebate_per_share
    }

    fn rate(&self, bid: bool, level: usize, i: usize) -> f64 {
        let t = if bid { &self.model.exec_bid } else { &self.model.exec_ask };
        if level == 0 { t.at_best[i - 1] } else { t.improved[i - 1] }
    }

    fn size(&self, steps: usize) -> f64 {
        (steps as i64 * self.grid.dy) as f64
    }

    fn better(&self, a: f64, b: f64) -> bool {
        if self.mean() { a > b } else { a < b }
    }

    /// Every admissible limit order pair at node `(k, i)`.
    pub fn makes(&self, k: usize, i: usize) -> Vec<NodeAction> {
        let lmax = (self.params.lbar / self.grid.dy) as usize;
        let up = lmax.min(self.n_y() - 1 - k);
        let down = lmax.min(k);
        let levels = if i == 1 { 1 } else { 2 };
        let mut out = Vec::new();
        for bl in 0..levels {
            for al in 0..levels {
                for bs in 0..=up {
                    for as_ in 0..=down {
                        out.push(NodeAction::Make { bl, al, bs, as_ });
                    }
                }
            }
        }
        out
    }

    /// Every market order that stays on the grid.
    pub fn takes(&self, k: usize) -> Vec<i64> {
        let emax = self.params.ebar / self.grid.dy;
        (-emax..=emax)
            .filter(|&e| e != 0)
            .filter(|&e| {
                let kk = k as i64 + e;
                kk >= 0 && kk < self.n_y() as i64
            })
            .collect()
    }

    /// One explicit make step at `(k, i)` under a given action, from the
    /// previous values `prev(k, i)`.
    pub fn make_value(&self, n: usize, k: usize, i: usize, a: NodeAction, prev: &dyn Fn(usize, usize) -> f64) -> f64 {
        let NodeAction::Make { bl, al, bs, as_ } = a else { panic!("not a make action") };
        let v = prev(k, i);
        let mut jump = 0.0;
        for j in 1..=self.m() {
            if j != i {
                jump += self.model.rho[i - 1][j - 1] * (prev(k, j) - v);
            }
        }
        let y = self.y(k);
        let eta = self.params.eta;
        let side = |bid: bool, level: usize, steps: usize| -> f64 {
            if steps == 0 {
                return 0.0;
            }
            let kk = if bid { k + steps } else { k - steps };
            let l = self.size(steps);
            let r = self.rate(bid, level, i);
            if self.mean() {
                r * (prev(kk, i) - v + self.margin(level, i) * l)
            } else {
                r * ((-eta * self.margin(level, i) * l).exp() * prev(kk, i) - v)
            }
        };
        let running = if self.mean() {
            let u = y / self.params.inventory_unit;
            -self.params.gamma * u * u
        } else {
            (0.5 * self.params.sigma * self.params.sigma * eta * eta * y * y - self.params.drift * eta * y) * v
        };
        v + self.dtau() * (self.clock(n) * jump + side(true, bl, bs) + side(false, al, as_) + running)
    }

    fn take_charge(&self, i: usize, e: i64) -> f64 {
        let c = self.size(e.unsigned_abs() as usize) * self.unwind(i) + self.model.fees.fixed_fee;
        if self.mean() { c } else { (self.params.eta * c).exp() }
    }

    fn through(&self, i: usize, e: i64, target: f64) -> f64 {
        if self.mean() { target - self.take_charge(i, e) } else { self.take_charge(i, e) * target }
    }

    fn improves(&self, cand: f64, v: f64) -> bool {
        let tie = self.params.tie_eps;
        if self.mean() { cand > v + tie } else { cand < v - tie * v }
    }

    // ---- tree enumeration -------------------------------------------------

    /// Value `n` steps before maturity, by enumerating every action at every
    /// node reached; nothing is cached between branches.
    pub fn tree_value(&self, n: usize, k: usize, i: usize) -> f64 {
        if n == 0 {
            return self.terminal(k, i);
        }
        let cont = |kk: usize| self.best_make(n, kk, i);
        let c = cont(k);
        let mut best: Option<f64> = None;
        let mut visited = vec![false; self.n_y()];
        visited[k] = true;
        self.chains(k, i, 1.0, 0.0, &mut visited, &cont, &mut best);
        match best {
            Some(b) if self.improves(b, c) => b,
            _ => c,
        }
    }

    fn best_make(&self, n: usize, k: usize, i: usize) -> f64 {
        let prev = |kk: usize, j: usize| self.tree_value(n - 1, kk, j);
        let mut best: Option<f64> = None;
        for a in self.makes(k, i) {
            let v = self.make_value(n, k, i, a, &prev);
            if best.is_none_or(|b| self.better(v, b)) {
                best = Some(v);
            }
        }
        best.expect("at least the empty make action")
    }

    /// Depth-first walk over market-order chains visiting distinct nodes.
    #[allow(clippy::too_many_arguments)]
    fn chains(
        &self,
        k: usize,
        i: usize,
        factor: f64,
        cost: f64,
        visited: &mut Vec<bool>,
        cont: &dyn Fn(usize) -> f64,
        best: &mut Option<f64>,
    ) {
        for e in self.takes(k) {
            let kk = (k as i64 + e) as usize;
            if visited[kk] {
                continue;
            }
            let (f, c) = if self.mean() {
                (factor, cost + self.take_charge(i, e))
            } else {
                (factor * self.take_charge(i, e), cost)
            };
            let end = cont(kk);
            let val = if self.mean() { end - c } else { f * end };
            if best.is_none_or(|b| self.better(val, b)) {
                *best = Some(val);
            }
            visited[kk] = true;
            self.chains(kk, i, f, c, visited, cont, best);
            visited[kk] = false;
        }
    }

    /// Tree values at every stored slice, slice-major, `[k * m + i - 1]` within a slice.
    pub fn tree_surface(&self) -> Vec<Vec<f64>> {
        let per = self.substeps();
        (0..=self.grid.n_out)
            .map(|slice| {
                let n = (self.grid.n_out - slice) * per;
                let mut out = Vec::new();
                for k in 0..self.n_y() {
                    for i in 1..=self.m() {
                        out.push(self.tree_value(n, k, i));
                    }
                }
                out
            })
            .collect()
    }

    // ---- joint policy enumeration ----------------------------------------

    /// Best value at every node over all joint single-step policies: every
    /// node picks any make or take action independently; take cycles are
    /// infeasible. Returns the per-node optimum `[k * m + i - 1]`.
    pub fn joint_policy_values(&self) -> Vec<f64> {
        assert_eq!(self.steps(), 1, "joint enumeration is for single-step instances");
        let m = self.m();
        let n_nodes = self.n_y() * m;
        let prev = |kk: usize, j: usize| self.terminal(kk, j);
        let options: Vec<Vec<NodeAction>> = (0..n_nodes)
            .map(|idx| {
                let (k, i) = (idx / m, idx % m + 1);
                let mut v = self.makes(k, i);
                v.extend(self.takes(k).into_iter().map(NodeAction::Take));
                v
            })
            .collect();
        let make_vals: Vec<Vec<Option<f64>>> = (0..n_nodes)
            .map(|idx| {
                let (k, i) = (idx / m, idx % m + 1);
                options[idx]
                    .iter()
                    .map(|a| match a {
                        NodeAction::Make { .. } => Some(self.make_value(1, k, i, *a, &prev)),
                        NodeAction::Take(_) => None,
                    })
                    .collect()
            })
            .collect();
        let mut best: Vec<Option<f64>> = vec![None; n_nodes];
        let mut choice = vec![0usize; n_nodes];
        loop {
            // evaluate the policy `choice`
            for idx in 0..n_nodes {
                if let Some(v) = self.policy_value(idx, &options, &make_vals, &choice, n_nodes) {
                    if best[idx].is_none_or(|b| self.better(v, b)) {
                        best[idx] = Some(v);
                    }
                }
            }
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == n_nodes {
                    return best.into_iter().map(|b| b.expect("some feasible policy")).collect();
                }
                choice[pos] += 1;
                if choice[pos] < options[pos].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }

    fn policy_value(
        &self,
        start: usize,
        options: &[Vec<NodeAction>],
        make_vals: &[Vec<Option<f64>>],
        choice: &[usize],
        n_nodes: usize,
    ) -> Option<f64> {
        let m = self.m();
        let mut idx = start;
        let mut hops = Vec::new();
        for _ in 0..=n_nodes {
            match options[idx][choice[idx]] {
                NodeAction::Make { .. } => {
                    let mut v = make_vals[idx][choice[idx]].expect("make value");
                    for (i, e) in hops.into_iter().rev() {
                        v = self.through(i, e, v);
                    }
                    return Some(v);
                }
                NodeAction::Take(e) => {
                    let (k, i) = (idx / m, idx % m + 1);
                    hops.push((i, e));
                    idx = (k as i64 + e) as usize * m + (i - 1);
                }
            }
        }
        None
    }
}
