//! Expected forward-backward ODE system and its fixed-point solver.
//!
//! ```text
//! dXbar^k = a^k (Zbar^k - Xbar^k) dt,                     Xbar^k(0) = mu0^k
//! dYbar^k = (a^k Ybar^k + 2 (Zbar^k - Xbar^k)) dt,         Ybar^k(T) = 0
//! Zbar^k  = sum_l w^k(l) Xbar^l m^l
//! ```
//!
//! with `w^k` the best response at `(Xbar^k, Ybar^k, Xbar)`. The forward
//! pass maps adjoints to states, the backward pass maps states to adjoints,
//! and the fixed-point loop alternates both from the previous iterate until
//! the sup-norm change drops below `epsilon`. Both passes are explicit Euler
//! on the uniform grid, with weights recomputed at every node from the
//! current values.

use serde::{Deserialize, Serialize};

use crate::best_response::{aggregate, best_response, AgentSnapshot};
use crate::error::{Error, Result};
use crate::model::{ModelParams, ResponseRule, SolverConfig, TimeGrid};

/// `K x K` connection strengths at one node, `w[k][l]`.
pub type NodeWeights = Vec<Vec<f64>>;

/// Per-group series on the grid, indexed `[group][node]`.
pub type GroupSeries = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldTrajectories {
    pub xbar: GroupSeries,
    pub ybar: GroupSeries,
    pub zbar: GroupSeries,
    pub grid: TimeGrid,
}

impl MeanFieldTrajectories {
    pub fn k(&self) -> usize {
        self.xbar.len()
    }

    /// Expected states of every group at node `i`.
    pub fn means_at(&self, i: usize) -> Vec<f64> {
        self.xbar.iter().map(|x| x[i]).collect()
    }
}

/// Connection strengths over the grid, indexed `[k][l][node]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub w: Vec<Vec<Vec<f64>>>,
    pub grid: TimeGrid,
}

impl WeightProfile {
    pub fn k(&self) -> usize {
        self.w.len()
    }

    pub fn series(&self, k: usize, l: usize) -> &[f64] {
        &self.w[k][l]
    }

    pub fn at(&self, i: usize) -> NodeWeights {
        self.w.iter().map(|row| row.iter().map(|s| s[i]).collect()).collect()
    }

    /// Group `k`'s own weights as `[l][node]`.
    pub fn own(&self, k: usize) -> &[Vec<f64>] {
        &self.w[k]
    }

    pub fn all_in_unit_interval(&self) -> bool {
        self.w
            .iter()
            .flatten()
            .flatten()
            .all(|&v| (0.0..=1.0).contains(&v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub trajectories: MeanFieldTrajectories,
    pub weights: WeightProfile,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Whether every connection strength lies in `[0, 1]`. The solver does
    /// not project onto that interval.
    pub weights_in_unit_interval: bool,
}

impl EquilibriumSolution {
    pub fn k(&self) -> usize {
        self.trajectories.k()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.trajectories.grid
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.xbar.is_empty() || self.trajectories.xbar[0].is_empty()
    }
}

/// `Zbar^k = sum_l w[k][l] Xbar^l m^l` for every `k`.
pub fn aggregates(means: &[f64], weights: &[Vec<f64>], params: &ModelParams) -> Result<Vec<f64>> {
    let kk = params.k();
    if means.len() != kk {
        return Err(Error::DimensionMismatch {
            what: "node means",
            expected: kk,
            found: means.len(),
        });
    }
    if weights.len() != kk {
        return Err(Error::DimensionMismatch {
            what: "weight rows",
            expected: kk,
            found: weights.len(),
        });
    }
    weights
        .iter()
        .map(|row| {
            if row.len() != kk {
                return Err(Error::DimensionMismatch {
                    what: "weight row",
                    expected: kk,
                    found: row.len(),
                });
            }
            Ok(aggregate(row, means, params))
        })
        .collect()
}

/// Best-response weights of every group at one node.
pub fn node_weights(rule: ResponseRule, means: &[f64], adjoints: &[f64], params: &ModelParams) -> Result<NodeWeights> {
    (0..params.k())
        .map(|k| {
            let snap = AgentSnapshot::new(means[k], adjoints[k], means);
            best_response(rule, k, &snap, params).map(|w| w.0)
        })
        .collect()
}

fn check_series(what: &'static str, s: &[Vec<f64>], params: &ModelParams, grid: &TimeGrid) -> Result<()> {
    if s.len() != params.k() {
        return Err(Error::DimensionMismatch {
            what,
            expected: params.k(),
            found: s.len(),
        });
    }
    for row in s {
        if row.len() != grid.n_nodes() {
            return Err(Error::DimensionMismatch {
                what,
                expected: grid.n_nodes(),
                found: row.len(),
            });
        }
    }
    Ok(())
}

fn column(s: &[Vec<f64>], i: usize) -> Vec<f64> {
    s.iter().map(|r| r[i]).collect()
}

/// Forward Euler pass: expected states given adjoints.
pub fn solve_forward(ybar: &[Vec<f64>], params: &ModelParams, grid: &TimeGrid, rule: ResponseRule) -> Result<GroupSeries> {
    check_series("adjoint series", ybar, params, grid)?;
    let kk = params.k();
    let n = grid.n_steps;
    let mut xbar = vec![vec![0.0; n + 1]; kk];
    for (k, g) in params.groups.iter().enumerate() {
        xbar[k][0] = g.mu0_mean;
    }
    for i in 0..n {
        let x = column(&xbar, i);
        let y = column(ybar, i);
        let w = node_weights(rule, &x, &y, params)?;
        let z = aggregates(&x, &w, params)?;
        for k in 0..kk {
            let next = x[k] + grid.dt * params.groups[k].a * (z[k] - x[k]);
            if !next.is_finite() {
                return Err(Error::NonFinite {
                    stage: "forward pass",
                    node: i + 1,
                });
            }
            xbar[k][i + 1] = next;
        }
    }
    Ok(xbar)
}

/// Backward Euler pass from `Ybar(T) = 0`: adjoints given expected states.
pub fn solve_backward(xbar: &[Vec<f64>], params: &ModelParams, grid: &TimeGrid, rule: ResponseRule) -> Result<GroupSeries> {
    check_series("state series", xbar, params, grid)?;
    let kk = params.k();
    let n = grid.n_steps;
    let mut ybar = vec![vec![0.0; n + 1]; kk];
    for i in (1..=n).rev() {
        let x = column(xbar, i);
        let y = column(&ybar, i);
        let w = node_weights(rule, &x, &y, params)?;
        let z = aggregates(&x, &w, params)?;
        for k in 0..kk {
            let a = params.groups[k].a;
            let prev = y[k] - grid.dt * (a * y[k] + 2.0 * (z[k] - x[k]));
            if !prev.is_finite() {
                return Err(Error::NonFinite {
                    stage: "backward pass",
                    node: i - 1,
                });
            }
            ybar[k][i - 1] = prev;
        }
    }
    Ok(ybar)
}

fn sup_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn blend(new: &mut [Vec<f64>], old: &[Vec<f64>], damping: f64) {
    if damping == 1.0 {
        return;
    }
    for (nr, or) in new.iter_mut().zip(old) {
        for (n, o) in nr.iter_mut().zip(or) {
            *n = damping * *n + (1.0 - damping) * o;
        }
    }
}

/// Weights and aggregates on the whole grid for given states and adjoints.
pub fn assemble(
    xbar: GroupSeries,
    ybar: GroupSeries,
    params: &ModelParams,
    grid: &TimeGrid,
    rule: ResponseRule,
) -> Result<(MeanFieldTrajectories, WeightProfile)> {
    let kk = params.k();
    let nodes = grid.n_nodes();
    let mut w = vec![vec![vec![0.0; nodes]; kk]; kk];
    let mut zbar = vec![vec![0.0; nodes]; kk];
    for i in 0..nodes {
        let x = column(&xbar, i);
        let y = column(&ybar, i);
        let wi = node_weights(rule, &x, &y, params)?;
        let zi = aggregates(&x, &wi, params)?;
        for k in 0..kk {
            zbar[k][i] = zi[k];
            for l in 0..kk {
                w[k][l][i] = wi[k][l];
            }
        }
    }
    Ok((
        MeanFieldTrajectories {
            xbar,
            ybar,
            zbar,
            grid: *grid,
        },
        WeightProfile { w, grid: *grid },
    ))
}

/// Fixed-point iteration on the forward/backward passes.
///
/// Starts from `Xbar = mu0` and `Ybar = 0`. Each sweep computes the forward
/// pass from the previous adjoints and the backward pass from the previous
/// states, then blends with the previous iterate by `config.damping`. Stops
/// once the sup-norm change over all groups and nodes is at most
/// `config.epsilon`; hitting `max_iters` returns the last iterate with
/// `converged = false`.
pub fn fixed_point_solve(params: &ModelParams, grid: &TimeGrid, config: &SolverConfig) -> Result<EquilibriumSolution> {
    let config = config.validate()?;
    let kk = params.k();
    if kk == 0 {
        return Err(Error::invalid("empty-groups", "at least one group is required"));
    }
    let nodes = grid.n_nodes();
    let mut xbar: GroupSeries = params.groups.iter().map(|g| vec![g.mu0_mean; nodes]).collect();
    let mut ybar: GroupSeries = vec![vec![0.0; nodes]; kk];
    let mut residuals = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iters {
        let mut x_next = solve_forward(&ybar, params, grid, config.rule)?;
        let mut y_next = solve_backward(&xbar, params, grid, config.rule)?;
        blend(&mut x_next, &xbar, config.damping);
        blend(&mut y_next, &ybar, config.damping);
        for k in 0..kk {
            x_next[k][0] = params.groups[k].mu0_mean;
            y_next[k][grid.n_steps] = 0.0;
        }
        let residual = sup_distance(&x_next, &xbar).max(sup_distance(&y_next, &ybar));
        residuals.push(residual);
        xbar = x_next;
        ybar = y_next;
        if residual <= config.epsilon {
            converged = true;
            break;
        }
    }

    let (trajectories, weights) = assemble(xbar, ybar, params, grid, config.rule)?;
    let weights_in_unit_interval = weights.all_in_unit_interval();
    Ok(EquilibriumSolution {
        trajectories,
        weights,
        iterations: residuals.len(),
        residual_history: residuals,
        converged,
        weights_in_unit_interval,
    })
}

/// Terminal-state change between a run on `grid` and one on the refined
/// grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub dt: f64,
    pub dt_refined: f64,
    pub terminal_coarse: Vec<f64>,
    pub terminal_fine: Vec<f64>,
    pub terminal_difference: Vec<f64>,
}

pub fn refinement(params: &ModelParams, grid: &TimeGrid, config: &SolverConfig) -> Result<RefinementReport> {
    let fine = grid.refined();
    let a = fixed_point_solve(params, grid, config)?;
    let b = fixed_point_solve(params, &fine, config)?;
    let terminal = |s: &EquilibriumSolution| -> Vec<f64> { s.trajectories.xbar.iter().map(|x| *x.last().unwrap()).collect() };
    let (tc, tf) = (terminal(&a), terminal(&b));
    Ok(RefinementReport {
        dt: grid.dt,
        dt_refined: fine.dt,
        terminal_difference: tc.iter().zip(&tf).map(|(c, f)| c - f).collect(),
        terminal_coarse: tc,
        terminal_fine: tf,
    })
}
