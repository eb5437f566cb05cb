//! Exact cost evaluation for time-only controls and unilateral-deviation
//! checks.
//!
//! When connection strengths depend on time only, the aggregate `Z^k` is
//! deterministic and `X^k` is Gaussian, so
//!
//! ```text
//! E[(Z - X)^2] = (Zbar - Xbar)^2 + Var(X)
//! ```
//!
//! and the cost reduces to ODEs: the mean follows the forward equation, the
//! variance follows `dV/dt = -2 a V + sigma^2` independently of the control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbode::EquilibriumSolution;
use crate::model::{ModelParams, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub tracking_mean: f64,
    pub tracking_variance: f64,
    pub control_cost: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub group: usize,
    pub baseline_cost: f64,
    pub best_deviation_cost: f64,
    /// `baseline_cost - best_deviation_cost`; positive means some tested
    /// deviation is strictly cheaper.
    pub nash_gap: f64,
    pub deviations_tested: usize,
    pub best_deviation: String,
}

impl DeviationReport {
    /// Gap tolerance used for the equilibrium check, `rel * (1 + |baseline|)`.
    pub fn tolerance(&self, rel: f64) -> f64 {
        rel * (1.0 + self.baseline_cost.abs())
    }

    pub fn passes(&self, rel: f64) -> bool {
        self.nash_gap <= self.tolerance(rel)
    }
}

/// Perturbations tried by [`deviation_check`]: for every target group `l`,
/// every amplitude and both signs, a bump on each of `windows` equal time
/// windows, plus (optionally) a shift over the whole horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationFamily {
    pub amplitudes: Vec<f64>,
    pub windows: usize,
    pub constant_shifts: bool,
}

impl Default for PerturbationFamily {
    fn default() -> Self {
        PerturbationFamily {
            amplitudes: vec![0.01, 0.05, 0.1],
            windows: 10,
            constant_shifts: true,
        }
    }
}

impl PerturbationFamily {
    pub fn len(&self, k: usize) -> usize {
        let per = self.windows + usize::from(self.constant_shifts);
        k * self.amplitudes.len() * 2 * per
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty() || (self.windows == 0 && !self.constant_shifts)
    }
}

pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dt * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Variance of `X^k` on the grid, by the exact one-step solution of
/// `dV/dt = -2 a V + sigma^2` from `V(0) = mu0_var`.
pub fn variance_trajectory(k: usize, params: &ModelParams, grid: &TimeGrid) -> Result<Vec<f64>> {
    let g = params.groups.get(k).ok_or(Error::DimensionMismatch {
        what: "group index",
        expected: params.k(),
        found: k,
    })?;
    let s2 = g.sigma * g.sigma;
    let (decay, inflow) = if g.a == 0.0 {
        (1.0, s2 * grid.dt)
    } else {
        let e = (-2.0 * g.a * grid.dt).exp();
        (e, s2 * (1.0 - e) / (2.0 * g.a))
    };
    let mut v = Vec::with_capacity(grid.n_nodes());
    let mut cur = g.mu0_var;
    v.push(cur);
    for _ in 0..grid.n_steps {
        cur = cur * decay + inflow;
        v.push(cur);
    }
    Ok(v)
}

fn check_shape(what: &'static str, s: &[Vec<f64>], params: &ModelParams, grid: &TimeGrid) -> Result<()> {
    if s.len() != params.k() {
        return Err(Error::DimensionMismatch {
            what,
            expected: params.k(),
            found: s.len(),
        });
    }
    if let Some(bad) = s.iter().find(|r| r.len() != grid.n_nodes()) {
        return Err(Error::DimensionMismatch {
            what,
            expected: grid.n_nodes(),
            found: bad.len(),
        });
    }
    Ok(())
}

/// Aggregate seen by group `k` at every node when it plays `own_weights`
/// (`[l][node]`) against the fixed `population_means` (`[l][node]`).
pub fn own_aggregate(own_weights: &[Vec<f64>], population_means: &[Vec<f64>], params: &ModelParams, grid: &TimeGrid) -> Vec<f64> {
    (0..grid.n_nodes())
        .map(|i| {
            own_weights
                .iter()
                .zip(population_means)
                .zip(&params.groups)
                .map(|((w, x), g)| w[i] * x[i] * g.m)
                .sum()
        })
        .collect()
}

/// Expected state of a group-`k` agent playing `own_weights` while the
/// population means stay fixed. Same forward Euler scheme as the solver.
pub fn deviating_mean(
    k: usize,
    own_weights: &[Vec<f64>],
    population_means: &[Vec<f64>],
    params: &ModelParams,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    check_shape("own weights", own_weights, params, grid)?;
    check_shape("population means", population_means, params, grid)?;
    let g = params.groups.get(k).ok_or(Error::DimensionMismatch {
        what: "group index",
        expected: params.k(),
        found: k,
    })?;
    let z = own_aggregate(own_weights, population_means, params, grid);
    let mut x = Vec::with_capacity(grid.n_nodes());
    x.push(g.mu0_mean);
    for i in 0..grid.n_steps {
        let next = x[i] + grid.dt * g.a * (z[i] - x[i]);
        if !next.is_finite() {
            return Err(Error::NonFinite {
                stage: "cost evaluation",
                node: i + 1,
            });
        }
        x.push(next);
    }
    Ok(x)
}

/// Cost of group `k` playing `own_weights` against fixed population means.
pub fn evaluate_cost(
    k: usize,
    own_weights: &[Vec<f64>],
    population_means: &[Vec<f64>],
    params: &ModelParams,
    grid: &TimeGrid,
) -> Result<CostBreakdown> {
    let x = deviating_mean(k, own_weights, population_means, params, grid)?;
    let z = own_aggregate(own_weights, population_means, params, grid);
    let v = variance_trajectory(k, params, grid)?;
    let nu = params.groups[k].nu;

    let gap2: Vec<f64> = z.iter().zip(&x).map(|(z, x)| (z - x) * (z - x)).collect();
    let control: Vec<f64> = (0..grid.n_nodes())
        .map(|i| {
            nu * own_weights
                .iter()
                .zip(&params.groups)
                .map(|(w, g)| w[i] * w[i] * g.m)
                .sum::<f64>()
        })
        .collect();

    let tracking_mean = trapezoid(&gap2, grid.dt);
    let tracking_variance = trapezoid(&v, grid.dt);
    let control_cost = trapezoid(&control, grid.dt);
    let total = tracking_mean + tracking_variance + control_cost;
    if !total.is_finite() {
        return Err(Error::NonFinite {
            stage: "cost evaluation",
            node: grid.n_steps,
        });
    }
    Ok(CostBreakdown {
        tracking_mean,
        tracking_variance,
        control_cost,
        total,
    })
}

/// Evaluate `own_weights` and every perturbation of it in `family`, holding
/// the population means fixed.
pub fn deviation_check_weights(
    k: usize,
    own_weights: &[Vec<f64>],
    population_means: &[Vec<f64>],
    params: &ModelParams,
    grid: &TimeGrid,
    family: &PerturbationFamily,
) -> Result<DeviationReport> {
    if family.is_empty() {
        return Err(Error::invalid("empty-perturbation-family", "no deviations to test"));
    }
    let baseline = evaluate_cost(k, own_weights, population_means, params, grid)?.total;
    let mut best = (f64::INFINITY, String::new());
    let mut tested = 0;
    let n = grid.n_steps;
    let mut trial = own_weights.to_vec();

    let mut consider = |trial: &[Vec<f64>], label: &dyn Fn() -> String| -> Result<()> {
        let c = evaluate_cost(k, trial, population_means, params, grid)?.total;
        tested += 1;
        if c < best.0 {
            best = (c, label());
        }
        Ok(())
    };

    for l in 0..params.k() {
        for &amp in &family.amplitudes {
            for sign in [1.0, -1.0] {
                let delta = sign * amp;
                for s in 0..family.windows {
                    for i in 0..=n {
                        let win = (i * family.windows / n.max(1)).min(family.windows - 1);
                        trial[l][i] = own_weights[l][i] + if win == s { delta } else { 0.0 };
                    }
                    consider(&trial, &|| format!("bump l={} window={} delta={delta:+}", l + 1, s))?;
                }
                if family.constant_shifts {
                    for i in 0..=n {
                        trial[l][i] = own_weights[l][i] + delta;
                    }
                    consider(&trial, &|| format!("shift l={} delta={delta:+}", l + 1))?;
                }
                trial[l].clone_from(&own_weights[l]);
            }
        }
    }

    Ok(DeviationReport {
        group: k,
        baseline_cost: baseline,
        best_deviation_cost: best.0,
        nash_gap: baseline - best.0,
        deviations_tested: tested,
        best_deviation: best.1,
    })
}

/// Unilateral-deviation test of group `k` at a solved equilibrium.
pub fn deviation_check(
    solution: &EquilibriumSolution,
    k: usize,
    params: &ModelParams,
    grid: &TimeGrid,
    family: &PerturbationFamily,
) -> Result<DeviationReport> {
    if k >= solution.k() {
        return Err(Error::DimensionMismatch {
            what: "group index",
            expected: solution.k(),
            found: k,
        });
    }
    deviation_check_weights(
        k,
        solution.weights.own(k),
        &solution.trajectories.xbar,
        params,
        grid,
        family,
    )
}
