//! Euler-Maruyama simulation of the state SDEs
//! `dX^k = a^k (Zbar^k - X^k) dt + sigma^k dW^k` with the aggregates frozen
//! at a solved equilibrium.
//!
//! Path `p` draws from its own ChaCha8 stream (`seed`, stream `p`), so a
//! path set is reproducible from the seed alone and independent of how
//! paths are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbode::EquilibriumSolution;
use crate::model::{ModelParams, TimeGrid};
use crate::nash::trapezoid;

/// Generator description written next to Monte Carlo output.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng (rand_chacha 0.9) seeded with seed_from_u64(seed), stream = path index; StandardNormal (rand_distr 0.5)";

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    /// `[path][group][node]`.
    pub paths: Vec<Vec<Vec<f64>>>,
    pub seed: u64,
    pub grid: TimeGrid,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Per-node sample mean and unbiased sample variance of group `k`.
    /// Variances are `NaN` for a single path.
    pub fn moments(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let m = self.paths.len() as f64;
        let nodes = self.grid.n_nodes();
        let mut mean = vec![0.0; nodes];
        for p in &self.paths {
            for (acc, x) in mean.iter_mut().zip(&p[k]) {
                *acc += x;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; nodes];
        for p in &self.paths {
            for ((acc, x), mu) in var.iter_mut().zip(&p[k]).zip(&mean) {
                *acc += (x - mu) * (x - mu);
            }
        }
        var.iter_mut().for_each(|v| *v /= m - 1.0);
        (mean, var)
    }
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Simulate `m` independent paths of every group under the equilibrium
/// aggregates of `solution`.
pub fn simulate_paths(
    solution: &EquilibriumSolution,
    params: &ModelParams,
    grid: &TimeGrid,
    m: usize,
    seed: u64,
) -> Result<PathSet> {
    if m == 0 {
        return Err(Error::invalid("zero-paths", "at least one path is required"));
    }
    if solution.grid() != grid {
        return Err(Error::invalid("grid-mismatch", "solution was computed on a different grid"));
    }
    if solution.k() != params.k() {
        return Err(Error::DimensionMismatch {
            what: "groups",
            expected: params.k(),
            found: solution.k(),
        });
    }
    let kk = params.k();
    let n = grid.n_steps;
    let zbar = &solution.trajectories.zbar;
    let sqdt = grid.dt.sqrt();

    let paths = (0..m)
        .map(|p| {
            let mut rng = path_rng(seed, p);
            let mut path: Vec<Vec<f64>> = params
                .groups
                .iter()
                .map(|g| {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    let mut v = Vec::with_capacity(n + 1);
                    v.push(g.mu0_mean + g.mu0_var.sqrt() * xi);
                    v
                })
                .collect();
            for i in 0..n {
                for k in 0..kk {
                    let g = &params.groups[k];
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    let x = path[k][i];
                    let next = x + g.a * (zbar[k][i] - x) * grid.dt + g.sigma * sqdt * xi;
                    if !next.is_finite() {
                        return Err(Error::NonFinite {
                            stage: "path simulation",
                            node: i + 1,
                        });
                    }
                    path[k].push(next);
                }
            }
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PathSet {
        paths,
        seed,
        grid: *grid,
    })
}

/// Monte Carlo estimate of one group's cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub group: usize,
    pub mean: f64,
    /// `None` for a single path.
    pub std_error: Option<f64>,
    pub paths: usize,
}

/// Average over paths of `int (Zbar^k - X^k)^2 + nu^k sum_l w^k(l)^2 m^l dt`.
pub fn empirical_cost(
    pathset: &PathSet,
    solution: &EquilibriumSolution,
    params: &ModelParams,
    grid: &TimeGrid,
) -> Result<Vec<CostEstimate>> {
    if pathset.is_empty() {
        return Err(Error::invalid("zero-paths", "path set is empty"));
    }
    let kk = params.k();
    let nodes = grid.n_nodes();
    if pathset.paths.iter().any(|p| p.len() != kk || p.iter().any(|s| s.len() != nodes)) {
        return Err(Error::DimensionMismatch {
            what: "path set",
            expected: nodes,
            found: pathset.grid.n_nodes(),
        });
    }
    let zbar = &solution.trajectories.zbar;
    let m = pathset.len();

    (0..kk)
        .map(|k| {
            let nu = params.groups[k].nu;
            let control: Vec<f64> = (0..nodes)
                .map(|i| {
                    nu * (0..kk)
                        .map(|l| {
                            let w = solution.weights.w[k][l][i];
                            w * w * params.groups[l].m
                        })
                        .sum::<f64>()
                })
                .collect();
            let control = trapezoid(&control, grid.dt);
            let samples: Vec<f64> = pathset
                .paths
                .iter()
                .map(|p| {
                    let gap2: Vec<f64> = p[k].iter().zip(&zbar[k]).map(|(x, z)| (z - x) * (z - x)).collect();
                    trapezoid(&gap2, grid.dt) + control
                })
                .collect();
            let mean = samples.iter().sum::<f64>() / m as f64;
            let std_error = (m > 1).then(|| {
                let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (m - 1) as f64;
                (var / m as f64).sqrt()
            });
            Ok(CostEstimate {
                group: k,
                mean,
                std_error,
                paths: m,
            })
        })
        .collect()
}
