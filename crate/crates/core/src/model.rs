//! Model parameters, time grid, solver settings and the experiment presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum_k m^k = 1`.
pub const PROPORTION_SUM_TOL: f64 = 1e-12;
/// Tolerance on `n_steps * dt = horizon`.
pub const GRID_TOL: f64 = 1e-12;

/// Constants of one group of agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    /// Mean-reversion speed towards the aggregate.
    pub a: f64,
    /// Idiosyncratic volatility. Does not enter the expected system.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Weight of the squared connection strengths in the running cost.
    pub nu: f64,
    /// Population proportion.
    pub m: f64,
    /// Expected initial state.
    pub mu0_mean: f64,
    /// Initial state variance.
    #[serde(default)]
    pub mu0_var: f64,
}

fn default_sigma() -> f64 {
    1.0
}

impl GroupParams {
    pub fn new(a: f64, nu: f64, m: f64, mu0_mean: f64) -> Self {
        GroupParams {
            a,
            sigma: 1.0,
            nu,
            m,
            mu0_mean,
            mu0_var: 0.0,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_mu0_var(mut self, var: f64) -> Self {
        self.mu0_var = var;
        self
    }

    fn check(&self, k: usize) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("sigma", self.sigma),
            ("nu", self.nu),
            ("m", self.m),
            ("mu0_mean", self.mu0_mean),
            ("mu0_var", self.mu0_var),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(
                    "nonfinite-parameter",
                    format!("group {}: {name} = {v}", k + 1),
                ));
            }
        }
        if self.nu <= 0.0 {
            return Err(Error::invalid(
                "nonpositive-nu",
                format!("group {}: nu = {} must be > 0", k + 1, self.nu),
            ));
        }
        if self.sigma <= 0.0 {
            return Err(Error::invalid(
                "nonpositive-sigma",
                format!("group {}: sigma = {} must be > 0", k + 1, self.sigma),
            ));
        }
        if self.m <= 0.0 || self.m > 1.0 {
            return Err(Error::invalid(
                "proportion-range",
                format!("group {}: m = {} must lie in (0, 1]", k + 1, self.m),
            ));
        }
        if self.mu0_var < 0.0 {
            return Err(Error::invalid(
                "negative-variance",
                format!("group {}: mu0_var = {} must be >= 0", k + 1, self.mu0_var),
            ));
        }
        Ok(())
    }
}

/// The full population: one [`GroupParams`] per group, in group order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelParams {
    pub groups: Vec<GroupParams>,
}

impl ModelParams {
    pub fn new(groups: Vec<GroupParams>) -> Self {
        ModelParams { groups }
    }

    /// Number of groups `K`.
    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn proportions(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.m).collect()
    }

    pub fn initial_means(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.mu0_mean).collect()
    }

    /// Reorder groups so that new group `i` is old group `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        ModelParams {
            groups: perm.iter().map(|&p| self.groups[p]).collect(),
        }
    }
}

/// Check every parameter invariant, returning the parameters unchanged on
/// success and the first violated invariant otherwise.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    if params.groups.is_empty() {
        return Err(Error::invalid("empty-groups", "at least one group is required"));
    }
    for (k, g) in params.groups.iter().enumerate() {
        g.check(k)?;
    }
    let total: f64 = params.groups.iter().map(|g| g.m).sum();
    if (total - 1.0).abs() > PROPORTION_SUM_TOL {
        return Err(Error::invalid(
            "proportions-sum",
            format!("proportions sum to {total}, expected 1"),
        ));
    }
    Ok(params)
}

/// Uniform time grid `t_i = i * dt`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    /// Build a grid; `horizon` must be an integer multiple of `dt`.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("nonpositive-horizon", format!("horizon = {horizon}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("nonpositive-dt", format!("dt = {dt}")));
        }
        let n = (horizon / dt).round();
        if n < 1.0 || (n * dt - horizon).abs() > GRID_TOL {
            return Err(Error::invalid(
                "grid-divisibility",
                format!("horizon {horizon} is not an integer multiple of dt {dt}"),
            ));
        }
        Ok(TimeGrid {
            horizon,
            dt,
            n_steps: n as usize,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|i| self.time(i))
    }

    /// Same horizon, half the step.
    pub fn refined(&self) -> Self {
        TimeGrid {
            horizon: self.horizon,
            dt: self.dt / 2.0,
            n_steps: self.n_steps * 2,
        }
    }
}

/// Which formula produces connection strengths from `(X, Y, Xbar)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseRule {
    /// Minimiser of the agent's Hamiltonian, via the implicit linear system.
    #[default]
    Hamiltonian,
    /// The two-group closed form as printed in the source derivation, which
    /// is twice the Hamiltonian minimiser. Only defined for `K = 2`.
    Published,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    pub damping: f64,
    #[serde(default)]
    pub rule: ResponseRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-8,
            max_iters: 10_000,
            damping: 1.0,
            rule: ResponseRule::Hamiltonian,
        }
    }
}

impl SolverConfig {
    pub fn validate(self) -> Result<Self> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("nonpositive-epsilon", format!("epsilon = {}", self.epsilon)));
        }
        if self.max_iters < 1 {
            return Err(Error::invalid("zero-max-iters", "max_iters must be >= 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(
                "damping-range",
                format!("damping = {} must lie in (0, 1]", self.damping),
            ));
        }
        Ok(self)
    }
}

/// The five experiments: a symmetric base case and four one-parameter
/// variations of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Fully symmetric groups.
    Base,
    /// Different initial means, `mu0 = (1, 2)`.
    Exp2,
    /// Different connection costs, `nu = (1.0, 0.5)`.
    Exp3,
    /// Different drifts, `a = (0.5, 0.2)`.
    Exp4,
    /// `Exp4` with unequal proportions, `m = (0.1, 0.9)`.
    Exp5,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Base,
        Preset::Exp2,
        Preset::Exp3,
        Preset::Exp4,
        Preset::Exp5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Base => "base",
            Preset::Exp2 => "exp2",
            Preset::Exp3 => "exp3",
            Preset::Exp4 => "exp4",
            Preset::Exp5 => "exp5",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Parameters, grid and solver settings of a preset. All presets use
/// `T = 1`, `dt = 0.01`, `sigma = 1` and zero initial variance.
pub fn preset(which: Preset) -> (ModelParams, TimeGrid, SolverConfig) {
    let (a, nu, m, mu0) = match which {
        Preset::Base => ([0.2, 0.2], [0.5, 0.5], [0.5, 0.5], [1.0, 1.0]),
        Preset::Exp2 => ([0.2, 0.2], [0.5, 0.5], [0.5, 0.5], [1.0, 2.0]),
        Preset::Exp3 => ([0.2, 0.2], [1.0, 0.5], [0.5, 0.5], [1.0, 1.0]),
        Preset::Exp4 => ([0.5, 0.2], [0.5, 0.5], [0.5, 0.5], [1.0, 1.0]),
        Preset::Exp5 => ([0.5, 0.2], [0.5, 0.5], [0.1, 0.9], [1.0, 1.0]),
    };
    let groups = (0..2)
        .map(|k| GroupParams::new(a[k], nu[k], m[k], mu0[k]))
        .collect();
    let grid = TimeGrid {
        horizon: 1.0,
        dt: 0.01,
        n_steps: 100,
    };
    (ModelParams::new(groups), grid, SolverConfig::default())
}

/// Look up a preset by name.
pub fn preset_by_name(name: &str) -> Result<(ModelParams, TimeGrid, SolverConfig)> {
    Ok(preset(name.parse()?))
}

/// On-disk run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub groups: Vec<GroupParams>,
    #[serde(rename = "horizon_T")]
    pub horizon_t: f64,
    pub dt: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default)]
    pub response_rule: ResponseRule,
}

fn default_epsilon() -> f64 {
    SolverConfig::default().epsilon
}

fn default_max_iters() -> usize {
    SolverConfig::default().max_iters
}

fn default_damping() -> f64 {
    SolverConfig::default().damping
}

impl RunConfig {
    pub fn from_parts(params: &ModelParams, grid: &TimeGrid, config: &SolverConfig) -> Self {
        RunConfig {
            groups: params.groups.clone(),
            horizon_t: grid.horizon,
            dt: grid.dt,
            epsilon: config.epsilon,
            max_iters: config.max_iters,
            damping: config.damping,
            response_rule: config.rule,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validate and split into the solver inputs.
    pub fn resolve(&self) -> Result<(ModelParams, TimeGrid, SolverConfig)> {
        let params = validate(ModelParams::new(self.groups.clone()))?;
        let grid = TimeGrid::new(self.horizon_t, self.dt)?;
        let config = SolverConfig {
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            damping: self.damping,
            rule: self.response_rule,
        }
        .validate()?;
        Ok((params, grid, config))
    }
}
