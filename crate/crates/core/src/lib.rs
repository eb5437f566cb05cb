//! Network formation games among `K` groups of agents.
//!
//! Each representative agent of group `k` picks time-dependent connection
//! strengths `w^k(l)` towards every group `l`. Its aggregate is
//! `Z^k = sum_l w^k(l) Xbar^l m^l`, its state mean-reverts towards that
//! aggregate, and it pays `(Z^k - X^k)^2 + nu^k sum_l w^k(l)^2 m^l` per unit
//! time. A Nash equilibrium in time-only controls is characterised by a
//! forward-backward ODE system in the expected states `Xbar^k` and adjoints
//! `Ybar^k`, which this crate solves by fixed-point iteration.
//!
//! Module map:
//!
//! - [`model`]: parameters, time grid, solver settings, experiment presets.
//! - [`best_response`]: Hamiltonian and its minimiser (general `K` linear
//!   system and the `K = 2` closed form).
//! - [`fbode`]: forward/backward Euler passes and the fixed-point loop.
//! - [`nash`]: exact cost evaluation and unilateral-deviation checks.
//! - [`montecarlo`]: Euler-Maruyama simulation of the state SDEs.
//! - [`output`]: CSV and manifest emission.
//! - [`cli`]: the command-line front end used by the `netform` binary.
//!
//! ```
//! use netform::model::{preset, Preset};
//! use netform::fbode::fixed_point_solve;
//!
//! let (params, grid, config) = preset(Preset::Base);
//! let solution = fixed_point_solve(&params, &grid, &config).unwrap();
//! assert!(solution.converged);
//! ```

pub mod best_response;
pub mod cli;
pub mod error;
pub mod fbode;
pub mod model;
pub mod montecarlo;
pub mod nash;
pub mod output;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
