//! Solve the presets with the quoted two-group closed form instead of the
//! Hamiltonian minimiser. Its weights are twice as large, which reproduces
//! the magnitudes usually shown for these experiments, but the result is not
//! a Nash equilibrium: the deviation check finds cheaper strategies.
//!
//! ```bash
//! cargo run -p netform --example published_rule
//! ```

use netform::fbode::fixed_point_solve;
use netform::model::{preset, Preset, ResponseRule, SolverConfig};
use netform::nash::{deviation_check, PerturbationFamily};

fn main() -> netform::Result<()> {
    for which in Preset::ALL {
        let (p, g, c) = preset(which);
        let quoted = fixed_point_solve(&p, &g, &SolverConfig { rule: ResponseRule::Published, ..c })?;
        let exact = fixed_point_solve(&p, &g, &c)?;
        let gap = deviation_check(&quoted, 0, &p, &g, &PerturbationFamily::default())?.nash_gap;
        println!(
            "{which}: w^1(1)(0) quoted {:.4} vs minimiser {:.4}; Xbar^1(T) quoted {:.4} vs minimiser {:.4}; quoted-rule deviation gap {gap:.3e}",
            quoted.weights.series(0, 0)[0],
            exact.weights.series(0, 0)[0],
            quoted.trajectories.xbar[0][g.n_steps],
            exact.trajectories.xbar[0][g.n_steps],
        );
    }
    Ok(())
}
