//! Verify the equilibrium property for every preset by testing unilateral
//! deviations, and show that zeroed weights are not a best response.
//!
//! ```bash
//! cargo run -p netform --example nash_check
//! ```

use netform::fbode::fixed_point_solve;
use netform::model::{preset, Preset};
use netform::nash::{deviation_check, deviation_check_weights, evaluate_cost, PerturbationFamily};

fn main() -> netform::Result<()> {
    let family = PerturbationFamily::default();
    for which in Preset::ALL {
        let (p, g, c) = preset(which);
        let s = fixed_point_solve(&p, &g, &c)?;
        for k in 0..p.k() {
            let cost = evaluate_cost(k, s.weights.own(k), &s.trajectories.xbar, &p, &g)?;
            let r = deviation_check(&s, k, &p, &g, &family)?;
            let zeros = vec![vec![0.0; g.n_nodes()]; p.k()];
            let z = deviation_check_weights(k, &zeros, &s.trajectories.xbar, &p, &g, &family)?;
            println!(
                "{which} group {}: J = {:.6} (mean {:.6}, var {:.6}, control {:.6}); gap {:+.2e} over {} deviations [{}]; zeroed-weights gap {:+.3e}",
                k + 1,
                cost.total,
                cost.tracking_mean,
                cost.tracking_variance,
                cost.control_cost,
                r.nash_gap,
                r.deviations_tested,
                if r.passes(1e-4) { "ok" } else { "FAIL" },
                z.nash_gap,
            );
        }
    }
    Ok(())
}
