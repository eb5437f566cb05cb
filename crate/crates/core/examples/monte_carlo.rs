//! Simulate the state SDEs under the base equilibrium and compare sample
//! moments and costs with their exact values.
//!
//! ```bash
//! cargo run -p netform --release --example monte_carlo -- 20000 7
//! ```

use netform::fbode::fixed_point_solve;
use netform::model::{preset, Preset};
use netform::montecarlo::{empirical_cost, simulate_paths, RNG_DESCRIPTION};
use netform::nash::{evaluate_cost, variance_trajectory};

fn main() -> netform::Result<()> {
    let mut args = std::env::args().skip(1);
    let paths: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);

    let (params, grid, config) = preset(Preset::Base);
    let solution = fixed_point_solve(&params, &grid, &config)?;
    let set = simulate_paths(&solution, &params, &grid, paths, seed)?;
    println!("{paths} paths, seed {seed}, {RNG_DESCRIPTION}");

    for k in 0..params.k() {
        let (mean, var) = set.moments(k);
        let exact_var = variance_trajectory(k, &params, &grid)?;
        println!("group {}:", k + 1);
        for i in (0..grid.n_nodes()).step_by(25) {
            println!(
                "  t={:.2}  mean {:.5} (exact {:.5})  var {:.5} (exact {:.5})",
                grid.time(i),
                mean[i],
                solution.trajectories.xbar[k][i],
                var[i],
                exact_var[i]
            );
        }
    }

    for est in empirical_cost(&set, &solution, &params, &grid)? {
        let k = est.group;
        let exact = evaluate_cost(k, solution.weights.own(k), &solution.trajectories.xbar, &params, &grid)?;
        println!(
            "group {} cost: {:.5} +/- {:.5} (exact {:.5})",
            k + 1,
            est.mean,
            est.std_error.unwrap_or(f64::NAN),
            exact.total
        );
    }
    Ok(())
}
