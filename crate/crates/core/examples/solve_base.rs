//! Solve the symmetric base experiment and print the equilibrium every 0.1
//! time units.
//!
//! ```bash
//! cargo run -p netform --example solve_base
//! ```

use netform::fbode::fixed_point_solve;
use netform::model::{preset, Preset};

fn main() -> netform::Result<()> {
    let (params, grid, config) = preset(Preset::Base);
    let solution = fixed_point_solve(&params, &grid, &config)?;
    println!(
        "converged={} after {} iterations, final residual {:.2e}",
        solution.converged,
        solution.iterations,
        solution.final_residual().unwrap_or(f64::NAN)
    );

    let t = &solution.trajectories;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "t", "xbar_1", "ybar_1", "zbar_1", "w_1_1");
    for i in (0..grid.n_nodes()).step_by(10) {
        println!(
            "{:>5.2} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            grid.time(i),
            t.xbar[0][i],
            t.ybar[0][i],
            t.zbar[0][i],
            solution.weights.series(0, 0)[i]
        );
    }
    Ok(())
}
