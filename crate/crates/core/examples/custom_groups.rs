//! Build a four-group population in code, solve it, and write the CSV files
//! to a directory (default `./out/custom`).
//!
//! ```bash
//! cargo run -p netform --example custom_groups -- /tmp/netform-custom
//! ```

use std::path::PathBuf;

use netform::fbode::fixed_point_solve;
use netform::model::{validate, GroupParams, ModelParams, SolverConfig, TimeGrid};
use netform::output::emit_csv;

fn main() -> netform::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out/custom"));

    let params = validate(ModelParams::new(vec![
        GroupParams::new(0.2, 0.5, 0.4, 1.0),
        GroupParams::new(0.5, 0.5, 0.3, 1.5),
        GroupParams::new(0.2, 1.5, 0.2, 0.8).with_mu0_var(0.2),
        GroupParams::new(0.1, 0.3, 0.1, 2.0).with_sigma(0.5),
    ]))?;
    let grid = TimeGrid::new(2.0, 0.01)?;
    let config = SolverConfig {
        epsilon: 1e-10,
        ..SolverConfig::default()
    };

    let solution = fixed_point_solve(&params, &grid, &config)?;
    println!(
        "K = {}, converged = {} in {} iterations, all weights in [0, 1]: {}",
        params.k(),
        solution.converged,
        solution.iterations,
        solution.weights_in_unit_interval
    );
    let w = solution.weights.at(grid.n_steps);
    for (k, row) in w.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        println!("  w^{}(.) at T: [{}]", k + 1, cells.join(", "));
    }
    for path in emit_csv(&solution, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
