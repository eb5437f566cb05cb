//! Observe first-order convergence of the explicit Euler discretisation by
//! repeatedly halving the time step.
//!
//! ```bash
//! cargo run -p netform --release --example refinement
//! ```

use netform::fbode::fixed_point_solve;
use netform::model::{preset, Preset, TimeGrid};

fn main() -> netform::Result<()> {
    let (params, _, config) = preset(Preset::Exp4);
    let steps = [0.02, 0.01, 0.005, 0.0025, 0.00125];
    let mut terminal = Vec::new();
    for dt in steps {
        let grid = TimeGrid::new(1.0, dt)?;
        let s = fixed_point_solve(&params, &grid, &config)?;
        let x: Vec<f64> = s.trajectories.xbar.iter().map(|x| *x.last().unwrap()).collect();
        println!("dt = {dt:<8} Xbar(T) = {x:.8?}");
        terminal.push(x);
    }
    for w in terminal.windows(3) {
        let ratios: Vec<f64> = (0..params.k()).map(|k| (w[0][k] - w[1][k]) / (w[1][k] - w[2][k])).collect();
        println!("successive difference ratio: {ratios:.3?}");
    }
    Ok(())
}
