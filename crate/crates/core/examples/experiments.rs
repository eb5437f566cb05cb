//! Run all five experiment presets and print the comparisons they are meant
//! to illustrate.
//!
//! ```bash
//! cargo run -p netform --example experiments
//! ```

use netform::fbode::{fixed_point_solve, EquilibriumSolution};
use netform::model::{preset, Preset};

fn solve(which: Preset) -> netform::Result<EquilibriumSolution> {
    let (p, g, c) = preset(which);
    fixed_point_solve(&p, &g, &c)
}

fn ends(s: &[f64]) -> String {
    format!("{:.4} -> {:.4}", s[0], s[s.len() - 1])
}

fn main() -> netform::Result<()> {
    let mut solved = Vec::new();
    for which in Preset::ALL {
        let s = solve(which)?;
        println!("== {which} ({} iterations)", s.iterations);
        for k in 0..2 {
            println!("  Xbar^{}: {}", k + 1, ends(&s.trajectories.xbar[k]));
            for l in 0..2 {
                println!("  w^{}({}): {}", k + 1, l + 1, ends(s.weights.series(k, l)));
            }
        }
        solved.push(s);
    }

    let all = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x > y);
    let w = |i: usize, k: usize, l: usize| solved[i].weights.series(k, l).to_vec();
    let x = |i: usize, k: usize| solved[i].trajectories.xbar[k].clone();

    println!();
    println!("exp2  w2(2) > w1(1) everywhere: {}", all(&w(1, 1, 1), &w(1, 0, 0)));
    println!("exp2  X2 > X1 everywhere:       {}", all(&x(1, 1), &x(1, 0)));
    println!("exp3  w2(l) > w1(l) everywhere: {}", (0..2).all(|l| all(&w(2, 1, l), &w(2, 0, l))));
    println!("exp3  w1(1) decreasing:         {}", w(2, 0, 0).windows(2).all(|p| p[1] < p[0]));
    let rise = |i: usize, k: usize| x(i, k).last().unwrap() - x(i, k)[0];
    println!("exp4  X1 change {:+.4}, X2 change {:+.4}", rise(3, 0), rise(3, 1));
    println!(
        "exp5 vs exp4  w^k(1) higher everywhere: {}",
        (0..2).all(|k| all(&w(4, k, 0), &w(3, k, 0)))
    );
    Ok(())
}
