//! Acceptance suite. Each test checks one criterion and prints a single
//! `[PASS]` / `[FAIL]` line before asserting.

use std::time::Instant;

use netform::best_response::{closed_form_k2, hamiltonian, implicit_best_response, AgentSnapshot};
use netform::fbode::{fixed_point_solve, EquilibriumSolution};
use netform::model::{preset, GroupParams, ModelParams, Preset, SolverConfig, TimeGrid};
use netform::montecarlo::{empirical_cost, simulate_paths};
use netform::nash::{deviation_check, deviation_check_weights, evaluate_cost, PerturbationFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, pass: bool, detail: String) {
    println!("[{}] criterion {id:>2}: {title} :: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn solve(which: Preset) -> (ModelParams, TimeGrid, EquilibriumSolution) {
    let (p, g, c) = preset(which);
    let s = fixed_point_solve(&p, &g, &c).unwrap();
    assert!(s.converged, "{which} did not converge");
    (p, g, s)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    // Strictly positive proportions summing to one.
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut m: Vec<f64> = raw.iter().map(|v| v / s).collect();
    let head: f64 = m[..k - 1].iter().sum();
    m[k - 1] = 1.0 - head;
    m
}

fn random_params(rng: &mut ChaCha8Rng, k: usize) -> ModelParams {
    let m = random_simplex(rng, k);
    ModelParams::new(
        m.into_iter()
            .map(|mk| GroupParams::new(rng.random_range(-1.0..1.0), rng.random_range(0.1..2.0), mk, 1.0))
            .collect(),
    )
}

#[test]
fn criterion_01_base_symmetry() {
    let start = Instant::now();
    let (_, grid, s) = solve(Preset::Base);
    let elapsed = start.elapsed().as_secs_f64();
    let t = &s.trajectories;
    let dx = sup_diff(&t.xbar[0], &t.xbar[1]);
    let dz = sup_diff(&t.zbar[0], &t.zbar[1]);
    let mut dw: f64 = 0.0;
    let series: Vec<&[f64]> = (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| s.weights.series(k, l)).collect();
    for a in &series {
        for b in &series {
            dw = dw.max(sup_diff(a, b));
        }
    }

    let (mut p2, _, cfg) = preset(Preset::Base);
    p2.groups[0].m = 0.3;
    p2.groups[1].m = 0.7;
    let s2 = fixed_point_solve(&p2, &grid, &cfg).unwrap();
    let mut dprop: f64 = 0.0;
    for k in 0..2 {
        dprop = dprop
            .max(sup_diff(&t.xbar[k], &s2.trajectories.xbar[k]))
            .max(sup_diff(&t.zbar[k], &s2.trajectories.zbar[k]));
        for l in 0..2 {
            dprop = dprop.max(sup_diff(s.weights.series(k, l), s2.weights.series(k, l)));
        }
    }
    let pass = dx <= 1e-10 && dz <= 1e-10 && dw <= 1e-10 && dprop <= 1e-10 && elapsed < 1.0;
    report(
        1,
        "base-experiment symmetry",
        pass,
        format!("|dX|={dx:.1e} |dZ|={dz:.1e} |dw|={dw:.1e} proportions {dprop:.1e} time {elapsed:.3}s"),
    );
}

#[test]
fn criterion_02_exp2_ordering() {
    let (_, _, s) = solve(Preset::Exp2);
    let w11 = s.weights.series(0, 0);
    let w22 = s.weights.series(1, 1);
    let x = &s.trajectories.xbar;
    let within = w22.iter().zip(w11).all(|(a, b)| a > b);
    let states = x[1].iter().zip(&x[0]).all(|(a, b)| a > b);
    report(
        2,
        "exp2: w2(2) > w1(1) and X2 > X1 at every node",
        within && states,
        format!("within-group ordering {within}, state ordering {states}"),
    );
}

#[test]
fn criterion_03_exp3_ordering_and_dissolution() {
    let (_, _, s) = solve(Preset::Exp3);
    let lower = (0..2).all(|l| s.weights.series(0, l).iter().zip(s.weights.series(1, l)).all(|(a, b)| a < b));
    let w11 = s.weights.series(0, 0);
    let decreasing = w11.windows(2).all(|p| p[1] < p[0]);
    report(
        3,
        "exp3: w1(l) < w2(l) and w1(1) strictly decreasing",
        lower && decreasing,
        format!("ordering {lower}, decreasing {decreasing}, w1(1): {:.4} -> {:.4}", w11[0], w11[w11.len() - 1]),
    );
}

#[test]
fn criterion_04_exp4_ordering() {
    let (_, _, s) = solve(Preset::Exp4);
    let x = &s.trajectories.xbar;
    let n = x[0].len() - 1;
    let (rise1, rise2) = (x[0][n] - x[0][0], x[1][n] - x[1][0]);
    let faster = rise1 > rise2;
    let higher = (0..2).all(|l| s.weights.series(0, l).iter().zip(s.weights.series(1, l)).all(|(a, b)| a > b));
    report(
        4,
        "exp4: X1 rises more than X2 and w1(l) > w2(l)",
        faster && higher,
        format!("X1(T)-X1(0)={rise1:.5} X2(T)-X2(0)={rise2:.5}, weight ordering {higher}"),
    );
}

#[test]
fn criterion_05_exp5_vs_exp4() {
    let (_, _, s4) = solve(Preset::Exp4);
    let (_, _, s5) = solve(Preset::Exp5);
    let mut violations = 0;
    let mut total = 0;
    for k in 0..2 {
        for (a, b) in s5.weights.series(k, 0).iter().zip(s4.weights.series(k, 0)) {
            total += 1;
            if !(a > b) {
                violations += 1;
            }
        }
    }
    report(
        5,
        "exp5 w^k(1) dominates exp4 w^k(1)",
        violations == 0,
        format!("{violations} of {total} node/group pairs violate"),
    );
}

#[test]
fn criterion_06_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_params(&mut rng, 2);
        let means = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let snap = AgentSnapshot::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), &means);
        for k in 0..2 {
            let w = implicit_best_response(k, &snap, &p).unwrap();
            for l in 0..2 {
                worst = worst.max((closed_form_k2(k, l, &snap, &p).unwrap() - w[l]).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        6,
        "closed form vs implicit system (1000 snapshots)",
        worst <= 1e-10 && elapsed < 1.0,
        format!("max |diff| = {worst:.2e}, time {elapsed:.3}s"),
    );
}

#[test]
fn criterion_07_hamiltonian_stationarity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let mut worst_ratio: f64 = 0.0;
    let mut count = 0;
    for kk in [1usize, 2, 3, 5] {
        for _ in 0..1000 {
            let p = random_params(&mut rng, kk);
            let means: Vec<f64> = (0..kk).map(|_| rng.random_range(-5.0..5.0)).collect();
            let snap = AgentSnapshot::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), &means);
            let k = rng.random_range(0..kk);
            let w = implicit_best_response(k, &snap, &p).unwrap().0;
            let hw = hamiltonian(k, &w, &snap, &p).unwrap();
            let mut norm2 = 0.0;
            for l in 0..kk {
                let mut up = w.clone();
                let mut dn = w.clone();
                up[l] += h;
                dn[l] -= h;
                let g = (hamiltonian(k, &up, &snap, &p).unwrap() - hamiltonian(k, &dn, &snap, &p).unwrap()) / (2.0 * h);
                norm2 += g * g;
            }
            worst_ratio = worst_ratio.max(norm2.sqrt() / (1e-6 * (1.0 + hw.abs())));
            count += 1;
        }
    }
    report(
        7,
        "finite-difference stationarity of the Hamiltonian at w-hat",
        worst_ratio <= 1.0,
        format!("{count} snapshots, worst |grad| / (1e-6 (1+|H|)) = {worst_ratio:.3}"),
    );
}

#[test]
fn criterion_08_nash_verification() {
    let family = PerturbationFamily::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for which in Preset::ALL {
        let (p, g, s) = solve(which);
        for k in 0..2 {
            let r = deviation_check(&s, k, &p, &g, &family).unwrap();
            let ok = r.passes(1e-4);
            pass &= ok;
            lines.push(format!("{which}/k{} gap {:.1e}", k + 1, r.nash_gap));

            let zeros = vec![vec![0.0; g.n_nodes()]; 2];
            let z = deviation_check_weights(k, &zeros, &s.trajectories.xbar, &p, &g, &family).unwrap();
            pass &= z.nash_gap > 0.0;
            lines.push(format!("zeroed {:.1e}", z.nash_gap));
        }
    }
    report(8, "unilateral deviations (all presets, all groups)", pass, lines.join(", "));
}

#[test]
fn criterion_09_small_horizon_contraction() {
    let (p, _, _) = preset(Preset::Base);
    let grid = TimeGrid::new(0.1, 0.001).unwrap();
    let cfg = SolverConfig {
        epsilon: 1e-10,
        ..SolverConfig::default()
    };
    let s = fixed_point_solve(&p, &grid, &cfg).unwrap();
    let d = &s.residual_history;
    // d[j - 1] is the distance after sweep j; ratios d_{j+1}/d_j for j >= 2.
    let ratios: Vec<f64> = d.windows(2).skip(1).map(|w| w[1] / w[0]).collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let pass = s.converged && s.iterations < 100 && worst <= 0.9;
    report(
        9,
        "contraction at T = 0.1",
        pass,
        format!("converged {} in {} iterations, worst ratio {worst:.3e}", s.converged, s.iterations),
    );
}

#[test]
fn criterion_10_analytic_cost() {
    let want = (1.0 - (-0.4f64).exp()) / 0.4;
    let p = ModelParams::new(vec![GroupParams::new(0.2, 0.5, 1.0, 1.0).with_sigma(0.0)]);
    let mut errs = Vec::new();
    for (dt, tol) in [(0.01, 2e-3), (0.0025, 5e-4)] {
        let g = TimeGrid::new(1.0, dt).unwrap();
        let zeros = vec![vec![0.0; g.n_nodes()]];
        let means = vec![vec![1.0; g.n_nodes()]];
        let c = evaluate_cost(0, &zeros, &means, &p, &g).unwrap();
        errs.push((dt, (c.total - want).abs(), tol, c.control_cost));
    }
    let pass = errs.iter().all(|&(_, e, tol, ctrl)| e <= tol && ctrl == 0.0);
    report(
        10,
        "zero-control cost vs (1 - e^-0.4)/0.4",
        pass,
        errs.iter().map(|(dt, e, tol, _)| format!("dt={dt}: err {e:.2e} (tol {tol:.0e})")).collect::<Vec<_>>().join(", "),
    );
}

#[test]
fn criterion_11_monte_carlo_consistency() {
    let start = Instant::now();
    let (p, g, s) = solve(Preset::Base);
    let m = 10_000;
    let set = simulate_paths(&s, &p, &g, m, 20_240_917).unwrap();
    let mut worst_z: f64 = 0.0;
    for k in 0..2 {
        let (mean, var) = set.moments(k);
        for i in 0..g.n_nodes() {
            let bound = 3.0 * var[i].sqrt() / (m as f64).sqrt();
            let diff = (mean[i] - s.trajectories.xbar[k][i]).abs();
            let z = if bound > 0.0 { diff / bound } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z);
        }
    }
    let est = empirical_cost(&set, &s, &p, &g).unwrap();
    let mut cost_z: f64 = 0.0;
    for k in 0..2 {
        let analytic = evaluate_cost(k, s.weights.own(k), &s.trajectories.xbar, &p, &g).unwrap().total;
        cost_z = cost_z.max((est[k].mean - analytic).abs() / est[k].std_error.unwrap());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_z <= 1.0 && cost_z <= 3.0 && elapsed < 10.0;
    report(
        11,
        "Monte Carlo means and cost vs analytic",
        pass,
        format!("worst mean deviation {worst_z:.3} of 3-sigma band, cost {cost_z:.3} standard errors, time {elapsed:.2}s"),
    );
}

#[test]
fn criterion_12_grid_refinement() {
    let mut lines = Vec::new();
    let mut pass = true;
    for which in Preset::ALL {
        let (p, _, cfg) = preset(which);
        let terminal: Vec<Vec<f64>> = [0.01, 0.005, 0.0025]
            .iter()
            .map(|&dt| {
                let g = TimeGrid::new(1.0, dt).unwrap();
                let s = fixed_point_solve(&p, &g, &cfg).unwrap();
                s.trajectories.xbar.iter().map(|x| *x.last().unwrap()).collect()
            })
            .collect();
        for k in 0..2 {
            let r = (terminal[0][k] - terminal[1][k]) / (terminal[1][k] - terminal[2][k]);
            pass &= (1.5..=2.5).contains(&r);
            lines.push(format!("{which}/k{} {r:.3}", k + 1));
        }
    }
    report(12, "first-order refinement ratio in [1.5, 2.5]", pass, lines.join(", "));
}
