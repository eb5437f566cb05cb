//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 solver did not converge,
//! 3 Nash verification failed.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Parser, ValueEnum};

use crate::error::{Error, Result};
use crate::fbode::{fixed_point_solve, refinement, EquilibriumSolution};
use crate::model::{preset_by_name, ModelParams, ResponseRule, RunConfig, SolverConfig, TimeGrid};
use crate::montecarlo::{empirical_cost, simulate_paths, RNG_DESCRIPTION};
use crate::nash::{deviation_check, evaluate_cost, PerturbationFamily};
use crate::output::{self, MonteCarloSettings, NashReport, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Relative tolerance on the Nash gap, scaled by `1 + |baseline cost|`.
pub const NASH_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Hamiltonian,
    Published,
}

impl From<RuleArg> for ResponseRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Hamiltonian => ResponseRule::Hamiltonian,
            RuleArg::Published => ResponseRule::Published,
        }
    }
}

/// Solve for an equilibrium network formation and write plot-ready CSVs.
#[derive(Debug, Parser)]
#[command(name = "netform", version)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "config", "from_manifest"])))]
pub struct Args {
    /// Built-in experiment: base, exp2, exp3, exp4 or exp5.
    #[arg(long)]
    pub preset: Option<String>,

    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Re-run from a manifest written by a previous run.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,

    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,

    #[arg(long)]
    pub eps: Option<f64>,

    #[arg(long)]
    pub dt: Option<f64>,

    #[arg(long)]
    pub max_iter: Option<usize>,

    #[arg(long)]
    pub damping: Option<f64>,

    /// Best-response formula used by the solver.
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,

    /// Check every group against unilateral deviations.
    #[arg(long)]
    pub verify_nash: bool,

    /// Number of Monte Carlo paths (requires --seed).
    #[arg(long, requires = "seed")]
    pub mc_paths: Option<usize>,

    #[arg(long, requires = "mc_paths")]
    pub seed: Option<u64>,

    /// Also solve with dt/2 and report the terminal-state difference.
    #[arg(long)]
    pub refine: bool,
}

struct Plan {
    preset: Option<String>,
    config: RunConfig,
    verify_nash: bool,
    mc: Option<(usize, u64)>,
    refine: bool,
}

fn plan(args: &Args) -> Result<Plan> {
    let mut plan = if let Some(name) = &args.preset {
        let (p, g, c) = preset_by_name(name)?;
        Plan {
            preset: Some(name.clone()),
            config: RunConfig::from_parts(&p, &g, &c),
            verify_nash: false,
            mc: None,
            refine: false,
        }
    } else if let Some(path) = &args.config {
        Plan {
            preset: None,
            config: RunConfig::from_json(&fs::read_to_string(path)?)?,
            verify_nash: false,
            mc: None,
            refine: false,
        }
    } else if let Some(path) = &args.from_manifest {
        let m = RunManifest::from_json(&fs::read_to_string(path)?)?;
        Plan {
            preset: m.preset,
            config: m.config,
            verify_nash: m.verify_nash,
            mc: m.monte_carlo.map(|mc| (mc.paths, mc.seed)),
            refine: m.refinement.is_some(),
        }
    } else {
        return Err(Error::invalid("missing-source", "one of --preset, --config, --from-manifest is required"));
    };

    let c = &mut plan.config;
    if let Some(v) = args.eps {
        c.epsilon = v;
    }
    if let Some(v) = args.dt {
        c.dt = v;
    }
    if let Some(v) = args.max_iter {
        c.max_iters = v;
    }
    if let Some(v) = args.damping {
        c.damping = v;
    }
    if let Some(r) = args.rule {
        c.response_rule = r.into();
    }
    plan.verify_nash |= args.verify_nash;
    plan.refine |= args.refine;
    if let (Some(m), Some(s)) = (args.mc_paths, args.seed) {
        plan.mc = Some((m, s));
    }
    Ok(plan)
}

fn nash_report(solution: &EquilibriumSolution, params: &ModelParams, grid: &TimeGrid) -> Result<NashReport> {
    let family = PerturbationFamily::default();
    let groups = (0..params.k())
        .map(|k| deviation_check(solution, k, params, grid, &family))
        .collect::<Result<Vec<_>>>()?;
    let passed = groups.iter().all(|r| r.passes(NASH_REL_TOL));
    Ok(NashReport {
        relative_tolerance: NASH_REL_TOL,
        groups,
        passed,
    })
}

fn monte_carlo(
    solution: &EquilibriumSolution,
    params: &ModelParams,
    grid: &TimeGrid,
    paths: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<()> {
    let set = simulate_paths(solution, params, grid, paths, seed)?;
    let est = empirical_cost(&set, solution, params, grid)?;
    let analytic = (0..params.k())
        .map(|k| evaluate_cost(k, solution.weights.own(k), &solution.trajectories.xbar, params, grid).map(|c| c.total))
        .collect::<Result<Vec<_>>>()?;
    fs::write(out_dir.join(output::MC_SUMMARY_FILE), output::mc_summary_csv(&est, &analytic, seed)?)?;
    for (e, a) in est.iter().zip(&analytic) {
        let se = e.std_error.map(|s| format!("{s:.3e}")).unwrap_or_else(|| "n/a".into());
        println!("group {}: mc cost {:.6} (se {se}), analytic {:.6}", e.group + 1, e.mean, a);
    }
    Ok(())
}

fn execute(args: &Args) -> Result<i32> {
    let plan = plan(args)?;
    let (params, grid, config): (ModelParams, TimeGrid, SolverConfig) = plan.config.resolve()?;
    let start = Instant::now();
    let solution = fixed_point_solve(&params, &grid, &config)?;
    let wall = start.elapsed().as_secs_f64();

    fs::create_dir_all(&args.out_dir)?;
    output::emit_csv(&solution, &args.out_dir)?;
    println!(
        "{} after {} iterations (residual {:.3e})",
        if solution.converged { "converged" } else { "NOT converged" },
        solution.iterations,
        solution.final_residual().unwrap_or(f64::NAN),
    );
    if !solution.weights_in_unit_interval {
        println!("note: some connection strengths lie outside [0, 1]");
    }

    let refinement_report = if plan.refine {
        let r = refinement(&params, &grid, &config)?;
        println!("refinement dt {} -> {}: terminal differences {:?}", r.dt, r.dt_refined, r.terminal_difference);
        Some(r)
    } else {
        None
    };

    let manifest = RunManifest {
        software_version: crate::VERSION.to_string(),
        preset: plan.preset.clone(),
        config: RunConfig::from_parts(&params, &grid, &config),
        n_steps: grid.n_steps,
        converged: solution.converged,
        iterations: solution.iterations,
        final_residual: solution.final_residual(),
        wall_time_seconds: wall,
        weights_in_unit_interval: solution.weights_in_unit_interval,
        verify_nash: plan.verify_nash,
        monte_carlo: plan.mc.map(|(paths, seed)| MonteCarloSettings {
            paths,
            seed,
            rng: RNG_DESCRIPTION.to_string(),
        }),
        refinement: refinement_report,
    };
    fs::write(args.out_dir.join(output::MANIFEST_FILE), manifest.to_json()?)?;

    if !solution.converged {
        return Ok(EXIT_NOT_CONVERGED);
    }

    if let Some((paths, seed)) = plan.mc {
        monte_carlo(&solution, &params, &grid, paths, seed, &args.out_dir)?;
    }

    if plan.verify_nash {
        let report = nash_report(&solution, &params, &grid)?;
        fs::write(
            args.out_dir.join(output::NASH_REPORT_FILE),
            serde_json::to_string_pretty(&report)?,
        )?;
        for r in &report.groups {
            println!(
                "group {}: cost {:.6}, best deviation {:.6}, gap {:.3e} ({})",
                r.group + 1,
                r.baseline_cost,
                r.best_deviation_cost,
                r.nash_gap,
                r.best_deviation
            );
        }
        if !report.passed {
            eprintln!("nash verification failed");
            return Ok(EXIT_VERIFY_FAILED);
        }
    }
    Ok(EXIT_OK)
}

/// Parse `argv` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
