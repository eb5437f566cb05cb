//! Best-response connection strengths.
//!
//! The representative agent of group `k` minimises, pointwise in time, the
//! Hamiltonian
//!
//! ```text
//! H^k(w) = a^k (S(w) - X^k) Y^k + (S(w) - X^k)^2 + nu^k sum_l w(l)^2 m^l,
//! S(w)   = sum_l w(l) Xbar^l m^l.
//! ```
//!
//! `H^k` is a strictly convex quadratic in `w` for `nu^k > 0`, so its
//! minimiser is the unique solution of the first-order conditions. Writing
//! `c_l = Xbar^l m^l`, those conditions are the `K x K` system
//!
//! ```text
//! (2 nu^k m^l + 2 c_l^2) w(l) + 2 c_l sum_{j != l} c_j w(j) = c_l (2 X^k - a^k Y^k)
//! ```
//!
//! which [`implicit_best_response`] assembles and solves directly. For two
//! groups the solution collapses to [`closed_form_k2`].

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ModelParams, ResponseRule};

/// Row denominators below this are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-14;
/// Reciprocal condition numbers below this are treated as rank-deficient.
pub const RCOND_TOL: f64 = 1e-14;

/// What group `k`'s representative agent sees at one instant.
///
/// In the expected system `own_state` is `Xbar^k` and `own_adjoint` is
/// `Ybar^k`.
#[derive(Debug, Clone, Copy)]
pub struct AgentSnapshot<'a> {
    pub own_state: f64,
    pub own_adjoint: f64,
    pub population_means: &'a [f64],
}

impl<'a> AgentSnapshot<'a> {
    pub fn new(own_state: f64, own_adjoint: f64, population_means: &'a [f64]) -> Self {
        AgentSnapshot {
            own_state,
            own_adjoint,
            population_means,
        }
    }

    fn check(&self, params: &ModelParams, k: usize) -> Result<()> {
        let kk = params.k();
        if k >= kk {
            return Err(Error::DimensionMismatch {
                what: "group index",
                expected: kk,
                found: k,
            });
        }
        if self.population_means.len() != kk {
            return Err(Error::DimensionMismatch {
                what: "population means",
                expected: kk,
                found: self.population_means.len(),
            });
        }
        let finite = self.own_state.is_finite()
            && self.own_adjoint.is_finite()
            && self.population_means.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("nonfinite-snapshot", "snapshot contains non-finite values"));
        }
        Ok(())
    }
}

/// Connection strengths `w(l)` of one agent towards each group `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(w: Vec<f64>) -> Self {
        WeightVector(w)
    }
}

/// The aggregate `sum_l w(l) Xbar^l m^l`.
pub fn aggregate(w: &[f64], means: &[f64], params: &ModelParams) -> f64 {
    w.iter()
        .zip(means)
        .zip(&params.groups)
        .map(|((w, x), g)| w * x * g.m)
        .sum()
}

/// Hamiltonian of group `k`'s representative agent.
pub fn hamiltonian(k: usize, w: &[f64], snap: &AgentSnapshot<'_>, params: &ModelParams) -> Result<f64> {
    snap.check(params, k)?;
    if w.len() != params.k() {
        return Err(Error::DimensionMismatch {
            what: "weight vector",
            expected: params.k(),
            found: w.len(),
        });
    }
    let g = &params.groups[k];
    let gap = aggregate(w, snap.population_means, params) - snap.own_state;
    let control: f64 = w.iter().zip(&params.groups).map(|(w, h)| w * w * h.m).sum();
    Ok(g.a * gap * snap.own_adjoint + gap * gap + g.nu * control)
}

/// Minimiser of [`hamiltonian`] for group `k`, from the first-order
/// conditions solved as a dense linear system.
pub fn implicit_best_response(k: usize, snap: &AgentSnapshot<'_>, params: &ModelParams) -> Result<WeightVector> {
    snap.check(params, k)?;
    let kk = params.k();
    let g = &params.groups[k];
    let c: Vec<f64> = snap
        .population_means
        .iter()
        .zip(&params.groups)
        .map(|(x, h)| x * h.m)
        .collect();
    let drive = 2.0 * snap.own_state - g.a * snap.own_adjoint;

    let mut lhs = DMatrix::<f64>::zeros(kk, kk);
    let mut rhs = DVector::<f64>::zeros(kk);
    for l in 0..kk {
        let diag = 2.0 * g.nu * params.groups[l].m + 2.0 * c[l] * c[l];
        if diag < SINGULAR_TOL {
            return Err(Error::SingularSystem {
                group: k,
                condition: f64::INFINITY,
            });
        }
        for j in 0..kk {
            lhs[(l, j)] = if j == l { diag } else { 2.0 * c[l] * c[j] };
        }
        rhs[l] = c[l] * drive;
    }

    let lu = lhs.clone().lu();
    let u = lu.u();
    let pivots = u.diagonal().map(f64::abs);
    let (pmin, pmax) = (pivots.min(), pivots.max());
    if !(pmax > 0.0) || pmin / pmax < RCOND_TOL {
        return Err(Error::SingularSystem {
            group: k,
            condition: condition_estimate(&lhs),
        });
    }
    let w = lu.solve(&rhs).ok_or(Error::SingularSystem {
        group: k,
        condition: condition_estimate(&lhs),
    })?;
    Ok(WeightVector(w.iter().copied().collect()))
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn check_k2(k: usize, l: usize, snap: &AgentSnapshot<'_>, params: &ModelParams) -> Result<()> {
    if params.k() != 2 {
        return Err(Error::invalid(
            "closed-form-needs-two-groups",
            format!("the closed form is only defined for K = 2, got K = {}", params.k()),
        ));
    }
    if l >= 2 {
        return Err(Error::DimensionMismatch {
            what: "group index",
            expected: 2,
            found: l,
        });
    }
    snap.check(params, k)
}

/// Two-group closed form of the Hamiltonian minimiser,
/// `w^k(l) = (2 X^k - a^k Y^k) Xbar^l / (2 (nu^k + (Xbar^l)^2 m^l + (Xbar^-l)^2 m^-l))`.
pub fn closed_form_k2(k: usize, l: usize, snap: &AgentSnapshot<'_>, params: &ModelParams) -> Result<f64> {
    check_k2(k, l, snap, params)?;
    let g = &params.groups[k];
    let other = 1 - l;
    let xs = snap.population_means;
    let denom = g.nu + xs[l] * xs[l] * params.groups[l].m + xs[other] * xs[other] * params.groups[other].m;
    Ok((2.0 * snap.own_state - g.a * snap.own_adjoint) * xs[l] / (2.0 * denom))
}

/// The two-group formula exactly as it is usually quoted:
///
/// ```text
/// [(2 X^k - a^k Y^k) 2 Xbar^l m^l nu^k m^-l] / [2 nu^k m^-l m^l (nu^k + (Xbar^l)^2 m^l + (Xbar^-l)^2 m^-l)]
/// ```
///
/// It equals `2 * closed_form_k2`, i.e. it is not the minimiser of the
/// Hamiltonian. Kept to reproduce published trajectories.
pub fn published_closed_form_k2(k: usize, l: usize, snap: &AgentSnapshot<'_>, params: &ModelParams) -> Result<f64> {
    check_k2(k, l, snap, params)?;
    let g = &params.groups[k];
    let other = 1 - l;
    let (ml, mo) = (params.groups[l].m, params.groups[other].m);
    let xs = snap.population_means;
    let num = (2.0 * snap.own_state - g.a * snap.own_adjoint) * 2.0 * xs[l] * ml * g.nu * mo;
    let den = 2.0 * g.nu * mo * ml * (g.nu + xs[l] * xs[l] * ml + xs[other] * xs[other] * mo);
    Ok(num / den)
}

/// Connection strengths of group `k` under `rule`.
pub fn best_response(
    rule: ResponseRule,
    k: usize,
    snap: &AgentSnapshot<'_>,
    params: &ModelParams,
) -> Result<WeightVector> {
    match rule {
        ResponseRule::Hamiltonian => implicit_best_response(k, snap, params),
        ResponseRule::Published => (0..2)
            .map(|l| published_closed_form_k2(k, l, snap, params))
            .collect::<Result<Vec<_>>>()
            .map(WeightVector),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, GroupParams, Preset};

    fn base() -> ModelParams {
        preset(Preset::Base).0
    }

    fn single(a: f64, nu: f64) -> ModelParams {
        ModelParams::new(vec![GroupParams::new(a, nu, 1.0, 1.0)])
    }

    /// Uncancelled two-group first-order conditions, eliminated by hand.
    fn two_by_two_by_substitution(k: usize, snap: &AgentSnapshot<'_>, p: &ModelParams) -> [f64; 2] {
        let g = &p.groups[k];
        let c = [snap.population_means[0] * p.groups[0].m, snap.population_means[1] * p.groups[1].m];
        let d = [2.0 * g.nu * p.groups[0].m + 2.0 * c[0] * c[0], 2.0 * g.nu * p.groups[1].m + 2.0 * c[1] * c[1]];
        let drive = 2.0 * snap.own_state - g.a * snap.own_adjoint;
        // d0 w0 + 2 c0 c1 w1 = c0 drive ; 2 c0 c1 w0 + d1 w1 = c1 drive
        let det = d[0] * d[1] - 4.0 * c[0] * c[0] * c[1] * c[1];
        let w0 = (c[0] * drive * d[1] - 2.0 * c[0] * c[1] * c[1] * drive) / det;
        let w1 = (d[0] * c[1] * drive - 2.0 * c[0] * c[1] * c[0] * drive) / det;
        [w0, w1]
    }

    #[test]
    fn hamiltonian_vanishes_at_origin() {
        let p = base();
        let snap = AgentSnapshot::new(0.0, 0.0, &[3.0, -2.0]);
        assert_eq!(hamiltonian(0, &[0.0, 0.0], &snap, &p).unwrap(), 0.0);
    }

    #[test]
    fn hamiltonian_hand_substitutions() {
        let mut p = base();
        p.groups[0].a = 1.0;
        let snap = AgentSnapshot::new(1.0, 1.0, &[1.0, 1.0]);
        // a(0 - 1) * 1 + (0 - 1)^2 + 0
        assert_eq!(hamiltonian(0, &[0.0, 0.0], &snap, &p).unwrap(), 0.0);

        let p = base();
        let snap = AgentSnapshot::new(1.0, 0.0, &[1.0, 1.0]);
        // Z = 1, gap 0, control 0.5 * (0.5 + 0.5)
        assert!((hamiltonian(0, &[1.0, 1.0], &snap, &p).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_errors() {
        let p = base();
        let snap = AgentSnapshot::new(1.0, 0.0, &[1.0]);
        assert!(matches!(hamiltonian(0, &[0.0, 0.0], &snap, &p), Err(Error::DimensionMismatch { .. })));
        let snap = AgentSnapshot::new(1.0, 0.0, &[1.0, 1.0]);
        assert!(matches!(hamiltonian(0, &[0.0], &snap, &p), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(implicit_best_response(2, &snap, &p), Err(Error::DimensionMismatch { .. })));
        assert!(closed_form_k2(0, 0, &snap, &single(0.2, 0.5)).is_err());
    }

    #[test]
    fn zero_means_give_zero_weights() {
        let p = base();
        let snap = AgentSnapshot::new(1.7, -0.4, &[0.0, 0.0]);
        assert_eq!(implicit_best_response(1, &snap, &p).unwrap().0, vec![0.0, 0.0]);
        assert_eq!(closed_form_k2(1, 0, &snap, &p).unwrap(), 0.0);
    }

    #[test]
    fn single_group_by_hand() {
        // (2 nu m + 2 (Xbar m)^2) w = Xbar m (2 X) => w = 2 / (1 + 2) = 2/3
        let p = single(0.0, 0.5);
        let snap = AgentSnapshot::new(1.0, 12.5, &[1.0]);
        let w = implicit_best_response(0, &snap, &p).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);

        // Finite-difference minimisation of H as a cross-check.
        let h = |x: f64| hamiltonian(0, &[x], &snap, &p).unwrap();
        let (mut lo, mut hi) = (-5.0_f64, 5.0_f64);
        for _ in 0..200 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if h(m1) < h(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        assert!((0.5 * (lo + hi) - 2.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn symmetric_base_snapshot() {
        // 2x2 system: w0 + 0.5 w1 = 1, 0.5 w0 + w1 = 1  =>  w = (2/3, 2/3)
        let p = base();
        let snap = AgentSnapshot::new(1.0, 0.0, &[1.0, 1.0]);
        let w = implicit_best_response(0, &snap, &p).unwrap();
        for wl in w.iter() {
            assert!((wl - 2.0 / 3.0).abs() < 1e-15);
        }
        assert!((closed_form_k2(0, 0, &snap, &p).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // The quoted formula evaluates to 0.5 / 0.375 = 4/3.
        assert!((published_closed_form_k2(0, 0, &snap, &p).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_means_cross_weight() {
        // Xbar = (1, 2), l = 2: published 2 * 2 / (0.5 + 2 + 0.5) = 4/3, minimiser half of it.
        let p = base();
        let snap = AgentSnapshot::new(1.0, 0.0, &[1.0, 2.0]);
        assert!((published_closed_form_k2(0, 1, &snap, &p).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((closed_form_k2(0, 1, &snap, &p).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let w = implicit_best_response(0, &snap, &p).unwrap();
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn published_form_is_exactly_twice_the_minimiser() {
        let mut p = base();
        p.groups[0].m = 0.3;
        p.groups[1].m = 0.7;
        p.groups[1].nu = 1.3;
        p.groups[1].a = -0.4;
        let means = [0.8, -1.9];
        let snap = AgentSnapshot::new(2.1, 0.7, &means);
        for k in 0..2 {
            for l in 0..2 {
                let pub_w = published_closed_form_k2(k, l, &snap, &p).unwrap();
                let w = closed_form_k2(k, l, &snap, &p).unwrap();
                assert!((pub_w - 2.0 * w).abs() < 1e-13 * (1.0 + w.abs()));
            }
        }
    }

    #[test]
    fn elimination_matches_linear_solve() {
        let mut p = base();
        p.groups[0].m = 0.25;
        p.groups[1].m = 0.75;
        let means = [1.3, -0.6];
        let snap = AgentSnapshot::new(0.4, 1.1, &means);
        for k in 0..2 {
            let w = implicit_best_response(k, &snap, &p).unwrap();
            let want = two_by_two_by_substitution(k, &snap, &p);
            for l in 0..2 {
                assert!((w[l] - want[l]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rule_dispatch() {
        let p = base();
        let snap = AgentSnapshot::new(1.0, 0.0, &[1.0, 1.0]);
        let h = best_response(ResponseRule::Hamiltonian, 0, &snap, &p).unwrap();
        let q = best_response(ResponseRule::Published, 0, &snap, &p).unwrap();
        assert!((q[0] - 2.0 * h[0]).abs() < 1e-14);
        assert!(best_response(ResponseRule::Published, 0, &AgentSnapshot::new(1.0, 0.0, &[1.0]), &single(0.2, 0.5)).is_err());
    }

    #[test]
    fn tiny_row_denominator_is_singular() {
        let p = ModelParams::new(vec![GroupParams::new(0.2, 1e-16, 1.0, 1.0)]);
        let snap = AgentSnapshot::new(1.0, 0.0, &[0.0]);
        assert!(matches!(implicit_best_response(0, &snap, &p), Err(Error::SingularSystem { .. })));
    }
}
