//! Derivative-nullification condition systems for the four families and a
//! multi-start damped least-squares solver that re-derives the bundled
//! reference angle sets.
//!
//! This module is deliberately `f64`-only: accepted solutions must reach
//! residual norms of 1e-10, which is beyond single precision.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::fidelity_matrix;
use crate::jets::jet_of_sequence;
use crate::jones::{Angle, PhaseShift};
use crate::sequences::{Family, PlateSpec, SequenceSpec, Target};

#[derive(Debug, thiserror::Error)]
pub enum DesignError {
    #[error("family {family} does not admit N = {n}: {reason}")]
    InadmissibleN { family: Family, n: usize, reason: String },
    #[error("family {0} has no design problem")]
    NoProblem(Family),
}

/// Which part of the final (half-counted) derivative order is nullified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Re,
    Im,
}

/// The nonlinear condition system for one family and plate count.
///
/// Conditions, in order: the target equality at φ = π (up to one shared
/// global phase), then Re and Im of successive derivatives of J₁₂ at π for
/// `full_orders`, then one real part (Re or Im, the solver tries both) of the
/// derivative at `part_order`. Derivative residuals are normalized by ωᵏ
/// where ω is the sequence's total retardance scale over the physical pass
/// divided by two; the band-limited J₁₂ obeys |∂ᵏ J₁₂| ≤ ωᵏ, so the
/// normalized entries are dimensionless and comparable across orders.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    pub family: Family,
    pub n: usize,
    pub full_orders: Vec<usize>,
    pub part_order: Option<usize>,
    /// θ₁ pinned to 0 (families a and b); otherwise every angle is free and
    /// the solution set carries a continuous global-rotation freedom.
    pub theta1_fixed: bool,
    /// Target matrices to solve against; both quarter-wave signs for the
    /// quarter-wave families.
    pub targets: Vec<Target>,
}

impl DesignProblem {
    pub fn free_angle_count(&self) -> usize {
        if self.theta1_fixed {
            self.n - 1
        } else {
            self.n
        }
    }

    pub fn max_order(&self) -> usize {
        self.full_orders
            .iter()
            .copied()
            .chain(self.part_order)
            .max()
            .unwrap_or(0)
    }
}

/// Build the condition system for a family and plate count.
pub fn assemble_problem(family: Family, n: usize) -> Result<DesignProblem, DesignError> {
    let err = |reason: &str| DesignError::InadmissibleN { family, n, reason: reason.to_string() };
    match family {
        Family::A => {
            if n % 2 == 0 || n < 3 {
                return Err(err("requires an odd plate count of at least 3"));
            }
            Ok(DesignProblem {
                family,
                n,
                full_orders: (1..=n - 2).collect(),
                part_order: Some(n - 1),
                theta1_fixed: true,
                targets: vec![Target::Half],
            })
        }
        Family::B => {
            if n < 2 {
                return Err(err("requires at least 2 plates"));
            }
            Ok(DesignProblem {
                family,
                n,
                full_orders: (1..=(n - 1) / 2).collect(),
                part_order: (n % 2 == 0).then_some(n / 2),
                theta1_fixed: true,
                targets: vec![Target::QuarterPlus, Target::QuarterMinus],
            })
        }
        Family::C => {
            if n < 2 {
                return Err(err("requires at least 2 plates"));
            }
            // The derivative set runs through order N−1 in full (odd orders of
            // the doubled pass vanish identically, so they cost nothing),
            // plus one part of order N for even N; empirical Jacobian ranks
            // confirm this leaves a discrete solution set.
            Ok(DesignProblem {
                family,
                n,
                full_orders: (1..=n - 1).collect(),
                part_order: (n % 2 == 0).then_some(n),
                theta1_fixed: false,
                targets: vec![Target::Half],
            })
        }
        Family::D => {
            if n < 3 {
                return Err(err("requires at least 3 plates"));
            }
            Ok(DesignProblem {
                family,
                n,
                full_orders: (1..=n - 2).collect(),
                part_order: None,
                theta1_fixed: false,
                targets: vec![Target::QuarterPlus, Target::QuarterMinus],
            })
        }
        Family::Custom => Err(DesignError::NoProblem(family)),
    }
}

/// Family plate layout at explicit angles (radians), without the I/O-level
/// structural checks of `build_sequence`; the solver owns the angle values.
fn family_sequence(family: Family, angles_rad: &[f64], target: Target) -> SequenceSpec<f64> {
    let n = angles_rad.len();
    let a = |i: usize| Angle::from_radians(angles_rad[i]);
    let mut plates: Vec<PlateSpec<f64>> = Vec::with_capacity(n);
    let mirrored = matches!(family, Family::C | Family::D);
    for i in 0..n {
        let quarter = match family {
            Family::A => false,
            Family::B => i == 0,
            Family::C => i == n - 1,
            Family::D => i == 0 || i == n - 1,
            Family::Custom => false,
        };
        plates.push(if quarter { PlateSpec::quarter(a(i)) } else { PlateSpec::half(a(i)) });
    }
    SequenceSpec { plates, mirrored, mirror_after: None, family, target }
}

/// Raw condition evaluation. Returns the stacked residual vector.
fn residuals(
    problem: &DesignProblem,
    target: Target,
    branch: Option<Branch>,
    angles_rad: &[f64],
) -> Vec<f64> {
    let seq = family_sequence(problem.family, angles_rad, target);
    let order = problem.max_order();
    let jet = jet_of_sequence(&seq, PhaseShift(std::f64::consts::PI), order);
    let omega = seq.derivative_scale();
    let mut r = Vec::with_capacity(4 + 2 * problem.full_orders.len() + 1);
    // target equality up to a shared global phase: J₀†J must be scalar
    let v = target.matrix::<f64>().adjoint() * jet.coefficients[0];
    r.push(v.m12.re);
    r.push(v.m12.im);
    r.push(v.m11.re - v.m22.re);
    r.push(v.m11.im - v.m22.im);
    for &k in &problem.full_orders {
        let d = jet.j12_derivative(k).unscale(omega.powi(k as i32));
        r.push(d.re);
        r.push(d.im);
    }
    if let (Some(k), Some(b)) = (problem.part_order, branch) {
        let d = jet.j12_derivative(k).unscale(omega.powi(k as i32));
        r.push(match b {
            Branch::Re => d.re,
            Branch::Im => d.im,
        });
    }
    r
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub start_index: usize,
    pub start_deg: Vec<f64>,
}

/// A solved or verified angle set together with its condition residuals.
///
/// `derivative_profile[k-1]` is the ωᵏ-normalized magnitude of ∂ᵏ J₁₂ at π
/// for each prescribed order k; at the final half-counted order (when the
/// family has one) the entry is the smaller of |Re| and |Im|, i.e. the
/// constrained component under the better branch, with both components
/// reported separately in `part_residuals`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignSolution {
    pub family: Family,
    pub n: usize,
    pub branch: Option<Branch>,
    pub target: Target,
    pub angles_deg: Vec<f64>,
    pub residual_norm: f64,
    pub derivative_profile: Vec<f64>,
    pub fidelity_at_pi: f64,
    pub target_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part_residuals: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobian_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn canonical_deg(rad: f64) -> f64 {
    let d = rad.to_degrees().rem_euclid(360.0);
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Evaluate every condition of the assembled problem at the given angles and
/// report residuals without solving. Both target signs (for quarter-wave
/// families) and both final-order branches are evaluated; the reported
/// branch/target are the better ones.
pub fn verify_angles(family: Family, angles: &[Angle<f64>]) -> Result<DesignSolution, DesignError> {
    let problem = assemble_problem(family, angles.len())?;
    let rad: Vec<f64> = angles.iter().map(|a| a.radians()).collect();
    let order = problem.max_order();
    let mut best: Option<DesignSolution> = None;
    for &target in &problem.targets {
        let seq = family_sequence(family, &rad, target);
        let jet = jet_of_sequence(&seq, PhaseShift(std::f64::consts::PI), order);
        let omega = seq.derivative_scale();
        let fid = fidelity_matrix(&jet.coefficients[0], &target.matrix())
            .expect("sequence matrices are unitary");
        let mut profile = Vec::new();
        for &k in &problem.full_orders {
            profile.push(jet.j12_derivative(k).norm() / omega.powi(k as i32));
        }
        let mut part_residuals = None;
        let mut branch = None;
        if let Some(k) = problem.part_order {
            let d = jet.j12_derivative(k).unscale(omega.powi(k as i32));
            part_residuals = Some((d.re, d.im));
            branch = Some(if d.re.abs() <= d.im.abs() { Branch::Re } else { Branch::Im });
            profile.push(d.re.abs().min(d.im.abs()));
        }
        let r = residuals(&problem, target, branch, &rad);
        let target_residual = norm2(&r[..4]);
        let candidate = DesignSolution {
            family,
            n: problem.n,
            branch,
            target,
            angles_deg: rad.iter().map(|&x| canonical_deg(x)).collect(),
            residual_norm: norm2(&r),
            derivative_profile: profile,
            fidelity_at_pi: fid,
            target_residual,
            part_residuals,
            jacobian_rank: None,
            provenance: None,
        };
        let better = match &best {
            None => true,
            Some(b) => candidate.fidelity_at_pi > b.fidelity_at_pi,
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one target per family"))
}

// ---------------------------------------------------------------------------
// Levenberg–Marquardt with numeric Jacobians
// ---------------------------------------------------------------------------

fn numeric_jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], m: usize) -> DMatrix<f64> {
    let n = x.len();
    let h = 1e-6;
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let rp = f(&xp);
        xp[j] = x[j] - h;
        let rm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    jac
}

struct LmResult {
    x: Vec<f64>,
    residual_norm: f64,
}

fn levenberg_marquardt<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x0: Vec<f64>, max_iter: usize) -> LmResult {
    let mut x = x0;
    let mut r = f(&x);
    let m = r.len();
    let mut cost = norm2(&r);
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if cost <= 1e-12 {
            break;
        }
        let jac = numeric_jacobian(f, &x, m);
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = a.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda * (a[(i, i)] + 1e-12);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let x_new: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, di)| xi + di).collect();
            let r_new = f(&x_new);
            let cost_new = norm2(&r_new);
            if cost_new < cost {
                let step_norm = step.norm();
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda * 0.35).max(1e-13);
                accepted = true;
                if step_norm < 1e-14 {
                    return LmResult { x, residual_norm: cost };
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e10 {
                return LmResult { x, residual_norm: cost };
            }
        }
        if !accepted {
            break;
        }
    }
    LmResult { x, residual_norm: cost }
}

// ---------------------------------------------------------------------------
// Solution canonicalization, deduplication, matching
// ---------------------------------------------------------------------------

/// Distance between two angles in degrees modulo the 180° plate period.
pub fn mod180_distance_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Worst per-angle mod-180° distance between two angle sets, optionally
/// minimized over a common rotation offset applied to `a` (the
/// global-rotation symmetry of mirrored designs).
pub fn angle_set_distance_deg(a: &[f64], b: &[f64], allow_global_rotation: bool) -> f64 {
    assert_eq!(a.len(), b.len());
    let dist_at = |delta: f64| -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| mod180_distance_deg(x + delta, y))
            .fold(0.0f64, f64::max)
    };
    if !allow_global_rotation {
        return dist_at(0.0);
    }
    // The aligning offset must map some angle of `a` onto its partner in `b`,
    // so per-angle differences are the only candidates; refine locally to
    // absorb rounding of the candidate angle itself.
    let mut best = f64::INFINITY;
    for (&x, &y) in a.iter().zip(b) {
        let cand = (y - x).rem_euclid(180.0);
        let mut local = f64::INFINITY;
        let mut delta = cand;
        let mut d = cand - 0.2;
        while d <= cand + 0.2 {
            let v = dist_at(d);
            if v < local {
                local = v;
                delta = d;
            }
            d += 0.002;
        }
        let _ = delta;
        best = best.min(local);
    }
    best
}

const DEDUP_TOL_DEG: f64 = 0.05;

/// Multi-start solve of the assembled problem. Start index `i` draws its
/// start point from a per-index RNG stream (deterministic for a fixed seed,
/// independent of thread scheduling) and works on target-sign/branch
/// combination `i mod n_combos`, so the start budget is shared round-robin
/// across combinations. Converged results (residual ≤ 1e-10) are
/// deduplicated mod 180° per angle and mod the global-rotation symmetry, and
/// returned in start order.
pub fn solve(problem: &DesignProblem, starts: usize, seed: u64) -> Vec<DesignSolution> {
    let mut combos: Vec<(Target, Option<Branch>)> = Vec::new();
    for &t in &problem.targets {
        if problem.part_order.is_some() {
            combos.push((t, Some(Branch::Re)));
            combos.push((t, Some(Branch::Im)));
        } else {
            combos.push((t, None));
        }
    }
    let nfree = problem.free_angle_count();
    let full_angles = |x: &[f64]| -> Vec<f64> {
        if problem.theta1_fixed {
            let mut v = Vec::with_capacity(x.len() + 1);
            v.push(0.0);
            v.extend_from_slice(x);
            v
        } else {
            x.to_vec()
        }
    };

    let attempts: Vec<Option<DesignSolution>> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let (target, branch) = combos[i % combos.len()];
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let x0: Vec<f64> =
                (0..nfree).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
            let f = |x: &[f64]| residuals(problem, target, branch, &full_angles(x));
            let lm = levenberg_marquardt(&f, x0.clone(), 200);
            if lm.residual_norm > 1e-10 {
                return None;
            }
            let angles = full_angles(&lm.x);
            let angle_objs: Vec<Angle<f64>> =
                angles.iter().map(|&a| Angle::from_radians(a)).collect();
            let mut sol = verify_angles(problem.family, &angle_objs).ok()?;
            // the solve targeted one sign/branch; report that combination
            sol.target = target;
            sol.branch = branch;
            if (1.0 - sol.fidelity_at_pi).abs() > 1e-10 {
                return None;
            }
            let r = residuals(problem, target, branch, &angles);
            sol.residual_norm = norm2(&r);
            if sol.residual_norm > 1e-10 {
                return None;
            }
            let jac = numeric_jacobian(&f, &lm.x, r.len());
            let svd = jac.svd(false, false);
            let sv_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
            sol.jacobian_rank =
                Some(svd.singular_values.iter().filter(|&&s| s > sv_max * 1e-6).count());
            sol.provenance = Some(Provenance {
                seed,
                start_index: i,
                start_deg: x0.iter().map(|&x| canonical_deg(x)).collect(),
            });
            Some(sol)
        })
        .collect();

    let allow_rotation = !problem.theta1_fixed;
    let mut out: Vec<DesignSolution> = Vec::new();
    for sol in attempts.into_iter().flatten() {
        let duplicate = out.iter().any(|s| {
            s.target == sol.target
                && angle_set_distance_deg(&s.angles_deg, &sol.angles_deg, allow_rotation)
                    < DEDUP_TOL_DEG
        });
        if !duplicate {
            out.push(sol);
        }
    }
    out.sort_by(|a, b| {
        let ka = a.provenance.as_ref().map(|p| p.start_index).unwrap_or(0);
        let kb = b.provenance.as_ref().map(|p| p.start_index).unwrap_or(0);
        ka.cmp(&kb).then(a.residual_norm.partial_cmp(&b.residual_norm).unwrap())
    });
    out
}
