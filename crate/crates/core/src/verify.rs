//! Numerical certification of the weight condition `r^k w(z/r) ≤ C w(z)`,
//! the monotonicity of `r ↦ r^k w(z/r)`, and desk-scale dilation/density
//! convergence experiments.
//!
//! A grid pass is evidence, not proof: reports record the grid they were
//! certified on.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::sphere_directions;
use crate::series::PowerSeries;
use crate::spaces::{compute_norm, NormSpec};
use crate::weights::Weight;

/// Boundary inset keeping grid points away from blowups.
pub const EPS_INSET: f64 = 1.0 / (1 << 20) as f64;

/// Default certification bound for the constant C.
pub const DEFAULT_BOUND: f64 = 1e6;

/// Sampling grid for the condition and monotonicity checkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// number of radii r sampled in [r0, 1-ε]
    pub radii: usize,
    /// number of shells |z| = t·r sampled per radius
    pub shells: usize,
    /// number of seeded directions per shell
    pub directions: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radii: 24,
            shells: 16,
            directions: 32,
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radii < 2 || self.shells < 1 || self.directions < 1 {
            return Err(Error::invalid(
                "grid needs at least 2 radii, 1 shell and 1 direction",
            ));
        }
        Ok(())
    }
}

/// Where a supremum was attained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPoint {
    pub r: f64,
    pub z: Vec<[f64; 2]>,
}

/// Outcome of the condition check `r^k w(z/r) ≤ C w(z)` on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub weight_id: String,
    pub k_tested: usize,
    pub r0: f64,
    pub grid: GridSpec,
    /// Maximum of the dilation ratio over the grid (a lower bound for the
    /// true supremum).
    pub sup_ratio: f64,
    pub c_estimate: f64,
    /// Maximum restricted to r ≥ 0.9, showing the tail behaviour.
    pub sup_ratio_tail: f64,
    pub bound: f64,
    pub passed: bool,
    pub argmax: GridPoint,
}

/// Evaluates the dilation ratio over the sampled grid and reports its
/// supremum as the estimate for the constant C.
pub fn check_condition(
    w: &Weight,
    k: usize,
    r0: f64,
    grid: &GridSpec,
    bound: f64,
) -> Result<ConditionReport> {
    if !(0.0 < r0 && r0 < 1.0) {
        return Err(Error::invalid(format!("r0 must lie in (0,1), got {r0}")));
    }
    grid.validate()?;
    let n = w.dimension();
    let dirs = sphere_directions(n, grid.directions, grid.seed);
    let mut sup_ratio = f64::NEG_INFINITY;
    let mut sup_tail = f64::NEG_INFINITY;
    let mut argmax = GridPoint { r: r0, z: vec![] };
    let span = 1.0 - r0 - EPS_INSET;
    for j in 0..=grid.radii {
        let r = r0 + span * j as f64 / grid.radii as f64;
        for i in 1..=grid.shells {
            let t = (1.0 - EPS_INSET) * i as f64 / grid.shells as f64;
            for u in &dirs {
                let z: Vec<Complex64> = u.iter().map(|c| c * (t * r)).collect();
                let ratio = w.dilation_ratio(&z, r, k)?;
                // ties keep the earliest (lexicographically smallest) point
                if ratio > sup_ratio {
                    sup_ratio = ratio;
                    argmax = GridPoint {
                        r,
                        z: z.iter().map(|c| [c.re, c.im]).collect(),
                    };
                }
                if r >= 0.9 && ratio > sup_tail {
                    sup_tail = ratio;
                }
            }
        }
    }
    let passed = sup_ratio.is_finite() && sup_ratio <= bound;
    Ok(ConditionReport {
        weight_id: w.id(),
        k_tested: k,
        r0,
        grid: *grid,
        sup_ratio,
        c_estimate: sup_ratio,
        sup_ratio_tail: sup_tail,
        bound,
        passed,
        argmax,
    })
}

/// Searches for the smallest `k ≤ k_max` whose condition report passes with
/// `C ≤ bound`; returns the per-k reports alongside.
pub fn find_min_k(
    w: &Weight,
    k_max: usize,
    r0: f64,
    grid: &GridSpec,
    bound: f64,
) -> Result<(Option<usize>, Vec<ConditionReport>)> {
    if k_max > 64 {
        return Err(Error::invalid("k_max must be <= 64"));
    }
    let mut reports = Vec::new();
    let mut found = None;
    for k in 0..=k_max {
        let rep = check_condition(w, k, r0, grid, bound)?;
        let ok = rep.passed;
        reports.push(rep);
        if ok {
            found = Some(k);
            break;
        }
    }
    Ok((found, reports))
}

/// Outcome of the monotonicity check of `r ↦ r^k w(z/r)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub weight_id: String,
    pub k: usize,
    pub r_min: Option<f64>,
    pub grid: GridSpec,
    /// Fraction of sampled z for which every finite-difference slope is
    /// ≥ -1e-9.
    pub fraction_monotone: f64,
    pub monotone: bool,
    pub worst_slope: f64,
    pub worst_point: GridPoint,
}

/// Finite-difference step for the monotonicity check.
const FD_STEP: f64 = 1e-4;
/// Slopes above this (slightly negative) tolerance count as nondecreasing.
const FD_TOL: f64 = -1e-9;

/// For each sampled z, samples r on (max(|z|, r_min), 1) and checks that
/// `r^k w(z/r)` is nondecreasing via finite differences.
pub fn check_monotone(
    w: &Weight,
    k: usize,
    grid: &GridSpec,
    r_min: Option<f64>,
) -> Result<MonotoneReport> {
    grid.validate()?;
    let n = w.dimension();
    let dirs = sphere_directions(n, grid.directions, grid.seed);
    let mut monotone_count = 0usize;
    let mut total = 0usize;
    let mut worst_slope = f64::INFINITY;
    let mut worst_point = GridPoint { r: 0.0, z: vec![] };
    for i in 1..=grid.shells {
        let t = (1.0 - EPS_INSET) * i as f64 / (grid.shells + 1) as f64;
        for u in &dirs {
            let z: Vec<Complex64> = u.iter().map(|c| c * t).collect();
            let znorm = t;
            let lo = znorm.max(r_min.unwrap_or(0.0)) + FD_STEP;
            let hi = 1.0 - EPS_INSET - FD_STEP;
            if lo >= hi {
                continue;
            }
            total += 1;
            let mut ok = true;
            for j in 0..grid.radii {
                let r = lo + (hi - lo) * j as f64 / (grid.radii - 1) as f64;
                let g0 = r.powi(k as i32) * w.evaluate(&scale(&z, 1.0 / r))?;
                let r1 = r + FD_STEP;
                let g1 = r1.powi(k as i32) * w.evaluate(&scale(&z, 1.0 / r1))?;
                let slope = (g1 - g0) / FD_STEP;
                if slope < worst_slope {
                    worst_slope = slope;
                    worst_point = GridPoint {
                        r,
                        z: z.iter().map(|c| [c.re, c.im]).collect(),
                    };
                }
                if slope < FD_TOL {
                    ok = false;
                }
            }
            if ok {
                monotone_count += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::invalid(
            "monotonicity grid is empty (r_min too close to 1?)",
        ));
    }
    let fraction = monotone_count as f64 / total as f64;
    Ok(MonotoneReport {
        weight_id: w.id(),
        k,
        r_min,
        grid: *grid,
        fraction_monotone: fraction,
        monotone: fraction == 1.0,
        worst_slope,
        worst_point,
    })
}

fn scale(z: &[Complex64], s: f64) -> Vec<Complex64> {
    z.iter().map(|c| c * s).collect()
}

/// One row of a dilation-convergence table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub r: f64,
    pub norm_fr: f64,
    pub norm_diff: f64,
}

/// Result of a dilation-convergence experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub norm_spec_id: String,
    pub norm_f: f64,
    pub rows: Vec<ConvergenceRow>,
    /// max over the final rows of ‖f_r‖ stays ≤ ‖f‖ (1 + tol)
    pub limsup_check: bool,
    /// final ‖f_r - f‖ below threshold and nonincreasing over the last rows
    pub vanishing_check: bool,
}

/// Window of trailing rows inspected by the limsup and vanishing checks.
const TAIL_WINDOW: usize = 3;
const LIMSUP_TOL: f64 = 1e-6;
/// Vanishing threshold as a fraction of ‖f‖.
const VANISH_FRACTION: f64 = 0.05;

/// Computes `‖f_r‖` and `‖f_r - f‖` for each radius with the spec's norm.
pub fn dilation_convergence(
    f: &PowerSeries,
    s: &NormSpec,
    radii: &[f64],
) -> Result<ConvergenceReport> {
    if radii.is_empty() {
        return Err(Error::invalid("radii list is empty"));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("radii must be strictly increasing"));
    }
    if radii.iter().any(|&r| !(0.0 < r && r < 1.0)) {
        return Err(Error::invalid("radii must lie in (0,1)"));
    }
    let norm_f = compute_norm(f, s)?.value;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let fr = f.dilate(r)?;
        let norm_fr = compute_norm(&fr, s)?.value;
        let diff = fr.sub(f)?;
        let norm_diff = compute_norm(&diff, s)?.value;
        rows.push(ConvergenceRow {
            r,
            norm_fr,
            norm_diff,
        });
    }
    let tail_start = rows.len().saturating_sub(TAIL_WINDOW);
    let tail = &rows[tail_start..];
    let limsup_check = tail
        .iter()
        .all(|row| row.norm_fr <= norm_f * (1.0 + LIMSUP_TOL));
    let nonincreasing = tail.windows(2).all(|w| w[1].norm_diff <= w[0].norm_diff);
    let vanishing_check =
        rows.last().unwrap().norm_diff <= VANISH_FRACTION * norm_f && nonincreasing;
    Ok(ConvergenceReport {
        norm_spec_id: format!("{:?} [{}]", s.kind, s.weight.id()),
        norm_f,
        rows,
        limsup_check,
        vanishing_check,
    })
}

/// One row of a density (truncation-after-dilation) experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityRow {
    pub degree: usize,
    pub error: f64,
}

/// The two-step approximation `f ≈ f_r ≈ truncate(f_r, d)`: reports
/// `‖truncate(f_r, d) - f‖` per degree; the error plateaus at `‖f_r - f‖`.
pub fn density_experiment(
    f: &PowerSeries,
    s: &NormSpec,
    r: f64,
    degrees: &[usize],
) -> Result<Vec<DensityRow>> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::invalid(format!("r must lie in (0,1), got {r}")));
    }
    let fr = f.dilate(r)?;
    let mut rows = Vec::with_capacity(degrees.len());
    for &d in degrees {
        let q = fr.truncate(d);
        let err = compute_norm(&q.sub(f)?, s)?.value;
        rows.push(DensityRow { degree: d, error: err });
    }
    Ok(rows)
}
