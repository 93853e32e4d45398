//! Deterministic numerical integration on the polydisk and the unit ball.
//!
//! Polydisk: tensor products of Gauss–Legendre (radial) and uniform
//! trapezoid (angular) rules. Ball: polar decomposition with Gauss–Legendre
//! in the radius and a seeded set of directions shared across all radii.
//!
//! All reductions are fixed-order pairwise sums over a fixed chunk grid, so
//! the result is bit-identical regardless of how many workers evaluate nodes.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Polydisk { n: usize },
    Ball { n: usize },
}

impl Domain {
    pub fn dimension(&self) -> usize {
        match self {
            Domain::Polydisk { n } | Domain::Ball { n } => *n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `dV_α = Π (1-|z_k|^2)^α dx_k dy_k` on the polydisk (unnormalized area).
    VAlpha { alpha: f64 },
    /// Normalized volume `dv` on the ball (total mass 1).
    VolumeNormalized,
    /// `dτ = dv / (1-|z|^2)^{n+1}` integrated over `|z| ≤ rho_max` only.
    TauTruncated { rho_max: f64 },
}

/// A domain together with the measure integrated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainMeasure {
    pub domain: Domain,
    pub measure: Measure,
}

impl DomainMeasure {
    pub fn polydisk_valpha(n: usize, alpha: f64) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::invalid(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(DomainMeasure {
            domain: Domain::Polydisk { n },
            measure: Measure::VAlpha { alpha },
        })
    }

    pub fn ball_volume(n: usize) -> Self {
        DomainMeasure {
            domain: Domain::Ball { n },
            measure: Measure::VolumeNormalized,
        }
    }

    pub fn ball_tau_truncated(n: usize, rho_max: f64) -> Result<Self> {
        if !(0.0 < rho_max && rho_max < 1.0) {
            return Err(Error::invalid(format!(
                "rho_max must lie in (0,1), got {rho_max}"
            )));
        }
        Ok(DomainMeasure {
            domain: Domain::Ball { n },
            measure: Measure::TauTruncated { rho_max },
        })
    }

    pub fn validate(&self) -> Result<()> {
        match (self.domain, self.measure) {
            (Domain::Polydisk { .. }, Measure::VAlpha { alpha }) => {
                if alpha < 0.0 {
                    return Err(Error::invalid(format!("alpha must be >= 0, got {alpha}")));
                }
            }
            (Domain::Ball { .. }, Measure::VolumeNormalized) => {}
            (Domain::Ball { .. }, Measure::TauTruncated { rho_max }) => {
                if !(0.0 < rho_max && rho_max < 1.0) {
                    return Err(Error::invalid(format!(
                        "rho_max must lie in (0,1), got {rho_max}"
                    )));
                }
            }
            (d, m) => {
                return Err(Error::invalid(format!(
                    "measure {m:?} is not admissible on domain {d:?}"
                )))
            }
        }
        Ok(())
    }
}

/// Node counts and the seed for the directional sampling on the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub sphere_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_nodes: 64,
            angular_nodes: 128,
            sphere_samples: 4096,
            seed: 0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 4 {
            return Err(Error::invalid("radial_nodes must be >= 4"));
        }
        if self.angular_nodes < 8 {
            return Err(Error::invalid("angular_nodes must be >= 8"));
        }
        if self.sphere_samples < 64 {
            return Err(Error::invalid("sphere_samples must be >= 64"));
        }
        Ok(())
    }

    /// One refinement step: node counts doubled, sphere samples quadrupled.
    pub fn refined(&self) -> Self {
        QuadratureSpec {
            radial_nodes: self.radial_nodes * 2,
            angular_nodes: self.angular_nodes * 2,
            sphere_samples: self.sphere_samples * 4,
            seed: self.seed,
        }
    }
}

/// Default truncation radius for the singular measure dτ: 1 - 2^-12.
pub const DEFAULT_RHO_MAX: f64 = 1.0 - 1.0 / 4096.0;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    )
}

/// Fixed-order pairwise (cascade) sum. Independent of any parallel schedule.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Chunk width for the parallel evaluation grid. Fixed so that the grouping
/// of the reduction never depends on the worker count.
const CHUNK: usize = 4096;

/// Evaluates `f(i)` for `i in 0..total` and returns the pairwise sum, with
/// chunks evaluated in parallel but combined in fixed order.
fn parallel_pairwise<F>(total: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let n_chunks = total.div_ceil(CHUNK);
    let chunk_sums: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(total);
            let vals: Result<Vec<f64>> = (lo..hi).map(&f).collect();
            vals.map(|v| pairwise_sum(&v))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&chunk_sums))
}

/// Tensor-product quadrature of `g` against `dV_α` on `D^n`.
///
/// Per coordinate, `z = ρ e^{iθ}` with Gauss–Legendre on ρ ∈ [0,1] (the
/// Jacobian `ρ (1-ρ²)^α` folded into the node weights) and a uniform angular
/// grid with weights `2π / angular_nodes`. The area convention is the raw
/// `dx dy`, so `∫_D 1 dA = π`.
pub fn integrate_polydisk<G>(g: G, dm: &DomainMeasure, q: &QuadratureSpec) -> Result<f64>
where
    G: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    dm.validate()?;
    q.validate()?;
    let (n, alpha) = match (dm.domain, dm.measure) {
        (Domain::Polydisk { n }, Measure::VAlpha { alpha }) => (n, alpha),
        _ => {
            return Err(Error::invalid(
                "integrate_polydisk requires a Polydisk domain with dV_alpha",
            ))
        }
    };
    let (rho, mut wr) = gauss_legendre_on(q.radial_nodes, 0.0, 1.0);
    for (w, r) in wr.iter_mut().zip(&rho) {
        *w *= r * (1.0 - r * r).powf(alpha);
    }
    let na = q.angular_nodes;
    let wtheta = std::f64::consts::TAU / na as f64;
    // per-axis node list: all (rho_i, theta_j) pairs
    let axis_len = q.radial_nodes * na;
    let axis: Vec<(Complex64, f64)> = (0..axis_len)
        .map(|idx| {
            let i = idx / na;
            let j = idx % na;
            let theta = std::f64::consts::TAU * j as f64 / na as f64;
            (
                Complex64::from_polar(rho[i], theta),
                wr[i] * wtheta,
            )
        })
        .collect();

    let total = axis_len.checked_pow(n as u32).ok_or_else(|| {
        Error::invalid("quadrature grid too large")
    })?;
    parallel_pairwise(total, |flat| {
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut w = 1.0;
        let mut rest = flat;
        for zk in z.iter_mut() {
            let idx = rest % axis_len;
            rest /= axis_len;
            let (node, nw) = axis[idx];
            *zk = node;
            w *= nw;
        }
        let v = g(&z)?;
        if !v.is_finite() {
            return Err(Error::Integration {
                node: crate::weights::format_point(&z),
                detail: format!("integrand returned {v}"),
            });
        }
        Ok(w * v)
    })
}

/// Seeded directions on the unit sphere of C^n (normalized Gaussians),
/// shared across all radii of the polar rule.
pub fn sphere_directions(n: usize, samples: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            loop {
                let raw: Vec<Complex64> = (0..n)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect();
                let norm = raw.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    return raw.iter().map(|w| w / norm).collect();
                }
            }
        })
        .collect()
}

/// Polar-decomposition quadrature on the ball with an arbitrary extra radial
/// factor:
/// `∫ g dv ≈ 2n Σ_i w_i ρ_i^{2n-1} radial_factor(ρ_i) · mean_j g(ρ_i u_j)`.
pub fn integrate_ball_with_radial_factor<G, H>(
    g: G,
    n: usize,
    rho_max: f64,
    radial_factor: H,
    q: &QuadratureSpec,
) -> Result<f64>
where
    G: Fn(&[Complex64]) -> Result<f64> + Sync,
    H: Fn(f64) -> f64,
{
    q.validate()?;
    let dirs = sphere_directions(n, q.sphere_samples, q.seed);
    let (rho, wr) = gauss_legendre_on(q.radial_nodes, 0.0, rho_max);
    let m = dirs.len();
    let shell_means: Vec<f64> = rho
        .iter()
        .map(|&r| {
            let sum = parallel_pairwise(m, |j| {
                let z: Vec<Complex64> = dirs[j].iter().map(|u| u * r).collect();
                let v = g(&z)?;
                if !v.is_finite() {
                    return Err(Error::Integration {
                        node: crate::weights::format_point(&z),
                        detail: format!("integrand returned {v}"),
                    });
                }
                Ok(v)
            })?;
            Ok(sum / m as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let terms: Vec<f64> = rho
        .iter()
        .zip(&wr)
        .zip(&shell_means)
        .map(|((&r, &w), &mean)| {
            2.0 * n as f64 * w * r.powi(2 * n as i32 - 1) * radial_factor(r) * mean
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Quadrature of `g` against `dv` (normalized) or truncated `dτ` on `B_n`.
pub fn integrate_ball<G>(g: G, dm: &DomainMeasure, q: &QuadratureSpec) -> Result<f64>
where
    G: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    dm.validate()?;
    let n = match dm.domain {
        Domain::Ball { n } => n,
        _ => return Err(Error::invalid("integrate_ball requires a Ball domain")),
    };
    match dm.measure {
        Measure::VolumeNormalized => integrate_ball_with_radial_factor(g, n, 1.0, |_| 1.0, q),
        Measure::TauTruncated { rho_max } => integrate_ball_with_radial_factor(
            g,
            n,
            rho_max,
            |r| (1.0 - r * r).powi(-(n as i32 + 1)),
            q,
        ),
        _ => Err(Error::invalid("integrate_ball requires dv or truncated dτ")),
    }
}

/// Integrates at `levels` successively refined quadrature specs; successive
/// differences serve as the caller's error estimate.
pub fn convergence_sweep<G>(
    g: G,
    dm: &DomainMeasure,
    base: &QuadratureSpec,
    levels: usize,
) -> Result<Vec<(QuadratureSpec, f64)>>
where
    G: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    if levels < 2 {
        return Err(Error::invalid("convergence sweep needs at least 2 levels"));
    }
    let mut spec = *base;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let value = match dm.domain {
            Domain::Polydisk { .. } => integrate_polydisk(&g, dm, &spec)?,
            Domain::Ball { .. } => integrate_ball(&g, dm, &spec)?,
        };
        out.push((spec, value));
        spec = spec.refined();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn small() -> QuadratureSpec {
        QuadratureSpec {
            radial_nodes: 24,
            angular_nodes: 32,
            sphere_samples: 512,
            seed: 7,
        }
    }

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre_on(8, 0.0, 1.0);
        // degree up to 15 exact
        for k in 0..=15usize {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert_abs_diff_eq!(s, 1.0 / (k as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn disk_area() {
        let dm = DomainMeasure::polydisk_valpha(1, 0.0).unwrap();
        let v = integrate_polydisk(|_| Ok(1.0), &dm, &small()).unwrap();
        assert_abs_diff_eq!(v, PI, epsilon = 1e-12);
    }

    #[test]
    fn bidisk_area() {
        let dm = DomainMeasure::polydisk_valpha(2, 0.0).unwrap();
        let q = QuadratureSpec {
            radial_nodes: 12,
            angular_nodes: 16,
            sphere_samples: 64,
            seed: 0,
        };
        let v = integrate_polydisk(|_| Ok(1.0), &dm, &q).unwrap();
        assert_abs_diff_eq!(v, PI * PI, epsilon = 1e-10);
    }

    #[test]
    fn disk_second_moment() {
        // ∫_D |z|^2 dA = π/2
        let dm = DomainMeasure::polydisk_valpha(1, 0.0).unwrap();
        let v = integrate_polydisk(|z| Ok(z[0].norm_sqr()), &dm, &small()).unwrap();
        assert_abs_diff_eq!(v, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn disk_alpha_one_mass() {
        // 2π ∫ ρ(1-ρ²) dρ = π/2
        let dm = DomainMeasure::polydisk_valpha(1, 1.0).unwrap();
        let v = integrate_polydisk(|_| Ok(1.0), &dm, &small()).unwrap();
        assert_abs_diff_eq!(v, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ball_mass_is_one() {
        for n in 1..=3usize {
            let dm = DomainMeasure::ball_volume(n);
            let v = integrate_ball(|_| Ok(1.0), &dm, &small()).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn disk_normalized_second_moment() {
        // n=1: ∫ |z|^2 dv = 2 ∫ ρ^3 dρ = 1/2 (direction-independent, so
        // the spherical mean is exact)
        let dm = DomainMeasure::ball_volume(1);
        let v = integrate_ball(|z| Ok(z[0].norm_sqr()), &dm, &small()).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn ball2_coordinate_moment() {
        // ∫_{B_2} |z_1|^2 dv = 1/3; directional variance bounded by the
        // seeded sample size, tolerance chosen accordingly
        let dm = DomainMeasure::ball_volume(2);
        let q = QuadratureSpec {
            radial_nodes: 24,
            angular_nodes: 32,
            sphere_samples: 1 << 15,
            seed: 42,
        };
        let v = integrate_ball(|z| Ok(z[0].norm_sqr()), &dm, &q).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 5e-3);
    }

    #[test]
    fn tau_truncated_monotone_in_rho_max() {
        let q = small();
        let mut last = 0.0;
        for rho_max in [0.5, 0.7, 0.9, 0.99] {
            let dm = DomainMeasure::ball_tau_truncated(1, rho_max).unwrap();
            let v = integrate_ball(|z| Ok((1.0 - z[0].norm_sqr()).powi(3)), &dm, &q).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn determinism_across_worker_counts() {
        let dm = DomainMeasure::polydisk_valpha(1, 0.5).unwrap();
        let g = |z: &[Complex64]| Ok((z[0].norm_sqr() + 0.3).sqrt());
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let v1 = pool1.install(|| integrate_polydisk(g, &dm, &small()).unwrap());
        let v8 = pool8.install(|| integrate_polydisk(g, &dm, &small()).unwrap());
        assert_eq!(v1.to_bits(), v8.to_bits());

        let dmb = DomainMeasure::ball_volume(2);
        let gb = |z: &[Complex64]| Ok(z[0].norm() + z[1].norm_sqr());
        let b1 = pool1.install(|| integrate_ball(gb, &dmb, &small()).unwrap());
        let b8 = pool8.install(|| integrate_ball(gb, &dmb, &small()).unwrap());
        assert_eq!(b1.to_bits(), b8.to_bits());
    }

    #[test]
    fn sweep_needs_two_levels() {
        let dm = DomainMeasure::polydisk_valpha(1, 0.0).unwrap();
        assert!(convergence_sweep(|_| Ok(1.0), &dm, &small(), 1).is_err());
    }

    #[test]
    fn sweep_constant_is_flat() {
        let dm = DomainMeasure::polydisk_valpha(1, 0.0).unwrap();
        let q = QuadratureSpec {
            radial_nodes: 8,
            angular_nodes: 8,
            sphere_samples: 64,
            seed: 0,
        };
        let rows = convergence_sweep(|_| Ok(1.0), &dm, &q, 3).unwrap();
        for (_, v) in &rows {
            assert_abs_diff_eq!(*v, PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn sweep_differences_shrink() {
        // |z|^0.5 is not polynomial; refinement should reduce the change
        let dm = DomainMeasure::polydisk_valpha(1, 0.0).unwrap();
        let q = QuadratureSpec {
            radial_nodes: 8,
            angular_nodes: 8,
            sphere_samples: 64,
            seed: 0,
        };
        let rows = convergence_sweep(|z| Ok(z[0].norm().sqrt()), &dm, &q, 4).unwrap();
        let d1 = (rows[1].1 - rows[0].1).abs();
        let d2 = (rows[2].1 - rows[1].1).abs();
        let d3 = (rows[3].1 - rows[2].1).abs();
        assert!(d2 < d1);
        assert!(d3 < d2);
    }

    #[test]
    fn nonfinite_integrand_reports_node() {
        let dm = DomainMeasure::polydisk_valpha(1, 0.0).unwrap();
        let r = integrate_polydisk(|z| Ok(1.0 / (z[0].norm() - z[0].norm())), &dm, &small());
        assert!(matches!(r, Err(Error::Integration { .. })));
    }

    #[test]
    fn positive_weights() {
        let (_, w) = gauss_legendre(64);
        assert!(w.iter().all(|&x| x > 0.0));
    }
}
