//! Shared oracles for the integration tests: a brute-force adaptive 1-D
//! integrator and coefficient-space reference values built from it. These
//! deliberately share no code with the quadrature under test.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bergman::series::{multi_indices_of_degree, MultiIndex, PowerSeries};

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// `∫_D |z|^{2m} (1-|z|²)^α dA = 2π ∫₀¹ ρ^{2m+1} (1-ρ²)^α dρ`, one disk
/// factor of the monomial norm.
pub fn disk_monomial_factor(m: usize, alpha: f64) -> f64 {
    2.0 * std::f64::consts::PI
        * adaptive_simpson(
            &|rho: f64| rho.powi(2 * m as i32 + 1) * (1.0 - rho * rho).powf(alpha),
            0.0,
            1.0,
            1e-13,
        )
}

/// `‖z^m‖²` on D^n against dV_α with w ≡ 1: product of disk factors.
pub fn polydisk_monomial_norm_sq(m: &MultiIndex, alpha: f64) -> f64 {
    m.entries()
        .iter()
        .map(|&mk| disk_monomial_factor(mk, alpha))
        .product()
}

/// `c_k = 2π ∫₀¹ ρ^{2k+1} w(ρ) dρ`, the squared monomial norm on the disk
/// for a radial weight.
pub fn radial_monomial_c(k: usize, w: &dyn Fn(f64) -> f64) -> f64 {
    2.0 * std::f64::consts::PI
        * adaptive_simpson(
            &|rho: f64| rho.powi(2 * k as i32 + 1) * w(rho),
            0.0,
            1.0,
            1e-13,
        )
}

/// The coefficient-space dilation oracle `Σ |a_k|² (1-r^k)² c_k` for radial
/// weights on the disk.
pub fn dilation_diff_sq(f: &PowerSeries, r: f64, c: &dyn Fn(usize) -> f64) -> f64 {
    let mut terms: Vec<f64> = f
        .terms()
        .map(|(m, a)| {
            let k = m.degree();
            let factor = 1.0 - r.powi(k as i32);
            a.norm_sqr() * factor * factor * c(k)
        })
        .collect();
    // smallest-first for a well-conditioned reference sum
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    terms.iter().sum()
}

/// The degree-`deg` truncation of `Σ_k z^k / (k+1)` on D¹.
pub fn log_series(deg: usize) -> PowerSeries {
    let terms: Vec<_> = (0..=deg)
        .map(|k| {
            (
                MultiIndex::new(vec![k]),
                Complex64::new(1.0 / (k + 1) as f64, 0.0),
            )
        })
        .collect();
    PowerSeries::from_terms(1, terms).unwrap()
}

/// Seeded random polynomial on C^n with coefficients in the unit square.
pub fn random_polynomial(n: usize, degree: usize, seed: u64) -> PowerSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for d in 0..=degree {
        for m in multi_indices_of_degree(n, d) {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            terms.push((m, Complex64::new(re, im)));
        }
    }
    PowerSeries::from_terms(n, terms).unwrap()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}
