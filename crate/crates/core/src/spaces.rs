//! The norms: weighted Bergman norms on `D^n` and `B_n`, Besov/Dirichlet
//! norms on the ball, the radial-derivative Besov norm on the polydisk, and
//! exact coefficient-space norms for angular and radial×angular weights.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::integrate::{
    self, DomainMeasure, QuadratureSpec, DEFAULT_RHO_MAX,
};
use crate::series::{multi_indices_of_degree, MultiIndex, PowerSeries};
use crate::weights::{Weight, WeightKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NormKind {
    /// `‖f‖^p = ∫_{D^n} |f|^p w dV_α`
    BergmanPolydisk { p: f64, alpha: f64 },
    /// `‖f‖^p = ∫_{B_n} |f|^p w dv`
    BergmanBall { p: f64 },
    /// `‖f‖^p = Σ_{|m|≤N-1} |∂^m f(0)|^p + Σ_{|m|=N} ∫ |(1-|z|²)^N ∂^m f|^p w dτ`
    BesovBall { p: f64, order: usize },
    /// BesovBall with p = 2.
    DirichletBall { order: usize },
    /// `‖f‖^p = |f(0)|^p + ∫_{D^n} Π(1-|z_j|²)^{p-2} |Rf|^p w dV`
    RadialBesovPolydisk { p: f64 },
}

/// How a Bergman polydisk norm is computed: by quadrature, or by the exact
/// coefficient-space formula (p = 2, angular or product weights only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormRoute {
    #[default]
    Quadrature,
    ExactCoefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub dimension: usize,
    #[serde(flatten)]
    pub kind: NormKind,
    pub weight: Weight,
    pub quadrature: QuadratureSpec,
    /// Truncation radius for the singular measure dτ (ball Besov norms).
    pub rho_max: f64,
    /// Drop the origin terms, leaving the approximation seminorm.
    pub seminorm: bool,
    pub route: NormRoute,
}

impl NormSpec {
    pub fn new(dimension: usize, kind: NormKind, weight: Weight) -> Self {
        NormSpec {
            dimension,
            kind,
            weight,
            quadrature: QuadratureSpec::default(),
            rho_max: DEFAULT_RHO_MAX,
            seminorm: false,
            route: NormRoute::Quadrature,
        }
    }

    pub fn p(&self) -> f64 {
        match self.kind {
            NormKind::BergmanPolydisk { p, .. }
            | NormKind::BergmanBall { p }
            | NormKind::BesovBall { p, .. }
            | NormKind::RadialBesovPolydisk { p } => p,
            NormKind::DirichletBall { .. } => 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if self.weight.dimension() != self.dimension {
            return Err(Error::InvalidSpec(format!(
                "weight dimension {} does not match norm dimension {}",
                self.weight.dimension(),
                self.dimension
            )));
        }
        if self.p() <= 0.0 {
            return Err(Error::InvalidSpec(format!("p must be > 0, got {}", self.p())));
        }
        match self.kind {
            NormKind::BergmanPolydisk { alpha, .. } => {
                if alpha < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "alpha must be >= 0, got {alpha}"
                    )));
                }
            }
            NormKind::BesovBall { p, order } => {
                if order == 0 {
                    return Err(Error::InvalidSpec("order N must be positive".into()));
                }
                if p * order as f64 <= self.dimension as f64 {
                    return Err(Error::InvalidSpec(format!(
                        "Besov norm requires pN > n; got p = {p}, N = {order}, n = {}",
                        self.dimension
                    )));
                }
            }
            NormKind::DirichletBall { order } => {
                if order == 0 {
                    return Err(Error::InvalidSpec("order N must be positive".into()));
                }
                if 2.0 * order as f64 <= self.dimension as f64 {
                    return Err(Error::InvalidSpec(format!(
                        "Dirichlet norm requires 2N > n; got N = {order}, n = {}",
                        self.dimension
                    )));
                }
            }
            NormKind::RadialBesovPolydisk { p } => {
                if p < 2.0 {
                    return Err(Error::InvalidSpec(format!(
                        "radial Besov norm requires p >= 2, got {p}"
                    )));
                }
            }
            NormKind::BergmanBall { .. } => {}
        }
        if self.route == NormRoute::ExactCoefficient {
            let ok = matches!(self.kind, NormKind::BergmanPolydisk { p, .. } if p == 2.0)
                && (self.weight.is_angular() || self.weight.is_product());
            if !ok {
                return Err(Error::InvalidSpec(
                    "exact coefficient route requires a p = 2 polydisk Bergman norm \
                     with an angular or radial-angular product weight"
                        .into(),
                ));
            }
        }
        if !(0.0 < self.rho_max && self.rho_max < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "rho_max must lie in (0,1), got {}",
                self.rho_max
            )));
        }
        Ok(())
    }
}

/// The outcome of a norm computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormResult {
    /// `‖f‖`
    pub value: f64,
    /// `‖f‖^p`; equals the sum of `pieces`.
    pub value_pow_p: f64,
    pub error_estimate: f64,
    /// Per-term contributions to `value_pow_p`, keyed by multi-index (or
    /// "origin" for the aggregated origin terms).
    pub pieces: BTreeMap<String, f64>,
}

impl NormResult {
    fn from_pieces(p: f64, pieces: BTreeMap<String, f64>, error_estimate: f64) -> Self {
        let value_pow_p: f64 = pieces.values().sum();
        NormResult {
            value: value_pow_p.powf(1.0 / p),
            value_pow_p,
            error_estimate,
            pieces,
        }
    }
}

/// Radial moment `B_α(m) = ∫_0^1 ρ^{2m+1} (1-ρ²)^α dρ
/// = Γ(m+1) Γ(α+1) / (2 Γ(m+α+2))`.
pub fn radial_moment(m: usize, alpha: f64) -> f64 {
    (ln_gamma(m as f64 + 1.0) + ln_gamma(alpha + 1.0)
        - ln_gamma(m as f64 + alpha + 2.0))
    .exp()
        / 2.0
}

/// Squared Bergman norm of the monomial `z^m` on `D^n` with `w ≡ 1`:
/// `Π_k 2π B_α(m_k)`.
pub fn monomial_norm_sq(m: &MultiIndex, alpha: f64) -> f64 {
    m.entries()
        .iter()
        .map(|&mk| std::f64::consts::TAU * radial_moment(mk, alpha))
        .product()
}

/// Product trapezoid rule for `∫_{T^n} w(θ) dθ` on the uniform angular grid.
fn torus_integral(w: &Weight, n: usize, angular_nodes: usize) -> Result<f64> {
    let step = std::f64::consts::TAU / angular_nodes as f64;
    let total = angular_nodes.pow(n as u32);
    let mut vals = Vec::with_capacity(total);
    let mut th = vec![0.0f64; n];
    for flat in 0..total {
        let mut rest = flat;
        for t in th.iter_mut() {
            *t = step * (rest % angular_nodes) as f64;
            rest /= angular_nodes;
        }
        vals.push(w.evaluate_angular(&th)?);
    }
    Ok(integrate::pairwise_sum(&vals) * step.powi(n as i32))
}

/// Weighted radial moments `γ_m` for a radial×angular product weight:
/// tensor Gauss–Legendre over `I^n` of `Π r_k^{2m_k} (1-r_k²)^α r_k · ω(r)`.
fn gamma_moments(
    w: &Weight,
    alpha: f64,
    indices: &[&MultiIndex],
    radial_nodes: usize,
) -> Result<Vec<f64>> {
    let n = w.dimension();
    let (r, wr) = integrate::gauss_legendre_on(radial_nodes, 0.0, 1.0);
    let total = radial_nodes.pow(n as u32);
    // precompute ω(r) and the base factor (1-r_k²)^α r_k on the grid once
    let mut omega = Vec::with_capacity(total);
    let mut base = Vec::with_capacity(total);
    let mut node = vec![0.0f64; n];
    for flat in 0..total {
        let mut rest = flat;
        let mut b = 1.0;
        for (k, nk) in node.iter_mut().enumerate() {
            let i = rest % radial_nodes;
            rest /= radial_nodes;
            *nk = r[i];
            b *= wr[i] * (1.0 - r[i] * r[i]).powf(alpha) * r[i];
            let _ = k;
        }
        omega.push(w.evaluate_radial(&node)?);
        base.push(b);
    }
    let mut out = Vec::with_capacity(indices.len());
    for m in indices {
        let mut vals = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut pow = 1.0;
            for &mk in m.entries() {
                let i = rest % radial_nodes;
                rest /= radial_nodes;
                pow *= r[i].powi(2 * mk as i32);
            }
            vals.push(base[flat] * omega[flat] * pow);
        }
        out.push(integrate::pairwise_sum(&vals));
    }
    Ok(out)
}

/// Per-term data of the exact coefficient-space norm: the angular integral
/// and, for each stored index `m`, the radial moment `γ_m`.
fn exact_norm_terms(
    f: &PowerSeries,
    w: &Weight,
    alpha: f64,
    q: &QuadratureSpec,
) -> Result<(f64, Vec<(MultiIndex, f64)>)> {
    let n = w.dimension();
    if f.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.dimension(),
        });
    }
    if alpha < 0.0 {
        return Err(Error::invalid(format!("alpha must be >= 0, got {alpha}")));
    }
    let angular_integral = torus_integral(w, n, q.angular_nodes)?;
    let gammas: Vec<(MultiIndex, f64)> = match w.kind() {
        WeightKind::Angular { .. } => f
            .terms()
            .map(|(m, _)| {
                let g: f64 = m
                    .entries()
                    .iter()
                    .map(|&mk| radial_moment(mk, alpha))
                    .product();
                (m.clone(), g)
            })
            .collect(),
        WeightKind::RadialAngularProduct { .. } => {
            let indices: Vec<&MultiIndex> = f.terms().map(|(m, _)| m).collect();
            let gs = gamma_moments(w, alpha, &indices, q.radial_nodes)?;
            indices.into_iter().cloned().zip(gs).collect()
        }
        _ => {
            return Err(Error::invalid(
                "exact coefficient-space norm requires an angular or product weight",
            ))
        }
    };
    Ok((angular_integral, gammas))
}

/// Exact coefficient-space norm for an angular weight (p = 2):
/// `‖f‖² = (∫_{T^n} w dθ) Σ_m |a_m|² Π_k B_α(m_k)`.
pub fn angular_exact_norm(
    f: &PowerSeries,
    w: &Weight,
    alpha: f64,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    if !w.is_angular() {
        return Err(Error::invalid("angular_exact_norm requires an angular weight"));
    }
    exact_norm_result(f, w, alpha, q)
}

/// Exact coefficient-space norm for a radial×angular product weight (p = 2):
/// `‖f‖² = (∫_{T^n} ν dθ) Σ_m |a_m|² γ_m`.
pub fn product_exact_norm(
    f: &PowerSeries,
    w: &Weight,
    alpha: f64,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    if !w.is_product() {
        return Err(Error::invalid(
            "product_exact_norm requires a radial-angular product weight",
        ));
    }
    exact_norm_result(f, w, alpha, q)
}

fn exact_norm_result(
    f: &PowerSeries,
    w: &Weight,
    alpha: f64,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    let (angular_integral, gammas) = exact_norm_terms(f, w, alpha, q)?;
    let mut pieces = BTreeMap::new();
    for (m, g) in gammas {
        let a = f.coefficient(&m);
        pieces.insert(m.to_string(), angular_integral * a.norm_sqr() * g);
    }
    Ok(NormResult::from_pieces(2.0, pieces, 0.0))
}

/// Tail of the exact coefficient-space norm: `‖f - p_k‖` computed
/// coefficientwise over `|m| ≥ k+1`.
pub fn taylor_error(
    f: &PowerSeries,
    k: usize,
    w: &Weight,
    alpha: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let (angular_integral, gammas) = exact_norm_terms(f, w, alpha, q)?;
    let tail: Vec<f64> = gammas
        .iter()
        .filter(|(m, _)| m.degree() > k)
        .map(|(m, g)| angular_integral * f.coefficient(m).norm_sqr() * g)
        .collect();
    Ok(integrate::pairwise_sum(&tail).sqrt())
}

/// Weighted Bergman norm via quadrature (polydisk or ball), or via the exact
/// coefficient route when the spec requests it.
pub fn bergman_norm(f: &PowerSeries, s: &NormSpec) -> Result<NormResult> {
    s.validate()?;
    if f.dimension() != s.dimension {
        return Err(Error::DimensionMismatch {
            expected: s.dimension,
            got: f.dimension(),
        });
    }
    match s.kind {
        NormKind::BergmanPolydisk { p, alpha } => {
            if s.route == NormRoute::ExactCoefficient {
                return exact_norm_result(f, &s.weight, alpha, &s.quadrature);
            }
            let dm = DomainMeasure::polydisk_valpha(s.dimension, alpha)?;
            let w = &s.weight;
            let integral = integrate::integrate_polydisk(
                |z| Ok(f.evaluate(z)?.norm().powf(p) * w.evaluate(z)?),
                &dm,
                &s.quadrature,
            )?;
            let mut pieces = BTreeMap::new();
            pieces.insert("integral".to_string(), integral);
            Ok(NormResult::from_pieces(p, pieces, 0.0))
        }
        NormKind::BergmanBall { p } => {
            let dm = DomainMeasure::ball_volume(s.dimension);
            let w = &s.weight;
            let integral = integrate::integrate_ball(
                |z| Ok(f.evaluate(z)?.norm().powf(p) * w.evaluate(z)?),
                &dm,
                &s.quadrature,
            )?;
            let mut pieces = BTreeMap::new();
            pieces.insert("integral".to_string(), integral);
            Ok(NormResult::from_pieces(p, pieces, 0.0))
        }
        _ => Err(Error::InvalidSpec(
            "bergman_norm requires a Bergman norm kind".into(),
        )),
    }
}

/// `∂^m f(0) = a_m · Π m_k!` for a power series.
fn partial_at_origin(f: &PowerSeries, m: &MultiIndex) -> Complex64 {
    let mut fact = 1.0f64;
    for &mk in m.entries() {
        for j in 1..=mk {
            fact *= j as f64;
        }
    }
    f.coefficient(m) * fact
}

/// Ball Besov (or Dirichlet) norm with the τ-singularity cancelled
/// analytically: the `|m| = N` terms are integrals of
/// `|∂^m f|^p w (1-|z|²)^{pN-n-1}` against `dv`, truncated at `rho_max`.
pub fn besov_ball_norm(f: &PowerSeries, s: &NormSpec) -> Result<NormResult> {
    s.validate()?;
    if f.dimension() != s.dimension {
        return Err(Error::DimensionMismatch {
            expected: s.dimension,
            got: f.dimension(),
        });
    }
    let (p, order) = match s.kind {
        NormKind::BesovBall { p, order } => (p, order),
        NormKind::DirichletBall { order } => (2.0, order),
        _ => {
            return Err(Error::InvalidSpec(
                "besov_ball_norm requires a ball Besov or Dirichlet kind".into(),
            ))
        }
    };
    besov_ball_norm_at(f, s, p, order, s.rho_max)
}

fn besov_ball_norm_at(
    f: &PowerSeries,
    s: &NormSpec,
    p: f64,
    order: usize,
    rho_max: f64,
) -> Result<NormResult> {
    let n = s.dimension;
    let mut pieces = BTreeMap::new();
    if !s.seminorm {
        let mut origin = 0.0;
        for deg in 0..order {
            for m in multi_indices_of_degree(n, deg) {
                origin += partial_at_origin(f, &m).norm().powf(p);
            }
        }
        pieces.insert("origin".to_string(), origin);
    }
    let exponent = p * order as f64 - n as f64 - 1.0;
    let w = &s.weight;
    for m in multi_indices_of_degree(n, order) {
        let d = f.partial_derivative(&m)?;
        let term = integrate::integrate_ball_with_radial_factor(
            |z| Ok(d.evaluate(z)?.norm().powf(p) * w.evaluate(z)?),
            n,
            rho_max,
            |r| (1.0 - r * r).powf(exponent),
            &s.quadrature,
        )?;
        pieces.insert(m.to_string(), term);
    }
    Ok(NormResult::from_pieces(p, pieces, 0.0))
}

/// Sweeps the τ truncation toward the boundary: level `i` uses
/// `1 - rho_max_i = (1 - s.rho_max) · 2^{levels-1-i}`, so the last level is
/// the spec's own `rho_max`. Returns the norm value per level.
pub fn besov_ball_norm_sweep(f: &PowerSeries, s: &NormSpec, levels: usize) -> Result<Vec<f64>> {
    if levels < 2 {
        return Err(Error::invalid("rho_max sweep needs at least 2 levels"));
    }
    let (p, order) = match s.kind {
        NormKind::BesovBall { p, order } => (p, order),
        NormKind::DirichletBall { order } => (2.0, order),
        _ => {
            return Err(Error::InvalidSpec(
                "besov_ball_norm_sweep requires a ball Besov or Dirichlet kind".into(),
            ))
        }
    };
    s.validate()?;
    let mut out = Vec::with_capacity(levels);
    for i in 0..levels {
        let gap = (1.0 - s.rho_max) * 2f64.powi((levels - 1 - i) as i32);
        let rho_max = (1.0 - gap).max(0.5);
        out.push(besov_ball_norm_at(f, s, p, order, rho_max)?.value);
    }
    Ok(out)
}

/// Polydisk Besov norm built on the radial derivative:
/// `‖f‖^p = |f(0)|^p + ∫_{D^n} Π_j (1-|z_j|²)^{p-2} |Rf|^p w dV`.
pub fn radial_besov_norm(f: &PowerSeries, s: &NormSpec) -> Result<NormResult> {
    s.validate()?;
    if f.dimension() != s.dimension {
        return Err(Error::DimensionMismatch {
            expected: s.dimension,
            got: f.dimension(),
        });
    }
    let p = match s.kind {
        NormKind::RadialBesovPolydisk { p } => p,
        _ => {
            return Err(Error::InvalidSpec(
                "radial_besov_norm requires the radial Besov kind".into(),
            ))
        }
    };
    let rf = f.radial_derivative();
    let dm = DomainMeasure::polydisk_valpha(s.dimension, 0.0)?;
    let w = &s.weight;
    let integral = integrate::integrate_polydisk(
        |z| {
            let damp: f64 = z
                .iter()
                .map(|zk| (1.0 - zk.norm_sqr()).powf(p - 2.0))
                .product();
            Ok(damp * rf.evaluate(z)?.norm().powf(p) * w.evaluate(z)?)
        },
        &dm,
        &s.quadrature,
    )?;
    let mut pieces = BTreeMap::new();
    if !s.seminorm {
        pieces.insert("origin".to_string(), f.at_origin().norm().powf(p));
    }
    pieces.insert("radial".to_string(), integral);
    Ok(NormResult::from_pieces(p, pieces, 0.0))
}

/// Dispatches to the norm operation selected by the spec's kind and route.
pub fn compute_norm(f: &PowerSeries, s: &NormSpec) -> Result<NormResult> {
    match s.kind {
        NormKind::BergmanPolydisk { .. } | NormKind::BergmanBall { .. } => bergman_norm(f, s),
        NormKind::BesovBall { .. } | NormKind::DirichletBall { .. } => besov_ball_norm(f, s),
        NormKind::RadialBesovPolydisk { .. } => radial_besov_norm(f, s),
    }
}
