//! Weight functions `w` on the polydisk and the unit ball.
//!
//! Every built-in family from the convergence experiments is here
//! (standard-α, Gaussian in two flavours, exp(|z|), angular, radial×angular
//! products) plus parsed user expressions.

pub mod expr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use expr::{EvalContext, Expr};

/// Which dilation-domain check applies to a weight kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightDomain {
    /// requires every |z_j| < 1 (resp. < r for dilation ratios)
    Polydisk,
    /// requires Euclidean |z| < 1 (resp. < r)
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianMode {
    /// depends on |z|^2 = Σ |z_k|^2
    Full,
    /// depends on Σ (Re z_k)^2 only; non-radial
    RealPart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `w(z) = Π (α+1)(1-|z_k|^2)^α`
    StandardAlpha { alpha: f64 },
    /// `w(z) = exp(-β |z|^2)` (full) or `exp(-β Σ x_k^2)` (real-part)
    Gaussian { beta: f64, mode: GaussianMode },
    /// `w(z) = exp(|z|)`
    ExpModulus,
    /// depends only on the arguments θ_1..θ_n
    Angular { expr: Expr },
    /// `w = ω(r_1..r_n) · ν(θ_1..θ_n)`
    RadialAngularProduct { radial: Expr, angular: Expr },
    /// arbitrary parsed expression
    Expression { expr: Expr },
}

/// A positive weight function on `D^n` or `B_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    dimension: usize,
    kind: WeightKind,
}

impl Weight {
    pub fn new(dimension: usize, kind: WeightKind) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("weight dimension must be positive"));
        }
        match &kind {
            WeightKind::StandardAlpha { alpha } => {
                if *alpha < 0.0 {
                    return Err(Error::invalid(format!("alpha must be >= 0, got {alpha}")));
                }
            }
            WeightKind::Gaussian { beta, .. } => {
                if *beta <= 0.0 {
                    return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
                }
            }
            WeightKind::Angular { expr } => {
                if !expr.is_angular_only() {
                    return Err(Error::invalid(
                        "angular weight expression may reference only th<k> variables",
                    ));
                }
                check_index(expr, dimension)?;
            }
            WeightKind::RadialAngularProduct { radial, angular } => {
                if !radial.is_radial_only() {
                    return Err(Error::invalid(
                        "radial factor may reference only r<k> variables",
                    ));
                }
                if !angular.is_angular_only() {
                    return Err(Error::invalid(
                        "angular factor may reference only th<k> variables",
                    ));
                }
                check_index(radial, dimension)?;
                check_index(angular, dimension)?;
            }
            WeightKind::Expression { expr } => check_index(expr, dimension)?,
            WeightKind::ExpModulus => {}
        }
        Ok(Weight { dimension, kind })
    }

    pub fn standard_alpha(dimension: usize, alpha: f64) -> Result<Self> {
        Weight::new(dimension, WeightKind::StandardAlpha { alpha })
    }

    pub fn gaussian(dimension: usize, beta: f64, mode: GaussianMode) -> Result<Self> {
        Weight::new(dimension, WeightKind::Gaussian { beta, mode })
    }

    pub fn exp_modulus(dimension: usize) -> Result<Self> {
        Weight::new(dimension, WeightKind::ExpModulus)
    }

    pub fn angular(dimension: usize, src: &str) -> Result<Self> {
        let expr = expr::parse_expr(src, dimension)?;
        Weight::new(dimension, WeightKind::Angular { expr })
    }

    pub fn product(dimension: usize, radial_src: &str, angular_src: &str) -> Result<Self> {
        let radial = expr::parse_expr(radial_src, dimension)?;
        let angular = expr::parse_expr(angular_src, dimension)?;
        Weight::new(dimension, WeightKind::RadialAngularProduct { radial, angular })
    }

    /// Constructs a weight from a builtin name, e.g. `"gaussian"`,
    /// `"angular:2+cos(th1)"`, `"product:r1|1"`, `"expr:exp(-absz^2)"`.
    pub fn builtin(name: &str, dimension: usize, alpha: f64, beta: f64) -> Result<Self> {
        if let Some(src) = name.strip_prefix("angular:") {
            return Weight::angular(dimension, src);
        }
        if let Some(rest) = name.strip_prefix("product:") {
            let (radial, angular) = rest.split_once('|').ok_or_else(|| {
                Error::invalid("product weight needs '<radial expr>|<angular expr>'")
            })?;
            return Weight::product(dimension, radial, angular);
        }
        if let Some(src) = name.strip_prefix("expr:") {
            return parse_weight(src, dimension);
        }
        match name {
            "standard_alpha" => Weight::standard_alpha(dimension, alpha),
            "gaussian" => Weight::gaussian(dimension, beta, GaussianMode::Full),
            "gaussian_real" => Weight::gaussian(dimension, beta, GaussianMode::RealPart),
            "exp_modulus" => Weight::exp_modulus(dimension),
            _ => Err(Error::invalid(format!("unknown builtin weight '{name}'"))),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_angular(&self) -> bool {
        matches!(self.kind, WeightKind::Angular { .. })
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, WeightKind::RadialAngularProduct { .. })
    }

    /// Short identifier for reports.
    pub fn id(&self) -> String {
        match &self.kind {
            WeightKind::StandardAlpha { alpha } => format!("standard_alpha(alpha={alpha})"),
            WeightKind::Gaussian { beta, mode } => match mode {
                GaussianMode::Full => format!("gaussian(beta={beta})"),
                GaussianMode::RealPart => format!("gaussian_real(beta={beta})"),
            },
            WeightKind::ExpModulus => "exp_modulus".to_string(),
            WeightKind::Angular { expr } => format!("angular:{}", expr.pretty_print()),
            WeightKind::RadialAngularProduct { radial, angular } => format!(
                "product:{}|{}",
                radial.pretty_print(),
                angular.pretty_print()
            ),
            WeightKind::Expression { expr } => format!("expr:{}", expr.pretty_print()),
        }
    }

    pub fn domain(&self) -> WeightDomain {
        match &self.kind {
            WeightKind::Gaussian {
                mode: GaussianMode::Full,
                ..
            }
            | WeightKind::ExpModulus => WeightDomain::Ball,
            _ => WeightDomain::Polydisk,
        }
    }

    /// Evaluates `w(z)`; fails unless the value is strictly positive and finite.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: z.len(),
            });
        }
        let v = self.evaluate_raw(z)?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::WeightDomain {
                point: format_point(z),
                detail: format!("weight value {v} is not strictly positive and finite"),
            });
        }
        Ok(v)
    }

    fn evaluate_raw(&self, z: &[Complex64]) -> Result<f64> {
        match &self.kind {
            WeightKind::StandardAlpha { alpha } => {
                let mut prod = 1.0;
                for zk in z {
                    prod *= (alpha + 1.0) * (1.0 - zk.norm_sqr()).powf(*alpha);
                }
                Ok(prod)
            }
            WeightKind::Gaussian { beta, mode } => {
                let s = match mode {
                    GaussianMode::Full => z.iter().map(|w| w.norm_sqr()).sum::<f64>(),
                    GaussianMode::RealPart => z.iter().map(|w| w.re * w.re).sum::<f64>(),
                };
                Ok((-beta * s).exp())
            }
            WeightKind::ExpModulus => {
                let s = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
                Ok(s.exp())
            }
            WeightKind::Angular { expr } | WeightKind::Expression { expr } => {
                expr.evaluate(&EvalContext::from_point(z))
            }
            WeightKind::RadialAngularProduct { radial, angular } => {
                let ctx = EvalContext::from_point(z);
                Ok(radial.evaluate(&ctx)? * angular.evaluate(&ctx)?)
            }
        }
    }

    /// Evaluates the angular factor on the distinguished boundary.
    /// Only meaningful for Angular and RadialAngularProduct kinds.
    pub fn evaluate_angular(&self, th: &[f64]) -> Result<f64> {
        let e = match &self.kind {
            WeightKind::Angular { expr } => expr,
            WeightKind::RadialAngularProduct { angular, .. } => angular,
            _ => {
                return Err(Error::invalid(
                    "weight has no angular factor on the distinguished boundary",
                ))
            }
        };
        let v = e.evaluate(&EvalContext::from_angles(th))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::WeightDomain {
                point: format!("theta = {th:?}"),
                detail: format!("angular weight value {v} is not strictly positive and finite"),
            });
        }
        Ok(v)
    }

    /// Evaluates the radial factor ω on I^n (product kind only).
    pub fn evaluate_radial(&self, r: &[f64]) -> Result<f64> {
        let e = match &self.kind {
            WeightKind::RadialAngularProduct { radial, .. } => radial,
            _ => return Err(Error::invalid("weight has no separate radial factor")),
        };
        let v = e.evaluate(&EvalContext::from_radii(r))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::WeightDomain {
                point: format!("r = {r:?}"),
                detail: format!("radial weight value {v} is not finite and non-negative"),
            });
        }
        Ok(v)
    }

    /// The quantity `r^k w(z/r) / w(z)` bounded by the Mergelyan-type
    /// condition.
    pub fn dilation_ratio(&self, z: &[Complex64], r: f64, k: usize) -> Result<f64> {
        if !(0.0 < r && r < 1.0) {
            return Err(Error::invalid(format!("r must lie in (0,1), got {r}")));
        }
        let inside = match self.domain() {
            WeightDomain::Polydisk => z.iter().all(|w| w.norm() < r),
            WeightDomain::Ball => z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt() < r,
        };
        if !inside {
            return Err(Error::invalid(format!(
                "z/r lies outside the domain for z = {}, r = {r}",
                format_point(z)
            )));
        }
        let scaled: Vec<Complex64> = z.iter().map(|w| w / r).collect();
        let num = self.evaluate(&scaled)?;
        let den = self.evaluate(z)?;
        Ok(r.powi(k as i32) * num / den)
    }
}

fn check_index(e: &Expr, dimension: usize) -> Result<()> {
    let max = e.max_var_index();
    if max > dimension {
        return Err(Error::invalid(format!(
            "expression references variable index {max} but dimension is {dimension}"
        )));
    }
    Ok(())
}

pub fn format_point(z: &[Complex64]) -> String {
    let parts: Vec<String> = z
        .iter()
        .map(|w| format!("{:+.6}{:+.6}i", w.re, w.im))
        .collect();
    format!("({})", parts.join(", "))
}

/// Parses a weight expression source into an Expression weight.
pub fn parse_weight(src: &str, dimension: usize) -> Result<Weight> {
    let expr = expr::parse_expr(src, dimension)?;
    Weight::new(dimension, WeightKind::Expression { expr })
}
