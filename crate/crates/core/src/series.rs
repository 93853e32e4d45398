//! Truncated multi-index power series: the object `f = Σ_m a_m z^m`.
//!
//! Coefficients are stored sparsely, keyed by [`MultiIndex`] in graded
//! lexicographic order, so that iteration (and hence evaluation and
//! accumulation) is deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A tuple of non-negative integer exponents, one per coordinate.
///
/// Ordered by total degree first, then lexicographically, so a
/// `BTreeMap<MultiIndex, _>` iterates in graded-lex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    /// Total degree `|m| = m_1 + ... + m_n`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn zero(dimension: usize) -> Self {
        MultiIndex(vec![0; dimension])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Enumerates all multi-indices of dimension `n` with total degree exactly `k`,
/// in graded-lex (here: plain lex, degree is fixed) order.
pub fn multi_indices_of_degree(n: usize, k: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(cur: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
        if pos + 1 == cur.len() {
            cur[pos] = remaining;
            out.push(MultiIndex::new(cur.clone()));
            return;
        }
        for v in 0..=remaining {
            cur[pos] = v;
            rec(cur, pos + 1, remaining - v, out);
        }
    }
    if n == 0 {
        return out;
    }
    rec(&mut cur, 0, k, &mut out);
    out
}

/// One term of the JSON series literal `{"dim": n, "terms": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub m: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// The JSON series literal accepted on the CLI and in configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesLiteral {
    pub dim: usize,
    pub terms: Vec<SeriesTerm>,
}

/// A holomorphic function represented by its truncated Taylor expansion
/// `f(z) = Σ_{|m| ≤ max_degree} a_m z^m`.
///
/// Immutable after construction; all operations return new values.
#[derive(Debug, Clone)]
pub struct PowerSeries {
    dimension: usize,
    max_degree: usize,
    coefficients: BTreeMap<MultiIndex, Complex64>,
}

impl PartialEq for PowerSeries {
    /// Equality compares the nonzero coefficient maps only.
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.coefficients == other.coefficients
    }
}

impl PowerSeries {
    pub fn zero(dimension: usize, max_degree: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        PowerSeries {
            dimension,
            max_degree,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn constant(dimension: usize, c: Complex64) -> Self {
        let mut s = PowerSeries::zero(dimension, 0);
        if c != Complex64::new(0.0, 0.0) {
            s.coefficients.insert(MultiIndex::zero(dimension), c);
        }
        s
    }

    pub fn monomial(m: MultiIndex, c: Complex64) -> Self {
        let dim = m.len();
        assert!(dim > 0, "dimension must be positive");
        let mut s = PowerSeries::zero(dim, m.degree());
        if c != Complex64::new(0.0, 0.0) {
            s.coefficients.insert(m, c);
        }
        s
    }

    /// Builds a series from `(index, coefficient)` pairs. Duplicate indices are
    /// an error; `max_degree` is the largest stored degree.
    pub fn from_terms(
        dimension: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        let mut max_degree = 0usize;
        for (m, c) in terms {
            if m.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: m.len(),
                });
            }
            max_degree = max_degree.max(m.degree());
            if coefficients.insert(m.clone(), c).is_some() {
                return Err(Error::invalid(format!("duplicate index {m}")));
            }
        }
        coefficients.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(PowerSeries {
            dimension,
            max_degree,
            coefficients,
        })
    }

    pub fn from_literal(lit: &SeriesLiteral) -> Result<Self> {
        if lit.dim == 0 {
            return Err(Error::invalid("series dimension must be positive"));
        }
        PowerSeries::from_terms(
            lit.dim,
            lit.terms
                .iter()
                .map(|t| (MultiIndex::new(t.m.clone()), Complex64::new(t.re, t.im))),
        )
    }

    pub fn to_literal(&self) -> SeriesLiteral {
        SeriesLiteral {
            dim: self.dimension,
            terms: self
                .coefficients
                .iter()
                .map(|(m, c)| SeriesTerm {
                    m: m.entries().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Coefficient at `m` (zero if absent).
    pub fn coefficient(&self, m: &MultiIndex) -> Complex64 {
        self.coefficients
            .get(m)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Nonzero terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coefficients.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coefficients.len()
    }

    /// The value at the origin, i.e. the coefficient at m = 0.
    pub fn at_origin(&self) -> Complex64 {
        self.coefficient(&MultiIndex::zero(self.dimension))
    }

    /// Evaluates `Σ_m a_m z^m` by naive monomial summation in graded-lex
    /// order. Per-coordinate power tables keep this O(terms · n).
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: z.len(),
            });
        }
        // powers[k][e] = z_k^e
        let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(self.dimension);
        for &zk in z {
            let mut col = Vec::with_capacity(self.max_degree + 1);
            let mut p = Complex64::new(1.0, 0.0);
            col.push(p);
            for _ in 0..self.max_degree {
                p *= zk;
                col.push(p);
            }
            powers.push(col);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, a) in &self.coefficients {
            let mut mono = *a;
            for (k, &e) in m.entries().iter().enumerate() {
                mono *= powers[k][e];
            }
            acc += mono;
        }
        Ok(acc)
    }

    /// The dilation `f_r(z) = f(rz)`: coefficient at `m` becomes `r^{|m|} a_m`.
    pub fn dilate(&self, r: f64) -> Result<PowerSeries> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid(format!(
                "dilation radius must lie in [0,1], got {r}"
            )));
        }
        let coefficients = self
            .coefficients
            .iter()
            .map(|(m, a)| (m.clone(), a * r.powi(m.degree() as i32)))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        Ok(PowerSeries {
            dimension: self.dimension,
            max_degree: self.max_degree,
            coefficients,
        })
    }

    /// The mixed partial `∂^{|m|} f / ∂z_1^{m_1}···∂z_n^{m_n}`.
    ///
    /// Factorial ratios are accumulated as products of integers (converted
    /// factor by factor to f64), so they stay exact well past degree 170.
    pub fn partial_derivative(&self, m: &MultiIndex) -> Result<PowerSeries> {
        if m.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: m.len(),
            });
        }
        let order = m.degree();
        let mut coefficients = BTreeMap::new();
        for (idx, a) in &self.coefficients {
            // term a z^idx contributes iff idx >= m componentwise
            let entries = idx.entries();
            if entries
                .iter()
                .zip(m.entries())
                .any(|(&e, &d)| e < d)
            {
                continue;
            }
            let new_entries: Vec<usize> = entries
                .iter()
                .zip(m.entries())
                .map(|(&e, &d)| e - d)
                .collect();
            // falling factorial: e * (e-1) * ... * (e-d+1)
            let mut factor = 1.0f64;
            for (&e, &d) in entries.iter().zip(m.entries()) {
                for j in 0..d {
                    factor *= (e - j) as f64;
                }
            }
            let c = a * factor;
            if c != Complex64::new(0.0, 0.0) {
                coefficients.insert(MultiIndex::new(new_entries), c);
            }
        }
        Ok(PowerSeries {
            dimension: self.dimension,
            max_degree: self.max_degree.saturating_sub(order),
            coefficients,
        })
    }

    /// The radial derivative `Rf = Σ_k z_k ∂f/∂z_k`: coefficient at `m`
    /// becomes `|m| a_m`.
    pub fn radial_derivative(&self) -> PowerSeries {
        let coefficients = self
            .coefficients
            .iter()
            .filter(|(m, _)| m.degree() > 0)
            .map(|(m, a)| (m.clone(), a * m.degree() as f64))
            .collect();
        PowerSeries {
            dimension: self.dimension,
            max_degree: self.max_degree,
            coefficients,
        }
    }

    /// Keeps the coefficients with `|m| ≤ k`.
    pub fn truncate(&self, k: usize) -> PowerSeries {
        let coefficients = self
            .coefficients
            .iter()
            .filter(|(m, _)| m.degree() <= k)
            .map(|(m, a)| (m.clone(), *a))
            .collect();
        PowerSeries {
            dimension: self.dimension,
            max_degree: k.min(self.max_degree),
            coefficients,
        }
    }

    /// The homogeneous part `f_k`: coefficients with `|m| = k` exactly.
    pub fn homogeneous_part(&self, k: usize) -> PowerSeries {
        let coefficients = self
            .coefficients
            .iter()
            .filter(|(m, _)| m.degree() == k)
            .map(|(m, a)| (m.clone(), *a))
            .collect();
        PowerSeries {
            dimension: self.dimension,
            max_degree: k.min(self.max_degree),
            coefficients,
        }
    }

    pub fn add(&self, other: &PowerSeries) -> Result<PowerSeries> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: other.dimension,
            });
        }
        let mut coefficients = self.coefficients.clone();
        for (m, a) in &other.coefficients {
            let entry = coefficients
                .entry(m.clone())
                .or_insert(Complex64::new(0.0, 0.0));
            *entry += a;
        }
        coefficients.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(PowerSeries {
            dimension: self.dimension,
            max_degree: self.max_degree.max(other.max_degree),
            coefficients,
        })
    }

    pub fn sub(&self, other: &PowerSeries) -> Result<PowerSeries> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> PowerSeries {
        let coefficients = self
            .coefficients
            .iter()
            .map(|(m, a)| (m.clone(), a * c))
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .collect();
        PowerSeries {
            dimension: self.dimension,
            max_degree: self.max_degree,
            coefficients,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_d(coeffs: &[f64]) -> PowerSeries {
        PowerSeries::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| (MultiIndex::new(vec![k]), c(a, 0.0))),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_constant() {
        let f = PowerSeries::constant(2, c(1.0, 0.0));
        let v = f.evaluate(&[c(0.3, 0.1), c(0.0, -0.2)]).unwrap();
        assert_abs_diff_eq!(v.re, 1.0);
        assert_abs_diff_eq!(v.im, 0.0);
    }

    #[test]
    fn evaluate_monomial() {
        // f = z1 z2^2 at (2, 3) -> 18
        let f = PowerSeries::monomial(MultiIndex::new(vec![1, 2]), c(1.0, 0.0));
        let v = f.evaluate(&[c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.re, 18.0, epsilon = 1e-12);
    }

    #[test]
    fn evaluate_geometric_sum() {
        // sum_{k=0}^{5} z^k at z=0.5 -> (1 - 0.5^6) / (1 - 0.5) = 1.96875
        let f = one_d(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let v = f.evaluate(&[c(0.5, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.re, 1.96875, epsilon = 1e-14);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let f = PowerSeries::constant(2, c(1.0, 0.0));
        assert!(f.evaluate(&[c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn dilate_identity() {
        let f = one_d(&[1.0, 2.0, 3.0]);
        assert_eq!(f.dilate(1.0).unwrap(), f);
    }

    #[test]
    fn dilate_scales_by_degree() {
        let f = PowerSeries::monomial(MultiIndex::new(vec![2, 0]), c(1.0, 0.0));
        let g = f.dilate(0.5).unwrap();
        assert_abs_diff_eq!(
            g.coefficient(&MultiIndex::new(vec![2, 0])).re,
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn dilate_direct_powers() {
        let f = one_d(&[1.0, 1.0, 1.0]);
        let g = f.dilate(0.1).unwrap();
        assert_abs_diff_eq!(g.coefficient(&MultiIndex::new(vec![0])).re, 1.0);
        assert_abs_diff_eq!(g.coefficient(&MultiIndex::new(vec![1])).re, 0.1);
        assert_abs_diff_eq!(g.coefficient(&MultiIndex::new(vec![2])).re, 0.01);
    }

    #[test]
    fn dilate_out_of_range() {
        let f = one_d(&[1.0]);
        assert!(f.dilate(1.5).is_err());
        assert!(f.dilate(-0.1).is_err());
    }

    #[test]
    fn partial_derivative_monomial() {
        // d^3 (z1 z2^2) / dz1 dz2^2 = 2
        let f = PowerSeries::monomial(MultiIndex::new(vec![1, 2]), c(1.0, 0.0));
        let g = f.partial_derivative(&MultiIndex::new(vec![1, 2])).unwrap();
        assert_abs_diff_eq!(g.at_origin().re, 2.0, epsilon = 1e-15);
        assert_eq!(g.num_terms(), 1);
    }

    #[test]
    fn partial_derivative_of_constant_vanishes() {
        let f = PowerSeries::constant(2, c(5.0, 0.0));
        let g = f.partial_derivative(&MultiIndex::new(vec![1, 0])).unwrap();
        assert_eq!(g.num_terms(), 0);
    }

    #[test]
    fn partial_derivative_falling_factorial() {
        // d^2 z^4 / dz^2 = 12 z^2
        let f = PowerSeries::monomial(MultiIndex::new(vec![4]), c(1.0, 0.0));
        let g = f.partial_derivative(&MultiIndex::new(vec![2])).unwrap();
        assert_abs_diff_eq!(
            g.coefficient(&MultiIndex::new(vec![2])).re,
            12.0,
            epsilon = 1e-15
        );
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn radial_derivative_homogeneous() {
        let f = PowerSeries::monomial(MultiIndex::new(vec![1, 2]), c(1.0, 0.0));
        let g = f.radial_derivative();
        assert_abs_diff_eq!(
            g.coefficient(&MultiIndex::new(vec![1, 2])).re,
            3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn radial_derivative_termwise() {
        // f = 2 + z + 5 z^3 -> z + 15 z^3
        let f = one_d(&[2.0, 1.0, 0.0, 5.0]);
        let g = f.radial_derivative();
        assert_eq!(g.num_terms(), 2);
        assert_abs_diff_eq!(g.coefficient(&MultiIndex::new(vec![1])).re, 1.0);
        assert_abs_diff_eq!(g.coefficient(&MultiIndex::new(vec![3])).re, 15.0);
    }

    #[test]
    fn truncate_examples() {
        let f = PowerSeries::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![0, 0]), c(1.0, 0.0)),
                (MultiIndex::new(vec![1, 0]), c(1.0, 0.0)),
                (MultiIndex::new(vec![1, 1]), c(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(f.truncate(f.max_degree()), f);
        let t = f.truncate(1);
        assert_eq!(t.num_terms(), 2);
        assert_eq!(t.coefficient(&MultiIndex::new(vec![1, 1])), c(0.0, 0.0));
        // all mass at degree 3, truncate to 2 -> zero series
        let g = PowerSeries::monomial(MultiIndex::new(vec![3]), c(2.0, 0.0));
        assert_eq!(g.truncate(2).num_terms(), 0);
    }

    #[test]
    fn homogeneous_parts_partition() {
        let f = PowerSeries::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![0, 0]), c(1.0, 0.0)),
                (MultiIndex::new(vec![1, 0]), c(1.0, 0.0)),
                (MultiIndex::new(vec![1, 1]), c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let h2 = f.homogeneous_part(2);
        assert_eq!(h2.num_terms(), 1);
        assert_eq!(h2.coefficient(&MultiIndex::new(vec![1, 1])), c(1.0, 0.0));
        assert_eq!(f.homogeneous_part(7).num_terms(), 0);
        let mut sum = PowerSeries::zero(2, f.max_degree());
        for k in 0..=f.max_degree() {
            sum = sum.add(&f.homogeneous_part(k)).unwrap();
        }
        assert_eq!(sum, f);
    }

    #[test]
    fn literal_duplicate_index_rejected() {
        let lit: SeriesLiteral = serde_json::from_str(
            r#"{"dim":1,"terms":[{"m":[1],"re":1.0,"im":0.0},{"m":[1],"re":2.0,"im":0.0}]}"#,
        )
        .unwrap();
        assert!(PowerSeries::from_literal(&lit).is_err());
    }

    #[test]
    fn multi_index_graded_lex_order() {
        let a = MultiIndex::new(vec![0, 2]);
        let b = MultiIndex::new(vec![1, 0]);
        assert!(b < a); // degree 1 < degree 2
        let c1 = MultiIndex::new(vec![0, 2]);
        let c2 = MultiIndex::new(vec![1, 1]);
        assert!(c1 < c2); // same degree, lex
    }

    #[test]
    fn multi_indices_of_degree_counts() {
        assert_eq!(multi_indices_of_degree(2, 3).len(), 4);
        assert_eq!(multi_indices_of_degree(3, 2).len(), 6);
        assert_eq!(multi_indices_of_degree(1, 5).len(), 1);
    }
}
