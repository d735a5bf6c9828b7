//! Bessel functions of the first kind (integer order) and quadrature for
//! weights with inverse-square-root or square-root endpoint behaviour.

use std::ops::{Add, Mul};

use num_traits::Zero;

use crate::eigen;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest argument for which the power series may be used.
const SERIES_MAX_ARG: f64 = 12.0;

/// Backward recurrence starts above the argument; beyond this it is too long.
const MILLER_MAX_ARG: f64 = 1.0e7;

/// Smallest order accepted by [`integrate_singular`].
pub const MIN_QUADRATURE_ORDER: usize = 8;

/// Default quadrature order used by callers that do not pick one.
pub const DEFAULT_QUADRATURE_ORDER: usize = 256;

fn check_finite<T: Real>(x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(x.to_f64_lossy()))
    }
}

fn parity<T: Real>(n: usize) -> T {
    if n % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `J_n(x)` for integer order `n >= 0`.
///
/// Uses the ascending series where it is free of cancellation and Miller's
/// backward recurrence otherwise.
pub fn bessel_j<T: Real>(n: usize, x: T) -> Result<T> {
    check_finite(x)?;
    let (ax, sign) = if x < T::zero() {
        (-x, parity::<T>(n))
    } else {
        (x, T::one())
    };
    if ax.is_zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    let value = if series_is_stable(n, ax) {
        series(n, ax)
    } else {
        miller(n, ax)?[n]
    };
    Ok(sign * value)
}

/// `[J_0(x), J_1(x), ..., J_nmax(x)]` from a single backward sweep.
pub fn bessel_j_sequence<T: Real>(nmax: usize, x: T) -> Result<Vec<T>> {
    check_finite(x)?;
    let ax = x.abs();
    let mut values = if ax.is_zero() {
        let mut v = vec![T::zero(); nmax + 1];
        v[0] = T::one();
        v
    } else {
        miller(nmax, ax)?
    };
    if x < T::zero() {
        values.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
    }
    Ok(values)
}

/// `J_m(x)` for signed `m`, with `J_{-m} = (-1)^m J_m`.
pub fn bessel_j_signed<T: Real>(m: i64, x: T) -> Result<T> {
    let n = m.unsigned_abs() as usize;
    let v = bessel_j(n, x)?;
    Ok(if m < 0 { parity::<T>(n) * v } else { v })
}

/// First or second derivative of `J_n` from `2 J_n' = J_{n-1} - J_{n+1}`.
pub fn bessel_j_deriv<T: Real>(n: usize, x: T, order: u32) -> Result<T> {
    check_finite(x)?;
    let n = n as i64;
    let half = T::lit(0.5);
    match order {
        1 => Ok(half * (bessel_j_signed(n - 1, x)? - bessel_j_signed(n + 1, x)?)),
        2 => {
            let two = T::lit(2.0);
            Ok(T::lit(0.25)
                * (bessel_j_signed(n - 2, x)? - two * bessel_j_signed(n, x)?
                    + bessel_j_signed(n + 2, x)?))
        }
        other => Err(Error::InvalidDerivativeOrder(other)),
    }
}

// Monotone alternating series: first term ratio (x/2)^2 / (n+1) is at most 1.
fn series_is_stable<T: Real>(n: usize, ax: T) -> bool {
    let q = ax * ax * T::lit(0.25);
    ax <= T::lit(SERIES_MAX_ARG) && q <= T::from_count(n + 1)
}

fn series<T: Real>(n: usize, ax: T) -> T {
    let half = ax * T::lit(0.5);
    let mut term = T::one();
    for j in 1..=n {
        term = term * half / T::from_count(j);
    }
    if term.is_zero() {
        return term;
    }
    let q = half * half;
    let mut sum = term;
    for m in 1..500 {
        term = -term * q / (T::from_count(m) * T::from_count(n + m));
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.01) {
            break;
        }
    }
    sum
}

/// Backward recurrence from well above max(n, x), normalized with
/// `J_0^2 + 2 sum J_k^2 = 1` (magnitude) and `J_0 + 2 sum J_2k = 1` (sign).
fn miller<T: Real>(nmax: usize, ax: T) -> Result<Vec<T>> {
    if ax > T::lit(MILLER_MAX_ARG) {
        return Err(Error::InvalidArgument(format!(
            "Bessel argument {} exceeds the supported range",
            ax.to_f64_lossy()
        )));
    }
    let top = nmax.max(ax.ceil().to_usize().unwrap_or(0));
    let start = top + 20 + ((40 * top) as f64).sqrt().ceil() as usize;
    let big = T::max_value().sqrt().sqrt();
    let rescale = big.recip();
    let two_over_x = T::lit(2.0) / ax;

    let mut out = vec![T::zero(); nmax + 1];
    let mut upper = T::zero();
    let mut current = T::min_positive_value().sqrt();
    let mut sum_sq = T::zero();
    let mut sum_even = T::zero();
    let two = T::lit(2.0);

    // `current` holds the unnormalized value at index k.
    let mut k = start;
    loop {
        if k <= nmax {
            out[k] = current;
        }
        if k == 0 {
            sum_sq += current * current;
            sum_even += current;
            break;
        }
        sum_sq += two * current * current;
        if k % 2 == 0 {
            sum_even += two * current;
        }
        let lower = T::from_count(k) * two_over_x * current - upper;
        upper = current;
        current = lower;
        k -= 1;
        if current.abs() > big {
            current = current * rescale;
            upper = upper * rescale;
            sum_sq = sum_sq * rescale * rescale;
            sum_even = sum_even * rescale;
            for v in out.iter_mut().skip(k + 1) {
                *v = *v * rescale;
            }
        }
    }

    let norm = sum_sq.sqrt();
    let scale = if sum_even < T::zero() { -norm } else { norm };
    out.iter_mut().for_each(|v| *v = *v / scale);
    Ok(out)
}

/// Endpoint behaviour of the weight on `(-c, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularWeight {
    /// `1 / sqrt(c^2 - x^2)`
    InverseSqrt,
    /// `sqrt(c^2 - x^2)`
    Sqrt,
}

/// Nodes and weights of a fixed-order rule on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub order: usize,
}

impl<T: Real> QuadratureRule<T> {
    /// Gauss–Chebyshev rule for the weight `1/sqrt(1-u^2)`: the midpoint rule
    /// in `theta` after `u = sin(theta)`. Weights sum to pi.
    pub fn chebyshev_first_kind(order: usize) -> Self {
        let n = T::from_count(order);
        let nodes = (1..=order)
            .rev()
            .map(|j| (T::from_count(2 * j - 1) * T::PI() / (T::lit(2.0) * n)).cos())
            .collect();
        let weights = vec![T::PI() / n; order];
        Self {
            nodes,
            weights,
            order,
        }
    }

    /// Gauss–Chebyshev rule for the weight `sqrt(1-u^2)`. Weights sum to pi/2.
    pub fn chebyshev_second_kind(order: usize) -> Self {
        let step = T::PI() / T::from_count(order + 1);
        let (nodes, weights) = (1..=order)
            .rev()
            .map(|j| {
                let theta = T::from_count(j) * step;
                let s = theta.sin();
                (theta.cos(), step * s * s)
            })
            .unzip();
        Self {
            nodes,
            weights,
            order,
        }
    }

    /// Gauss–Legendre rule from the Jacobi matrix of the Legendre recurrence.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        let diag = vec![T::zero(); order];
        let off: Vec<T> = (1..order)
            .map(|k| {
                let k = T::from_count(k);
                k / (T::lit(4.0) * k * k - T::one()).sqrt()
            })
            .collect();
        let (nodes, first) = eigen::tridiagonal_eigen(&diag, &off, 1)?;
        let weights = first.iter().map(|&v| T::lit(2.0) * v * v).collect();
        Ok(Self {
            nodes,
            weights,
            order,
        })
    }

    /// Applies the rule to `f` mapped onto `(a, b)` (plain weight).
    pub fn integrate_interval<V, F>(&self, f: F, a: T, b: T) -> V
    where
        V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
        F: Fn(T) -> V,
    {
        let half = (b - a) * T::lit(0.5);
        let mid = (b + a) * T::lit(0.5);
        let acc = self
            .nodes
            .iter()
            .zip(&self.weights)
            .fold(V::zero(), |acc, (&u, &w)| acc + f(mid + half * u) * w);
        acc * half
    }
}

/// A reusable rule for `∫_{-c}^{c} f(x) w(x) dx` with a [`SingularWeight`].
///
/// The substitution `x = c sin(theta)` absorbs the weight exactly, leaving a
/// smooth periodic integrand in `theta`.
#[derive(Debug, Clone)]
pub struct SingularQuadrature<T> {
    kind: SingularWeight,
    rule: QuadratureRule<T>,
}

impl<T: Real> SingularQuadrature<T> {
    pub fn new(kind: SingularWeight, order: usize) -> Result<Self> {
        if order < MIN_QUADRATURE_ORDER {
            return Err(Error::QuadratureOrder {
                order,
                min: MIN_QUADRATURE_ORDER,
            });
        }
        let rule = match kind {
            SingularWeight::InverseSqrt => QuadratureRule::chebyshev_first_kind(order),
            SingularWeight::Sqrt => QuadratureRule::chebyshev_second_kind(order),
        };
        Ok(Self { kind, rule })
    }

    pub fn kind(&self) -> SingularWeight {
        self.kind
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    pub fn integrate<V, F>(&self, f: F, c: T) -> Result<V>
    where
        V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
        F: Fn(T) -> V,
    {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::NonPositiveHalfWidth(c.to_f64_lossy()));
        }
        let acc = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .fold(V::zero(), |acc, (&u, &w)| acc + f(c * u) * w);
        Ok(match self.kind {
            SingularWeight::InverseSqrt => acc,
            SingularWeight::Sqrt => acc * (c * c),
        })
    }
}

/// `∫_{-c}^{c} f(x) w(x) dx` for the weight selected by `kind`.
pub fn integrate_singular<T, V, F>(f: F, c: T, kind: SingularWeight, order: usize) -> Result<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
    F: Fn(T) -> V,
{
    SingularQuadrature::new(kind, order)?.integrate(f, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        for n in 1..10 {
            assert_eq!(bessel_j(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn j0_at_two() {
        let v = bessel_j(0, 2.0_f64).unwrap();
        assert!((v - 0.2238907791412357).abs() < 1e-15);
    }

    #[test]
    fn reflection_parity() {
        for n in 0..12 {
            for &x in &[0.7, 3.3, 15.0, 41.5] {
                let pos = bessel_j(n, x).unwrap();
                let neg = bessel_j(n, -x).unwrap();
                let expect = if n % 2 == 0 { pos } else { -pos };
                assert_eq!(neg, expect);
            }
        }
    }

    #[test]
    fn non_finite_argument_rejected() {
        assert!(matches!(bessel_j(0, f64::NAN), Err(Error::NonFinite(_))));
        assert!(bessel_j_sequence(3, f64::INFINITY).is_err());
        assert!(bessel_j_deriv(1, f64::NEG_INFINITY, 1).is_err());
    }

    #[test]
    fn derivative_cases() {
        assert_eq!(bessel_j_deriv(0, 0.0, 1).unwrap(), 0.0);
        assert!((bessel_j_deriv::<f64>(0, 0.0, 2).unwrap() + 0.5).abs() < 1e-15);
        let expect = 0.5 * (bessel_j(0, 2.0).unwrap() - bessel_j(2, 2.0).unwrap());
        assert!((bessel_j_deriv::<f64>(1, 2.0, 1).unwrap() - expect).abs() < 1e-15);
        assert_eq!(
            bessel_j_deriv(1, 2.0, 3),
            Err(Error::InvalidDerivativeOrder(3))
        );
        // J_0' = -J_1
        for &x in &[0.3, 4.0, 27.0] {
            let d = bessel_j_deriv::<f64>(0, x, 1).unwrap();
            assert!((d + bessel_j::<f64>(1, x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let h = 1e-3;
        for &x in &[0.5, 3.0, 11.0] {
            for n in 0..4 {
                let fd = (bessel_j(n, x + h).unwrap() - 2.0 * bessel_j(n, x).unwrap()
                    + bessel_j(n, x - h).unwrap())
                    / (h * h);
                assert!((bessel_j_deriv::<f64>(n, x, 2).unwrap() - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn sequence_agrees_with_pointwise() {
        for &x in &[0.25, 2.0, 9.5, 30.0, 150.0] {
            let seq = bessel_j_sequence(60, x).unwrap();
            for (n, v) in seq.iter().enumerate() {
                assert!((v - bessel_j::<f64>(n, x).unwrap()).abs() < 1e-13, "n={n} x={x}");
            }
        }
        let neg = bessel_j_sequence(5, -3.0).unwrap();
        assert!((neg[1] + bessel_j::<f64>(1, 3.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn single_precision_instantiation() {
        let v = bessel_j(0, 2.0_f32).unwrap();
        assert!((v - 0.223_890_78).abs() < 1e-6);
        let v = bessel_j(3, 25.0_f32).unwrap() as f64;
        assert!((v - bessel_j(3, 25.0_f64).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn arcsine_and_semicircle_mass() {
        let m: f64 = integrate_singular(|_| 1.0, 1.0, SingularWeight::InverseSqrt, 64).unwrap();
        assert!((m - PI).abs() < 1e-14);
        let m: f64 = integrate_singular(|_| 1.0, 1.0, SingularWeight::Sqrt, 64).unwrap();
        assert!((m - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn cosine_against_semicircle() {
        let s = 3.0;
        let v: f64 =
            integrate_singular(|x: f64| (s * x).cos(), 1.0, SingularWeight::Sqrt, 256).unwrap();
        let expect = PI / 2.0 * 2.0 * bessel_j(1, s).unwrap() / s;
        assert!((v - expect).abs() < 1e-13);
    }

    #[test]
    fn complex_integrand_and_scaling() {
        // ∫_{-2}^{2} e^{itx} / (pi sqrt(4-x^2)) dx = J_0(2t)
        let t = 1.7;
        let v: Complex64 = integrate_singular(
            |x: f64| Complex64::new(0.0, t * x).exp() / PI,
            2.0,
            SingularWeight::InverseSqrt,
            128,
        )
        .unwrap();
        assert!((v.re - bessel_j(0, 2.0 * t).unwrap()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn quadrature_argument_errors() {
        let r: Result<f64> = integrate_singular(|_| 1.0, 0.0, SingularWeight::Sqrt, 64);
        assert!(matches!(r, Err(Error::NonPositiveHalfWidth(_))));
        let r: Result<f64> = integrate_singular(|_| 1.0, 1.0, SingularWeight::Sqrt, 7);
        assert!(matches!(r, Err(Error::QuadratureOrder { order: 7, .. })));
    }

    #[test]
    fn rule_invariants() {
        for order in [8, 33, 256] {
            let first = QuadratureRule::<f64>::chebyshev_first_kind(order);
            let second = QuadratureRule::<f64>::chebyshev_second_kind(order);
            let legendre = QuadratureRule::<f64>::gauss_legendre(order).unwrap();
            for rule in [&first, &second, &legendre] {
                assert_eq!(rule.nodes.len(), order);
                assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
                assert!(rule.nodes.iter().all(|&u| u > -1.0 && u < 1.0));
                assert!(rule.weights.iter().all(|&w| w > 0.0));
            }
            let total: f64 = first.weights.iter().sum();
            assert!((total - PI).abs() < 1e-12);
            let total: f64 = legendre.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = QuadratureRule::<f64>::gauss_legendre(6).unwrap();
        // exact up to degree 11
        let v: f64 = rule.integrate_interval(|x| x.powi(10) + x.powi(3), -1.0, 1.0);
        assert!((v - 2.0 / 11.0).abs() < 1e-14);
        let v: f64 = rule.integrate_interval(|x| x * x, 0.0, 3.0);
        assert!((v - 9.0).abs() < 1e-13);
    }
}
