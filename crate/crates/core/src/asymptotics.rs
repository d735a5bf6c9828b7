//! Large-degree and large-time limits.
//!
//! Under the scaling `H / sqrt(p)` the shell amplitudes of the infinite tree
//! converge to `(k+1) i^k J_{k+1}(2t) / t`, the amplitudes of the semicircle
//! law against the limit polynomials `Q_{k+1} = x Q_k - Q_{k-1}`. Squaring
//! them defines a walk `Y(t)` on the shells whose rescaled position
//! `Y(t)/t` has the density `x^2 / (pi sqrt(4 - x^2))` on `(0, 2)` as limit.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kesten::{line_probability, stratum_amplitude_infinite};
use crate::scalar::Real;
use crate::special::{
    bessel_j, bessel_j_deriv, bessel_j_sequence, integrate_singular, QuadratureRule,
    SingularWeight,
};
use crate::spectral::{eval_normalized, SzegoJacobiParams};
use crate::tree::Stratification;

/// Points in the default CDF comparison grid.
pub const CDF_GRID_POINTS: usize = 2001;

/// Right end of the default CDF comparison grid for `Y(t)/t`.
pub const CDF_GRID_END: f64 = 2.2;

/// Gauss–Legendre order for the moments of `Z`.
const MOMENT_ORDER: usize = 64;

/// Truncation index `ceil(4t) + 60` for sums over the `Y` walk.
pub fn truncation(t: f64) -> usize {
    (4.0 * t.abs()).ceil() as usize + 60
}

fn i_pow<T: Real>(k: usize) -> Complex<T> {
    let (o, z) = (T::one(), T::zero());
    match k % 4 {
        0 => Complex::new(o, z),
        1 => Complex::new(z, o),
        2 => Complex::new(-o, z),
        _ => Complex::new(z, -o),
    }
}

/// `(k+1) i^k J_{k+1}(2t) / t`, continued by `delta_{k0}` at `t = 0`.
pub fn qclt_amplitude<T: Real>(k: usize, t: T) -> Result<Complex<T>> {
    if t.is_zero() {
        return Ok(if k == 0 { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) });
    }
    let j = bessel_j(k + 1, T::lit(2.0) * t)?;
    Ok(i_pow::<T>(k) * (T::from_count(k + 1) * j / t))
}

/// Integer coefficients of `Q^inf_k` in ascending powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitPolynomial {
    coeffs: Vec<i64>,
}

impl LimitPolynomial {
    /// `Q_0 = 1`, `Q_1 = x`, `Q_{k+1} = x Q_k - Q_{k-1}`.
    pub fn new(k: usize) -> Self {
        let mut prev = vec![0i64];
        let mut cur = vec![1i64];
        for _ in 0..k {
            let mut next = vec![0i64; cur.len() + 1];
            for (i, &c) in cur.iter().enumerate() {
                next[i + 1] += c;
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i] -= c;
            }
            prev = cur;
            cur = next;
        }
        Self { coeffs: cur }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn eval<T: Real>(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + T::lit(c as f64))
    }
}

/// `Q^(p)_k(sqrt(p) x) / sqrt(p (p-1)^{k-1})`, which tends to `Q^inf_k(x)`.
pub fn rescaled_tree_polynomial<T: Real>(p: usize, k: usize, x: T) -> Result<T> {
    let jacobi = SzegoJacobiParams::infinite_tree(p)?;
    Ok(eval_normalized(&jacobi, k, T::from_count(p).sqrt() * x)?[k])
}

/// `∫_{-2}^{2} exp(itx) Q^inf_k(x) sqrt(4 - x^2) / (2 pi) dx` by quadrature.
pub fn semicircle_amplitude<T: Real>(k: usize, t: T, order: usize) -> Result<Complex<T>> {
    let q = LimitPolynomial::new(k);
    let norm = T::lit(2.0) * T::PI();
    integrate_singular(
        |x: T| Complex::from_polar(q.eval(x) / norm, t * x),
        T::lit(2.0),
        SingularWeight::Sqrt,
        order,
    )
}

/// Pre-limit `<Phi_k| exp(itH/sqrt(p)) |Phi_0>` on the infinite tree.
pub fn scaled_amplitude<T: Real>(p: usize, k: usize, t: T, order: usize) -> Result<Complex<T>> {
    stratum_amplitude_infinite(p, k, t / T::from_count(p).sqrt(), order)
}

/// Uniform unit vector on shell `k` of a finite tree, in BFS order.
pub fn stratum_state<T: Real>(strat: &Stratification, k: usize) -> Result<Vec<T>> {
    if k >= strat.len() {
        return Err(Error::IndexOutOfRange { index: k, size: strat.len() });
    }
    let range = strat.range(k);
    let value = T::from_count(range.len()).sqrt().recip();
    let mut v = vec![T::zero(); strat.total()];
    v[range].iter_mut().for_each(|x| *x = value);
    Ok(v)
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::NonFinite(t.to_f64_lossy()));
    }
    if t < T::zero() {
        return Err(Error::NegativeTime(t.to_f64_lossy()));
    }
    Ok(())
}

/// `P(Y(t) = k) = (k+1)^2 J_{k+1}(2t)^2 / t^2`; unit mass on `k = 0` at `t = 0`.
pub fn y_pmf<T: Real>(k: usize, t: T) -> Result<T> {
    check_time(t)?;
    let a = qclt_amplitude(k, t)?;
    Ok(a.norm_sqr())
}

/// Truncated law of `Y(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YWalkDistribution<T> {
    pub t: T,
    pub pmf: Vec<T>,
    /// Last index kept.
    pub truncation: usize,
    /// Mass of the next 40 terms past the truncation.
    pub tail: T,
}

impl<T: Real> YWalkDistribution<T> {
    pub fn new(t: T) -> Result<Self> {
        check_time(t)?;
        let big_k = truncation(t.to_f64_lossy());
        let extra = 40;
        let pmf_all: Vec<T> = if t.is_zero() {
            let mut v = vec![T::zero(); big_k + extra + 1];
            v[0] = T::one();
            v
        } else {
            let j = bessel_j_sequence(big_k + extra + 1, T::lit(2.0) * t)?;
            let t2 = t * t;
            (0..=big_k + extra)
                .map(|k| {
                    let m = T::from_count(k + 1);
                    m * m * j[k + 1] * j[k + 1] / t2
                })
                .collect()
        };
        let tail = pmf_all[big_k + 1..].iter().copied().sum();
        let mut pmf = pmf_all;
        pmf.truncate(big_k + 1);
        Ok(Self {
            t,
            pmf,
            truncation: big_k,
            tail,
        })
    }

    pub fn total(&self) -> T {
        self.pmf.iter().copied().sum()
    }

    /// Right-continuous CDF of `Y(t)/t` at `x`.
    pub fn scaled_cdf(&self, x: T) -> T {
        step_cdf(&self.pmf, x * self.t)
    }
}

// Σ_{k <= floor(pos)} pmf[k]
fn step_cdf<T: Real>(pmf: &[T], pos: T) -> T {
    if pos < T::zero() {
        return T::zero();
    }
    let last = (pos + T::lit(1e-9)).floor().to_usize().unwrap_or(usize::MAX);
    pmf.iter().take(last.saturating_add(1)).copied().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharfnMethod {
    /// `Σ_k exp(i xi k / t) P(Y(t) = k)` over the truncated law.
    DirectSum,
    /// Bessel-derivative expression obtained from Neumann's addition theorem.
    ClosedForm,
}

/// `E[exp(i xi Y(t)/t)]` by the selected method.
pub fn y_charfn<T: Real>(xi: T, t: T, method: CharfnMethod) -> Result<Complex<T>> {
    if !(t > T::zero()) {
        return Err(Error::NonPositiveTime(t.to_f64_lossy()));
    }
    match method {
        CharfnMethod::DirectSum => {
            let law = YWalkDistribution::new(t)?;
            Ok(law
                .pmf
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (k, &w)| {
                    acc + Complex::from_polar(w, xi * T::from_count(k) / t)
                }))
        }
        CharfnMethod::ClosedForm => {
            let half_angle = xi / (T::lit(2.0) * t);
            let (s, c) = half_angle.sin_cos();
            let u = T::lit(4.0) * t * s;
            let d1 = bessel_j_deriv(0, u, 1)?;
            let d2 = bessel_j_deriv(0, u, 2)?;
            let bracket = s * d1 / (T::lit(2.0) * t) - T::lit(2.0) * c * c * d2;
            Ok(Complex::from_polar(bracket, -xi / t))
        }
    }
}

/// `-2 J_0''(2 xi)`, the large-time limit of the closed form.
pub fn y_charfn_limit<T: Real>(xi: T) -> Result<T> {
    Ok(T::lit(-2.0) * bessel_j_deriv(0, T::lit(2.0) * xi, 2)?)
}

/// `x^2 / (pi sqrt(4 - x^2))` on `(0, 2)`.
pub fn z_density<T: Real>(x: T) -> T {
    if x > T::zero() && x < T::lit(2.0) {
        x * x / (T::PI() * (T::lit(4.0) - x * x).sqrt())
    } else {
        T::zero()
    }
}

/// `(2/pi)(theta - sin theta cos theta)` with `theta = arcsin(x/2)`.
pub fn z_cdf<T: Real>(x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::lit(2.0) {
        return T::one();
    }
    let theta = (x * T::lit(0.5)).asin();
    T::lit(2.0) * T::FRAC_1_PI() * (theta - theta.sin() * theta.cos())
}

/// `E[Z^r]` by Gauss–Legendre after `x = 2 sin(theta)`.
pub fn z_moment<T: Real>(r: u32) -> Result<T> {
    let rule = QuadratureRule::<T>::gauss_legendre(MOMENT_ORDER)?;
    let power = r as i32 + 2;
    Ok(rule.integrate_interval(
        |theta: T| (T::lit(2.0) * theta.sin()).powi(power) * T::FRAC_1_PI(),
        T::zero(),
        T::FRAC_PI_2(),
    ))
}

/// `n` evenly spaced points on `[a, b]`.
pub fn uniform_grid<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    if n < 2 {
        return vec![a; n];
    }
    let step = (b - a) / T::from_count(n - 1);
    (0..n).map(|i| a + step * T::from_count(i)).collect()
}

/// Default grid for comparing `Y(t)/t` with `Z`: 2001 points on `[0, 2.2]`.
pub fn default_cdf_grid<T: Real>() -> Vec<T> {
    uniform_grid(T::zero(), T::lit(CDF_GRID_END), CDF_GRID_POINTS)
}

/// `(x, CDF of Y(t)/t, CDF of Z)` on `grid`.
pub fn y_cdf_table<T: Real>(t: T, grid: &[T]) -> Result<Vec<(T, T, T)>> {
    if !(t > T::zero()) {
        return Err(Error::NonPositiveTime(t.to_f64_lossy()));
    }
    let law = YWalkDistribution::new(t)?;
    Ok(grid.iter().map(|&x| (x, law.scaled_cdf(x), z_cdf(x))).collect())
}

/// `sup_x |F_{Y(t)/t}(x) - F_Z(x)|` over `grid`.
pub fn y_limit_sup_distance<T: Real>(t: T, grid: &[T]) -> Result<T> {
    Ok(y_cdf_table(t, grid)?
        .into_iter()
        .map(|(_, a, b)| (a - b).abs())
        .fold(T::zero(), T::max))
}

/// `(2/pi) arcsin(x)` on `[0, 1]`.
pub fn line_limit_cdf<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if x >= T::one() {
        T::one()
    } else {
        T::lit(2.0) * T::FRAC_1_PI() * x.asin()
    }
}

/// Sup-distance between the CDF of `|X(t)| / (2t)` on the line, where
/// `P(X(t) = n) = J_n(2t)^2`, and the arcsine-type limit `2/(pi sqrt(1 - x^2))`
/// on `(0, 1)`.
pub fn line_walk_limit_check<T: Real>(t: T, grid: &[T]) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::NonPositiveTime(t.to_f64_lossy()));
    }
    let big_n = truncation(t.to_f64_lossy());
    let j = bessel_j_sequence(big_n, T::lit(2.0) * t)?;
    let pmf: Vec<T> = j
        .iter()
        .enumerate()
        .map(|(n, &v)| if n == 0 { v * v } else { T::lit(2.0) * v * v })
        .collect();
    debug_assert!((pmf[1].to_f64_lossy()
        - 2.0 * line_probability(1, t).map(|v| v.to_f64_lossy()).unwrap_or(0.0))
    .abs()
        < 1e-12);
    let scale = T::lit(2.0) * t;
    Ok(grid
        .iter()
        .map(|&x| (step_cdf(&pmf, x * scale) - line_limit_cdf(x)).abs())
        .fold(T::zero(), T::max))
}
