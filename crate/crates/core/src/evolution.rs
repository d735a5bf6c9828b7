//! Exact continuous-time walk `|psi(t)> = exp(itH) |root>` on a finite tree.
//!
//! Two propagators are available. The eigen route diagonalizes the dense
//! Hamiltonian once and reuses the decomposition for every `t`; it also gives
//! the exact infinite-time average. The Chebyshev route expands `exp(itH)` in
//! Chebyshev polynomials of the rescaled sparse Hamiltonian with Bessel
//! coefficients (Jacobi–Anger), which reaches trees far beyond what a dense
//! decomposition can handle. Both work in the full site basis.

use num_complex::Complex;

use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::bessel_j_sequence;
use crate::tree::{Stratification, SymmetricHamiltonian};

/// Largest dimension the eigen route will densify.
pub const DEFAULT_DENSE_CAP: usize = 20_000;

/// Above this many vertices [`Propagation::Auto`] picks the Chebyshev route.
pub const AUTO_EIGEN_LIMIT: usize = 1_000;

/// Eigenvalues closer than this are one eigenspace for the time average.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    Eigen,
    Chebyshev,
    Auto,
}

/// Amplitude of the walker on every vertex at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector<T> {
    pub t: T,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> AmplitudeVector<T> {
    pub fn norm_sqr(&self) -> T {
        self.values.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Indexing {
    Site,
    Stratum,
}

impl Indexing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Indexing::Site => "site",
            Indexing::Stratum => "stratum",
        }
    }
}

/// Probability distribution over sites or strata.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDistribution<T> {
    pub t: T,
    pub probs: Vec<T>,
    pub indexing: Indexing,
}

impl<T: Real> WalkDistribution<T> {
    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone)]
enum Route<T> {
    Eigen {
        system: EigenSystem<T>,
        // first component of every eigenvector
        root: Vec<T>,
    },
    Chebyshev(ChebyshevPropagator<T>),
}

/// Walk on one Hamiltonian, started at vertex 0.
#[derive(Debug, Clone)]
pub struct ExactWalk<T> {
    dim: usize,
    route: Route<T>,
}

impl<T: Real> ExactWalk<T> {
    /// Picks the propagator by size.
    pub fn new(h: &SymmetricHamiltonian<T>) -> Result<Self> {
        Self::with_method(h, Propagation::Auto)
    }

    pub fn with_method(h: &SymmetricHamiltonian<T>, method: Propagation) -> Result<Self> {
        let use_eigen = match method {
            Propagation::Eigen => true,
            Propagation::Chebyshev => false,
            Propagation::Auto => h.dim() <= AUTO_EIGEN_LIMIT,
        };
        if use_eigen {
            Self::eigen(h, DEFAULT_DENSE_CAP)
        } else {
            Ok(Self {
                dim: h.dim(),
                route: Route::Chebyshev(ChebyshevPropagator::new(h.clone())),
            })
        }
    }

    /// Eigen route with an explicit dense-size cap.
    pub fn eigen(h: &SymmetricHamiltonian<T>, dense_cap: usize) -> Result<Self> {
        let n = h.dim();
        let dense = h.to_dense(dense_cap)?;
        let system = EigenSystem::from_dense(&dense, n)?;
        let root = (0..n).map(|j| system.component(0, j)).collect();
        Ok(Self {
            dim: n,
            route: Route::Eigen { system, root },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigensystem(&self) -> Option<&EigenSystem<T>> {
        match &self.route {
            Route::Eigen { system, .. } => Some(system),
            Route::Chebyshev(_) => None,
        }
    }

    pub fn evolve(&self, t: T) -> Result<AmplitudeVector<T>> {
        if !t.is_finite() {
            return Err(Error::NonFinite(t.to_f64_lossy()));
        }
        let values = match &self.route {
            Route::Eigen { system, root } => {
                let n = self.dim;
                let mut values = vec![Complex::new(T::zero(), T::zero()); n];
                for (j, (&lambda, &r)) in system.eigenvalues().iter().zip(root).enumerate() {
                    if r.is_zero() {
                        continue;
                    }
                    let coef = Complex::from_polar(r, t * lambda);
                    for (v, &x) in values.iter_mut().zip(system.vector(j)) {
                        *v += coef * x;
                    }
                }
                values
            }
            Route::Chebyshev(prop) => prop.evolve(t)?,
        };
        Ok(AmplitudeVector { t, values })
    }

    pub fn site_probabilities(&self, t: T) -> Result<WalkDistribution<T>> {
        let amp = self.evolve(t)?;
        Ok(WalkDistribution {
            t,
            probs: amp.values.iter().map(|a| a.norm_sqr()).collect(),
            indexing: Indexing::Site,
        })
    }

    /// `<Phi_k | psi(t)>` with `Phi_k` the uniform unit vector on shell `k`.
    pub fn stratum_amplitudes(&self, t: T, strat: &Stratification) -> Result<Vec<Complex<T>>> {
        self.check_strat(strat)?;
        let amp = self.evolve(t)?;
        Ok(project_strata(&amp.values, strat))
    }

    pub fn stratum_probabilities(&self, t: T, strat: &Stratification) -> Result<WalkDistribution<T>> {
        self.check_strat(strat)?;
        let site = self.site_probabilities(t)?;
        Ok(WalkDistribution {
            t,
            probs: (0..strat.len())
                .map(|k| site.probs[strat.range(k)].iter().copied().sum())
                .collect(),
            indexing: Indexing::Stratum,
        })
    }

    /// Exact `lim (1/T) ∫_0^T P(n, t) dt` from the eigenprojections of `H`.
    /// Only available on the eigen route.
    pub fn time_averaged_distribution(&self) -> Result<WalkDistribution<T>> {
        let Route::Eigen { system, root } = &self.route else {
            return Err(Error::InvalidArgument(
                "time average needs the eigen propagator".into(),
            ));
        };
        let n = self.dim;
        let tol = T::lit(DEGENERACY_TOLERANCE);
        let lambdas = system.eigenvalues();
        let mut avg = vec![T::zero(); n];
        let mut proj = vec![T::zero(); n];
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && lambdas[end] - lambdas[end - 1] <= tol {
                end += 1;
            }
            proj.iter_mut().for_each(|p| *p = T::zero());
            for j in start..end {
                let r = root[j];
                for (p, &x) in proj.iter_mut().zip(system.vector(j)) {
                    *p += r * x;
                }
            }
            for (a, &p) in avg.iter_mut().zip(&proj) {
                *a += p * p;
            }
            start = end;
        }
        Ok(WalkDistribution {
            t: T::infinity(),
            probs: avg,
            indexing: Indexing::Site,
        })
    }

    fn check_strat(&self, strat: &Stratification) -> Result<()> {
        if strat.total() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: strat.total(),
            });
        }
        Ok(())
    }
}

/// Sums site amplitudes over each shell and divides by `sqrt(|V_k|)`.
pub fn project_strata<T: Real>(values: &[Complex<T>], strat: &Stratification) -> Vec<Complex<T>> {
    (0..strat.len())
        .map(|k| {
            let range = strat.range(k);
            let norm = T::from_count(range.len()).sqrt();
            let s: Complex<T> = values[range]
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, &v| acc + v);
            s / norm
        })
        .collect()
}

/// `exp(itH) e_0` by the Chebyshev expansion
/// `exp(i z X) = J_0(z) + 2 Σ_{k>=1} i^k J_k(z) T_k(X)` with
/// `H = a I + b X`, `z = b t`.
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator<T> {
    h: SymmetricHamiltonian<T>,
    center: T,
    half_width: T,
}

impl<T: Real> ChebyshevPropagator<T> {
    pub fn new(h: SymmetricHamiltonian<T>) -> Self {
        let (lo, hi) = h.spectral_bounds();
        let half = T::lit(0.5);
        Self {
            center: (lo + hi) * half,
            half_width: (hi - lo) * half,
            h,
        }
    }

    pub fn evolve(&self, t: T) -> Result<Vec<Complex<T>>> {
        let n = self.h.dim();
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        if n == 0 {
            return Ok(out);
        }
        let global = Complex::from_polar(T::one(), t * self.center);
        if self.half_width.is_zero() {
            out[0] = global;
            return Ok(out);
        }
        let z = t * self.half_width;
        let az = z.abs().to_f64_lossy();
        let terms = (az + 10.0 * az.cbrt() + 40.0).ceil() as usize;
        let coeffs = bessel_j_sequence(terms, z)?;

        let mut re = vec![T::zero(); n];
        let mut im = vec![T::zero(); n];
        let mut prev = vec![T::zero(); n];
        let mut cur = vec![T::zero(); n];
        let mut next = vec![T::zero(); n];
        prev[0] = T::one();
        re[0] = coeffs[0];
        if terms >= 1 {
            self.apply_scaled(&prev, &mut cur);
            let c = T::lit(2.0) * coeffs[1];
            im.iter_mut().zip(&cur).for_each(|(a, &v)| *a += c * v);
        }
        for (k, &jk) in coeffs.iter().enumerate().skip(2) {
            // T_k = 2 X T_{k-1} - T_{k-2}
            self.apply_scaled(&cur, &mut next);
            for (nx, &pv) in next.iter_mut().zip(&prev) {
                *nx = T::lit(2.0) * *nx - pv;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            let c = T::lit(2.0) * jk;
            let (target, sign) = match k % 4 {
                0 => (&mut re, T::one()),
                1 => (&mut im, T::one()),
                2 => (&mut re, -T::one()),
                _ => (&mut im, -T::one()),
            };
            let c = sign * c;
            target.iter_mut().zip(&cur).for_each(|(a, &v)| *a += c * v);
        }
        for ((o, &r), &i) in out.iter_mut().zip(&re).zip(&im) {
            *o = global * Complex::new(r, i);
        }
        Ok(out)
    }

    // out = (H - a I) x / b
    fn apply_scaled(&self, x: &[T], out: &mut [T]) {
        self.h.apply(x, out);
        let inv = self.half_width.recip();
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = (*o - self.center * xi) * inv;
        }
    }
}

/// One-shot [`ExactWalk::evolve`] with automatic route selection.
pub fn evolve<T: Real>(h: &SymmetricHamiltonian<T>, t: T) -> Result<AmplitudeVector<T>> {
    ExactWalk::new(h)?.evolve(t)
}

pub fn site_probabilities<T: Real>(
    h: &SymmetricHamiltonian<T>,
    t: T,
) -> Result<WalkDistribution<T>> {
    ExactWalk::new(h)?.site_probabilities(t)
}

pub fn stratum_probabilities<T: Real>(
    h: &SymmetricHamiltonian<T>,
    t: T,
    strat: &Stratification,
) -> Result<WalkDistribution<T>> {
    ExactWalk::new(h)?.stratum_probabilities(t, strat)
}

pub fn time_averaged_distribution<T: Real>(
    h: &SymmetricHamiltonian<T>,
) -> Result<WalkDistribution<T>> {
    ExactWalk::eigen(h, DEFAULT_DENSE_CAP)?.time_averaged_distribution()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_j;
    use crate::tree::{build_adjacency, build_mb_hamiltonian, diagonal_shift, stratum_sizes, TreeParams};

    fn adjacency(p: usize, m: usize) -> SymmetricHamiltonian<f64> {
        build_adjacency(TreeParams::new(p, m).unwrap()).unwrap()
    }

    #[test]
    fn starts_at_root() {
        let walk = ExactWalk::new(&adjacency(3, 2)).unwrap();
        let amp = walk.evolve(0.0).unwrap();
        assert!((amp.values[0].re - 1.0).abs() < 1e-14);
        assert!(amp.values[1..].iter().all(|a| a.norm() < 1e-14));
    }

    #[test]
    fn root_amplitude_closed_form() {
        let walk = ExactWalk::new(&adjacency(3, 2)).unwrap();
        let s5 = 5f64.sqrt();
        for i in 0..40 {
            let t = 0.25 * i as f64;
            let a = walk.evolve(t).unwrap().values[0];
            let expect = (2.0 + 3.0 * (s5 * t).cos()) / 5.0;
            assert!((a.re - expect).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
        let t = std::f64::consts::PI / s5;
        let p = walk.site_probabilities(t).unwrap();
        assert!((p.probs[0] - 0.04).abs() < 1e-13);
    }

    #[test]
    fn stratum_one_closed_form() {
        let params = TreeParams::new(3, 2).unwrap();
        let strat = stratum_sizes(params).unwrap();
        let walk = ExactWalk::new(&adjacency(3, 2)).unwrap();
        for &t in &[0.3, 1.0, 4.2] {
            let p = walk.stratum_probabilities(t, &strat).unwrap();
            let s = (5f64.sqrt() * t).sin();
            assert!((p.probs[1] - 0.6 * s * s).abs() < 1e-12);
        }
        let p0 = walk.stratum_probabilities(0.0, &strat).unwrap();
        assert!((p0.probs[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn leaves_of_star_are_interchangeable() {
        let walk = ExactWalk::new(&adjacency(3, 1)).unwrap();
        let p = walk.site_probabilities(0.9).unwrap();
        assert!((p.probs[1] - p.probs[2]).abs() < 1e-14);
        assert!((p.probs[2] - p.probs[3]).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_matches_eigen() {
        for (p, m) in [(2, 5), (3, 3), (4, 3), (5, 2)] {
            let h = adjacency(p, m);
            let eig = ExactWalk::with_method(&h, Propagation::Eigen).unwrap();
            let cheb = ExactWalk::with_method(&h, Propagation::Chebyshev).unwrap();
            for &t in &[-2.0, 0.0, 0.4, 3.0, 11.0] {
                let a = eig.evolve(t).unwrap();
                let b = cheb.evolve(t).unwrap();
                for (x, y) in a.values.iter().zip(&b.values) {
                    assert!((x - y).norm() < 1e-12, "p={p} m={m} t={t}");
                }
            }
            let mb = build_mb_hamiltonian(TreeParams::new(p, m).unwrap()).unwrap();
            let a = ExactWalk::with_method(&mb, Propagation::Eigen).unwrap().evolve(1.3).unwrap();
            let b = ExactWalk::with_method(&mb, Propagation::Chebyshev).unwrap().evolve(1.3).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn scalar_hamiltonian_on_one_vertex() {
        let h = SymmetricHamiltonian::from_edges(1, &[], vec![2.0]).unwrap();
        let avg = time_averaged_distribution(&h).unwrap();
        assert_eq!(avg.probs, vec![1.0]);
        let cheb = ExactWalk::with_method(&h, Propagation::Chebyshev).unwrap();
        let a = cheb.evolve(0.5).unwrap().values[0];
        assert!((a - Complex::from_polar(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn time_average_on_worked_example() {
        let avg = time_averaged_distribution(&adjacency(3, 2)).unwrap();
        assert!((avg.probs[0] - 0.34).abs() < 1e-12);
        assert!((avg.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_average_matches_long_horizon_mean() {
        let h = adjacency(2, 2);
        let walk = ExactWalk::new(&h).unwrap();
        let exact = walk.time_averaged_distribution().unwrap();
        // midpoint rule on [0, 1e4]
        let horizon = 1.0e4;
        let steps = 200_000;
        let dt = horizon / steps as f64;
        let mut mean = vec![0.0; h.dim()];
        for s in 0..steps {
            let p = walk.site_probabilities((s as f64 + 0.5) * dt).unwrap();
            for (m, q) in mean.iter_mut().zip(&p.probs) {
                *m += q / steps as f64;
            }
        }
        for (a, b) in exact.probs.iter().zip(&mean) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn time_average_needs_eigen_route() {
        let cheb = ExactWalk::with_method(&adjacency(3, 2), Propagation::Chebyshev).unwrap();
        assert!(cheb.time_averaged_distribution().is_err());
    }

    #[test]
    fn shift_leaves_probabilities_unchanged() {
        let h = adjacency(3, 2);
        let base = ExactWalk::new(&h).unwrap();
        for c in [-5.0, 1.0, 3.7] {
            let shifted = ExactWalk::new(&diagonal_shift(&h, c)).unwrap();
            for &t in &[0.5, 1.0, 5.0] {
                let a = base.site_probabilities(t).unwrap();
                let b = shifted.site_probabilities(t).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12);
            }
        }
    }

    #[test]
    fn mb_differs_from_adjacency() {
        let params = TreeParams::new(3, 1).unwrap();
        let a = site_probabilities(&build_adjacency::<f64>(params).unwrap(), 1.0).unwrap();
        let b = site_probabilities(&build_mb_hamiltonian::<f64>(params).unwrap(), 1.0).unwrap();
        assert!(a.max_abs_diff(&b) > 1e-3);
    }

    #[test]
    fn long_line_follows_bessel() {
        let params = TreeParams::new(2, 30).unwrap();
        let strat = stratum_sizes(params).unwrap();
        let p = stratum_probabilities(&adjacency(2, 30), 1.0, &strat).unwrap();
        for k in 0..6 {
            let j = bessel_j(k, 2.0).unwrap();
            let expect = if k == 0 { j * j } else { 2.0 * j * j };
            assert!((p.probs[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_stratification() {
        let walk = ExactWalk::new(&adjacency(3, 2)).unwrap();
        let strat = stratum_sizes(TreeParams::new(3, 3).unwrap()).unwrap();
        assert_eq!(
            walk.stratum_probabilities(1.0, &strat).unwrap_err(),
            Error::DimensionMismatch { expected: 10, found: 22 }
        );
    }
}
