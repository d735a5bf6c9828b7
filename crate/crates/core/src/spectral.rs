//! Orthogonal-polynomial route for finite trees.
//!
//! The root's spectral measure is encoded by Szegő–Jacobi parameters
//! `(omega_n, alpha_n)`. Its atoms come from the truncated Jacobi matrix
//! (Golub–Welsch), and shell amplitudes are sums over those atoms.

use num_complex::Complex;

use crate::eigen::tridiagonal_eigen;
use crate::error::{Error, Result};
use crate::evolution::{Indexing, WalkDistribution};
use crate::scalar::Real;
use crate::tree::{stratum_sizes, Stratification, TreeParams};

/// Relative pole guard for the Stieltjes ratio.
pub const POLE_GUARD: f64 = 1e-12;

/// Recurrence coefficients `omega_1, omega_2, ...` and `alpha_1, alpha_2, ...`
/// (1-based, as they appear in the recurrence). Past the explicit lists the
/// optional tail value repeats forever.
#[derive(Debug, Clone, PartialEq)]
pub struct SzegoJacobiParams<T> {
    omegas: Vec<T>,
    alphas: Vec<T>,
    tail: Option<(T, T)>,
}

impl<T: Real> SzegoJacobiParams<T> {
    pub fn new(omegas: Vec<T>, alphas: Vec<T>) -> Result<Self> {
        if let Some(bad) = omegas.iter().find(|w| !(**w >= T::zero())) {
            return Err(Error::InvalidArgument(format!(
                "omega must be non-negative, got {}",
                bad.to_f64_lossy()
            )));
        }
        Ok(Self {
            omegas,
            alphas,
            tail: None,
        })
    }

    /// `omega_1 = p`, `omega_2..omega_M = p - 1`, zero afterwards; `alpha = 0`.
    pub fn finite_tree(params: TreeParams) -> Self {
        let p = T::from_count(params.degree());
        let mut omegas = vec![p - T::one(); params.generation()];
        omegas[0] = p;
        Self {
            omegas,
            alphas: Vec::new(),
            tail: Some((T::zero(), T::zero())),
        }
    }

    /// `omega_1 = p`, `omega_n = p - 1` for every `n >= 2`; `alpha = 0`.
    pub fn infinite_tree(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidTree { p, m: 0 });
        }
        let p = T::from_count(p);
        Ok(Self {
            omegas: vec![p],
            alphas: Vec::new(),
            tail: Some((p - T::one(), T::zero())),
        })
    }

    /// `omega_n`, 1-based.
    pub fn omega(&self, n: usize) -> Result<T> {
        Self::lookup(&self.omegas, self.tail.map(|t| t.0), n)
    }

    /// `alpha_n`, 1-based.
    pub fn alpha(&self, n: usize) -> Result<T> {
        Self::lookup(&self.alphas, self.tail.map(|t| t.1), n)
    }

    fn lookup(values: &[T], tail: Option<T>, n: usize) -> Result<T> {
        debug_assert!(n >= 1);
        match (values.get(n - 1), tail) {
            (Some(&v), _) => Ok(v),
            (None, Some(t)) => Ok(t),
            (None, None) => Err(Error::InsufficientParameters {
                needed: n,
                available: values.len(),
            }),
        }
    }
}

/// Monic `Q_k(x)` and the associated `Q*_k(x)` by forward recurrence:
/// `x Q_n = Q_{n+1} + alpha_{n+1} Q_n + omega_n Q_{n-1}` and the same with
/// indices shifted by one for `Q*`.
pub fn eval_polynomials<T: Real>(params: &SzegoJacobiParams<T>, k: usize, x: T) -> Result<(T, T)> {
    let mut q = (T::one(), T::zero());
    let mut qs = (T::one(), T::zero());
    for n in 0..k {
        let next = (x - params.alpha(n + 1)?) * q.0
            - if n > 0 { params.omega(n)? * q.1 } else { T::zero() };
        q = (next, q.0);
        let next_s = (x - params.alpha(n + 2)?) * qs.0
            - if n > 0 { params.omega(n + 1)? * qs.1 } else { T::zero() };
        qs = (next_s, qs.0);
    }
    Ok((q.0, qs.0))
}

/// `q_0(x), ..., q_kmax(x)` with `q_k = Q_k / sqrt(omega_1 ... omega_k)`, the
/// orthonormal polynomials of the measure.
pub fn eval_normalized<T: Real>(params: &SzegoJacobiParams<T>, kmax: usize, x: T) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(T::one());
    let mut prev = T::zero();
    let mut sqrt_prev_omega = T::zero();
    for n in 0..kmax {
        let omega_next = params.omega(n + 1)?;
        if omega_next.is_zero() {
            return Err(Error::VanishingOmega { index: n + 1 });
        }
        let sqrt_next = omega_next.sqrt();
        let cur = out[n];
        let next = ((x - params.alpha(n + 1)?) * cur - sqrt_prev_omega * prev) / sqrt_next;
        prev = cur;
        sqrt_prev_omega = sqrt_next;
        out.push(next);
    }
    Ok(out)
}

/// `G(x) = Q*_{N-1}(x) / Q_N(x)`.
pub fn stieltjes_transform<T: Real>(params: &SzegoJacobiParams<T>, n: usize, x: T) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidArgument("Stieltjes ratio needs N >= 1".into()));
    }
    let (qn, _) = eval_polynomials(params, n, x)?;
    let (_, qs) = eval_polynomials(params, n - 1, x)?;
    if qn.abs() < T::lit(POLE_GUARD) * (T::one() + qs.abs()) {
        return Err(Error::PoleProximity { x: x.to_f64_lossy() });
    }
    Ok(qs / qn)
}

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> DiscreteMeasure<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// `Σ w_j / (x - x_j)`.
    pub fn stieltjes(&self, x: T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&xj, &w)| w / (x - xj))
            .sum()
    }

    /// `Σ w_j x_j^m`.
    pub fn moment(&self, m: i32) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&xj, &w)| w * xj.powi(m))
            .sum()
    }
}

/// Atoms and weights from the `(M+1) x (M+1)` Jacobi matrix: eigenvalues and
/// squared first eigenvector components.
pub fn spectral_measure<T: Real>(params: &SzegoJacobiParams<T>, m: usize) -> Result<DiscreteMeasure<T>> {
    let diag = (1..=m + 1).map(|n| params.alpha(n)).collect::<Result<Vec<_>>>()?;
    let off = (1..=m)
        .map(|n| params.omega(n).map(|w| w.sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let (nodes, first) = tridiagonal_eigen(&diag, &off, 1)?;
    Ok(DiscreteMeasure {
        nodes,
        weights: first.iter().map(|&v| v * v).collect(),
    })
}

/// Spectral data of `T(p, M)` with the orthonormal polynomials tabulated at
/// every atom.
#[derive(Debug, Clone)]
pub struct FiniteTreeSpectrum<T> {
    params: TreeParams,
    jacobi: SzegoJacobiParams<T>,
    measure: DiscreteMeasure<T>,
    strat: Stratification,
    // poly[j][k] = q_k(x_j)
    poly: Vec<Vec<T>>,
}

impl<T: Real> FiniteTreeSpectrum<T> {
    pub fn new(params: TreeParams) -> Result<Self> {
        let jacobi = SzegoJacobiParams::finite_tree(params);
        let m = params.generation();
        let measure = spectral_measure(&jacobi, m)?;
        let poly = measure
            .nodes
            .iter()
            .map(|&x| eval_normalized(&jacobi, m, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            jacobi,
            measure,
            strat: stratum_sizes(params)?,
            poly,
        })
    }

    pub fn tree(&self) -> TreeParams {
        self.params
    }

    pub fn jacobi(&self) -> &SzegoJacobiParams<T> {
        &self.jacobi
    }

    pub fn measure(&self) -> &DiscreteMeasure<T> {
        &self.measure
    }

    pub fn stratification(&self) -> &Stratification {
        &self.strat
    }

    /// `(1/sqrt|V_k|) Σ_j exp(i t x_j) Q_k(x_j) w_j`.
    pub fn stratum_amplitude(&self, k: usize, t: T) -> Result<Complex<T>> {
        let m = self.params.generation();
        if k > m {
            return Err(Error::IndexOutOfRange { index: k, size: m + 1 });
        }
        Ok(self
            .measure
            .nodes
            .iter()
            .zip(&self.measure.weights)
            .zip(&self.poly)
            .fold(Complex::new(T::zero(), T::zero()), |acc, ((&x, &w), q)| {
                acc + Complex::from_polar(w * q[k], t * x)
            }))
    }

    pub fn stratum_amplitudes(&self, t: T) -> Vec<Complex<T>> {
        let m = self.params.generation();
        let mut out = vec![Complex::new(T::zero(), T::zero()); m + 1];
        for ((&x, &w), q) in self.measure.nodes.iter().zip(&self.measure.weights).zip(&self.poly) {
            let phase = Complex::from_polar(w, t * x);
            for (o, &qk) in out.iter_mut().zip(q) {
                *o += phase * qk;
            }
        }
        out
    }

    /// Amplitude at any single vertex of shell `k`.
    pub fn site_amplitude(&self, k: usize, t: T) -> Result<Complex<T>> {
        let size = T::from_count(self.strat.sizes()[k.min(self.params.generation())]);
        Ok(self.stratum_amplitude(k, t)? / size.sqrt())
    }

    pub fn stratum_probabilities(&self, t: T) -> WalkDistribution<T> {
        WalkDistribution {
            t,
            probs: self.stratum_amplitudes(t).iter().map(|a| a.norm_sqr()).collect(),
            indexing: Indexing::Stratum,
        }
    }

    /// Site probabilities in BFS order: each shell's mass spread evenly.
    pub fn site_probabilities(&self, t: T) -> WalkDistribution<T> {
        let shells = self.stratum_probabilities(t);
        let mut probs = Vec::with_capacity(self.strat.total());
        for (k, &pk) in shells.probs.iter().enumerate() {
            let size = self.strat.sizes()[k];
            probs.extend(std::iter::repeat_n(pk / T::from_count(size), size));
        }
        WalkDistribution {
            t,
            probs,
            indexing: Indexing::Site,
        }
    }
}

/// One-shot shell amplitude of `T(p, M)` at time `t`.
pub fn stratum_amplitude_finite<T: Real>(p: usize, m: usize, k: usize, t: T) -> Result<Complex<T>> {
    FiniteTreeSpectrum::new(TreeParams::new(p, m)?)?.stratum_amplitude(k, t)
}
