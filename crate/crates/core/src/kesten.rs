//! The infinite tree: Kesten's limit measure, shell amplitudes by quadrature,
//! the line (`p = 2`) closed forms and decay profiles.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{bessel_j, SingularQuadrature, SingularWeight};
use crate::spectral::{eval_normalized, SzegoJacobiParams};

/// `p sqrt(4(p-1) - x^2) / (2 pi (p^2 - x^2))` on `(-2 sqrt(p-1), 2 sqrt(p-1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KestenMeasure {
    p: usize,
}

impl KestenMeasure {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidTree { p, m: 0 });
        }
        Ok(Self { p })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// Half-width `2 sqrt(p - 1)` of the support.
    pub fn edge<T: Real>(&self) -> T {
        T::lit(2.0) * T::from_count(self.p - 1).sqrt()
    }

    pub fn density<T: Real>(&self, x: T) -> T {
        let c = self.edge::<T>();
        if !(x.abs() < c) {
            return T::zero();
        }
        let p = T::from_count(self.p);
        p * (c * c - x * x).sqrt() / (T::lit(2.0) * T::PI() * (p * p - x * x))
    }

    /// Weight kind after factoring the density: for `p = 2` the factor
    /// `p^2 - x^2` cancels one square root and leaves an arcsine law.
    pub fn weight_kind(&self) -> SingularWeight {
        if self.p == 2 {
            SingularWeight::InverseSqrt
        } else {
            SingularWeight::Sqrt
        }
    }

    /// Smooth factor `f` with `density(x) = f(x) w(x)` for [`Self::weight_kind`].
    pub fn smooth_factor<T: Real>(&self, x: T) -> T {
        if self.p == 2 {
            T::FRAC_1_PI()
        } else {
            let p = T::from_count(self.p);
            p / (T::lit(2.0) * T::PI() * (p * p - x * x))
        }
    }

    /// `∫ g dmu` for a real- or complex-valued `g`.
    pub fn integrate<T, V, F>(&self, g: F, order: usize) -> Result<V>
    where
        T: Real,
        V: Copy + num_traits::Zero + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
        F: Fn(T) -> V,
    {
        let quad = SingularQuadrature::new(self.weight_kind(), order)?;
        quad.integrate(|x| g(x) * self.smooth_factor(x), self.edge())
    }
}

pub fn kesten_density<T: Real>(p: usize, x: T) -> Result<T> {
    Ok(KestenMeasure::new(p)?.density(x))
}

/// Quadrature evaluator for `<Phi_k| exp(itH) |root>` on the infinite tree.
#[derive(Debug, Clone)]
pub struct InfiniteTreeAmplitudes<T> {
    measure: KestenMeasure,
    quad: SingularQuadrature<T>,
    kmax: usize,
    // per quadrature node: scaled node x, smooth factor, q_0..q_kmax
    nodes: Vec<T>,
    factors: Vec<T>,
    poly: Vec<Vec<T>>,
}

impl<T: Real> InfiniteTreeAmplitudes<T> {
    pub fn new(p: usize, kmax: usize, order: usize) -> Result<Self> {
        let measure = KestenMeasure::new(p)?;
        let quad = SingularQuadrature::new(measure.weight_kind(), order)?;
        let jacobi = SzegoJacobiParams::infinite_tree(p)?;
        let c = measure.edge::<T>();
        let scale = match measure.weight_kind() {
            SingularWeight::InverseSqrt => T::one(),
            SingularWeight::Sqrt => c * c,
        };
        let rule = quad.rule();
        let nodes: Vec<T> = rule.nodes.iter().map(|&u| c * u).collect();
        let factors = nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * scale * measure.smooth_factor(x))
            .collect();
        let poly = nodes
            .iter()
            .map(|&x| eval_normalized(&jacobi, kmax, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            measure,
            quad,
            kmax,
            nodes,
            factors,
            poly,
        })
    }

    pub fn measure(&self) -> KestenMeasure {
        self.measure
    }

    pub fn order(&self) -> usize {
        self.quad.rule().order
    }

    /// `(1/sqrt|V_k|) ∫ exp(itx) Q_k(x) dmu(x)`.
    pub fn amplitude(&self, k: usize, t: T) -> Result<Complex<T>> {
        if k > self.kmax {
            return Err(Error::IndexOutOfRange {
                index: k,
                size: self.kmax + 1,
            });
        }
        Ok(self
            .nodes
            .iter()
            .zip(&self.factors)
            .zip(&self.poly)
            .fold(Complex::new(T::zero(), T::zero()), |acc, ((&x, &f), q)| {
                acc + Complex::from_polar(f * q[k], t * x)
            }))
    }

    /// Shells `0..=kmax` at once.
    pub fn amplitudes(&self, t: T) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.kmax + 1];
        for ((&x, &f), q) in self.nodes.iter().zip(&self.factors).zip(&self.poly) {
            let phase = Complex::from_polar(f, t * x);
            for (o, &qk) in out.iter_mut().zip(q) {
                *o += phase * qk;
            }
        }
        out
    }
}

/// One-shot infinite-tree shell amplitude.
pub fn stratum_amplitude_infinite<T: Real>(p: usize, k: usize, t: T, order: usize) -> Result<Complex<T>> {
    InfiniteTreeAmplitudes::new(p, k, order)?.amplitude(k, t)
}

/// Quadrature order that resolves `exp(itx)` over the support up to `t_max`.
pub fn auto_order(p: usize, t_max: f64) -> usize {
    let c = 2.0 * ((p.max(2) - 1) as f64).sqrt();
    ((c * t_max.abs()).ceil() as usize + 64).max(256)
}

/// `P(n, t) = J_n(2t)^2` for the walk on the integer line.
pub fn line_probability<T: Real>(n: i64, t: T) -> Result<T> {
    let j = bessel_j(n.unsigned_abs() as usize, T::lit(2.0) * t)?;
    Ok(j * j)
}

/// `|amplitude|` of shell `k` at every time in `t_list` (increasing).
pub fn decay_profile<T: Real>(p: usize, k: usize, t_list: &[T]) -> Result<Vec<T>> {
    if t_list.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("time list must be increasing".into()));
    }
    let t_max = t_list.last().map_or(0.0, |t| t.to_f64_lossy());
    let amps = InfiniteTreeAmplitudes::new(p, k, auto_order(p, t_max))?;
    t_list
        .iter()
        .map(|&t| amps.amplitude(k, t).map(|a| a.norm()))
        .collect()
}

/// Maxima of `|amplitude|` over the dyadic windows `[2^j, 2^{j+1}]`,
/// sampled at `samples` evenly spaced points per window.
pub fn windowed_maxima<T: Real>(p: usize, k: usize, windows: std::ops::RangeInclusive<u32>, samples: usize) -> Result<Vec<T>> {
    let t_max = 2f64.powi(*windows.end() as i32 + 1);
    let amps = InfiniteTreeAmplitudes::<T>::new(p, k, auto_order(p, t_max))?;
    windows
        .map(|j| {
            let lo = T::lit(2f64.powi(j as i32));
            let step = lo / T::from_count(samples.max(2) - 1);
            (0..samples.max(2))
                .map(|i| amps.amplitude(k, lo + step * T::from_count(i)).map(|a| a.norm()))
                .try_fold(T::zero(), |m, a| a.map(|a| m.max(a)))
        })
        .collect()
}
