//! Continuous-time quantum walks on homogeneous trees.
//!
//! Exact propagation on finite trees, the Szegő–Jacobi spectral route, the
//! Kesten law for the infinite tree and the large-degree limit theorems.
//! Everything is generic over [`Real`]; the aliases below fix `f64`.

pub mod asymptotics;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod kesten;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod tree;

pub use asymptotics::{
    qclt_amplitude, scaled_amplitude, semicircle_amplitude, y_charfn, y_charfn_limit, y_pmf,
    z_cdf, z_density, z_moment, CharfnMethod, LimitPolynomial, YWalkDistribution,
};
pub use eigen::EigenSystem;
pub use error::{Error, Result};
pub use evolution::{
    AmplitudeVector, ChebyshevPropagator, ExactWalk, Indexing, Propagation, WalkDistribution,
};
pub use kesten::{kesten_density, stratum_amplitude_infinite, InfiniteTreeAmplitudes, KestenMeasure};
pub use scalar::Real;
pub use special::{bessel_j, bessel_j_deriv, integrate_singular, SingularQuadrature, SingularWeight};
pub use spectral::{
    spectral_measure, stratum_amplitude_finite, DiscreteMeasure, FiniteTreeSpectrum,
    SzegoJacobiParams,
};
pub use tree::{
    build_adjacency, build_mb_hamiltonian, diagonal_shift, stratum_sizes, vertex_count,
    HamiltonianKind, Stratification, SymmetricHamiltonian, TreeParams,
};

pub type Hamiltonian = SymmetricHamiltonian<f64>;
pub type Eigen = EigenSystem<f64>;
pub type Walk = ExactWalk<f64>;
pub type Amplitudes = AmplitudeVector<f64>;
pub type Distribution = WalkDistribution<f64>;
pub type Measure = DiscreteMeasure<f64>;
pub type JacobiParams = SzegoJacobiParams<f64>;
pub type TreeSpectrum = FiniteTreeSpectrum<f64>;
pub type KestenAmplitudes = InfiniteTreeAmplitudes<f64>;
pub type YWalk = YWalkDistribution<f64>;
