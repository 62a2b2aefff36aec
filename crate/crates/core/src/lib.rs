//! Uniform measures on high-dimensional sphere slices and their Gaussian
//! limits: geometry, sampling, quadrature and the experiment drivers built on
//! top of them.

pub mod gaussian;
pub mod harness;
pub mod integrands;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod slice_geometry;
pub mod special;
pub mod stats;
pub mod vectors;

pub use nalgebra::DMatrix;

pub use gaussian::{
    covariance_from_family, gaussian_expectation, gaussian_sample, marginal_covariance, ExpectationMethod,
    GaussianError, GaussianSpec,
};
pub use integrands::{Integrand, IntegrandError, IntegrandKind};
pub use quadrature::{
    disintegrate_sphere_integral, disintegration_coefficients, great_circle_integral_quadrature,
    DisintegrationCoefficients, QuadratureError,
};
pub use slice_geometry::{
    build_geometry, approximate_center, sample_slice, slice_integral_mc, sphere_surface_area, SliceError, SliceGeometry,
    SliceSpec,
};
pub use stats::Estimate;
pub use vectors::{
    gram_schmidt, min_independent_truncation, separation, FiniteFrame, OrthonormalFamily, SequenceVector,
    VectorError,
};
