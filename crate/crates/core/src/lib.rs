//! Simulation, spectral analysis and Whittle estimation for the elliptical
//! Ornstein-Uhlenbeck process, a complex-valued OU whose trajectories trace
//! noisy ellipses rather than circles.

pub mod cli;
pub mod dataio;
pub mod error;
pub mod fourier;
pub mod optimize;
pub mod params;
pub mod sampling;
pub mod spectral;
pub mod uncertainty;
pub mod whittle;

pub use error::{Error, Result};
pub use params::{
    eccentricity, proper_ar1_map, to_elliptical, to_geometric, wrap_orientation,
    ComplexAr1Params, EllipticalParams, GeometricParams,
};
