//! Static spacetimes in pseudo-Newtonian variables: charts and fields with
//! exact second-order jets, curvature, surface integrals for mass and center
//! of mass, and test-particle dynamics on equipotential surfaces.

pub mod asymptotics;
pub mod autodiff;
pub mod charts;
pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod parallel;
pub mod quadrature;
pub mod sampling;
pub mod solutions;
pub mod statics;
pub mod surface;
pub mod surfint;
pub mod tensor;

pub use error::{GeoError, Result};
