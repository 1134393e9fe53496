//! Exact static vacuum solutions and Newtonian-limit families.

pub mod lambda;
pub mod schwarzschild;
pub mod weyl;

pub use lambda::{lambda_family, LambdaFamily, LambdaFamilySpec, LambdaMember};
pub use schwarzschild::{
    schwarzschild, schwarzschild_lapse, schwarzschild_pseudo_newtonian, SchwarzschildChart,
    SchwarzschildSpec,
};
pub use weyl::{weyl_system, BetaReference, Rod, WeylGeometry, WeylSpec, WeylSystem};
