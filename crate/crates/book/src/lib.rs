//! The guide in `book/`, compiled so that its listings run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/jets.md")]
pub mod jets {}

#[doc = include_str!("../../../book/src/static_equations.md")]
pub mod static_equations {}

#[doc = include_str!("../../../book/src/pseudo_newtonian.md")]
pub mod pseudo_newtonian {}

#[doc = include_str!("../../../book/src/surface_integrals.md")]
pub mod surface_integrals {}

#[doc = include_str!("../../../book/src/equipotentials.md")]
pub mod equipotentials {}

#[doc = include_str!("../../../book/src/newtonian_limit.md")]
pub mod newtonian_limit {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
