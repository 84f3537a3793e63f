//! Code listings from the guide in `book/`, compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}

#[doc = include_str!("../../../book/src/functionals.md")]
pub mod functionals {}

#[doc = include_str!("../../../book/src/optimization.md")]
pub mod optimization {}

#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}

#[doc = include_str!("../../../book/src/ch_analytic.md")]
pub mod ch_analytic {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
