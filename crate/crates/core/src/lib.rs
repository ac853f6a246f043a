//! Generalized Bessel potentials on `Q_p^n`: convolution kernels, Green
//! functions and heat kernels built from pairs of negative definite radial
//! functions, together with a brute-force character-sum oracle.

pub mod battery;
pub mod error;
pub mod green_function;
pub mod heat_kernel;
pub mod oracle_grid;
pub mod padic_core;
pub mod radial_transform;
pub mod semigroup_measures;
pub mod symbol_algebra;

pub use error::{Error, Result};

/// Keeps the guide's snippets compiling.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/padic.md")]
    struct Padic;
    #[doc = include_str!("../../../book/src/symbols.md")]
    struct Symbols;
    #[doc = include_str!("../../../book/src/kernel.md")]
    struct Kernel;
    #[doc = include_str!("../../../book/src/semigroup.md")]
    struct Semigroup;
    #[doc = include_str!("../../../book/src/green.md")]
    struct Green;
    #[doc = include_str!("../../../book/src/heat.md")]
    struct Heat;
    #[doc = include_str!("../../../book/src/oracle.md")]
    struct Oracle;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
