// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod clt;
pub mod engine;
pub mod error;
pub mod fft;
pub mod field;
pub mod lattice;
pub mod magnetic;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{FieldPair, ScalarKind, TestFunction};
pub use lattice::Lattice;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/random-fields.md")]
    mod random_fields {}
    #[doc = include_str!("../../../book/src/covariance.md")]
    mod covariance {}
    #[doc = include_str!("../../../book/src/clt.md")]
    mod clt {}
    #[doc = include_str!("../../../book/src/magnetic.md")]
    mod magnetic {}
    #[doc = include_str!("../../../book/src/runner.md")]
    mod runner {}
}
