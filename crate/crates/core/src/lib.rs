//! Stabilizer-code magic state distillation as exact rational dynamical maps
//! on the Bloch ball.
//!
//! The pipeline is: [`code`] definitions, built with [`pauli`] arithmetic, are
//! turned into polynomial maps by [`map`]; [`dynamics`] analyzes those maps;
//! [`oracle`] checks them against literal trace computations; and
//! [`analysis`] runs protocol-level studies on top.

// `!(a > b)` is used on purpose so that NaN takes the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod catalog;
pub mod code;
pub mod dynamics;
pub mod error;
pub mod map;
pub mod oracle;
pub mod pauli;

pub use error::{Error, Result};
