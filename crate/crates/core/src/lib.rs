//! Excursion theory toolkit for self-similar Markov processes.
//!
//! Excursions outside a fixed zero point are sampled as a Poisson point
//! process indexed by local time, pieced into a càdlàg path together with its
//! local time and inverse local time, and compared against homogenization
//! limits for processes that jump into the zero point's neighbourhood.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod exec;
pub mod homogenization;
pub mod j1;
pub mod jumping_in;
pub mod measures;
pub mod path;
pub mod piecing;
pub mod point_process;
pub mod rng;
pub mod special;
pub mod stats;
pub mod walsh;

pub use error::{Error, Result};
pub use path::{CadlagPath, PathBuilder, ScalingScheme, SegmentMode};
