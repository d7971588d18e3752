//! Exact computation with eventually periodic interval exchange maps on the real line.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![allow(clippy::result_large_err)]

extern crate alloc;

pub mod constructions;
pub mod dynamics;
pub mod error;
pub mod layout;
pub mod map;
pub mod metrics;
pub mod scalar;
pub mod set;

pub use error::{Error, Result, Witness};
pub use layout::{Layout, Payload, Piece, Shift, Tail};
pub use map::{cut_and_paste, validate, Ept, PartialIso, RawEpt};
pub use scalar::{ExtMeasure, Scalar};
pub use set::{staircase_set, sup_increasing, IntervalSet, TailSpec};
