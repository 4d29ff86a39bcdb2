#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod constraints;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod projective;
pub mod random;
pub mod reduction;
pub mod solver;

pub use error::{Error, Result};
