//! Synthetic scenes, the triangulation methods and their scoring.

mod linefit;
mod methods;
mod scene;
mod stats;

pub use linefit::*;
pub use methods::*;
pub use scene::*;
pub use stats::*;
