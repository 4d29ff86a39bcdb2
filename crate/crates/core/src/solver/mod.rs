//! Critical-point solvers for the fitting problems: companion-matrix roots
//! for one variable, total-degree homotopy continuation for a few, and a
//! damped Gauss-Newton polish.

mod edd;
mod homotopy;
mod monodromy;
mod poly;
mod refine;
mod system;
mod univariate;

pub use edd::*;
pub use homotopy::*;
pub use monodromy::*;
pub use poly::Polynomial;
pub use refine::*;
pub use system::*;
pub use univariate::*;
