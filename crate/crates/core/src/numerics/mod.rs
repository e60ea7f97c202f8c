//! Shared numerical machinery: special functions, root finding, quadrature,
//! simplex search and small polytope LPs.

pub mod polytope;
pub mod quad;
pub mod roots;
pub mod simplex;
pub mod special;

pub use quad::{adaptive_quad, integrate, QuadResult};
pub use roots::{solve_a, solve_mu, RootResult};
pub use special::{kl_divergence, log_qfunc, qfunc, truncexp_entropy, truncexp_mean};
