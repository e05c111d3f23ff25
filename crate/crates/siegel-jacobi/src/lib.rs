//! Numerics on the Siegel upper half space `H_n`, the Siegel-Jacobi space
//! `H_{n,m} = H_n x C^{(m,n)}` and their bounded models `D_n`, `D_{n,m}`.
//!
//! Matrices are dense complex `f64` ([`CMatrix`]). Group data that is real
//! by definition uses [`RMatrix`].

pub mod cayley;
pub mod checks;
pub mod diffops;
pub mod error;
pub mod geodesics;
pub mod groups;
pub mod io;
pub mod jacobiforms;
pub mod linalg;
pub mod metrics;
pub mod random;
pub mod reduction;
pub mod spaces;
pub mod theta;

pub use error::{Error, Result};
pub use linalg::{CMatrix, RMatrix, Tolerance, C64};
