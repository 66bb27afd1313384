//! Dense linear algebra kernels: symmetric eigendecomposition, real Schur
//! form, Bartels–Stewart and Kronecker Lyapunov solvers.

mod eig;
mod lu;
mod lyapunov;
mod matrix;
mod schur;

pub use eig::{sym_eig, SymEig};
pub use lu::LuFactor;
pub use lyapunov::{
    lyapunov_residual_norm, solve_lyapunov, solve_lyapunov_kron, solve_lyapunov_schur, KRON_MAX_ORDER,
};
pub use matrix::DenseMatrix;
pub use schur::{real_schur, Block, Eigenvalue, SchurForm};
