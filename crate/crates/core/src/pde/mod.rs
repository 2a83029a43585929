//! Finite-difference solvers for the one-dimensional IM pricing PDEs.

mod convergence;
mod solver;
mod thomas;

pub use convergence::{convergence_study, log_log_slope, ConvergenceRow, ConvergenceStudy};
pub use solver::{
    solve_l_pde, solve_l_pde_bs, solve_nl_pde, FdCoeffs, FdGrid, FdSolution, Stencil,
};
pub use thomas::{thomas_solve, TridiagonalLu};
