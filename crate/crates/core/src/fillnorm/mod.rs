//! Exact l1-minimal fillings: a rational simplex solver, the affine filling
//! norm on `T_B`, the constants `C_1`, `C_2`, `K`, and [`fill_cycle`].

mod filling;
mod lp;

pub use filling::{
    c1_constant, c2_constant, c2_for, fill_cycle, filling_norm, homology_class, k_constant, simplicial_filling,
    C2Value, FillingCertificate, FillingCertificateJson, Stage, StageJson,
};
pub use lp::{l1_minimize, lp_solve, lp_solve_with, LinearProgram, LpSolution, LpSolutionJson, PivotRule};
