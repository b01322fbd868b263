//! Parameter selection on a geometric grid: empirical risk minimization, a Monte Carlo
//! oracle and the quasi-optimality heuristic.

mod grid;
mod method;
mod quasi_opt;
mod risk;

pub use grid::{build_grid, ParamGrid};
pub use method::{Certificate, LossKind, LossSpec, Reconstruction, RegularizationMethod, SubgradientRule};
pub use quasi_opt::{
    quasi_optimality_landweber, quasi_optimality_landweber_spectral, quasi_optimality_tikhonov,
    QuasiOptimal,
};
pub use risk::{
    argmin_first, draw_samples, empirical_risk, erm_select, loss_matrix, mean_curve, oracle_select,
    risk_curve, Sampler, Selection, TrainingSet,
};
