//! Evans function, transmission coefficients and a discretized-operator oracle.

mod compound;
mod linearization;
mod ode;
mod oracle;
mod parity;
mod transmission;
mod winding;

pub use compound::{
    compound_matrix, det_plus, evans_compound, evans_value, wedge2, wedge4, EvansEvaluation, EvansMethod, C6,
};
pub use linearization::{
    assemble_a, asymptotic_system, coefficients, det4, mat_vec, matrix, squared_rates, AsymptoticSystem, CMat4,
    Coefficients, CVec4, LinearizationContext,
};
pub use ode::{integrate, Solution, RTOL};
pub use oracle::{
    discrete_spectrum_oracle, essential_distance, oracle_eigenvector, Eigenvector, OracleConfig, OracleEigenvalue,
    OracleReport, CLUSTER_FACTOR, TRUNCATION_RATIO,
};
pub use parity::{parity_check, Parity, ParityReport, DOMINANCE};
pub use transmission::{
    evans, gamma_double_from_stability, lambda_edge_predict, t2_analytic, t2_jump_matching, EdgePrediction,
};
pub use winding::{
    circle_contour, evans_scan, real_zero, rectangle_contour, winding_count, write_scan_csv, MAX_CONTOUR_POINTS,
};
