//! Stationary fronts: branch roots, folds, regular-branch continuation,
//! composite profiles and their collocation refinement.

mod bvp;
mod continuation;
mod profile;
mod roots;

pub use bvp::{refine_front_bvp, MAX_NEWTON_STEPS, UPDATE_TOL};
pub use continuation::{
    classify_destabilization_type, continue_regular_branch, default_gamma_scan, ContinuationPoint,
    ContinuationResult, DestabilizationType,
};
pub use profile::{
    build_composite_front, default_half_width, Construction, FrontProfile, DEFAULT_DECAY_LENGTHS,
    MIN_DECAY_LENGTHS, MIN_NODES,
};
pub use roots::{
    existence_derivative, existence_function, find_branches, find_fold, regular_front_v_peak, BranchPoint,
    FoldPoint, DEFAULT_V_MAX, SCAN_STEP,
};

use std::io::Write;

/// CSV with columns `gamma,v0,branch_index,transversal,residual`.
pub fn write_branches_csv(points: &[BranchPoint], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "gamma,v0,branch_index,transversal,residual")?;
    for p in points {
        writeln!(out, "{},{:.15e},{},{},{:.3e}", p.gamma, p.v0, p.branch_index, p.transversal, p.residual)?;
    }
    Ok(())
}
