use crate::linalg::DEFAULT_RCOND;
use crate::refine::RefineOptions;

/// Seed used for the generic Schur weights when none is given.
pub const DEFAULT_SEED: u64 = 20_150_117;

/// When to apply a random unitary change of coordinates before solving.
///
/// The pipeline normalizes the leading coordinate of every recovered vector
/// to one, which fails when the true generators have a vanishing leading
/// coordinate. A random unitary change of coordinates moves them into
/// general position without changing any norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateChange {
    Never,
    /// Retry with a change of coordinates when the plain attempt errors or
    /// produces non-finite values.
    OnFailure,
    Always,
}

/// Options shared by the symmetric and nonsymmetric drivers.
#[derive(Debug, Clone)]
pub struct ApproxOptions {
    /// Relative singular-value cutoff of every least-squares solve.
    pub rcond: f64,
    /// Seed for the generic Schur weights and any coordinate change.
    pub seed: u64,
    /// Nonlinear refinement; `None` stops after the generating-polynomial stage.
    pub refine: Option<RefineOptions>,
    /// Refinement is skipped when `residual_gp <= skip_refine_below * ||F||`.
    pub skip_refine_below: f64,
    pub coordinate_change: CoordinateChange,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            rcond: DEFAULT_RCOND,
            seed: DEFAULT_SEED,
            refine: Some(RefineOptions::default()),
            skip_refine_below: 1e-10,
            coordinate_change: CoordinateChange::OnFailure,
        }
    }
}

impl ApproxOptions {
    pub fn without_refine() -> Self {
        ApproxOptions { refine: None, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
