//! Numerical thresholds shared across modules.

/// Imaginary parts above `IMAG_REL * max(1, |λ|)` classify an eigenvalue as complex.
pub const IMAG_REL: f64 = 1e-8;

/// Absolute slack used when checking eigenvalues against bound intervals.
pub const CONTAINMENT_SLACK: f64 = 1e-8;

/// Deflation threshold of the Francis QR iteration, relative to neighbouring diagonals.
pub const QR_DEFLATION: f64 = 1e-13;

/// QR sweeps allowed per unit of matrix dimension.
pub const QR_SWEEPS_PER_N: usize = 50;

/// Default cap on the dimension of dense eigenproblems.
pub const MAX_DENSE_N: usize = 9000;

/// Above this size dense eigenproblems are handed to the blocked backend.
pub const BLOCKED_EIG_THRESHOLD: usize = 1024;

/// Initial relative diagonal shift after an IC(0) breakdown.
pub const IC0_SHIFT_START: f64 = 1e-3;

/// Number of shifted retries before IC(0) gives up.
pub const IC0_SHIFT_RETRIES: usize = 10;

/// Default GMRES relative residual tolerance.
pub const GMRES_TOL: f64 = 1e-13;

/// Default MINRES tolerance on the preconditioned residual norm.
pub const MINRES_TOL: f64 = 1e-10;

/// Relative subdiagonal size below which Arnoldi reports a happy breakdown.
pub const ARNOLDI_HAPPY: f64 = 1e-14;

/// Tiny negative extreme eigenvalues of semidefinite pencils are clamped to zero.
pub const SEMIDEFINITE_CLAMP: f64 = 1e-10;
