//! Spectral indicators, eigenvalue bounds of the preconditioned operators,
//! dense full spectra and containment checks.

mod bounds;
mod indicators;
mod spectrum;
mod verify;

pub use bounds::{
    cubic_bracket, diagonal_bounds, diagonal_cubic, rho_min, triangular_complex_disc, triangular_cubic,
    triangular_real_bounds, BoundReport, ComplexDisc, CubicCoefficients, DiagonalBounds, TriangularBounds,
};
pub use indicators::{compute_indicators, provenance, IndicatorSet};
pub use spectrum::{classify, full_spectrum, BlockWeights, EigenClass, Spectrum, SpectrumMode, SpectrumOptions};
pub use verify::{verify_bounds, CheckResult, Offender, Verdict};
