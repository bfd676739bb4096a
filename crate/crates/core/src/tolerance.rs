//! Numerical tolerances shared by the library and its tests.

/// Unit trace, positivity and reconstruction checks.
pub const VALIDATION: f64 = 1e-10;

/// Maximum entrywise deviation `|A_jk - conj(A_kj)|` for a Hermitian matrix.
pub const HERMITICITY: f64 = 1e-12;

/// Eigenvalues below this are treated as exact zeros before taking logarithms.
pub const EIGEN_CLIP: f64 = 1e-12;

/// Eigenvalue-pair sums below this are kernel directions of the SLD.
pub const SLD_KERNEL: f64 = 1e-10;

/// Slack on the closed complete-positivity region.
pub const CP_BOUNDARY: f64 = 1e-12;

/// Probabilities and derivatives below this are treated as zero in Fisher sums.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// Two generator eigenvalues closer than this share an eigenspace.
pub const DEGENERACY: f64 = 1e-9;

/// Probability vectors must sum to one within this.
pub const NORMALIZATION: f64 = 1e-12;
