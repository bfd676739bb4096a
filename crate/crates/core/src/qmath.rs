//! Dense complex Hermitian numerics at small dimension (qutrits and qutrit pairs).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::tolerance;
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |j, k| if j == k { c64(values[j], 0.0) } else { c64(0.0, 0.0) })
}

/// `|psi><psi|` for an (unnormalized) vector.
pub fn outer(psi: &[Complex64]) -> CMatrix {
    let n = psi.len();
    CMatrix::from_fn(n, n, |j, k| psi[j] * psi[k].conj())
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Fails with the first entry pair whose Hermitian deviation exceeds `tol`.
pub fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    check_square(m)?;
    let n = m.nrows();
    let mut worst: Option<(usize, usize, f64)> = None;
    for j in 0..n {
        for k in j..n {
            let dev = (m[(j, k)] - m[(k, j)].conj()).norm();
            if !dev.is_finite() || dev > tol {
                match worst {
                    Some((_, _, w)) if w >= dev => {}
                    _ => worst = Some((j, k, if dev.is_finite() { dev } else { f64::INFINITY })),
                }
            }
        }
    }
    match worst {
        Some((row, col, deviation)) => Err(Error::NotHermitian { row, col, deviation }),
        None => Ok(()),
    }
}

/// Hermitian operator (observable, generator, SLD).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_hermitian(&m, tolerance::HERMITICITY)?;
        Ok(Self { m })
    }

    /// Wraps `m` after symmetrizing it as `(m + m†)/2`; the input must already be
    /// Hermitian within `tolerance::HERMITICITY` relative to its largest entry.
    pub(crate) fn symmetrized(m: CMatrix) -> Result<Self> {
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        check_hermitian(&m, tolerance::HERMITICITY * scale)?;
        let h = (&m + m.adjoint()) * c64(0.5, 0.0);
        Ok(Self { m: h })
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        Self { m: diag(values) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigh(&self) -> Spectrum {
        eigh_unchecked(&self.m)
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_hermitian(&m, tolerance::HERMITICITY)?;
        let trace = m.trace();
        if (trace.re - 1.0).abs() > tolerance::VALIDATION || trace.im.abs() > tolerance::VALIDATION {
            return Err(Error::NotUnitTrace { trace: trace.re });
        }
        let spec = eigh_unchecked(&m);
        let min_eigenvalue = spec.values[0];
        if min_eigenvalue < -tolerance::VALIDATION {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { m })
    }

    /// Normalized projector onto `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::Numerical("cannot normalize a zero state vector".into()));
        }
        Self::new(outer(psi) / c64(norm2, 0.0))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: diag(&vec![1.0 / dim as f64; dim]),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.m[(j, k)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.m[(j, j)].re).collect()
    }

    /// Diagonal part, as a density matrix.
    pub fn dephased(&self) -> DensityMatrix {
        DensityMatrix {
            m: diag(&self.diagonal()),
        }
    }

    pub fn eigh(&self) -> Spectrum {
        eigh_unchecked(&self.m)
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator { m: self.m.clone() }
    }

    /// `U rho U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        let m = u * &self.m * u.adjoint();
        // remove rounding-level anti-Hermitian residue
        let m = (&m + m.adjoint()) * c64(0.5, 0.0);
        DensityMatrix::new(m)
    }
}

/// Eigen-decomposition with eigenvalues in ascending order and the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    /// `V diag(values) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = diag(&self.values);
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Hermitian eigen-decomposition; rejects non-Hermitian input.
pub fn eigh(m: &CMatrix) -> Result<Spectrum> {
    check_hermitian(m, tolerance::HERMITICITY)?;
    Ok(eigh_unchecked(m))
}

fn eigh_unchecked(m: &CMatrix) -> Spectrum {
    let n = m.nrows();
    let h = (m + m.adjoint()) * c64(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum { values, vectors }
}

/// `-sum p log2 p` with eigenvalues clipped to `[0, 1]` and `0 log 0 = 0`.
pub fn shannon_bits(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > tolerance::EIGEN_CLIP)
        .map(|p| -p * p.log2())
        .sum();
    s.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    shannon_bits(&rho.eigh().values)
}

/// `Tr rho^2`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(rho rho) = sum_jk |rho_jk|^2 for Hermitian rho
    rho.m.iter().map(|z| z.norm_sqr()).sum()
}

/// Sum of singular values of an arbitrary (possibly rectangular) matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Zeroes every entry whose row and column fall in different blocks.
///
/// `blocks` must partition `0..dim` with each index used exactly once.
pub fn pinch_blocks(rho: &DensityMatrix, blocks: &[Vec<usize>]) -> Result<DensityMatrix> {
    let label = block_labels(rho.dim(), blocks)?;
    let n = rho.dim();
    let m = CMatrix::from_fn(n, n, |j, k| {
        if label[j] == label[k] {
            rho.m[(j, k)]
        } else {
            c64(0.0, 0.0)
        }
    });
    Ok(DensityMatrix { m })
}

fn block_labels(dim: usize, blocks: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut label = vec![usize::MAX; dim];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::InvalidPartition(format!("block {b} is empty")));
        }
        for &i in block {
            if i >= dim {
                return Err(Error::InvalidPartition(format!(
                    "index {i} out of range for dimension {dim}"
                )));
            }
            if label[i] != usize::MAX {
                return Err(Error::InvalidPartition(format!("index {i} appears twice")));
            }
            label[i] = b;
        }
    }
    if let Some(i) = label.iter().position(|&l| l == usize::MAX) {
        return Err(Error::InvalidPartition(format!("index {i} is not covered")));
    }
    Ok(label)
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn unitary_from_hermitian(h: &HermitianOperator, t: f64) -> CMatrix {
    let spec = h.eigh();
    let n = h.dim();
    let phases = CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex64::from_polar(1.0, -t * spec.values[j])
        } else {
            c64(0.0, 0.0)
        }
    });
    &spec.vectors * phases * spec.vectors.adjoint()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
