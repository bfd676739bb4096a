//! The qutrit dephasing channel and the correlated reference-phase noise that
//! realizes it.
//!
//! Basis convention: index 0 is the signal mode `|1⟩` (generator eigenvalue 1),
//! indices 1 and 2 are the reference modes `|2⟩, |3⟩` spanning the degenerate
//! eigenspace. The reference phases `(φ₁, φ₂)` act on indices 1 and 2.
//!
//! The channel multiplies density-matrix entries elementwise by
//!
//! ```text
//!     M = | 1  η  η |
//!         | η  1  κ |
//!         | η  κ  1 |
//! ```
//!
//! and is completely positive iff `0 ≤ η ≤ 1` and `2η² − 1 ≤ κ ≤ 1`, which is
//! equivalent (for `η ≥ 0`) to `M ⪰ 0`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qmath::{c64, CMatrix, DensityMatrix};
use crate::quadrature::GaussHermite;
use crate::{rng, tolerance, Error, Result};

/// Coherence retention factors of the dephasing channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct DephasingParams {
    eta: f64,
    kappa: f64,
}

#[derive(Deserialize)]
struct RawParams {
    eta: f64,
    kappa: f64,
}

impl TryFrom<RawParams> for DephasingParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        DephasingParams::new(r.eta, r.kappa)
    }
}

impl DephasingParams {
    /// Rejects pairs outside the complete-positivity region.
    pub fn new(eta: f64, kappa: f64) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::param("eta", eta, "must be finite"));
        }
        if !kappa.is_finite() {
            return Err(Error::param("kappa", kappa, "must be finite"));
        }
        if !cp_check(eta, kappa).physical {
            return Err(Error::NotCompletelyPositive { eta, kappa });
        }
        Ok(Self { eta, kappa })
    }

    /// The noiseless channel.
    pub fn identity() -> Self {
        Self { eta: 1.0, kappa: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Entrywise multiplier matrix `M`.
    pub fn multipliers(&self) -> [[f64; 3]; 3] {
        multiplier_matrix(self.eta, self.kappa)
    }
}

fn multiplier_matrix(eta: f64, kappa: f64) -> [[f64; 3]; 3] {
    [[1.0, eta, eta], [eta, 1.0, kappa], [eta, kappa, 1.0]]
}

/// Both forms of the complete-positivity test for an arbitrary real pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpDiagnostic {
    pub eta: f64,
    pub kappa: f64,
    /// `0 ≤ η ≤ 1 ∧ 2η² − 1 ≤ κ ≤ 1`, with slack `tolerance::CP_BOUNDARY`.
    pub inequality_holds: bool,
    /// Smallest eigenvalue of the multiplier matrix.
    pub multiplier_min_eigenvalue: f64,
    /// `η ≥ 0` and `M ⪰ 0` within `tolerance::VALIDATION`.
    pub multiplier_psd: bool,
    /// Verdict; taken from the inequality form.
    pub physical: bool,
}

impl CpDiagnostic {
    pub fn forms_agree(&self) -> bool {
        self.inequality_holds == self.multiplier_psd
    }
}

/// Complete-positivity check. Total: non-finite input is simply unphysical.
pub fn cp_check(eta: f64, kappa: f64) -> CpDiagnostic {
    let tol = tolerance::CP_BOUNDARY;
    let finite = eta.is_finite() && kappa.is_finite();
    let inequality_holds =
        finite && eta >= -tol && eta <= 1.0 + tol && kappa <= 1.0 + tol && kappa >= 2.0 * eta * eta - 1.0 - tol;
    let multiplier_min_eigenvalue = if finite {
        let m = multiplier_matrix(eta, kappa);
        let cm = CMatrix::from_fn(3, 3, |j, k| c64(m[j][k], 0.0));
        cm.symmetric_eigen().eigenvalues.min()
    } else {
        f64::NAN
    };
    let multiplier_psd = finite && eta >= -tol && multiplier_min_eigenvalue >= -tolerance::VALIDATION;
    CpDiagnostic {
        eta,
        kappa,
        inequality_holds,
        multiplier_min_eigenvalue,
        multiplier_psd,
        physical: inequality_holds,
    }
}

/// Correlated fluctuations of the two reference phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", try_from = "RawNoise")]
pub enum NoiseModel {
    /// `φ₁, φ₂ ∈ {±φ₀}` with `P(s, s) = (1 + c)/4` and `P(s, −s) = (1 − c)/4`.
    Kicks { phi0: f64, c: f64 },
    /// Zero-mean bivariate normal, common standard deviation `sigma`, correlation `c`.
    Gaussian { sigma: f64, c: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
enum RawNoise {
    Kicks { phi0: f64, c: f64 },
    Gaussian { sigma: f64, c: f64 },
}

impl TryFrom<RawNoise> for NoiseModel {
    type Error = Error;
    fn try_from(r: RawNoise) -> Result<Self> {
        match r {
            RawNoise::Kicks { phi0, c } => NoiseModel::kicks(phi0, c),
            RawNoise::Gaussian { sigma, c } => NoiseModel::gaussian(sigma, c),
        }
    }
}

fn check_correlation(c: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::param("c", c, "correlation must lie in [-1, 1]"));
    }
    Ok(())
}

impl NoiseModel {
    pub fn kicks(phi0: f64, c: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&phi0) {
            return Err(Error::param("phi0", phi0, "kick amplitude must lie in [0, pi/2]"));
        }
        check_correlation(c)?;
        Ok(NoiseModel::Kicks { phi0, c })
    }

    pub fn gaussian(sigma: f64, c: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", sigma, "standard deviation must be positive"));
        }
        check_correlation(c)?;
        Ok(NoiseModel::Gaussian { sigma, c })
    }

    /// Gaussian model from the phase variance `σ²`.
    pub fn gaussian_from_variance(sigma2: f64, c: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::param("sigma2", sigma2, "phase variance must be positive"));
        }
        Self::gaussian(sigma2.sqrt(), c)
    }

    pub fn correlation(&self) -> f64 {
        match *self {
            NoiseModel::Kicks { c, .. } | NoiseModel::Gaussian { c, .. } => c,
        }
    }

    /// The four kick outcomes `(φ₁, φ₂, probability)`.
    pub fn kick_settings(phi0: f64, c: f64) -> [(f64, f64, f64); 4] {
        let same = 0.25 * (1.0 + c);
        let opposite = 0.25 * (1.0 - c);
        [
            (phi0, phi0, same),
            (-phi0, -phi0, same),
            (phi0, -phi0, opposite),
            (-phi0, phi0, opposite),
        ]
    }
}

/// Channel parameters realized by a noise ensemble.
///
/// Kicks: `η = cos φ₀`, `κ = η² + c(1 − η²)`.
/// Gaussian: `η = exp(−σ²/2)`, `κ = exp(−σ²(1 − c))`.
pub fn noise_to_dephasing(model: &NoiseModel) -> DephasingParams {
    let (eta, kappa) = match *model {
        NoiseModel::Kicks { phi0, c } => {
            let eta = phi0.cos();
            let eta2 = eta * eta;
            (eta, eta2 + c * (1.0 - eta2))
        }
        NoiseModel::Gaussian { sigma, c } => {
            let s2 = sigma * sigma;
            ((-s2 / 2.0).exp(), (-s2 * (1.0 - c)).exp())
        }
    };
    // at c = -1 the kick value sits on the CP boundary up to rounding
    let kappa = kappa.max(2.0 * eta * eta - 1.0);
    DephasingParams { eta, kappa }
}

/// Probe `√q |1⟩ + √((1 − q)/2) (|2⟩ + |3⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureProbe {
    q: f64,
}

impl PureProbe {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::param("q", q, "probe weight must lie in [0, 1]"));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn amplitudes(&self) -> [f64; 3] {
        let r = ((1.0 - self.q) / 2.0).sqrt();
        [self.q.sqrt(), r, r]
    }

    pub fn state_vector(&self) -> [Complex64; 3] {
        self.amplitudes().map(|a| c64(a, 0.0))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.state_vector()).expect("probe has unit norm")
    }
}

/// Dephased probe state, written out entry by entry.
pub fn dephase(probe: &PureProbe, params: &DephasingParams) -> DensityMatrix {
    let q = probe.q;
    let x = params.eta * (q * (1.0 - q) / 2.0).sqrt();
    let h = (1.0 - q) / 2.0;
    let k = params.kappa * h;
    let entries = [q, x, x, x, h, k, x, k, h];
    let m = CMatrix::from_row_slice(3, 3, &entries.map(|v| c64(v, 0.0)));
    DensityMatrix::new(m).expect("CP-valid parameters yield a valid state")
}

/// Channel applied to an arbitrary qutrit state through the multiplier form.
pub fn dephase_general(rho: &DensityMatrix, params: &DephasingParams) -> Result<DensityMatrix> {
    if rho.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: rho.dim(),
        });
    }
    let mult = params.multipliers();
    let m = CMatrix::from_fn(3, 3, |j, k| rho.get(j, k) * mult[j][k]);
    DensityMatrix::new(m)
}

/// How a Gaussian ensemble is averaged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianAveraging {
    /// Tensor-product Gauss–Hermite rule; checked against a rule of 3/4 the order.
    Quadrature { order: usize, tolerance: f64 },
    /// Seeded Monte-Carlo draws of `(φ₁, φ₂)`.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for GaussianAveraging {
    fn default() -> Self {
        GaussianAveraging::Quadrature {
            order: 64,
            tolerance: 1e-8,
        }
    }
}

/// Phase factor accumulated by entry `(j, k)` under
/// `U = diag(1, e^{−iφ₁}, e^{−iφ₂})`, `ρ ↦ U ρ U†`.
fn conjugation_phases(phi1: f64, phi2: f64) -> [[Complex64; 3]; 3] {
    let phases = [0.0, phi1, phi2];
    let mut out = [[c64(0.0, 0.0); 3]; 3];
    for (j, row) in out.iter_mut().enumerate() {
        for (k, z) in row.iter_mut().enumerate() {
            *z = Complex64::from_polar(1.0, -(phases[j] - phases[k]));
        }
    }
    out
}

fn weighted_phase_average<I: IntoIterator<Item = (f64, f64, f64)>>(draws: I) -> [[Complex64; 3]; 3] {
    let mut acc = [[c64(0.0, 0.0); 3]; 3];
    for (phi1, phi2, w) in draws {
        let ph = conjugation_phases(phi1, phi2);
        for j in 0..3 {
            for k in 0..3 {
                acc[j][k] += ph[j][k] * w;
            }
        }
    }
    acc
}

fn apply_average(rho: &DensityMatrix, avg: &[[Complex64; 3]; 3]) -> Result<DensityMatrix> {
    let m = CMatrix::from_fn(3, 3, |j, k| rho.get(j, k) * avg[j][k]);
    let m = (&m + m.adjoint()) * c64(0.5, 0.0);
    DensityMatrix::new(m)
}

fn gaussian_phases(sigma: f64, c: f64, z1: f64, z2: f64) -> (f64, f64) {
    // Cholesky factor of [[σ², cσ²], [cσ², σ²]], valid also at c = ±1
    let phi1 = sigma * z1;
    let phi2 = sigma * (c * z1 + (1.0 - c * c).max(0.0).sqrt() * z2);
    (phi1, phi2)
}

fn gaussian_quadrature_average(sigma: f64, c: f64, order: usize) -> Result<[[Complex64; 3]; 3]> {
    let gh = GaussHermite::new(order)?;
    let grid = gh.standard_normal_grid_2d();
    Ok(weighted_phase_average(grid.into_iter().map(|(z1, z2, w)| {
        let (p1, p2) = gaussian_phases(sigma, c, z1, z2);
        (p1, p2, w)
    })))
}

fn gaussian_monte_carlo_average(sigma: f64, c: f64, samples: usize, seed: u64) -> [[Complex64; 3]; 3] {
    let partial: Vec<[[Complex64; 3]; 3]> = rng::chunks(samples)
        .into_par_iter()
        .map(|(idx, len)| {
            let mut r = rng::stream_rng(seed, idx);
            weighted_phase_average((0..len).map(|_| {
                let z1: f64 = r.sample(StandardNormal);
                let z2: f64 = r.sample(StandardNormal);
                let (p1, p2) = gaussian_phases(sigma, c, z1, z2);
                (p1, p2, 1.0)
            }))
        })
        .collect();
    let mut acc = [[c64(0.0, 0.0); 3]; 3];
    for p in &partial {
        for j in 0..3 {
            for k in 0..3 {
                acc[j][k] += p[j][k];
            }
        }
    }
    let n = samples as f64;
    acc.map(|row| row.map(|z| z / n))
}

/// Average of `U_φ ρ U_φ†` over the noise ensemble, with the default
/// Gaussian averaging (order-64 quadrature).
pub fn ensemble_average_channel(model: &NoiseModel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ensemble_average_channel_with(model, rho, GaussianAveraging::default())
}

pub fn ensemble_average_channel_with(
    model: &NoiseModel,
    rho: &DensityMatrix,
    averaging: GaussianAveraging,
) -> Result<DensityMatrix> {
    if rho.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: rho.dim(),
        });
    }
    let avg = match *model {
        NoiseModel::Kicks { phi0, c } => weighted_phase_average(NoiseModel::kick_settings(phi0, c)),
        NoiseModel::Gaussian { sigma, c } => match averaging {
            GaussianAveraging::Quadrature { order, tolerance } => {
                let fine = gaussian_quadrature_average(sigma, c, order)?;
                let coarse = gaussian_quadrature_average(sigma, c, (3 * order / 4).max(1))?;
                let achieved = fine
                    .iter()
                    .flatten()
                    .zip(coarse.iter().flatten())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if !(achieved <= tolerance) {
                    return Err(Error::QuadratureNotConverged {
                        achieved,
                        required: tolerance,
                    });
                }
                fine
            }
            GaussianAveraging::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(Error::param("samples", 0.0, "need at least one sample"));
                }
                gaussian_monte_carlo_average(sigma, c, samples, seed)
            }
        },
    };
    apply_average(rho, &avg)
}
