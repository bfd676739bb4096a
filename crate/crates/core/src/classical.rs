//! Coherent-light operation with Gaussian reference-phase noise.
//!
//! For fixed reference phases the three output ports carry independent
//! Poisson counts. The phase is read from `I⁻ = N₁ − N₂` by error propagation,
//! `Δ²θ = Δ²I⁻ / |∂_θ E[I⁻]|²`, with `Δ²I⁻` split by the law of total
//! variance into a shot-noise ("quantum") part and a phase-noise ("classical")
//! part.
//!
//! The classical part, averaged over the bivariate normal phases, is
//!
//! ```text
//! Δ²_C = n̄₀² q(1−q) { 1 + e^{(c−1)σ²} − e^{−2σ²} [ cos 2θ (e^{(1−c)σ²} + 1) + 4 e^{σ²} sin²θ ] }
//! ```
//!
//! Note the minus sign in front of the bracket: with a plus sign the term would
//! not vanish at `θ = 0, c = −1`. At `θ = 0` the phase-noise contribution to
//! `Δ²θ` is `sinh((c+1)σ²/2) cosh((c−1)σ²/2) = ½(sinh σ² + sinh cσ²)`, which is
//! half of `½(η⁻² − η² + η⁻²ᶜ − η²ᶜ)`. Both statements are checked against the
//! Monte-Carlo oracle in this module's tests and in the acceptance suite.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{noise_to_dephasing, DephasingParams, NoiseModel};
use crate::metrology::qfi_closed;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentConfig {
    /// Mean input photon number `|α|²`.
    pub n0: f64,
    pub q: f64,
    /// Must be the Gaussian model.
    pub noise: NoiseModel,
    pub theta: f64,
}

impl CoherentConfig {
    pub fn new(n0: f64, q: f64, noise: NoiseModel, theta: f64) -> Result<Self> {
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::param("n0", n0, "mean photon number must be positive"));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::param("q", q, "coherent-light analysis needs 0 < q < 1"));
        }
        if !matches!(noise, NoiseModel::Gaussian { .. }) {
            return Err(Error::param(
                "noise",
                f64::NAN,
                "coherent-light analysis uses the Gaussian model",
            ));
        }
        if !theta.is_finite() {
            return Err(Error::param("theta", theta, "phase must be finite"));
        }
        Ok(Self { n0, q, noise, theta })
    }

    /// `(σ², c)` of the Gaussian noise.
    pub fn sigma2_c(&self) -> (f64, f64) {
        gaussian_sigma2_c(&self.noise)
    }

    /// Equivalent single-photon channel parameters.
    pub fn dephasing(&self) -> DephasingParams {
        noise_to_dephasing(&self.noise)
    }
}

fn gaussian_sigma2_c(noise: &NoiseModel) -> (f64, f64) {
    match *noise {
        NoiseModel::Gaussian { sigma, c } => (sigma * sigma, c),
        // kick amplitude as a stand-in; constructors keep this arm unreachable
        NoiseModel::Kicks { phi0, c } => (phi0 * phi0, c),
    }
}

/// Mean counts `(⟨N₁⟩, ⟨N₂⟩, ⟨N₃⟩)` of the three-arm interferometer for fixed
/// reference phases.
pub fn mean_counts_three_arm(cfg: &CoherentConfig, phi1: f64, phi2: f64) -> [f64; 3] {
    let (n0, q, th) = (cfg.n0, cfg.q, cfg.theta);
    let cos12 = (phi1 - phi2).cos();
    let common = 1.0 + q + (1.0 - q) * cos12;
    let fringe = 2.0 * (q * (1.0 - q)).sqrt() * ((th - phi1).sin() + (th - phi2).sin());
    [
        n0 / 4.0 * (common + fringe),
        n0 / 4.0 * (common - fringe),
        n0 / 2.0 * (1.0 - q) * (1.0 - cos12),
    ]
}

/// Mean counts of the four-arm scheme (two independent Mach–Zehnder
/// interferometers, one per reference arm).
pub fn mean_counts_four_arm(cfg: &CoherentConfig, phi1: f64, phi2: f64) -> [f64; 4] {
    let (n0, q, th) = (cfg.n0, cfg.q, cfg.theta);
    let a = 2.0 * (q * (1.0 - q)).sqrt();
    [
        n0 / 4.0 * (1.0 + a * (th - phi1).sin()),
        n0 / 4.0 * (1.0 - a * (th - phi1).sin()),
        n0 / 4.0 * (1.0 + a * (th - phi2).sin()),
        n0 / 4.0 * (1.0 - a * (th - phi2).sin()),
    ]
}

/// Phase-averaged moments of `I⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdiffMoments {
    pub mean_idiff: f64,
    /// `∂_θ E[I⁻]`.
    pub slope: f64,
    pub var_quantum: f64,
    pub var_classical: f64,
}

pub fn idiff_moments(cfg: &CoherentConfig) -> IdiffMoments {
    let (s2, c) = cfg.sigma2_c();
    let (n0, q, th) = (cfg.n0, cfg.q, cfg.theta);
    let amp = 2.0 * n0 * (q * (1.0 - q)).sqrt() * (-s2 / 2.0).exp();
    let var_quantum = 0.5 * n0 * (1.0 + q + (1.0 - q) * ((c - 1.0) * s2).exp());
    let bracket = 1.0 + ((c - 1.0) * s2).exp()
        - (-2.0 * s2).exp() * ((2.0 * th).cos() * (((1.0 - c) * s2).exp() + 1.0) + 4.0 * s2.exp() * th.sin().powi(2));
    IdiffMoments {
        mean_idiff: amp * th.sin(),
        slope: amp * th.cos(),
        var_quantum,
        var_classical: (n0 * n0 * q * (1.0 - q) * bracket).max(0.0),
    }
}

/// Error-propagation summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStats {
    pub mean_idiff: f64,
    pub slope: f64,
    pub var_quantum: f64,
    pub var_classical: f64,
    /// `var_quantum / slope²`.
    pub quantum_term: f64,
    /// `var_classical / slope²`.
    pub classical_term: f64,
    /// `(var_quantum + var_classical) / slope²`.
    pub var_theta: f64,
    /// `n̄₀ → ∞` limit of `var_theta` at `θ = 0`.
    pub asymptotic_floor: f64,
}

fn assemble(cfg: &CoherentConfig, m: IdiffMoments) -> Result<ClassicalStats> {
    let slope2 = m.slope * m.slope;
    // relative to the fringe amplitude, not absolute
    let amp = 2.0 * cfg.n0 * (cfg.q * (1.0 - cfg.q)).sqrt() * (-cfg.sigma2_c().0 / 2.0).exp();
    if !(m.slope.abs() > 1e-12 * amp) {
        return Err(Error::ZeroSlope {
            theta: cfg.theta,
            slope: m.slope,
        });
    }
    let quantum_term = m.var_quantum / slope2;
    let classical_term = m.var_classical / slope2;
    Ok(ClassicalStats {
        mean_idiff: m.mean_idiff,
        slope: m.slope,
        var_quantum: m.var_quantum,
        var_classical: m.var_classical,
        quantum_term,
        classical_term,
        var_theta: quantum_term + classical_term,
        asymptotic_floor: asymptotic_variance(&cfg.noise),
    })
}

/// Three-arm error-propagation variance of `θ` from `I⁻`.
pub fn error_prop_variance(cfg: &CoherentConfig) -> Result<ClassicalStats> {
    assemble(cfg, idiff_moments(cfg))
}

/// Single-photon QFI `ℱ₁` of the equivalent qutrit channel.
pub fn single_photon_qfi(cfg: &CoherentConfig) -> Result<f64> {
    Ok(qfi_closed(cfg.q, &cfg.dephasing())?.value)
}

/// `sinh((c+1)σ²/2) · cosh((c−1)σ²/2)`; independent of `q`, zero iff `c = −1`.
pub fn asymptotic_variance(noise: &NoiseModel) -> f64 {
    let (s2, c) = gaussian_sigma2_c(noise);
    ((c + 1.0) * s2 / 2.0).sinh() * ((c - 1.0) * s2 / 2.0).cosh()
}

/// Four-arm scheme: same signal, shot noise `Δ²I₄⁻ = n̄₀` independent of the
/// phase correlations, same phase-noise part.
pub fn four_arm_variance(cfg: &CoherentConfig) -> Result<ClassicalStats> {
    let three = idiff_moments(cfg);
    assemble(
        cfg,
        IdiffMoments {
            var_quantum: cfg.n0,
            ..three
        },
    )
}

/// Empirical moments from the Monte-Carlo oracle, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McClassicalStats {
    pub samples: usize,
    pub seed: u64,
    pub mean_idiff: f64,
    pub mean_idiff_se: f64,
    pub var_total: f64,
    pub var_total_se: f64,
    /// Mean of `(I⁻ − Ī⁻(φ))²`.
    pub var_quantum: f64,
    pub var_quantum_se: f64,
    /// Variance of the conditional means `Ī⁻(φ)`.
    pub var_classical: f64,
    pub var_classical_se: f64,
}

/// Deviations of the oracle from closed-form moments, in standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScores {
    pub mean_idiff: f64,
    pub var_total: f64,
    pub var_quantum: f64,
    pub var_classical: f64,
}

impl ZScores {
    pub fn max_abs(&self) -> f64 {
        [self.mean_idiff, self.var_total, self.var_quantum, self.var_classical]
            .iter()
            .map(|z| z.abs())
            .fold(0.0, f64::max)
    }
}

fn z(observed: f64, expected: f64, se: f64) -> f64 {
    let diff = observed - expected;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-9 * expected.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

impl McClassicalStats {
    pub fn z_scores(&self, closed: &IdiffMoments) -> ZScores {
        ZScores {
            mean_idiff: z(self.mean_idiff, closed.mean_idiff, self.mean_idiff_se),
            var_total: z(
                self.var_total,
                closed.var_quantum + closed.var_classical,
                self.var_total_se,
            ),
            var_quantum: z(self.var_quantum, closed.var_quantum, self.var_quantum_se),
            var_classical: z(self.var_classical, closed.var_classical, self.var_classical_se),
        }
    }
}

/// Smallest accepted oracle sample count.
pub const MC_MIN_SAMPLES: usize = 10_000;

fn poisson(mean: f64, r: &mut impl Rng) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|d| d.sample(r)).unwrap_or(0.0)
}

/// Mean and variance with the standard error of each (the latter from the
/// sample fourth central moment).
fn moments_with_errors(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    let var = m2 * n / (n - 1.0);
    (mean, (var / n).sqrt(), var, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

/// Draws `(φ₁, φ₂)` from the bivariate normal, then Poisson counts with the
/// three-arm means, and reports empirical moments of `N₁ − N₂`.
pub fn mc_classical_oracle(cfg: &CoherentConfig, samples: usize, seed: u64) -> Result<McClassicalStats> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::param(
            "samples",
            samples as f64,
            "Monte-Carlo oracle needs at least 10^4 samples",
        ));
    }
    let (s2, c) = cfg.sigma2_c();
    let sigma = s2.sqrt();
    let chunks: Vec<Vec<[f64; 3]>> = rng::chunks(samples)
        .into_par_iter()
        .map(|(idx, len)| {
            let mut r = rng::stream_rng(seed, idx);
            (0..len)
                .map(|_| {
                    let z1: f64 = r.sample(StandardNormal);
                    let z2: f64 = r.sample(StandardNormal);
                    let phi1 = sigma * z1;
                    let phi2 = sigma * (c * z1 + (1.0 - c * c).max(0.0).sqrt() * z2);
                    let m = mean_counts_three_arm(cfg, phi1, phi2);
                    let i = poisson(m[0], &mut r) - poisson(m[1], &mut r);
                    let ibar = m[0] - m[1];
                    [i, ibar, (i - ibar) * (i - ibar)]
                })
                .collect()
        })
        .collect();
    let column = |k: usize| -> Vec<f64> { chunks.iter().flatten().map(|row| row[k]).collect() };
    let (mean_idiff, mean_idiff_se, var_total, var_total_se) = moments_with_errors(&column(0));
    let (_, _, var_classical, var_classical_se) = moments_with_errors(&column(1));
    let (var_quantum, var_quantum_se, _, _) = moments_with_errors(&column(2));
    Ok(McClassicalStats {
        samples,
        seed,
        mean_idiff,
        mean_idiff_se,
        var_total,
        var_total_se,
        var_quantum,
        var_quantum_se,
        var_classical,
        var_classical_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, LN_2, PI};

    fn cfg(n0: f64, q: f64, s2: f64, c: f64, theta: f64) -> CoherentConfig {
        CoherentConfig::new(n0, q, NoiseModel::gaussian_from_variance(s2, c).unwrap(), theta).unwrap()
    }

    #[test]
    fn mean_counts_examples() {
        let c = cfg(100.0, 0.5, 0.1, 0.0, 0.0);
        assert_eq!(mean_counts_three_arm(&c, 0.0, 0.0)[2], 0.0);
        let m = mean_counts_three_arm(&c, 0.0, PI);
        assert!((m[2] - 50.0).abs() < 1e-12);
        // single-photon consistency: η = κ = 1, v = 1 gives p₁ = ½ + √(q(1−q)) sin θ
        let c = cfg(100.0, 0.5, 0.1, 0.0, FRAC_PI_2);
        let m = mean_counts_three_arm(&c, 0.0, 0.0);
        assert!((m[0] - 100.0).abs() < 1e-12);
        let c = cfg(100.0, 0.3, 0.1, 0.0, 0.4);
        let m = mean_counts_three_arm(&c, 0.0, 0.0);
        assert!((m[0] / 100.0 - (0.5 + (0.21f64).sqrt() * 0.4f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn energy_is_conserved() {
        let c = cfg(37.0, 0.27, 0.4, 0.3, 0.9);
        for &(a, b) in &[(0.0, 0.0), (0.3, -1.2), (2.0, 2.5), (-3.0, 1.0)] {
            let m = mean_counts_three_arm(&c, a, b);
            assert!((m.iter().sum::<f64>() - 37.0).abs() < 1e-12);
            let m4 = mean_counts_four_arm(&c, a, b);
            assert!((m4.iter().sum::<f64>() - 37.0).abs() < 1e-12);
        }
    }

    #[test]
    fn moments_vanish_for_anticorrelated_noise() {
        let m = idiff_moments(&cfg(10.0, 0.5, LN_2, -1.0, 0.0));
        assert!(m.var_classical.abs() < 1e-12);
    }

    #[test]
    fn noiseless_limit() {
        let c = cfg(50.0, 0.3, 1e-14, 0.2, 0.7);
        let m = idiff_moments(&c);
        let amp = 2.0 * 50.0 * 0.21f64.sqrt();
        assert!((m.mean_idiff - amp * 0.7f64.sin()).abs() < 1e-9);
        assert!((m.var_quantum - 50.0).abs() < 1e-9);
        assert!(m.var_classical.abs() < 1e-6);
    }

    #[test]
    fn quantum_term_is_rescaled_qfi() {
        for &(q, s2, c) in &[(0.5, LN_2, 0.0), (0.3, 0.2, -0.7), (0.8, 1.5, 0.9)] {
            let k = cfg(123.0, q, s2, c, 0.0);
            let st = error_prop_variance(&k).unwrap();
            let f1 = single_photon_qfi(&k).unwrap();
            assert!((st.quantum_term * 123.0 - 1.0 / f1).abs() < 1e-10);
            assert!((st.classical_term - st.asymptotic_floor).abs() < 1e-12);
        }
    }

    #[test]
    fn anticorrelated_has_no_floor() {
        let k = cfg(1e3, 0.4, LN_2, -1.0, 0.0);
        let st = error_prop_variance(&k).unwrap();
        assert!((st.var_theta - 1.0 / (1e3 * single_photon_qfi(&k).unwrap())).abs() < 1e-15);
        assert_eq!(asymptotic_variance(&k.noise), 0.0);
    }

    #[test]
    fn floor_examples() {
        let n = |c| NoiseModel::gaussian_from_variance(LN_2, c).unwrap();
        assert!((asymptotic_variance(&n(1.0)) - 0.75).abs() < 1e-15);
        assert!((asymptotic_variance(&n(0.0)) - 0.375).abs() < 1e-15);
        for c in [-0.8, -0.1, 0.4, 0.95] {
            let s2 = LN_2;
            let alt = 0.5 * (s2.sinh() + (c * s2).sinh());
            assert!((asymptotic_variance(&n(c)) - alt).abs() < 1e-15);
        }
        let st = error_prop_variance(&cfg(1e6, 0.5, LN_2, 1.0, 0.0)).unwrap();
        assert!((st.var_theta - 0.75).abs() < 1e-5);
    }

    #[test]
    fn fringe_extremum_diverges() {
        let err = error_prop_variance(&cfg(10.0, 0.5, 0.3, 0.0, FRAC_PI_2)).unwrap_err();
        assert!(matches!(err, Error::ZeroSlope { .. }));
    }

    #[test]
    fn config_rejects_edge_q_and_kicks() {
        let g = NoiseModel::gaussian(0.5, 0.0).unwrap();
        assert!(CoherentConfig::new(10.0, 0.0, g, 0.0).is_err());
        assert!(CoherentConfig::new(10.0, 1.0, g, 0.0).is_err());
        assert!(CoherentConfig::new(0.0, 0.5, g, 0.0).is_err());
        let k = NoiseModel::kicks(0.5, 0.0).unwrap();
        assert!(CoherentConfig::new(10.0, 0.5, k, 0.0).is_err());
    }

    #[test]
    fn four_arm_examples() {
        for c in [-1.0, 0.0, 0.5] {
            let k = cfg(200.0, 0.4, LN_2, c, 0.0);
            let four = four_arm_variance(&k).unwrap();
            let k1 = cfg(200.0, 0.4, LN_2, 1.0, 0.0);
            let three_c1 = error_prop_variance(&k1).unwrap();
            assert!((four.quantum_term - three_c1.quantum_term).abs() < 1e-12);
            let three = error_prop_variance(&k).unwrap();
            assert!((four.classical_term - three.classical_term).abs() < 1e-15);
        }
        let k = cfg(200.0, 0.4, LN_2, -1.0, 0.0);
        assert!(four_arm_variance(&k).unwrap().var_theta > error_prop_variance(&k).unwrap().var_theta);
        let quiet = cfg(200.0, 0.4, 1e-14, -0.3, 0.0);
        let shot = 1.0 / (200.0 * 4.0 * 0.4 * 0.6);
        assert!((four_arm_variance(&quiet).unwrap().var_theta - shot).abs() < 1e-9);
        assert!((error_prop_variance(&quiet).unwrap().var_theta - shot).abs() < 1e-9);
    }

    #[test]
    fn oracle_requires_samples() {
        assert!(mc_classical_oracle(&cfg(10.0, 0.5, LN_2, 0.0, 0.0), 100, 1).is_err());
    }

    #[test]
    fn oracle_pure_shot_noise() {
        let k = cfg(10.0, 0.5, 1e-12, 0.0, 0.0);
        let mc = mc_classical_oracle(&k, 50_000, 3).unwrap();
        assert!(mc.mean_idiff.abs() < 5.0 * mc.mean_idiff_se);
        assert!((mc.var_total - 10.0).abs() < 5.0 * mc.var_total_se);
    }

    #[test]
    fn oracle_matches_closed_form() {
        let k = cfg(10.0, 0.5, LN_2, 0.0, 0.0);
        let mc = mc_classical_oracle(&k, 200_000, 77).unwrap();
        let zs = mc.z_scores(&idiff_moments(&k));
        assert!(zs.max_abs() < 5.0, "{zs:?}");
        assert_eq!(mc, mc_classical_oracle(&k, 200_000, 77).unwrap());
        let k = cfg(10.0, 0.3, 0.5, 0.4, 0.6);
        let mc = mc_classical_oracle(&k, 200_000, 78).unwrap();
        let zs = mc.z_scores(&idiff_moments(&k));
        assert!(zs.max_abs() < 5.0, "{zs:?}");
    }
}
