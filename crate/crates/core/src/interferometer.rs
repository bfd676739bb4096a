//! Three-arm interferometer forward model and estimation.
//!
//! Detector 1 and 2 see the signal/reference interference fringes; detector 3
//! sees only the interference of the two reference arms and clicks on their
//! anti-correlated phase noise. With working point `θ₀`:
//!
//! ```text
//!     p₃ = ½ (1 − q)(1 − vκ)
//!     f  = v η √(q(1−q)) sin(θ − θ₀)
//!     p₁ = (1 − p₃)/2 + f,   p₂ = (1 − p₃)/2 − f
//! ```

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{cp_check, noise_to_dephasing, DephasingParams, NoiseModel};
use crate::metrology::{classical_fi, FisherReport, PhaseEncoding};
use crate::qmath::{c64, outer, CMatrix, DensityMatrix, HermitianOperator};
use crate::{rng, tolerance, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct InterferometerConfig {
    pub q: f64,
    pub params: DephasingParams,
    /// Intrinsic interference visibility.
    pub v: f64,
    /// Working point (rad).
    pub theta0: f64,
}

#[derive(Deserialize)]
struct RawConfig {
    q: f64,
    params: DephasingParams,
    v: f64,
    #[serde(default)]
    theta0: f64,
}

impl TryFrom<RawConfig> for InterferometerConfig {
    type Error = Error;
    fn try_from(r: RawConfig) -> Result<Self> {
        InterferometerConfig::new(r.q, r.params, r.v, r.theta0)
    }
}

impl InterferometerConfig {
    pub fn new(q: f64, params: DephasingParams, v: f64, theta0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::param("q", q, "probe weight must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::param("v", v, "visibility must lie in [0, 1]"));
        }
        if !theta0.is_finite() {
            return Err(Error::param("theta0", theta0, "working point must be finite"));
        }
        if !cp_check(params.eta(), params.kappa()).physical {
            return Err(Error::NotCompletelyPositive {
                eta: params.eta(),
                kappa: params.kappa(),
            });
        }
        Ok(Self { q, params, v, theta0 })
    }

    /// Ideal visibility, working point zero.
    pub fn ideal(q: f64, params: DephasingParams) -> Result<Self> {
        Self::new(q, params, 1.0, 0.0)
    }

    pub fn from_noise(q: f64, noise: &NoiseModel, v: f64, theta0: f64) -> Result<Self> {
        Self::new(q, noise_to_dephasing(noise), v, theta0)
    }

    /// `v η √(q(1−q))`: amplitude of the fringe term.
    pub fn fringe_amplitude(&self) -> f64 {
        self.v * self.params.eta() * (self.q * (1.0 - self.q)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Signed fringe term `f_θ`.
    pub f_theta: f64,
}

impl OutcomeProbabilities {
    pub fn as_array(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    fn validate(self) -> Result<Self> {
        for (i, p) in self.as_array().into_iter().enumerate() {
            if !(-tolerance::NORMALIZATION..=1.0 + tolerance::NORMALIZATION).contains(&p) {
                return Err(Error::InvalidProbabilities(format!(
                    "p{} = {p} is outside [0, 1]",
                    i + 1
                )));
            }
        }
        Ok(Self {
            p1: self.p1.max(0.0),
            p2: self.p2.max(0.0),
            p3: self.p3.max(0.0),
            f_theta: self.f_theta,
        })
    }
}

pub fn outcome_probs(cfg: &InterferometerConfig, theta: f64) -> Result<OutcomeProbabilities> {
    let p3 = 0.5 * (1.0 - cfg.q) * (1.0 - cfg.v * cfg.params.kappa());
    let f_theta = cfg.fringe_amplitude() * (theta - cfg.theta0).sin();
    let base = (1.0 - p3) / 2.0;
    OutcomeProbabilities {
        p1: base + f_theta,
        p2: base - f_theta,
        p3,
        f_theta,
    }
    .validate()
}

/// `∂p/∂θ` for the three outcomes.
pub fn outcome_prob_derivatives(cfg: &InterferometerConfig, theta: f64) -> [f64; 3] {
    let d = cfg.fringe_amplitude() * (theta - cfg.theta0).cos();
    [d, -d, 0.0]
}

/// Click probabilities for one fixed pair of reference phases (a single
/// kick setting), before averaging over the noise.
pub fn outcome_probs_fixed_phases(
    q: f64,
    v: f64,
    theta: f64,
    theta0: f64,
    phi1: f64,
    phi2: f64,
) -> Result<OutcomeProbabilities> {
    let p3 = 0.5 * (1.0 - q) * (1.0 - v * (phi1 - phi2).cos());
    let f_theta = 0.5 * v * (q * (1.0 - q)).sqrt() * ((theta - theta0 - phi1).sin() + (theta - theta0 - phi2).sin());
    let base = (1.0 - p3) / 2.0;
    OutcomeProbabilities {
        p1: base + f_theta,
        p2: base - f_theta,
        p3,
        f_theta,
    }
    .validate()
}

/// Classical Fisher information of the three-outcome measurement at `theta`.
pub fn fisher_information(cfg: &InterferometerConfig, theta: f64) -> Result<FisherReport> {
    let p = outcome_probs(cfg, theta)?;
    classical_fi(&p.as_array(), &outcome_prob_derivatives(cfg, theta))
}

/// States measured by the optimal detectors at working point `theta0`:
/// `(1/√2)|1⟩ ± i(e^{iθ₀}/2)(|2⟩ + |3⟩)` and `(1/√2)(|2⟩ − |3⟩)`.
pub fn projector_states(theta0: f64) -> [[Complex64; 3]; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let t = Complex64::from_polar(0.5, theta0) * c64(0.0, 1.0);
    [
        [c64(s, 0.0), t, t],
        [c64(s, 0.0), -t, -t],
        [c64(0.0, 0.0), c64(s, 0.0), c64(-s, 0.0)],
    ]
}

pub fn optimal_projectors(theta0: f64) -> [HermitianOperator; 3] {
    projector_states(theta0).map(|psi| HermitianOperator::new(outer(&psi)).expect("projectors are Hermitian"))
}

/// Born-rule probabilities `Tr[Πᵢ U_θ ρ U_θ†]` of the optimal measurement.
pub fn born_probs(rho: &DensityMatrix, theta: f64, theta0: f64) -> Result<[f64; 3]> {
    let encoded = crate::metrology::encode_phase(rho, &PhaseEncoding::signal(theta))?;
    let m = encoded.matrix();
    Ok(optimal_projectors(theta0).map(|p| {
        let prod: CMatrix = p.matrix() * m;
        prod.trace().re
    }))
}

/// Fringe visibility of detector 1 between `θ − θ₀ = ±π/2`:
/// `4vη√(q(1−q)) / (1 + q + vκ(1−q))`.
pub fn visibility(cfg: &InterferometerConfig) -> f64 {
    let denom = 1.0 + cfg.q + cfg.v * cfg.params.kappa() * (1.0 - cfg.q);
    if denom <= 0.0 {
        return 0.0;
    }
    4.0 * cfg.fringe_amplitude() / denom
}

/// Simulated detector clicks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub theta: f64,
    pub counts: [u64; 3],
    pub config: InterferometerConfig,
    pub seed: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> [f64; 3] {
        let n = self.total() as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

fn draw_outcome(u: f64, cum1: f64, cum2: f64) -> usize {
    if u < cum1 {
        0
    } else if u < cum2 {
        1
    } else {
        2
    }
}

/// Multinomial counts by inverse-CDF lookup of uniform draws, chunked so the
/// result depends only on `seed`.
fn multinomial(probs: [f64; 3], n: u64, seed: u64) -> [u64; 3] {
    let cum1 = probs[0];
    let cum2 = probs[0] + probs[1];
    let parts: Vec<[u64; 3]> = rng::chunks(n as usize)
        .into_par_iter()
        .map(|(idx, len)| {
            let mut r = rng::stream_rng(seed, idx);
            let mut c = [0u64; 3];
            for _ in 0..len {
                c[draw_outcome(r.random::<f64>(), cum1, cum2)] += 1;
            }
            c
        })
        .collect();
    parts
        .iter()
        .fold([0; 3], |acc, c| [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]])
}

pub fn sample_counts(cfg: &InterferometerConfig, theta: f64, n: u64, seed: u64) -> Result<CountRecord> {
    if n == 0 {
        return Err(Error::param("N", 0.0, "need at least one photon"));
    }
    let p = outcome_probs(cfg, theta)?;
    Ok(CountRecord {
        theta,
        counts: multinomial(p.as_array(), n, seed),
        config: *cfg,
        seed,
    })
}

/// Counts of one kick setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickSettingCounts {
    pub phi1: f64,
    pub phi2: f64,
    pub weight: f64,
    pub counts: [u64; 3],
}

/// Phase-kick emulation: every photon first falls into one of the four
/// `(±φ₀, ±φ₀)` settings with weights `(1 ± c)/4`, then clicks according to
/// that setting's fixed-phase probabilities. Returns the per-setting counts
/// and their combination.
pub fn sample_counts_kick_settings(
    q: f64,
    noise: &NoiseModel,
    v: f64,
    theta: f64,
    theta0: f64,
    n: u64,
    seed: u64,
) -> Result<(Vec<KickSettingCounts>, CountRecord)> {
    let (phi0, c) = match *noise {
        NoiseModel::Kicks { phi0, c } => (phi0, c),
        NoiseModel::Gaussian { .. } => {
            return Err(Error::param(
                "noise",
                f64::NAN,
                "kick-setting sampling needs a kick model",
            ))
        }
    };
    if n == 0 {
        return Err(Error::param("N", 0.0, "need at least one photon"));
    }
    let cfg = InterferometerConfig::from_noise(q, noise, v, theta0)?;
    let settings = NoiseModel::kick_settings(phi0, c);
    // setting choice uses its own seed family, outcomes use seed + setting + 1
    let allocation = multinomial4(settings.map(|s| s.2), n, seed ^ 0x5ee7_1ab5_0000_0000);
    let mut per_setting = Vec::with_capacity(4);
    let mut total = [0u64; 3];
    for (i, &(phi1, phi2, weight)) in settings.iter().enumerate() {
        let p = outcome_probs_fixed_phases(q, v, theta, theta0, phi1, phi2)?;
        let counts = if allocation[i] == 0 {
            [0; 3]
        } else {
            multinomial(p.as_array(), allocation[i], seed.wrapping_add(i as u64 + 1))
        };
        for k in 0..3 {
            total[k] += counts[k];
        }
        per_setting.push(KickSettingCounts {
            phi1,
            phi2,
            weight,
            counts,
        });
    }
    Ok((
        per_setting,
        CountRecord {
            theta,
            counts: total,
            config: cfg,
            seed,
        },
    ))
}

fn multinomial4(probs: [f64; 4], n: u64, seed: u64) -> [u64; 4] {
    let cum = [probs[0], probs[0] + probs[1], probs[0] + probs[1] + probs[2]];
    let parts: Vec<[u64; 4]> = rng::chunks(n as usize)
        .into_par_iter()
        .map(|(idx, len)| {
            let mut r = rng::stream_rng(seed, idx);
            let mut c = [0u64; 4];
            for _ in 0..len {
                let u: f64 = r.random();
                let k = cum.iter().position(|&x| u < x).unwrap_or(3);
                c[k] += 1;
            }
            c
        })
        .collect();
    parts
        .iter()
        .fold([0; 4], |a, c| [a[0] + c[0], a[1] + c[1], a[2] + c[2], a[3] + c[3]])
}

/// Which amplitude normalizes the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `1/(2vη√(q(1−q)))`: exactly locally unbiased and efficient.
    #[default]
    FringeSlope,
    /// `1/(2𝒱η√(q(1−q)))` with the fringe visibility `𝒱`; biased slope `v/𝒱`.
    Visibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    One,
    Two,
    Three,
}

impl Outcome {
    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            1 => Some(Outcome::One),
            2 => Some(Outcome::Two),
            3 => Some(Outcome::Three),
            _ => None,
        }
    }
}

/// Magnitude of the estimator value on outcomes 1 and 2.
pub fn estimator_step(cfg: &InterferometerConfig, norm: Normalization) -> Result<f64> {
    let (q, eta, v) = (cfg.q, cfg.params.eta(), cfg.v);
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Degenerate(format!("estimator undefined for q = {q}")));
    }
    if !(eta > 0.0) {
        return Err(Error::Degenerate("estimator undefined for eta = 0".into()));
    }
    if !(v > 0.0) {
        return Err(Error::Degenerate("estimator undefined for v = 0".into()));
    }
    let scale = match norm {
        Normalization::FringeSlope => v,
        Normalization::Visibility => visibility(cfg),
    };
    Ok(1.0 / (2.0 * scale * eta * (q * (1.0 - q)).sqrt()))
}

/// Locally unbiased single-outcome estimate: `θ₀ ± a` on detectors 1/2,
/// `θ₀` on detector 3.
pub fn locally_unbiased_estimate(outcome: Outcome, cfg: &InterferometerConfig, norm: Normalization) -> Result<f64> {
    let a = estimator_step(cfg, norm)?;
    Ok(cfg.theta0
        + match outcome {
            Outcome::One => a,
            Outcome::Two => -a,
            Outcome::Three => 0.0,
        })
}

/// Exact mean and variance of the single-shot estimate at `theta`.
pub fn estimator_moments(cfg: &InterferometerConfig, theta: f64, norm: Normalization) -> Result<(f64, f64)> {
    let a = estimator_step(cfg, norm)?;
    let p = outcome_probs(cfg, theta)?;
    let shift = a * (p.p1 - p.p2);
    let second = a * a * (p.p1 + p.p2);
    Ok((cfg.theta0 + shift, second - shift * shift))
}

/// Bootstrap estimation result. `variance` is the variance of per-set mean
/// estimates, and `precision = 1/(set_size · variance)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub mean: f64,
    pub variance: f64,
    pub precision: f64,
    /// Delta-method standard error of `precision` from the spread of set means.
    pub precision_std_error: f64,
    pub n_sets: usize,
    pub set_size: usize,
    pub seed: u64,
    pub normalization: Normalization,
}

/// Resamples `set_size` outcomes with replacement from `counts`, `n_sets`
/// times, and reports the spread of the per-set mean estimates. Set `i` draws
/// from stream `i` of `seed`.
pub fn bootstrap_precision(
    counts: &CountRecord,
    n_sets: usize,
    set_size: usize,
    cfg: &InterferometerConfig,
    seed: u64,
    norm: Normalization,
) -> Result<EstimationReport> {
    if counts.total() == 0 {
        return Err(Error::Degenerate("no counts to resample".into()));
    }
    if n_sets < 2 || set_size == 0 {
        return Err(Error::Degenerate(format!(
            "need at least 2 sets of at least 1 sample (got {n_sets} x {set_size})"
        )));
    }
    let a = estimator_step(cfg, norm)?;
    let freq = counts.frequencies();
    let (cum1, cum2) = (freq[0], freq[0] + freq[1]);
    let values = [cfg.theta0 + a, cfg.theta0 - a, cfg.theta0];
    let means: Vec<f64> = (0..n_sets)
        .into_par_iter()
        .map(|set| {
            let mut r = rng::stream_rng(seed, set as u64);
            let mut c = [0u64; 3];
            for _ in 0..set_size {
                c[draw_outcome(r.random::<f64>(), cum1, cum2)] += 1;
            }
            (c[0] as f64 * values[0] + c[1] as f64 * values[1] + c[2] as f64 * values[2]) / set_size as f64
        })
        .collect();
    let n = n_sets as f64;
    let mean = means.iter().sum::<f64>() / n;
    let m2 = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = means.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    if !(variance > 0.0) {
        return Err(Error::Degenerate(
            "estimator variance is zero (all resampled outcomes identical)".into(),
        ));
    }
    let precision = 1.0 / (set_size as f64 * variance);
    let var_of_variance = ((m4 - m2 * m2) / n).max(0.0);
    let precision_std_error = precision * var_of_variance.sqrt() / variance;
    Ok(EstimationReport {
        mean,
        variance,
        precision,
        precision_std_error,
        n_sets,
        set_size,
        seed,
        normalization: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{dephase, PureProbe};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cfg(q: f64, eta: f64, kappa: f64, v: f64) -> InterferometerConfig {
        InterferometerConfig::new(q, DephasingParams::new(eta, kappa).unwrap(), v, 0.0).unwrap()
    }

    fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn probability_examples() {
        let p = outcome_probs(&cfg(0.5, 1.0, 1.0, 1.0), 0.0).unwrap();
        assert_eq!(p.as_array(), [0.5, 0.5, 0.0]);
        let c = cfg(0.5, 0.8, 0.5, 1.0);
        assert!(close3(
            outcome_probs(&c, 0.0).unwrap().as_array(),
            [0.4375, 0.4375, 0.125],
            1e-15
        ));
        assert!(close3(
            outcome_probs(&c, FRAC_PI_2).unwrap().as_array(),
            [0.8375, 0.0375, 0.125],
            1e-15
        ));
    }

    #[test]
    fn config_validation() {
        let p = DephasingParams::identity();
        assert!(InterferometerConfig::new(1.2, p, 1.0, 0.0).is_err());
        assert!(InterferometerConfig::new(0.5, p, 1.1, 0.0).is_err());
        assert!(InterferometerConfig::new(0.5, p, 1.0, f64::NAN).is_err());
        let json = r#"{"q":0.5,"params":{"eta":0.8,"kappa":0.5},"v":0.97}"#;
        let c: InterferometerConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.theta0, 0.0);
    }

    #[test]
    fn projectors_form_orthogonal_resolution() {
        for theta0 in [0.0, 0.4, -2.0] {
            let states = projector_states(theta0);
            for i in 0..3 {
                for j in 0..3 {
                    let ip: Complex64 = (0..3).map(|k| states[i][k].conj() * states[j][k]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - c64(expect, 0.0)).norm() < 1e-12);
                }
            }
            let proj = optimal_projectors(theta0);
            let sum = proj[0].matrix() + proj[1].matrix() + proj[2].matrix();
            assert!(crate::qmath::max_abs_diff(&sum, &CMatrix::identity(3, 3)) < 1e-12);
            for p in &proj {
                let sq = p.matrix() * p.matrix();
                assert!(crate::qmath::max_abs_diff(&sq, p.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn born_rule_matches_closed_form() {
        for &(q, eta, kappa) in &[(0.5, 0.8, 0.5), (0.2, 0.3, -0.6), (0.9, 0.95, 0.9)] {
            let rho = dephase(&PureProbe::new(q).unwrap(), &DephasingParams::new(eta, kappa).unwrap());
            for theta0 in [0.0, 0.6] {
                let c = InterferometerConfig::new(q, DephasingParams::new(eta, kappa).unwrap(), 1.0, theta0).unwrap();
                for theta in [-1.0, 0.0, 0.3, 2.5] {
                    let born = born_probs(&rho, theta, theta0).unwrap();
                    let closed = outcome_probs(&c, theta).unwrap().as_array();
                    assert!(close3(born, closed, 1e-10), "{q} {eta} {kappa} {theta0} {theta}");
                }
            }
        }
    }

    #[test]
    fn kick_settings_average_to_mixed_probabilities() {
        let noise = NoiseModel::kicks(0.6, -0.4).unwrap();
        let c = InterferometerConfig::from_noise(0.4, &noise, 0.97, 0.2).unwrap();
        for theta in [0.0, 0.5, -1.2] {
            let mut mix = [0.0; 3];
            for (p1, p2, w) in NoiseModel::kick_settings(0.6, -0.4) {
                let p = outcome_probs_fixed_phases(0.4, 0.97, theta, 0.2, p1, p2).unwrap();
                for (m, pk) in mix.iter_mut().zip(p.as_array()) {
                    *m += w * pk;
                }
            }
            assert!(close3(mix, outcome_probs(&c, theta).unwrap().as_array(), 1e-14));
        }
    }

    #[test]
    fn visibility_examples() {
        assert!((visibility(&cfg(0.5, 1.0, 1.0, 1.0)) - 1.0).abs() < 1e-15);
        let c = cfg(0.5, 0.8, 0.5, 1.0);
        assert!((visibility(&c) - 1.6 / 1.75).abs() < 1e-15);
        let hi = outcome_probs(&c, FRAC_PI_2).unwrap().p1;
        let lo = outcome_probs(&c, -FRAC_PI_2).unwrap().p1;
        assert!((visibility(&c) - (hi - lo) / (hi + lo)).abs() < 1e-12);
        let mut prev = 0.0;
        for kappa in [1.0, 0.8, 0.6, 0.4, 0.3] {
            let vis = visibility(&cfg(0.5, 0.8, kappa, 0.97));
            assert!(vis > prev);
            prev = vis;
        }
    }

    #[test]
    fn fisher_equals_qfi_at_working_point() {
        let c = cfg(0.5, 0.8, 0.5, 1.0);
        assert!((fisher_information(&c, 0.0).unwrap().value - 1.28 / 1.75).abs() < 1e-14);
        let c97 = cfg(0.5, 0.8, 0.5, 0.97);
        assert!(fisher_information(&c97, 0.0).unwrap().value < 1.28 / 1.75);
    }

    #[test]
    fn sampling_basics() {
        let c = cfg(0.5, 0.8, 0.5, 1.0);
        let one = sample_counts(&c, 0.0, 1, 3).unwrap();
        assert_eq!(one.total(), 1);
        assert_eq!(one.counts.iter().filter(|&&x| x == 1).count(), 1);
        assert!(sample_counts(&c, 0.0, 0, 3).is_err());
        let ideal = cfg(0.5, 1.0, 1.0, 1.0);
        assert_eq!(sample_counts(&ideal, 0.3, 50_000, 9).unwrap().counts[2], 0);
        assert_eq!(
            sample_counts(&c, 0.0, 70_000, 5).unwrap(),
            sample_counts(&c, 0.0, 70_000, 5).unwrap()
        );
    }

    #[test]
    fn sampling_concentrates() {
        let c = cfg(0.5, 0.8, 0.5, 1.0);
        let rec = sample_counts(&c, 0.0, 1_000_000, 2024).unwrap();
        let f3 = rec.counts[2] as f64 / 1e6;
        assert!((f3 - 0.125).abs() < 5.0 * (0.125 * 0.875 / 1e6f64).sqrt());
    }

    #[test]
    fn kick_setting_sampling() {
        let noise = NoiseModel::kicks(0.6435, 1.0).unwrap();
        let (parts, total) = sample_counts_kick_settings(0.5, &noise, 1.0, 0.0, 0.0, 200_000, 4).unwrap();
        assert_eq!(parts.len(), 4);
        assert_eq!(total.total(), 200_000);
        // c = 1: the anti-correlated settings never occur, and detector 3 is dark
        assert_eq!(parts[2].counts.iter().sum::<u64>(), 0);
        assert_eq!(total.counts[2], 0);
        let noise = NoiseModel::kicks(0.6435, -1.0).unwrap();
        let (_, total) = sample_counts_kick_settings(0.5, &noise, 1.0, 0.0, 0.0, 400_000, 4).unwrap();
        let p3 = outcome_probs(&total.config, 0.0).unwrap().p3;
        let f3 = total.counts[2] as f64 / 4e5;
        assert!((f3 - p3).abs() < 5.0 * (p3 * (1.0 - p3) / 4e5).sqrt());
    }

    #[test]
    fn estimator_examples() {
        let c = cfg(0.5, 0.8, 1.0, 1.0);
        assert!(
            (locally_unbiased_estimate(Outcome::One, &c, Normalization::FringeSlope).unwrap() - 1.25).abs() < 1e-15
        );
        assert!(
            (locally_unbiased_estimate(Outcome::Two, &c, Normalization::FringeSlope).unwrap() + 1.25).abs() < 1e-15
        );
        assert_eq!(
            locally_unbiased_estimate(Outcome::Three, &c, Normalization::FringeSlope).unwrap(),
            0.0
        );
        let (mean, _) = estimator_moments(&cfg(0.5, 0.8, 0.5, 1.0), 0.01, Normalization::FringeSlope).unwrap();
        assert!((mean - 0.01f64.sin()).abs() < 1e-15);
        assert!((mean - 0.0099998).abs() < 1e-7);
        assert!(locally_unbiased_estimate(Outcome::One, &cfg(1.0, 0.8, 0.5, 1.0), Normalization::FringeSlope).is_err());
        assert!(locally_unbiased_estimate(Outcome::One, &cfg(0.5, 0.0, 0.5, 1.0), Normalization::FringeSlope).is_err());
        assert!(locally_unbiased_estimate(Outcome::One, &cfg(0.5, 0.8, 0.5, 0.0), Normalization::FringeSlope).is_err());
    }

    #[test]
    fn estimator_is_efficient_at_working_point() {
        for theta0 in [0.0, 0.7] {
            let c = InterferometerConfig::new(0.4, DephasingParams::new(0.8, 0.4).unwrap(), 0.97, theta0).unwrap();
            let (mean, var) = estimator_moments(&c, theta0, Normalization::FringeSlope).unwrap();
            assert!((mean - theta0).abs() < 1e-15);
            let fi = fisher_information(&c, theta0).unwrap().value;
            assert!((var - 1.0 / fi).abs() < 1e-12);
            // derivative of the mean at θ₀ by central differences
            let h = 1e-5;
            let up = estimator_moments(&c, theta0 + h, Normalization::FringeSlope).unwrap().0;
            let dn = estimator_moments(&c, theta0 - h, Normalization::FringeSlope).unwrap().0;
            assert!(((up - dn) / (2.0 * h) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn visibility_normalization_is_biased() {
        let c = cfg(0.5, 0.8, 0.5, 0.97);
        let h = 1e-5;
        let up = estimator_moments(&c, h, Normalization::Visibility).unwrap().0;
        let dn = estimator_moments(&c, -h, Normalization::Visibility).unwrap().0;
        let slope = (up - dn) / (2.0 * h);
        assert!((slope - 0.97 / visibility(&c)).abs() < 1e-8);
        assert!((slope - 1.0).abs() > 1e-3);
    }

    #[test]
    fn bootstrap_degenerate_counts() {
        let c = cfg(0.5, 0.8, 0.5, 1.0);
        let rec = CountRecord {
            theta: 0.0,
            counts: [100, 0, 0],
            config: c,
            seed: 0,
        };
        assert!(matches!(
            bootstrap_precision(&rec, 10, 10, &c, 1, Normalization::FringeSlope),
            Err(Error::Degenerate(_))
        ));
        let empty = CountRecord { counts: [0; 3], ..rec };
        assert!(bootstrap_precision(&empty, 10, 10, &c, 1, Normalization::FringeSlope).is_err());
    }

    #[test]
    fn bootstrap_recovers_fisher_information() {
        let c = cfg(0.5, 0.8, 1.0, 1.0);
        let rec = sample_counts(&c, 0.0, 100_000, 17).unwrap();
        let rep = bootstrap_precision(&rec, 400, 2_000, &c, 18, Normalization::FringeSlope).unwrap();
        let fi = fisher_information(&c, 0.0).unwrap().value;
        assert!((fi - 0.64).abs() < 1e-14);
        assert!((rep.precision - fi).abs() < 3.0 * rep.precision_std_error, "{rep:?}");
        let again = bootstrap_precision(&rec, 400, 2_000, &c, 18, Normalization::FringeSlope).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn count_record_json_shape() {
        let c = cfg(0.5, 0.8, 0.5, 1.0);
        let rec = sample_counts(&c, PI / 8.0, 10, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rec).unwrap();
        assert!(v["theta"].is_f64());
        assert_eq!(v["counts"].as_array().unwrap().len(), 3);
        assert!(v["config"]["params"]["kappa"].is_f64());
        assert_eq!(v["seed"], 1);
        let back: CountRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);
    }
}
