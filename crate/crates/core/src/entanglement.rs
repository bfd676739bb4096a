//! Maximally correlated two-qutrit states `Σ αᵢⱼ |ii⟩⟨jj|` produced by sending
//! one half of `√q|11⟩ + √((1−q)/2)(|22⟩ + |33⟩)` through the dephasing channel.
//!
//! For this family distillable entanglement and relative entropy of
//! entanglement coincide: `E_d = S(ρ^B) − S(ρ^AB)`, which equals the relative
//! entropy of coherence of `α` in the computational basis.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{dephase, DephasingParams, PureProbe};
use crate::qmath::{c64, shannon_bits, vn_entropy, CMatrix, DensityMatrix};
use crate::{Error, Result};

/// Local dimension of each party.
pub const LOCAL_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxCorrState {
    alpha: DensityMatrix,
    joint: DensityMatrix,
}

impl MaxCorrState {
    /// Builds the state from a valid qutrit coefficient matrix.
    pub fn from_alpha(alpha: DensityMatrix) -> Result<Self> {
        if alpha.dim() != LOCAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: LOCAL_DIM,
                found: alpha.dim(),
            });
        }
        let d = LOCAL_DIM;
        let mut m = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                // |ii⟩ has flat index i·d + i
                m[(i * d + i, j * d + j)] = alpha.get(i, j);
            }
        }
        let joint = DensityMatrix::new(m)?;
        Ok(Self { alpha, joint })
    }

    pub fn alpha(&self) -> &DensityMatrix {
        &self.alpha
    }

    /// The explicit 9×9 density matrix.
    pub fn joint(&self) -> &DensityMatrix {
        &self.joint
    }

    /// `ρ^B = Tr_A ρ^AB`.
    pub fn reduced_b(&self) -> DensityMatrix {
        partial_trace_a(&self.joint, LOCAL_DIM, LOCAL_DIM).expect("joint state has dimension 9")
    }
}

/// Partial trace over the first factor of a `d_a·d_b` bipartite state.
pub fn partial_trace_a(rho: &DensityMatrix, d_a: usize, d_b: usize) -> Result<DensityMatrix> {
    if rho.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_b,
            found: rho.dim(),
        });
    }
    let m = CMatrix::from_fn(d_b, d_b, |j, k| {
        (0..d_a).fold(c64(0.0, 0.0), |acc, a| acc + rho.get(a * d_b + j, a * d_b + k))
    });
    DensityMatrix::new(m)
}

/// Maximally correlated state with `α` equal to the dephased qutrit probe.
pub fn mc_state(q: f64, params: &DephasingParams) -> Result<MaxCorrState> {
    let probe = PureProbe::new(q)?;
    MaxCorrState::from_alpha(dephase(&probe, params))
}

/// `S(ρ^B) − S(ρ^AB)` in ebits, computed on the 9×9 state.
pub fn distillable_entanglement(state: &MaxCorrState) -> f64 {
    // ρ^B is diagonal for this family; clip rounding-level negatives
    let reduced = shannon_bits(&state.reduced_b().diagonal());
    (reduced - vn_entropy(state.joint())).max(0.0)
}

/// `S(diag ρ) − S(ρ)` in bits.
pub fn rel_entropy_coherence(rho: &DensityMatrix) -> f64 {
    (shannon_bits(&rho.diagonal()) - vn_entropy(rho)).max(0.0)
}

/// Grid search over `q ∈ [0, 1]` (`resolution` intervals) for the largest
/// distillable entanglement. Ties resolve to the smallest `q`.
pub fn optimize_q_entanglement(params: &DephasingParams, resolution: usize) -> (f64, f64) {
    let resolution = resolution.max(1);
    let values: Vec<(f64, f64)> = (0..=resolution)
        .into_par_iter()
        .map(|i| {
            let q = i as f64 / resolution as f64;
            let e = mc_state(q, params).map(|s| distillable_entanglement(&s)).unwrap_or(0.0);
            (q, e)
        })
        .collect();
    values.into_iter().fold((0.0, f64::NEG_INFINITY), |best, cur| {
        // values equal within rounding count as ties
        if cur.1 > best.1 + 1e-13 {
            cur
        } else {
            best
        }
    })
}

/// Finite-difference scan of `E_d(κ)` across the CP-valid range at fixed `(q, η)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaGainReport {
    pub q: f64,
    pub eta: f64,
    pub kappas: Vec<f64>,
    pub values: Vec<f64>,
    /// `(E(κ_{i+1}) − E(κ_i))/(κ_{i+1} − κ_i)`, one per grid interval.
    pub slopes: Vec<f64>,
    /// Maximal κ-intervals on which `E_d` grows as `κ` decreases.
    pub gain_intervals: Vec<(f64, f64)>,
    /// The part of `gain_intervals` with `κ > 0`.
    pub positive_gain_intervals: Vec<(f64, f64)>,
    /// Grid minimum of `E_d(κ)`, if the sweep is non-empty.
    pub minimum: Option<(f64, f64)>,
    /// `true` when the CP region admits a single κ (η = 1).
    pub collapsed: bool,
}

/// Slopes more negative than this count as entanglement gain.
const SLOPE_MARGIN: f64 = 1e-12;

pub fn kappa_gain_region(q: f64, eta: f64, points: usize) -> Result<KappaGainReport> {
    PureProbe::new(q)?;
    let kappa_lo = 2.0 * eta * eta - 1.0;
    DephasingParams::new(eta, 1.0)?;
    let collapsed = 1.0 - kappa_lo <= 1e-12;
    if collapsed || points < 2 {
        return Ok(KappaGainReport {
            q,
            eta,
            kappas: vec![],
            values: vec![],
            slopes: vec![],
            gain_intervals: vec![],
            positive_gain_intervals: vec![],
            minimum: None,
            collapsed,
        });
    }
    let kappas: Vec<f64> = (0..points)
        .map(|i| kappa_lo + (1.0 - kappa_lo) * i as f64 / (points - 1) as f64)
        .collect();
    let values: Vec<f64> = kappas
        .par_iter()
        .map(|&k| {
            let params = DephasingParams::new(eta, k)?;
            Ok(distillable_entanglement(&mc_state(q, &params)?))
        })
        .collect::<Result<_>>()?;
    let slopes: Vec<f64> = kappas
        .windows(2)
        .zip(values.windows(2))
        .map(|(k, e)| (e[1] - e[0]) / (k[1] - k[0]))
        .collect();
    let mut gain_intervals = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &s) in slopes.iter().enumerate() {
        match (s < -SLOPE_MARGIN, start) {
            (true, None) => start = Some(i),
            (false, Some(b)) => {
                gain_intervals.push((kappas[b], kappas[i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(b) = start {
        gain_intervals.push((kappas[b], kappas[slopes.len()]));
    }
    let positive_gain_intervals = gain_intervals
        .iter()
        .filter(|&&(_, hi)| hi > 0.0)
        .map(|&(lo, hi)| (lo.max(0.0), hi))
        .collect();
    let minimum = kappas
        .iter()
        .zip(&values)
        .fold(None, |best: Option<(f64, f64)>, (&k, &e)| match best {
            Some((_, be)) if be <= e => best,
            _ => Some((k, e)),
        });
    Ok(KappaGainReport {
        q,
        eta,
        kappas,
        values,
        slopes,
        gain_intervals,
        positive_gain_intervals,
        minimum,
        collapsed,
    })
}
