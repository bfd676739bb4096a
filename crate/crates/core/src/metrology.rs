//! Phase encoding `ρ ↦ e^{−iθG} ρ e^{iθG}`, the symmetric logarithmic derivative,
//! quantum and classical Fisher information, probe optimization and two
//! asymmetry monotones.
//!
//! Fisher information is in rad⁻², entropies in bits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::DephasingParams;
use crate::qmath::{self, c64, pinch_blocks, trace_norm, vn_entropy, CMatrix, DensityMatrix, HermitianOperator};
use crate::{tolerance, Error, Result};

/// `G = diag(1, 0, 0)`: the signal mode carries the phase.
pub fn signal_generator() -> HermitianOperator {
    HermitianOperator::from_diagonal(&[1.0, 0.0, 0.0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEncoding {
    pub generator: HermitianOperator,
    pub theta: f64,
}

impl PhaseEncoding {
    pub fn new(generator: HermitianOperator, theta: f64) -> Self {
        Self { generator, theta }
    }

    /// Default qutrit generator at phase `theta`.
    pub fn signal(theta: f64) -> Self {
        Self::new(signal_generator(), theta)
    }

    /// `e^{−iθG}`.
    pub fn unitary(&self) -> CMatrix {
        qmath::unitary_from_hermitian(&self.generator, self.theta)
    }
}

pub fn encode_phase(rho: &DensityMatrix, enc: &PhaseEncoding) -> Result<DensityMatrix> {
    check_dims(rho, &enc.generator)?;
    rho.conjugate_by(&enc.unitary())
}

fn check_dims(rho: &DensityMatrix, op: &HermitianOperator) -> Result<()> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: op.dim(),
        });
    }
    Ok(())
}

/// `dρ/dθ = −i[G, ρ]` at the current phase.
pub fn phase_derivative(rho: &DensityMatrix, generator: &HermitianOperator) -> Result<HermitianOperator> {
    check_dims(rho, generator)?;
    let g = generator.matrix();
    let r = rho.matrix();
    let comm = g * r - r * g;
    HermitianOperator::symmetrized(comm * c64(0.0, -1.0))
}

/// Symmetric logarithmic derivative `L`, solving `2 dρ = Lρ + ρL` on the support
/// of `ρ`; kernel directions (eigenvalue-pair sum below
/// `tolerance::SLD_KERNEL`) are set to zero.
pub fn sld(rho: &DensityMatrix, drho: &HermitianOperator) -> Result<HermitianOperator> {
    check_dims(rho, drho)?;
    let trace = drho.trace();
    if trace.abs() > tolerance::VALIDATION {
        return Err(Error::NotTraceless { trace });
    }
    let spec = rho.eigh();
    let v = &spec.vectors;
    let d = v.adjoint() * drho.matrix() * v;
    // 2/s amplifies any anti-Hermitian rounding in d near the kernel
    let d = (&d + d.adjoint()) * c64(0.5, 0.0);
    let n = rho.dim();
    let l_eig = CMatrix::from_fn(n, n, |j, k| {
        let s = spec.values[j] + spec.values[k];
        if s > tolerance::SLD_KERNEL {
            d[(j, k)] * (2.0 / s)
        } else {
            c64(0.0, 0.0)
        }
    });
    let l = v * l_eig * v.adjoint();
    HermitianOperator::symmetrized(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherMethod {
    ClosedForm,
    SldNumeric,
    ClassicalFromProbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub value: f64,
    pub method: FisherMethod,
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    // Tr(AB) = Σ_jk A_jk B_kj
    let mut s = c64(0.0, 0.0);
    for j in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(j, k)] * b[(k, j)];
        }
    }
    s
}

/// QFI `Tr[ρ L²]` from the numerically computed SLD.
pub fn qfi_numeric(rho: &DensityMatrix, generator: &HermitianOperator) -> Result<FisherReport> {
    let drho = phase_derivative(rho, generator)?;
    let l = sld(rho, &drho)?;
    let value = trace_product(drho.matrix(), l.matrix()).re.max(0.0);
    Ok(FisherReport {
        value,
        method: FisherMethod::SldNumeric,
    })
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("q", q, "probe weight must lie in [0, 1]"));
    }
    Ok(())
}

/// Closed-form QFI of the dephased probe: `8η²q(1−q) / (κ + 1 + q(1−κ))`.
pub fn qfi_closed(q: f64, params: &DephasingParams) -> Result<FisherReport> {
    check_q(q)?;
    let (eta, kappa) = (params.eta(), params.kappa());
    let value = if q == 0.0 || q == 1.0 {
        0.0
    } else {
        8.0 * eta * eta * (1.0 - q) * q / (kappa + 1.0 + q * (1.0 - kappa))
    };
    Ok(FisherReport {
        value,
        method: FisherMethod::ClosedForm,
    })
}

fn half_shift(kappa: f64) -> f64 {
    ((kappa + 1.0) / 2.0).sqrt()
}

/// QFI-maximizing probe weight `1/(√(2/(κ+1)) + 1)`, evaluated as `t/(1+t)`
/// with `t = √((κ+1)/2)`. At `κ = −1` the optimum degenerates to `q → 0` and
/// is reported as a domain error.
pub fn q_opt(kappa: f64) -> Result<f64> {
    if !(kappa > -1.0 && kappa <= 1.0) {
        return Err(Error::param("kappa", kappa, "optimal probe requires kappa in (-1, 1]"));
    }
    if kappa == 1.0 {
        return Ok(0.5);
    }
    let t = half_shift(kappa);
    Ok(t / (1.0 + t))
}

/// Maximum of the closed-form QFI over `q`.
///
/// `8η²(κ − 2√2√(κ+1) + 3)/(κ−1)²` simplifies to `4η²/(1 + t)²` with
/// `t = √((κ+1)/2)`; the simplified form has no `0/0` at `κ = 1`, where it
/// gives the limit `η²`.
pub fn qfi_max(params: &DephasingParams) -> f64 {
    let eta2 = params.eta() * params.eta();
    if params.kappa() >= 1.0 {
        return eta2;
    }
    let t = half_shift(params.kappa().max(-1.0));
    4.0 * eta2 / ((1.0 + t) * (1.0 + t))
}

/// Grid argmax of the closed-form QFI over `q ∈ [0, 1]` with `resolution`
/// intervals. Ties resolve to the smallest `q`.
pub fn optimize_q_qfi(params: &DephasingParams, resolution: usize) -> (f64, f64) {
    let resolution = resolution.max(1);
    let values: Vec<(f64, f64)> = (0..=resolution)
        .into_par_iter()
        .map(|i| {
            let q = i as f64 / resolution as f64;
            (q, qfi_closed(q, params).map(|r| r.value).unwrap_or(0.0))
        })
        .collect();
    values.into_iter().fold(
        (0.0, f64::NEG_INFINITY),
        |best, cur| if cur.1 > best.1 { cur } else { best },
    )
}

/// Fisher information `Σ (∂p)²/p` of a discrete outcome distribution.
pub fn classical_fi(probs: &[f64], dprobs: &[f64]) -> Result<FisherReport> {
    if probs.len() != dprobs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            found: dprobs.len(),
        });
    }
    if let Some(p) = probs
        .iter()
        .find(|p| !(-tolerance::PROBABILITY_FLOOR..=1.0 + tolerance::VALIDATION).contains(*p))
    {
        return Err(Error::InvalidProbabilities(format!("probability {p} outside [0, 1]")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tolerance::VALIDATION {
        return Err(Error::InvalidProbabilities(format!("probabilities sum to {total}")));
    }
    let dtotal: f64 = dprobs.iter().sum();
    if dtotal.abs() > tolerance::VALIDATION {
        return Err(Error::InvalidProbabilities(format!("derivatives sum to {dtotal}")));
    }
    let mut value = 0.0;
    for (i, (&p, &dp)) in probs.iter().zip(dprobs).enumerate() {
        if p < tolerance::PROBABILITY_FLOOR {
            if dp.abs() < tolerance::PROBABILITY_FLOOR {
                continue;
            }
            return Err(Error::DivergentInformation {
                outcome: i + 1,
                derivative: dp,
            });
        }
        value += dp * dp / p;
    }
    Ok(FisherReport {
        value,
        method: FisherMethod::ClassicalFromProbs,
    })
}

/// Generator eigenbasis and the index groups of its (degenerate) eigenspaces.
fn eigenspaces(generator: &HermitianOperator) -> (CMatrix, Vec<f64>, Vec<Vec<usize>>) {
    let spec = generator.eigh();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &lam) in spec.values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (lam - spec.values[g[0]]).abs() <= tolerance::DEGENERACY => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    (spec.vectors, spec.values, groups)
}

fn in_eigenbasis(rho: &DensityMatrix, v: &CMatrix) -> Result<DensityMatrix> {
    rho.conjugate_by(&v.adjoint())
}

/// Relative entropy of asymmetry `S(Π_G(ρ)) − S(ρ)`, where `Π_G` removes all
/// coherence between distinct eigenspaces of `G`.
pub fn rel_entropy_asymmetry(rho: &DensityMatrix, generator: &HermitianOperator) -> Result<f64> {
    check_dims(rho, generator)?;
    let (v, _, groups) = eigenspaces(generator);
    let rho_g = in_eigenbasis(rho, &v)?;
    let pinched = pinch_blocks(&rho_g, &groups)?;
    Ok((vn_entropy(&pinched) - vn_entropy(rho)).max(0.0))
}

/// Sum over nonzero frequencies `ω` of the trace norm of the mode `ρ^(ω)`,
/// which keeps the entries between eigenvectors whose eigenvalues differ by `ω`.
pub fn modes_asymmetry_norm(rho: &DensityMatrix, generator: &HermitianOperator) -> Result<f64> {
    check_dims(rho, generator)?;
    let (v, lam, _) = eigenspaces(generator);
    let rho_g = in_eigenbasis(rho, &v)?;
    let n = rho.dim();
    let mut freqs: Vec<f64> = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let w = lam[j] - lam[k];
            if w.abs() > tolerance::DEGENERACY && !freqs.iter().any(|f| (f - w).abs() <= tolerance::DEGENERACY) {
                freqs.push(w);
            }
        }
    }
    freqs.sort_by(f64::total_cmp);
    let total = freqs
        .iter()
        .map(|&w| {
            let mode = CMatrix::from_fn(n, n, |j, k| {
                if (lam[j] - lam[k] - w).abs() <= tolerance::DEGENERACY {
                    rho_g.get(j, k)
                } else {
                    c64(0.0, 0.0)
                }
            });
            trace_norm(&mode)
        })
        .sum();
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{dephase, PureProbe};
    use std::f64::consts::PI;

    fn state(q: f64, eta: f64, kappa: f64) -> DensityMatrix {
        dephase(&PureProbe::new(q).unwrap(), &DephasingParams::new(eta, kappa).unwrap())
    }

    #[test]
    fn encoding_examples() {
        let rho = state(0.3, 0.8, 0.5);
        let same = encode_phase(&rho, &PhaseEncoding::signal(0.0)).unwrap();
        assert!(qmath::max_abs_diff(same.matrix(), rho.matrix()) < 1e-15);
        let full = encode_phase(&rho, &PhaseEncoding::signal(2.0 * PI)).unwrap();
        assert!(qmath::max_abs_diff(full.matrix(), rho.matrix()) < 1e-12);
        let diag = rho.dephased();
        let d = encode_phase(&diag, &PhaseEncoding::signal(1.3)).unwrap();
        assert!(qmath::max_abs_diff(d.matrix(), diag.matrix()) < 1e-15);
        let moved = encode_phase(&rho, &PhaseEncoding::signal(0.9)).unwrap();
        for (a, b) in moved.eigh().values.iter().zip(rho.eigh().values.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(encode_phase(&DensityMatrix::maximally_mixed(2), &PhaseEncoding::signal(0.1)).is_err());
    }

    #[test]
    fn sld_pure_state_variance() {
        let rho = PureProbe::new(0.3).unwrap().density();
        let g = signal_generator();
        let drho = phase_derivative(&rho, &g).unwrap();
        let l = sld(&rho, &drho).unwrap();
        let f = trace_product(drho.matrix(), l.matrix()).re;
        // 4 Var(G) for G = diag(1,0,0) is 4 q (1 - q)
        assert!((f - 4.0 * 0.3 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn sld_zero_derivative() {
        let rho = state(0.5, 0.8, 0.5);
        let l = sld(&rho, &HermitianOperator::zeros(3)).unwrap();
        assert!(l.matrix().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn sld_solves_lyapunov_equation() {
        let rho = state(0.5, 0.8, 0.5);
        let drho = phase_derivative(&rho, &signal_generator()).unwrap();
        let l = sld(&rho, &drho).unwrap();
        let lhs = drho.matrix() * c64(2.0, 0.0);
        let rhs = l.matrix() * rho.matrix() + rho.matrix() * l.matrix();
        assert!(qmath::max_abs_diff(&lhs, &rhs) < 1e-8);
        let f = trace_product(drho.matrix(), l.matrix()).re;
        assert!((f - 1.28 / 1.75).abs() < 1e-12);
    }

    #[test]
    fn sld_rejects_trace() {
        let rho = state(0.5, 0.8, 0.5);
        let bad = HermitianOperator::from_diagonal(&[0.1, 0.0, 0.0]);
        assert!(matches!(sld(&rho, &bad), Err(Error::NotTraceless { .. })));
    }

    #[test]
    fn qfi_numeric_examples() {
        let g = signal_generator();
        let pure = PureProbe::new(0.5).unwrap().density();
        assert!((qfi_numeric(&pure, &g).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(qfi_numeric(&pure.dephased(), &g).unwrap().value, 0.0);
        let r = qfi_numeric(&state(0.5, 0.8, 1.0), &g).unwrap();
        assert!((r.value - 0.64).abs() < 1e-12);
        assert_eq!(r.method, FisherMethod::SldNumeric);
    }

    #[test]
    fn qfi_numeric_phase_independent() {
        let rho = state(0.35, 0.7, 0.2);
        let g = signal_generator();
        let f0 = qfi_numeric(&rho, &g).unwrap().value;
        let moved = encode_phase(&rho, &PhaseEncoding::signal(0.7)).unwrap();
        let f1 = qfi_numeric(&moved, &g).unwrap().value;
        assert!((f0 - f1).abs() < 1e-9);
    }

    #[test]
    fn qfi_closed_examples() {
        let id = DephasingParams::identity();
        assert!((qfi_closed(0.5, &id).unwrap().value - 1.0).abs() < 1e-15);
        let p = DephasingParams::new(0.6, -0.2).unwrap();
        assert_eq!(qfi_closed(0.0, &p).unwrap().value, 0.0);
        assert_eq!(qfi_closed(1.0, &p).unwrap().value, 0.0);
        let p = DephasingParams::new(0.8, 0.5).unwrap();
        assert!((qfi_closed(0.5, &p).unwrap().value - 0.7314285714285714).abs() < 1e-15);
        assert!(qfi_closed(1.5, &p).is_err());
        // κ = −1 forces η = 0; the 0/0 at q = 0 is defined as zero
        let corner = DephasingParams::new(0.0, -1.0).unwrap();
        assert_eq!(qfi_closed(0.0, &corner).unwrap().value, 0.0);
    }

    #[test]
    fn optimal_probe_examples() {
        assert_eq!(q_opt(1.0).unwrap(), 0.5);
        assert!((q_opt(0.0).unwrap() - 1.0 / (2f64.sqrt() + 1.0)).abs() < 1e-15);
        assert!((q_opt(0.0).unwrap() - 0.4142136).abs() < 1e-7);
        assert!(q_opt(-1.0).is_err());
        assert!(q_opt(1.1).is_err());
        let (q_grid, _) = optimize_q_qfi(&DephasingParams::new(0.7, 0.0).unwrap(), 10_000);
        assert!((q_grid - q_opt(0.0).unwrap()).abs() <= 1e-4);
        assert_eq!(qfi_max(&DephasingParams::new(0.6, 1.0).unwrap()), 0.36);
        // κ = −1 corner: η = 0, nothing to gain
        assert_eq!(qfi_max(&DephasingParams::new(0.0, -1.0).unwrap()), 0.0);
        let (_, f_grid) = optimize_q_qfi(&DephasingParams::new(0.0, -1.0).unwrap(), 1000);
        assert_eq!(f_grid, 0.0);
    }

    #[test]
    fn qfi_max_near_unit_kappa_is_smooth() {
        let eta = 0.9;
        let a = qfi_max(&DephasingParams::new(eta, 1.0 - 1e-12).unwrap());
        assert!((a - eta * eta).abs() < 1e-10);
    }

    #[test]
    fn classical_fi_examples() {
        let f = classical_fi(&[0.2, 0.3, 0.5], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.value, 0.0);
        // q = 1/2, η = 0.8, κ = 0.5, v = 1 at θ = 0
        let slope = 0.8 * 0.5;
        let f = classical_fi(&[0.4375, 0.4375, 0.125], &[slope, -slope, 0.0]).unwrap();
        assert!((f.value - 1.28 / 1.75).abs() < 1e-14);
        let err = classical_fi(&[0.5, 0.5, 0.0], &[0.1, -0.2, 0.1]).unwrap_err();
        assert!(matches!(err, Error::DivergentInformation { outcome: 3, .. }));
        assert!(classical_fi(&[0.5, 0.6, 0.0], &[0.0, 0.0, 0.0]).is_err());
        assert!(classical_fi(&[0.5, 0.5, 0.0], &[0.1, 0.0, 0.0]).is_err());
        assert!(classical_fi(&[0.5, 0.5, 0.0], &[0.1, -0.1, 0.0]).is_ok());
    }

    #[test]
    fn rel_entropy_asymmetry_examples() {
        let g = signal_generator();
        let block = DensityMatrix::new(
            qmath::pinch_blocks(&state(0.4, 0.8, 0.5), &[vec![0], vec![1, 2]])
                .unwrap()
                .into_matrix(),
        )
        .unwrap();
        assert!(rel_entropy_asymmetry(&block, &g).unwrap().abs() < 1e-12);
        let pure = PureProbe::new(0.5).unwrap().density();
        let a = rel_entropy_asymmetry(&pure, &g).unwrap();
        // pinched pure state has spectrum (1/2, 1/2)
        assert!((a - 1.0).abs() < 1e-12);
        let low = rel_entropy_asymmetry(&state(0.5, 0.8, 0.3), &g).unwrap();
        let high = rel_entropy_asymmetry(&state(0.5, 0.8, 0.9), &g).unwrap();
        assert!(low >= high);
    }

    #[test]
    fn modes_norm_examples() {
        let g = signal_generator();
        assert!(modes_asymmetry_norm(&state(0.5, 0.8, 0.5).dephased(), &g).unwrap() < 1e-15);
        for kappa in [0.28, 0.5, 0.9, 1.0] {
            let v = modes_asymmetry_norm(&state(0.5, 0.8, kappa), &g).unwrap();
            assert!((v - 0.8).abs() < 1e-12, "kappa {kappa}: {v}");
        }
        let v = modes_asymmetry_norm(&state(0.5, 1.0, 1.0), &g).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modes_norm_non_diagonal_generator() {
        // the same generator written in a rotated basis gives the same value
        let rho = state(0.3, 0.6, 0.1);
        let g = signal_generator();
        let h = HermitianOperator::new(CMatrix::from_fn(3, 3, |j, k| {
            c64(((j + 2 * k) as f64).sin() + ((k + 2 * j) as f64).sin(), 0.0)
        }))
        .unwrap();
        let u = qmath::unitary_from_hermitian(&h, 0.4);
        let g_rot = HermitianOperator::new(&u * g.matrix() * u.adjoint()).unwrap();
        let rho_rot = rho.conjugate_by(&u).unwrap();
        let a = modes_asymmetry_norm(&rho, &g).unwrap();
        let b = modes_asymmetry_norm(&rho_rot, &g_rot).unwrap();
        assert!((a - b).abs() < 1e-9);
        let a = rel_entropy_asymmetry(&rho, &g).unwrap();
        let b = rel_entropy_asymmetry(&rho_rot, &g_rot).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}
