//! Gauss–Hermite rules for expectations over (correlated) Gaussian phases.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Nodes and weights for `∫ f(x) exp(-x²) dx ≈ Σ w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Newton iteration on the orthonormal Hermite recurrence, started from the
    /// usual asymptotic guesses for the largest roots.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("quadrature order", 0.0, "must be at least 1"));
        }
        let n = order;
        let pim4 = PI.powf(-0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut converged = false;
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Gauss-Hermite root {i} of order {n} did not converge"
                )));
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // ascending nodes
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `E[f(Z)]` for a standard normal `Z`.
    pub fn expect_standard_normal<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let scale = 1.0 / PI.sqrt();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(std::f64::consts::SQRT_2 * x))
            .sum::<f64>()
            * scale
    }

    /// Tensor-product nodes for `(Z1, Z2)` i.i.d. standard normal, with the
    /// product weights already normalized to sum to one.
    pub fn standard_normal_grid_2d(&self) -> Vec<(f64, f64, f64)> {
        let scale = 1.0 / PI;
        let mut out = Vec::with_capacity(self.order() * self.order());
        for (&x1, &w1) in self.nodes.iter().zip(&self.weights) {
            for (&x2, &w2) in self.nodes.iter().zip(&self.weights) {
                out.push((
                    std::f64::consts::SQRT_2 * x1,
                    std::f64::consts::SQRT_2 * x2,
                    w1 * w2 * scale,
                ));
            }
        }
        out
    }
}
