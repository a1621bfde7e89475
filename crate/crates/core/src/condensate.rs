//! Distribution of particles outside the condensate and the functionals `alpha`, `beta`.
//!
//! `w_k = <Psi, P_k Psi>` where `P_k` projects onto configurations with exactly `k`
//! particles outside `phi`. Since `P_k` are the spectral projectors of `dGamma(q)` with
//! eigenvalue `k`, the weights follow from the moments `<Psi, dGamma(q)^j Psi>` through a
//! Vandermonde system on the integer nodes.

use num_complex::Complex64;

use crate::error::{config, numerical, Result};
use crate::fock::{second_quantize_onebody, ManyBodyOperator, ManyBodyState};
use crate::linalg::inner;
use crate::onebody::{condensate_projectors, Orbital};

pub const MAX_PARTICLES: usize = 12;
pub const SUM_TOL: f64 = 1e-8;
pub const NEGATIVE_TOL: f64 = 1e-7;
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// `(w_0, .., w_N)`, nonnegative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDistribution {
    weights: Vec<f64>,
}

impl WeightDistribution {
    /// Validates and clamps `raw`; entries below `-1e-7` or a sum off by more than `1e-8` fail.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.len() < 2 {
            return config("weight distribution needs N >= 1");
        }
        let sum: f64 = raw.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return numerical(format!("weights sum to {sum}"));
        }
        if let Some((k, w)) = raw.iter().enumerate().find(|(_, &w)| !(-NEGATIVE_TOL..=1.0 + NEGATIVE_TOL).contains(&w)) {
            return numerical(format!("weight w_{k} = {w:e} outside [-1e-7, 1 + 1e-7]"));
        }
        Ok(Self { weights: raw.into_iter().map(|w| w.clamp(0.0, 1.0)).collect() })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn particles(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Probability that at least `k` particles sit outside the condensate.
    pub fn tail(&self, k: usize) -> f64 {
        self.weights.iter().skip(k).sum()
    }
}

/// Scalar function on `{0, .., N}` lifted to `f^ = sum_k f(k) P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    values: Vec<f64>,
}

impl WeightFunction {
    pub fn from_fn(particles: usize, f: impl Fn(usize) -> f64) -> Self {
        Self { values: (0..=particles).map(f).collect() }
    }

    /// `m(k) = k / N`.
    pub fn m(particles: usize) -> Self {
        Self::from_fn(particles, |k| k as f64 / particles as f64)
    }

    /// `n(k) = sqrt(k / N)`.
    pub fn n(particles: usize) -> Self {
        Self::from_fn(particles, |k| (k as f64 / particles as f64).sqrt())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `<Psi, f^ Psi> = sum_k f(k) w_k`.
    pub fn expectation(&self, wd: &WeightDistribution) -> f64 {
        assert_eq!(self.values.len(), wd.weights.len());
        self.values.iter().zip(&wd.weights).map(|(f, w)| f * w).sum()
    }
}

/// `dGamma(1 - |phi><phi|)`, whose integer eigenvalue counts particles outside `phi`.
pub fn excitation_counter(psi: &ManyBodyState, phi: &Orbital) -> Result<ManyBodyOperator> {
    let (_, q) = condensate_projectors(phi)?;
    second_quantize_onebody(&q, psi.basis())
}

fn check_inputs(psi: &ManyBodyState, phi: &Orbital) -> Result<usize> {
    let n = psi.basis().particles();
    if n > MAX_PARTICLES {
        return config(format!("occupation weights are limited to N <= {MAX_PARTICLES}, got {n}"));
    }
    if (psi.norm() - 1.0).abs() > 1e-8 {
        return config("occupation weights need a normalized state");
    }
    if phi.grid().sites() != psi.basis().sites() {
        return config("orbital and state disagree on the number of sites");
    }
    Ok(n)
}

/// Moment route, cross-checked against the Lagrange-filter route.
pub fn occupation_weights(psi: &ManyBodyState, phi: &Orbital) -> Result<WeightDistribution> {
    let n = check_inputs(psi, phi)?;
    let counter = excitation_counter(psi, phi)?;
    let by_moments = weights_from_moments(psi, &counter, n)?;
    let by_filters = weights_from_filters(psi, &counter, n);
    let gap = by_moments.iter().zip(&by_filters).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if gap > CROSS_CHECK_TOL {
        return numerical(format!("moment and filter weights differ by {gap:e}"));
    }
    WeightDistribution::new(by_moments)
}

/// Solves `sum_k (k/N)^j w_k = <Psi, (D/N)^j Psi>`, `j = 0..N`.
pub fn weights_from_moments(psi: &ManyBodyState, counter: &ManyBodyOperator, n: usize) -> Result<Vec<f64>> {
    let scale = 1.0 / n as f64;
    let mut v = psi.amplitudes().to_vec();
    let mut moments = Vec::with_capacity(n + 1);
    moments.push(inner(psi.amplitudes(), &v).re);
    for _ in 0..n {
        v = counter.matvec(&v);
        v.iter_mut().for_each(|z| *z *= scale);
        moments.push(inner(psi.amplitudes(), &v).re);
    }
    let nodes: Vec<f64> = (0..=n).map(|k| k as f64 * scale).collect();
    let w = solve_vandermonde_dual(&nodes, &moments);
    let resid = (0..=n).fold(0.0f64, |m, j| {
        let lhs: f64 = nodes.iter().zip(&w).map(|(x, wk)| x.powi(j as i32) * wk).sum();
        m.max((lhs - moments[j]).abs())
    });
    if !(resid <= RESIDUAL_TOL) {
        return numerical(format!("Vandermonde residual {resid:e} exceeds {RESIDUAL_TOL:e}"));
    }
    Ok(w)
}

/// `w_k = <Psi, prod_{l != k} (D - l)/(k - l) Psi>`.
pub fn weights_from_filters(psi: &ManyBodyState, counter: &ManyBodyOperator, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let mut v = psi.amplitudes().to_vec();
            for l in (0..=n).filter(|&l| l != k) {
                let dv = counter.matvec(&v);
                let inv = 1.0 / (k as f64 - l as f64);
                v = dv.iter().zip(&v).map(|(a, b)| (a - b * l as f64) * inv).collect();
            }
            inner(psi.amplitudes(), &v).re
        })
        .collect()
}

/// Björck–Pereyra solve of `sum_k x_k^j z_k = b_j` for distinct nodes `x`.
pub fn solve_vandermonde_dual(x: &[f64], b: &[f64]) -> Vec<f64> {
    let n = x.len() - 1;
    let mut z = b.to_vec();
    for (k, &xk) in x.iter().enumerate().take(n) {
        for i in ((k + 1)..=n).rev() {
            z[i] -= xk * z[i - 1];
        }
    }
    for k in (0..n).rev() {
        for i in (k + 1)..=n {
            z[i] /= x[i] - x[i - k - 1];
        }
        for i in k..n {
            z[i] -= z[i + 1];
        }
    }
    z
}

/// `alpha = sum_k (k/N) w_k`.
pub fn alpha_of(wd: &WeightDistribution) -> f64 {
    WeightFunction::m(wd.particles()).expectation(wd)
}

/// `beta = sum_k sqrt(k/N) w_k`.
pub fn beta_of(wd: &WeightDistribution) -> f64 {
    WeightFunction::n(wd.particles()).expectation(wd)
}

/// `f^` applied to a state through the filter polynomials of `counter`.
pub fn apply_weight_function(psi: &ManyBodyState, counter: &ManyBodyOperator, f: &WeightFunction) -> Vec<Complex64> {
    let n = f.values().len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); psi.amplitudes().len()];
    for k in 0..=n {
        if f.values()[k] == 0.0 {
            continue;
        }
        let mut v = psi.amplitudes().to_vec();
        for l in (0..=n).filter(|&l| l != k) {
            let dv = counter.matvec(&v);
            let inv = 1.0 / (k as f64 - l as f64);
            v = dv.iter().zip(&v).map(|(a, b)| (a - b * l as f64) * inv).collect();
        }
        out.iter_mut().zip(&v).for_each(|(o, x)| *o += x * f.values()[k]);
    }
    out
}
