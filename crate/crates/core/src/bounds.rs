//! Explicit error envelopes: the Grönwall bound on `alpha`, the `beta` envelope with rate
//! exponent `eta`, and the energies that enter them.

use num_rational::Ratio;
use num_traits::One;

use crate::error::{config, Error, Result};
use crate::fock::ManyBodyOperator;
use crate::fock::ManyBodyState;
use crate::lattice::{lp_norm, Grid, LatticeField};
use crate::onebody::{build_h_at, hartree_energy, HartreeTrajectory, OneBodyOperator, Orbital, PotentialSpec};
use crate::propagate::expectation;

pub type Rational = Ratio<i64>;

/// `1/p0 = 1/2 + 1/d`, i.e. `p0 = 2d / (d + 2)`.
pub fn p0_of(d: i64) -> Result<Rational> {
    if d < 1 {
        return config(format!("dimension must be >= 1, got {d}"));
    }
    Ok(Rational::new(2 * d, d + 2))
}

/// `eta = (p/p0 - 1) / (2 p/p0 - p/2 - 1)` for `p0 < p <= 2`.
pub fn eta_of(p: Rational, d: i64) -> Result<Rational> {
    let p0 = p0_of(d)?;
    let two = Rational::from_integer(2);
    if !(p > p0 && p <= two) {
        return config(format!("p = {p} outside ({p0}, 2]"));
    }
    let r = p / p0;
    Ok((r - Rational::one()) / (two * r - p / two - Rational::one()))
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `a/b`, an integer, or a plain decimal such as `1.35` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Config(format!("cannot parse `{s}` as an exact rational"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 15 {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let denom = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let r = Rational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

/// Dimension, exponent and the derived `p0`, `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentSpec {
    pub d: i64,
    pub p: Rational,
    pub p0: Rational,
    pub eta: Rational,
}

impl ExponentSpec {
    pub fn new(d: i64, p: Rational) -> Result<Self> {
        let eta = eta_of(p, d)?;
        Ok(Self { d, p, p0: p0_of(d)?, eta })
    }
}

/// Conjugate exponent in `1/2 = 1/p + 1/q`; `p = inf` gives `q = 2`.
pub fn conjugate_q(p: f64) -> Result<f64> {
    if p.is_infinite() {
        return Ok(2.0);
    }
    if !(p >= 2.0) {
        return config(format!("interaction exponent must be >= 2, got {p}"));
    }
    Ok(if p == 2.0 { f64::INFINITY } else { 2.0 * p / (p - 2.0) })
}

fn check_q(q1: f64, q2: f64) -> Result<()> {
    if !(2.0 <= q2 && q2 <= q1) {
        return config(format!("need 2 <= q2 <= q1, got q1={q1} q2={q2}"));
    }
    Ok(())
}

/// Running trapezoid integral of `samples` over `times`, starting at zero.
fn cumulative_trapezoid(times: &[f64], samples: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (samples[i] + samples[i - 1]);
        out.push(acc);
    }
    out
}

/// Value of a cumulative integral at `t`, interpolating within the last interval.
fn value_at(times: &[f64], cumulative: &[f64], samples: &[f64], t: f64) -> Result<f64> {
    let end = *times.last().unwrap_or(&0.0);
    if t < 0.0 || t > end + 1e-12 * end.max(1.0) {
        return config(format!("t = {t} outside the trajectory [0, {end}]"));
    }
    let i = times.partition_point(|&s| s <= t).saturating_sub(1);
    if i + 1 >= times.len() || times[i] == t {
        return Ok(cumulative[i]);
    }
    let (t0, t1) = (times[i], times[i + 1]);
    let f_t = samples[i] + (samples[i + 1] - samples[i]) * (t - t0) / (t1 - t0);
    Ok(cumulative[i] + 0.5 * (t - t0) * (samples[i] + f_t))
}

/// `32 ||w|| int_0^t (||phi(s)||_q1 + ||phi(s)||_q2) ds` at every stored time.
pub fn phi_theorem31_series(traj: &HartreeTrajectory, w_norm: f64, q1: f64, q2: f64) -> Result<Vec<f64>> {
    check_q(q1, q2)?;
    let samples = integrand31(traj, w_norm, q1, q2)?;
    Ok(cumulative_trapezoid(traj.times(), &samples))
}

fn integrand31(traj: &HartreeTrajectory, w_norm: f64, q1: f64, q2: f64) -> Result<Vec<f64>> {
    let a = traj.lp_norms(q1)?;
    let b = traj.lp_norms(q2)?;
    Ok(a.iter().zip(&b).map(|(x, y)| 32.0 * w_norm * (x + y)).collect())
}

/// Growth exponent of the `alpha` envelope at time `t`.
pub fn phi_theorem31(traj: &HartreeTrajectory, w_norm: f64, q1: f64, q2: f64, t: f64) -> Result<f64> {
    check_q(q1, q2)?;
    let samples = integrand31(traj, w_norm, q1, q2)?;
    let cum = cumulative_trapezoid(traj.times(), &samples);
    value_at(traj.times(), &cum, &samples, t)
}

/// `(alpha(0) + 1/N) exp(phi(t))`.
pub fn gronwall_alpha_bound(alpha0: f64, particles: usize, phi_t: f64) -> f64 {
    (alpha0 + 1.0 / particles as f64) * phi_t.exp()
}

/// Upper bound on `||w||_{L^p1 + L^p2}` from the splits `w 1_{|w|>a} + w 1_{|w|<=a}`.
pub fn wnorm_upper_bound(w: &LatticeField, p1: f64, p2: f64, cutoffs: &[f64], grid: &Grid) -> Result<f64> {
    if !(2.0 <= p1 && p1 <= p2) {
        return config(format!("need 2 <= p1 <= p2, got p1={p1} p2={p2}"));
    }
    if cutoffs.is_empty() {
        return config("at least one cutoff is required");
    }
    let mut best = f64::INFINITY;
    for &a in cutoffs {
        let (mut big, mut small) = (w.clone(), w.clone());
        for (b, s) in big.values_mut().iter_mut().zip(small.values_mut()) {
            if b.norm() > a {
                *s = num_complex::Complex64::new(0.0, 0.0);
            } else {
                *b = num_complex::Complex64::new(0.0, 0.0);
            }
        }
        best = best.min(lp_norm(&big, p1, grid)? + lp_norm(&small, p2, grid)?);
    }
    Ok(best)
}

/// Every distinct `|w(x)|`, plus `0` and `inf`: the minimum over these is the best threshold split.
pub fn default_cutoffs(w: &LatticeField) -> Vec<f64> {
    let mut c: Vec<f64> = w.values().iter().map(|z| z.norm()).collect();
    c.push(0.0);
    c.push(f64::INFINITY);
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// `<phi (x) phi, W_12 phi (x) phi>`.
pub fn pair_expectation(phi: &Orbital, w: &LatticeField) -> f64 {
    let rho: Vec<f64> = phi.modes().iter().map(|z| z.norm_sqr()).collect();
    let wr = w.real_parts();
    let m = rho.len();
    (0..m).map(|x| (0..m).map(|y| rho[x] * rho[y] * wr[(x + m - y) % m]).sum::<f64>()).sum()
}

/// Exact `E^Psi - E^phi` for `Psi = phi^{(x)N}`: `-<phi phi, W phi phi> / (2N)`.
pub fn factorized_energy_gap(phi: &Orbital, w: &LatticeField, particles: usize) -> f64 {
    -pair_expectation(phi, w) / (2.0 * particles as f64)
}

/// `(E^Psi, E^phi)` with `E^Psi = <Psi, H_N Psi> / N`.
pub fn energies(psi: &ManyBodyState, hn: &ManyBodyOperator, phi: &Orbital, h: &OneBodyOperator, w: &LatticeField) -> Result<(f64, f64)> {
    let n = psi.basis().particles() as f64;
    Ok((expectation(psi, hn)?.re / n, hartree_energy(phi, h, w)))
}

/// `||phi||_{X^2} + ||phi||_inf` with `||phi||_{X^2} = ||(1 + h^2)^{1/2} phi||`.
pub fn x2_linf_norm(phi: &Orbital, h: &OneBodyOperator) -> Result<f64> {
    let g = phi.grid();
    let hphi = h.apply(phi.field());
    let x2 = (phi.field().mass(g) + hphi.mass(g)).sqrt();
    Ok(x2 + phi.lp_norm(f64::INFINITY)?)
}

/// `int_0^t (1 + ||phi(s)||^3_{X^2 cap L^inf}) ds` at every stored time.
pub fn phi_tilde_series(traj: &HartreeTrajectory, potential: &PotentialSpec) -> Result<Vec<f64>> {
    let grid = traj.grid();
    let fixed = (!potential.is_time_dependent()).then(|| build_h_at(grid, potential, 0.0)).transpose()?;
    let samples = traj
        .times()
        .iter()
        .zip(traj.orbitals())
        .map(|(&t, phi)| {
            let h = match &fixed {
                Some(h) => h.clone(),
                None => build_h_at(grid, potential, t)?,
            };
            Ok(1.0 + x2_linf_norm(phi, &h)?.powi(3))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(cumulative_trapezoid(traj.times(), &samples))
}

/// `(beta(0) + gap + N^-eta) exp(K phi_tilde)`.
pub fn beta_bound_theorem41(beta0: f64, gap: f64, particles: usize, eta: f64, k: f64, phi_tilde: f64) -> Result<f64> {
    if !(k > 0.0) {
        return config(format!("K must be positive, got {k}"));
    }
    Ok(beta_prefactor(beta0, gap, particles, eta) * (k * phi_tilde).exp())
}

pub fn beta_prefactor(beta0: f64, gap: f64, particles: usize, eta: f64) -> f64 {
    beta0 + gap + (particles as f64).powf(-eta)
}

/// Smallest `K >= 0` with `beta(t) <= prefactor * exp(K phi_tilde(t))` at every sample.
///
/// Infinite when the prefactor is not positive but some `beta(t) > 0`.
pub fn fitted_k(betas: &[f64], phi_tildes: &[f64], prefactor: f64) -> f64 {
    let mut k: f64 = 0.0;
    for (&b, &p) in betas.iter().zip(phi_tildes) {
        if b <= 0.0 {
            continue;
        }
        if prefactor <= 0.0 {
            return f64::INFINITY;
        }
        let need = (b / prefactor).ln();
        if need <= 0.0 {
            continue;
        }
        if p <= 0.0 {
            return f64::INFINITY;
        }
        k = k.max(need / p);
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRecord {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_bound: f64,
    pub beta_bound: f64,
    pub slack: f64,
}

/// Observed `alpha`, `beta` against their envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub records: Vec<BoundRecord>,
    pub violated: bool,
}

impl BoundReport {
    pub const SLACK_TOL: f64 = 1e-9;

    pub fn new(records: Vec<BoundRecord>) -> Self {
        let violated = records.iter().any(|r| r.slack < -Self::SLACK_TOL);
        Self { records, violated }
    }

    pub fn min_slack(&self) -> f64 {
        self.records.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }
}
