//! Periodic 1-D lattice: grids, the stencil Laplacian, discrete `L^p` norms,
//! periodic convolution and interaction sampling.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{config, Error, Result};
use crate::linalg::CMatrix;
use crate::onebody::OneBodyOperator;

/// `M` sites with spacing `dx` on a ring of length `L = M dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    sites: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(sites: usize, spacing: f64) -> Result<Self> {
        if sites < 2 {
            return config(format!("grid needs at least 2 sites, got {sites}"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return config(format!("grid spacing must be positive, got {spacing}"));
        }
        Ok(Self { sites, spacing })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    /// Minimal-image distance on the ring.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let l = self.length();
        let d = (x - y).abs() % l;
        d.min(l - d)
    }

    /// Minimal-image distance between sites `i` and `j`.
    pub fn site_distance(&self, i: usize, j: usize) -> f64 {
        let k = i.abs_diff(j);
        k.min(self.sites - k) as f64 * self.spacing
    }

    fn check(&self, f: &LatticeField) -> Result<()> {
        if f.len() != self.sites {
            return config(format!(
                "field has {} samples but the grid has {} sites",
                f.len(),
                self.sites
            ));
        }
        Ok(())
    }
}

/// Complex samples `f(x_j)` of a function on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    values: Vec<Complex64>,
}

impl LatticeField {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> Complex64) -> Self {
        Self::new((0..grid.sites()).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Real parts; the caller is expected to have checked `is_real`.
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `|f|^2` pointwise.
    pub fn density(&self) -> LatticeField {
        Self::new(self.values.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect())
    }

    /// `dx * sum |f|^2`.
    pub fn mass(&self, grid: &Grid) -> f64 {
        grid.spacing() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `<self, other> = dx * sum conj(self) other`.
    pub fn inner(&self, other: &LatticeField, grid: &Grid) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * grid.spacing()
    }

    pub fn scale(&mut self, s: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= s);
    }
}

/// Stencil matrix of `-d^2/dx^2` with periodic wrap.
pub fn laplacian_matrix(grid: &Grid) -> OneBodyOperator {
    let m = grid.sites();
    let inv = 1.0 / (grid.spacing() * grid.spacing());
    let mut a = CMatrix::zeros(m, m);
    for j in 0..m {
        a[(j, j)] += Complex64::new(2.0 * inv, 0.0);
        a[(j, (j + 1) % m)] += Complex64::new(-inv, 0.0);
        a[(j, (j + m - 1) % m)] += Complex64::new(-inv, 0.0);
    }
    OneBodyOperator::from_matrix_unchecked(a)
}

/// Eigenvalue of the stencil Laplacian on the plane wave with wavenumber index `k`.
pub fn laplacian_eigenvalue(grid: &Grid, k: usize) -> f64 {
    let theta = 2.0 * std::f64::consts::PI * k as f64 / grid.sites() as f64;
    2.0 * (1.0 - theta.cos()) / (grid.spacing() * grid.spacing())
}

/// Discrete `L^p` norm with measure `dx`; `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm(f: &LatticeField, p: f64, grid: &Grid) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return config(format!("L^p norm needs p >= 1, got {p}"));
    }
    grid.check(f)?;
    if p.is_infinite() {
        return Ok(f.values().iter().fold(0.0, |m, z| m.max(z.norm())));
    }
    let sum: f64 = f.values().iter().map(|z| z.norm().powf(p)).sum();
    Ok((grid.spacing() * sum).powf(1.0 / p))
}

/// `(w * rho)(x_i) = dx * sum_j w(x_{(i-j) mod M}) rho(x_j)`, direct O(M^2) sum.
pub fn periodic_convolution(w: &LatticeField, rho: &LatticeField, grid: &Grid) -> Result<LatticeField> {
    grid.check(w)?;
    grid.check(rho)?;
    let m = grid.sites();
    let (wv, rv) = (w.values(), rho.values());
    let out = (0..m)
        .map(|i| {
            let s: Complex64 = (0..m).map(|j| wv[(i + m - j) % m] * rv[j]).sum();
            s * grid.spacing()
        })
        .collect();
    Ok(LatticeField::new(out))
}

/// Same as [`periodic_convolution`] through a length-`M` DFT.
pub fn periodic_convolution_fft(w: &LatticeField, rho: &LatticeField, grid: &Grid) -> Result<LatticeField> {
    grid.check(w)?;
    grid.check(rho)?;
    let m = grid.sites();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut a = w.values().to_vec();
    let mut b = rho.values().to_vec();
    fwd.process(&mut a);
    fwd.process(&mut b);
    let mut c: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    inv.process(&mut c);
    let s = grid.spacing() / m as f64;
    c.iter_mut().for_each(|z| *z *= s);
    Ok(LatticeField::new(c))
}

/// Real, even pair potentials sampled at minimal-image distance from the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum InteractionSpec {
    Constant { c: f64 },
    Gaussian { lambda: f64, sigma: f64 },
    /// `lambda / sqrt(d^2 + eps^2)`.
    SoftCoulomb { lambda: f64, eps: f64 },
    /// `lambda / d^2`, with `w(0) = lambda / dx^2`.
    InverseSquare { lambda: f64 },
    /// Uniform values in `[-amplitude, amplitude]`, symmetrized.
    Random { seed: u64, amplitude: f64 },
}

impl InteractionSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                config(format!("interaction parameter {what} must be finite"))
            }
        };
        match *self {
            Self::Constant { c } => finite(c, "c"),
            Self::Gaussian { lambda, sigma } => {
                finite(lambda, "lambda")?;
                if !(sigma > 0.0) {
                    return config(format!("gaussian interaction needs sigma > 0, got {sigma}"));
                }
                finite(sigma, "sigma")
            }
            Self::SoftCoulomb { lambda, eps } => {
                finite(lambda, "lambda")?;
                if !(eps > 0.0) {
                    return config(format!("soft-coulomb interaction needs eps > 0, got {eps}"));
                }
                finite(eps, "eps")
            }
            Self::InverseSquare { lambda } => finite(lambda, "lambda"),
            Self::Random { amplitude, .. } => finite(amplitude, "amplitude"),
        }
    }

    /// Whether `sup |w|` stays bounded as the lattice is refined.
    pub fn is_bounded(&self) -> bool {
        !matches!(self, Self::InverseSquare { .. })
    }

    /// How the value at the origin is fixed on the lattice.
    pub fn origin_rule(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "w(0)=c",
            Self::Gaussian { .. } => "w(0)=lambda",
            Self::SoftCoulomb { .. } => "w(0)=lambda/eps",
            Self::InverseSquare { .. } => "w(0)=lambda/dx^2",
            Self::Random { .. } => "w(0)=random sample",
        }
    }
}

impl fmt::Display for InteractionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { c } => write!(f, "constant:{c}"),
            Self::Gaussian { lambda, sigma } => write!(f, "gaussian:{lambda},{sigma}"),
            Self::SoftCoulomb { lambda, eps } => write!(f, "softcoulomb:{lambda},{eps}"),
            Self::InverseSquare { lambda } => write!(f, "invsquare:{lambda}"),
            Self::Random { seed, amplitude } => write!(f, "random:{seed},{amplitude}"),
        }
    }
}

pub(crate) fn parse_params(spec: &str, s: &str, want: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = if s.is_empty() { Vec::new() } else { s.split(',').collect() };
    if parts.len() != want {
        return config(format!("`{spec}` expects {want} comma-separated parameters"));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse `{p}` as a number in `{spec}`")))
        })
        .collect()
}

impl FromStr for InteractionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let spec = match kind.trim() {
            "none" => Self::Constant { c: 0.0 },
            "constant" => {
                let p = parse_params(s, rest, 1)?;
                Self::Constant { c: p[0] }
            }
            "gaussian" => {
                let p = parse_params(s, rest, 2)?;
                Self::Gaussian { lambda: p[0], sigma: p[1] }
            }
            "softcoulomb" | "soft-coulomb" => {
                let p = parse_params(s, rest, 2)?;
                Self::SoftCoulomb { lambda: p[0], eps: p[1] }
            }
            "invsquare" => {
                let p = parse_params(s, rest, 1)?;
                Self::InverseSquare { lambda: p[0] }
            }
            "random" => {
                let (seed, amp) = rest.split_once(',').unwrap_or((rest, "1"));
                let seed = seed
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("bad seed in `{s}`")))?;
                let amplitude = parse_params(s, amp, 1)?[0];
                Self::Random { seed, amplitude }
            }
            other => return config(format!("unknown interaction kind `{other}`")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Samples `w(x_j)` for `j = 0..M`; the result is real and satisfies `w(x_j) = w(x_{M-j})`.
pub fn sample_interaction(kind: &InteractionSpec, grid: &Grid) -> Result<LatticeField> {
    kind.validate()?;
    let m = grid.sites();
    let values: Vec<f64> = match *kind {
        InteractionSpec::Constant { c } => vec![c; m],
        InteractionSpec::Gaussian { lambda, sigma } => (0..m)
            .map(|j| {
                let d = grid.site_distance(j, 0);
                lambda * (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect(),
        InteractionSpec::SoftCoulomb { lambda, eps } => (0..m)
            .map(|j| {
                let d = grid.site_distance(j, 0);
                lambda / (d * d + eps * eps).sqrt()
            })
            .collect(),
        InteractionSpec::InverseSquare { lambda } => (0..m)
            .map(|j| {
                let d = grid.site_distance(j, 0).max(grid.spacing());
                lambda / (d * d)
            })
            .collect(),
        InteractionSpec::Random { seed, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..m).map(|_| amplitude * rng.random_range(-1.0..=1.0)).collect();
            // even part: w_j and w_{M-j} share one sample
            (0..m).map(|j| raw[j.min((m - j) % m)]).collect()
        }
    };
    Ok(LatticeField::from_real(&values))
}

/// Planned forward/inverse DFT pair reused across many transforms of one length.
#[derive(Clone)]
pub(crate) struct FftPair {
    pub fwd: Arc<dyn rustfft::Fft<f64>>,
    pub inv: Arc<dyn rustfft::Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { fwd: planner.plan_fft_forward(len), inv: planner.plan_fft_inverse(len) }
    }
}
