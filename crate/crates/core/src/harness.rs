//! End-to-end runs: co-evolution of `Psi` and `phi`, N-sweeps with rate fits, the
//! `eta(p)` curve, and the invariant check suites.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{
    beta_bound_theorem41, beta_prefactor, conjugate_q, default_cutoffs, eta_of, factorized_energy_gap, fitted_k,
    gronwall_alpha_bound, p0_of, BoundRecord, BoundReport, parse_rational, phi_theorem31_series, phi_tilde_series, to_f64, wnorm_upper_bound,
    Rational,
};
use crate::condensate::{alpha_of, beta_of, occupation_weights, MAX_PARTICLES};
use crate::error::{config, numerical, Error, Result};
use crate::fock::{basis_dimension, build_hn, enumerate_basis, product_state, ManyBodyOperator, OccupationBasis, DEFAULT_BASIS_CAP};
use crate::lattice::{sample_interaction, Grid, InteractionSpec};
use crate::linalg::norm;
use crate::onebody::{build_h_at, evolve_hartree, gaussian_orbital, InitialSpec, Orbital, PotentialSpec};
use crate::oracle::compare_with_oracle;
use crate::propagate::{expectation, krylov_step, Method, Propagator};
use crate::reduce::{e_k, gamma1, gamma2, partial_trace_2to1, r_k, random, seiringer_check};

pub const CSV_HEADER: &str = "t,N,M,alpha,beta,E1,E2,R1,R2,EPsi,Ephi,phi_t,alpha_bound,beta_bound,slack_alpha";

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sites: usize,
    pub particles: Vec<usize>,
    pub dx: f64,
    pub tfinal: f64,
    pub dt: f64,
    pub stride: usize,
    pub potential: PotentialSpec,
    pub interaction: InteractionSpec,
    /// `None` means a Gaussian of width 1 centred in the box.
    pub initial: Option<InitialSpec>,
    pub p1: f64,
    pub p2: f64,
    pub p: Rational,
    pub dim: i64,
    pub k: f64,
    pub method: Method,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub p_grid: Option<Vec<String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sites: 8,
            particles: vec![4],
            dx: 1.0,
            tfinal: 1.0,
            dt: 1e-3,
            stride: 10,
            potential: PotentialSpec::None,
            interaction: InteractionSpec::Gaussian { lambda: 1.0, sigma: 1.0 },
            initial: None,
            p1: f64::INFINITY,
            p2: f64::INFINITY,
            p: Rational::new(3, 2),
            dim: 3,
            k: 1.0,
            method: Method::default(),
            out: None,
            seed: 0,
            p_grid: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|v| parse(key, v)).collect()
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() { if x > 0.0 { "inf".into() } else { "-inf".into() } } else { x.to_string() }
}

impl RunConfig {
    pub const KEYS: [&'static str; 19] = [
        "sites", "particles", "particles-list", "dx", "tfinal", "dt", "stride", "potential", "interaction", "initial",
        "p1", "p2", "p", "dim", "K", "method", "out", "seed", "p-grid",
    ];

    /// Sets one `key = value` pair; the keys are the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "sites" => self.sites = parse(key, v)?,
            "particles" | "particles-list" => self.particles = parse_list(key, v)?,
            "dx" => self.dx = parse(key, v)?,
            "tfinal" => self.tfinal = parse(key, v)?,
            "dt" => self.dt = parse(key, v)?,
            "stride" => self.stride = parse(key, v)?,
            "potential" => self.potential = v.parse()?,
            "interaction" => self.interaction = v.parse()?,
            "initial" => self.initial = Some(v.parse()?),
            "p1" => self.p1 = parse(key, v)?,
            "p2" => self.p2 = parse(key, v)?,
            "p" => self.p = parse_rational(v)?,
            "dim" => self.dim = parse(key, v)?,
            "K" | "k" => self.k = parse(key, v)?,
            "method" => self.method = v.parse()?,
            "out" => self.out = Some(PathBuf::from(v)),
            "seed" => self.seed = parse(key, v)?,
            "p-grid" => self.p_grid = Some(v.split(',').map(|s| s.trim().to_string()).collect()),
            other => return config(format!("unknown configuration key `{other}`")),
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are ignored.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1)))?;
            self.set(key, value).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_str(&text)
    }

    /// The configuration as a `key = value` file that [`RunConfig::apply_str`] reads back.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let list: Vec<String> = self.particles.iter().map(|n| n.to_string()).collect();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        line("sites", self.sites.to_string());
        line("particles", list.join(","));
        line("dx", fmt_f64(self.dx));
        line("tfinal", fmt_f64(self.tfinal));
        line("dt", fmt_f64(self.dt));
        line("stride", self.stride.to_string());
        line("potential", self.potential.to_string());
        line("interaction", self.interaction.to_string());
        if let Some(init) = &self.initial {
            line("initial", init.to_string());
        }
        line("p1", fmt_f64(self.p1));
        line("p2", fmt_f64(self.p2));
        line("p", self.p.to_string());
        line("dim", self.dim.to_string());
        line("K", fmt_f64(self.k));
        line("method", self.method.to_string());
        if let Some(out) = &self.out {
            line("out", out.display().to_string());
        }
        line("seed", self.seed.to_string());
        if let Some(grid) = &self.p_grid {
            line("p-grid", grid.join(","));
        }
        s
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.sites, self.dx)
    }

    /// Number of time steps; `tfinal` must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return config(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.tfinal > 0.0 && self.tfinal.is_finite()) {
            return config(format!("tfinal must be positive, got {}", self.tfinal));
        }
        let steps = (self.tfinal / self.dt).round();
        if (steps * self.dt - self.tfinal).abs() > 1e-9 * self.tfinal || steps < 1.0 {
            return config(format!("tfinal = {} is not a multiple of dt = {}", self.tfinal, self.dt));
        }
        Ok(steps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.steps()?;
        if self.stride == 0 {
            return config("stride must be at least 1");
        }
        if self.particles.is_empty() {
            return config("no particle numbers given");
        }
        if self.particles.windows(2).any(|w| w[0] >= w[1]) {
            return config("particle list must be strictly increasing");
        }
        for &n in &self.particles {
            if !(2..=MAX_PARTICLES).contains(&n) {
                return config(format!("particle number {n} outside 2..={MAX_PARTICLES}"));
            }
            match basis_dimension(self.sites, n) {
                Some(d) if d <= DEFAULT_BASIS_CAP => {}
                _ => return config(format!("Fock space for M={}, N={n} exceeds {DEFAULT_BASIS_CAP} states", self.sites)),
            }
        }
        self.interaction.validate()?;
        self.potential.sample(&grid, 0.0)?;
        if !(2.0 <= self.p1 && self.p1 <= self.p2) {
            return config(format!("need 2 <= p1 <= p2, got p1={} p2={}", self.p1, self.p2));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return config(format!("K must be positive, got {}", self.k));
        }
        eta_of(self.p, self.dim)?;
        if self.potential.is_time_dependent() && self.method == Method::Dense {
            return config("dense propagation needs a time-independent potential");
        }
        Ok(())
    }

    fn initial_orbital(&self, grid: &Grid) -> Result<Orbital> {
        match &self.initial {
            Some(spec) => spec.build(grid, &build_h_at(grid, &self.potential, 0.0)?),
            None => gaussian_orbital(grid, grid.length() / 2.0, 1.0),
        }
    }
}

/// One output row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRecord {
    pub t: f64,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub e1: f64,
    pub e2: f64,
    pub r1: f64,
    pub r2: f64,
    pub e_psi: f64,
    pub e_phi: f64,
    pub phi_t: f64,
    pub alpha_bound: f64,
    pub beta_bound: f64,
    pub slack_alpha: f64,
}

impl TimeRecord {
    pub fn csv_row(&self) -> String {
        let f = [
            self.alpha, self.beta, self.e1, self.e2, self.r1, self.r2, self.e_psi, self.e_phi, self.phi_t,
            self.alpha_bound, self.beta_bound, self.slack_alpha,
        ];
        let rest: Vec<String> = f.iter().map(|&x| fmt_f64(x)).collect();
        format!("{},{},{},{}", fmt_f64(self.t), self.n, self.m, rest.join(","))
    }
}

pub fn write_csv<W: Write>(records: &[TimeRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Run-level quantities that are not per-row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunDiagnostics {
    pub psi_norm_drift: f64,
    pub phi_mass_drift: f64,
    /// Relative drift of `E^Psi` over the output times.
    pub e_psi_drift: f64,
    pub e_phi_drift: f64,
    pub alpha_e1_residual: f64,
    /// `E^Psi(0) - E^phi(0)`.
    pub gap: f64,
    /// The same gap predicted for factorized data.
    pub factorized_gap: f64,
    pub w_norm: f64,
    pub eta: f64,
    pub fitted_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub particles: usize,
    pub records: Vec<TimeRecord>,
    pub diagnostics: RunDiagnostics,
    pub bounds: BoundReport,
}

/// Many-body generator; rebuilt at the midpoint of every step when the trap moves.
enum Dynamics {
    Fixed { h: ManyBodyOperator, prop: Propagator },
    Driven { kinetic: ManyBodyOperator, max_dim: usize, tol: f64 },
}

fn trap_diagonal(v: &[f64], basis: &OccupationBasis) -> Vec<f64> {
    basis.iter().map(|occ| occ.iter().zip(v).map(|(&n, &vx)| n as f64 * vx).sum()).collect()
}

/// Co-evolves `Psi_N` from `phi_0^{(x)N}` and the Hartree orbital from `phi_0`.
pub fn run_single(cfg: &RunConfig, particles: usize) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let steps = cfg.steps()?;
    let w = sample_interaction(&cfg.interaction, &grid)?;
    let phi0 = cfg.initial_orbital(&grid)?;
    let traj = evolve_hartree(&grid, &cfg.potential, &w, &phi0, cfg.dt, steps)?;

    let basis = Arc::new(enumerate_basis(grid.sites(), particles)?);
    let psi0 = product_state(&phi0, &basis)?;
    let h_at = |t: f64| build_h_at(&grid, &cfg.potential, t);
    let mut dynamics = if cfg.potential.is_time_dependent() {
        let Method::Krylov { max_dim, tol } = cfg.method else {
            return config("dense propagation needs a time-independent potential");
        };
        Dynamics::Driven { kinetic: build_hn(&h_at(0.0)?, &w, &basis, &grid)?, max_dim, tol }
    } else {
        let h = build_hn(&h_at(0.0)?, &w, &basis, &grid)?;
        let prop = Propagator::new(&h, cfg.method)?;
        Dynamics::Fixed { h, prop }
    };
    // with a driven trap the stored operator is H_N(0); shift by sum_x (v(t) - v(0)) n_x
    let hn_at = |dyn_: &Dynamics, t: f64| -> Result<ManyBodyOperator> {
        match dyn_ {
            Dynamics::Fixed { h, .. } => Ok(h.clone()),
            Dynamics::Driven { kinetic, .. } => {
                let v0 = cfg.potential.sample(&grid, 0.0)?;
                let vt = cfg.potential.sample(&grid, t)?;
                let dv: Vec<f64> = vt.iter().zip(&v0).map(|(a, b)| a - b).collect();
                kinetic.add_diagonal(&trap_diagonal(&dv, &basis))
            }
        }
    };

    let w_norm = wnorm_upper_bound(&w, cfg.p1, cfg.p2, &default_cutoffs(&w), &grid)?;
    let phis = phi_theorem31_series(&traj, w_norm, conjugate_q(cfg.p1)?, conjugate_q(cfg.p2)?)?;
    let phi_tildes = phi_tilde_series(&traj, &cfg.potential)?;
    let eta = to_f64(eta_of(cfg.p, cfg.dim)?);

    let mut records = Vec::new();
    let mut alpha0 = 0.0;
    let mut beta0 = 0.0;
    let mut gap = 0.0;
    let mut psi = psi0.clone();
    let mut norm_drift: f64 = 0.0;
    let mut alpha_e1: f64 = 0.0;
    let mut e_psi0 = 0.0;
    let mut e_psi_drift: f64 = 0.0;

    for n in 0..=steps {
        if n > 0 {
            let amps = match &mut dynamics {
                Dynamics::Fixed { prop, .. } => prop.step(psi.amplitudes(), cfg.dt)?,
                d @ Dynamics::Driven { .. } => {
                    let h = hn_at(d, (n as f64 - 0.5) * cfg.dt)?;
                    let Dynamics::Driven { max_dim, tol, .. } = d else { unreachable!() };
                    krylov_step(&h, psi.amplitudes(), cfg.dt, *max_dim, *tol)?
                }
            };
            let drift = (norm(&amps) - 1.0).abs();
            norm_drift = norm_drift.max(drift);
            if drift > 1e-8 {
                return numerical(format!("N={particles}: norm drift {drift:e} at step {n}"));
            }
            psi = psi.with_amplitudes(amps);
        }
        if n % cfg.stride != 0 && n != steps {
            continue;
        }
        let t = traj.times()[n];
        let phi = traj.orbital(n);
        let g1 = gamma1(&psi)?;
        let g2 = gamma2(&psi)?;
        let wd = occupation_weights(&psi, phi)?;
        let (alpha, beta) = (alpha_of(&wd), beta_of(&wd));
        let e1 = e_k(&g1, phi)?;
        alpha_e1 = alpha_e1.max((alpha - e1).abs());
        let e_psi = expectation(&psi, &hn_at(&dynamics, t)?)?.re / particles as f64;
        let e_phi = traj.energies()[n];
        if n == 0 {
            alpha0 = alpha;
            beta0 = beta;
            gap = e_psi - e_phi;
            e_psi0 = e_psi;
        }
        e_psi_drift = e_psi_drift.max((e_psi - e_psi0).abs() / e_psi0.abs().max(1.0));
        let alpha_bound = gronwall_alpha_bound(alpha0, particles, phis[n]);
        records.push(TimeRecord {
            t,
            n: particles,
            m: grid.sites(),
            alpha,
            beta,
            e1,
            e2: e_k(&g2, phi)?,
            r1: r_k(&g1, phi)?,
            r2: r_k(&g2, phi)?,
            e_psi,
            e_phi,
            phi_t: phis[n],
            alpha_bound,
            beta_bound: beta_bound_theorem41(beta0, gap, particles, eta, cfg.k, phi_tildes[n])?,
            slack_alpha: alpha_bound - alpha,
        });
    }

    let betas: Vec<f64> = records.iter().map(|r| r.beta).collect();
    let sampled_tildes: Vec<f64> = records.iter().map(|r| phi_tildes[(r.t / cfg.dt).round() as usize]).collect();
    let diagnostics = RunDiagnostics {
        psi_norm_drift: norm_drift,
        phi_mass_drift: traj.max_mass_drift(),
        e_psi_drift,
        e_phi_drift: traj.max_energy_drift(),
        alpha_e1_residual: alpha_e1,
        gap,
        factorized_gap: factorized_energy_gap(&phi0, &w, particles),
        w_norm,
        eta,
        fitted_k: fitted_k(&betas, &sampled_tildes, beta_prefactor(beta0, gap, particles, eta)),
    };
    let bounds = BoundReport::new(
        records
            .iter()
            .map(|r| BoundRecord {
                t: r.t,
                alpha: r.alpha,
                beta: r.beta,
                alpha_bound: r.alpha_bound,
                beta_bound: r.beta_bound,
                slack: r.slack_alpha,
            })
            .collect(),
    );
    Ok(RunOutput { particles, records, diagnostics, bounds })
}

fn sort_records(records: &mut [TimeRecord]) {
    records.sort_by(|a, b| a.n.cmp(&b.n).then(a.t.total_cmp(&b.t)));
}

/// Runs every configured particle number, concurrently.
pub fn run_simulation(cfg: &RunConfig) -> Result<Vec<TimeRecord>> {
    let mut records: Vec<TimeRecord> = run_all(cfg)?.into_iter().flat_map(|o| o.records).collect();
    sort_records(&mut records);
    Ok(records)
}

pub fn run_all(cfg: &RunConfig) -> Result<Vec<RunOutput>> {
    cfg.validate()?;
    let mut outputs = cfg.particles.par_iter().map(|&n| run_single(cfg, n)).collect::<Result<Vec<_>>>()?;
    outputs.sort_by_key(|o| o.particles);
    Ok(outputs)
}

/// Least-squares fit of `log y` against `log N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFit {
    Slope { slope: f64, intercept: f64 },
    /// Every value is below `1e-12`, so the logarithm carries no information.
    Degenerate,
}

impl RateFit {
    pub const FLOOR: f64 = 1e-12;

    pub fn fit(ns: &[usize], ys: &[f64]) -> Self {
        if ys.iter().all(|&y| y < Self::FLOOR) || ys.iter().any(|&y| !(y > 0.0)) {
            return RateFit::Degenerate;
        }
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let k = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / k, ls.iter().sum::<f64>() / k);
        let sxy: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        RateFit::Slope { slope, intercept: my - slope * mx }
    }

    pub fn slope(&self) -> Option<f64> {
        match self {
            RateFit::Slope { slope, .. } => Some(*slope),
            RateFit::Degenerate => None,
        }
    }
}

impl fmt::Display for RateFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateFit::Slope { slope, intercept } => write!(f, "slope={slope} intercept={intercept}"),
            RateFit::Degenerate => write!(f, "degenerate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub outputs: Vec<RunOutput>,
    pub records: Vec<TimeRecord>,
    pub e1_fit: RateFit,
    pub r1_fit: RateFit,
}

impl SweepResult {
    /// `(N, record at the final time)` for every swept `N`.
    pub fn finals(&self) -> Vec<(usize, TimeRecord)> {
        self.outputs.iter().map(|o| (o.particles, *o.records.last().expect("nonempty run"))).collect()
    }
}

pub fn sweep_n(cfg: &RunConfig) -> Result<SweepResult> {
    if cfg.particles.len() < 3 {
        return config("a sweep needs at least three particle numbers");
    }
    let outputs = run_all(cfg)?;
    let mut records: Vec<TimeRecord> = outputs.iter().flat_map(|o| o.records.iter().copied()).collect();
    sort_records(&mut records);
    let ns: Vec<usize> = outputs.iter().map(|o| o.particles).collect();
    let last = |f: fn(&TimeRecord) -> f64| -> Vec<f64> { outputs.iter().map(|o| f(o.records.last().unwrap())).collect() };
    let e1_fit = RateFit::fit(&ns, &last(|r| r.e1));
    let r1_fit = RateFit::fit(&ns, &last(|r| r.r1));
    Ok(SweepResult { outputs, records, e1_fit, r1_fit })
}

/// Summary lines written next to a CSV file as `<out>.meta.txt`.
pub fn meta_text(cfg: &RunConfig, outputs: &[RunOutput], fits: Option<(&RateFit, &RateFit)>) -> String {
    let mut s = cfg.to_file_string();
    for o in outputs {
        let d = &o.diagnostics;
        s.push_str(&format!(
            "# N={} psi_norm_drift={} phi_mass_drift={} EPsi_drift={} Ephi_drift={} alpha_E1_residual={} gap={} w_norm={} eta={} fitted_K={}\n",
            o.particles, d.psi_norm_drift, d.phi_mass_drift, d.e_psi_drift, d.e_phi_drift, d.alpha_e1_residual, d.gap,
            d.w_norm, d.eta, fmt_f64(d.fitted_k),
        ));
    }
    if let Some((e, r)) = fits {
        s.push_str(&format!("# E1 fit: {e}\n# R1 fit: {r}\n"));
    }
    s
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.txt");
    PathBuf::from(name)
}

/// Writes the CSV and its sidecar.
pub fn write_outputs(path: &Path, records: &[TimeRecord], meta: &str) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    fs::write(path, buf)?;
    fs::write(meta_path(path), meta)?;
    Ok(())
}

/// Decimal expansion of `r` rounded half away from zero to `digits` places.
pub fn rational_decimal(r: Rational, digits: u32) -> String {
    let scale = 10i128.pow(digits);
    let (num, den) = (*r.numer() as i128, *r.denom() as i128);
    let neg = (num < 0) != (den < 0);
    let (num, den) = (num.abs(), den.abs());
    let scaled = (2 * num * scale + den) / (2 * den);
    let (int, frac) = (scaled / scale, scaled % scale);
    let sign = if neg && scaled != 0 { "-" } else { "" };
    format!("{sign}{int}.{frac:0width$}", width = digits as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaCurve {
    pub d: i64,
    pub points: Vec<(Rational, Rational)>,
    /// Inputs outside `(p0, 2]`, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl EtaCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,eta\n");
        for (p, e) in &self.points {
            s.push_str(&format!("{},{}\n", rational_decimal(*p, 12), rational_decimal(*e, 12)));
        }
        s
    }
}

/// `steps` equally spaced points of `(p0, 2]`.
pub fn default_p_grid(d: i64, steps: i64) -> Result<Vec<Rational>> {
    let p0 = p0_of(d)?;
    let two = Rational::from_integer(2);
    Ok((1..=steps).map(|i| p0 + (two - p0) * Rational::new(i, steps)).collect())
}

pub fn eta_curve(d: i64, p_grid: &[String]) -> Result<EtaCurve> {
    p0_of(d)?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for raw in p_grid {
        let p = parse_rational(raw)?;
        match eta_of(p, d) {
            Ok(e) => points.push((p, e)),
            Err(e) => skipped.push((raw.clone(), e.to_string())),
        }
    }
    Ok(EtaCurve { d, points, skipped })
}

pub fn eta_curve_exact(d: i64, p_grid: &[Rational]) -> Result<EtaCurve> {
    let grid: Vec<String> = p_grid.iter().map(|p| p.to_string()).collect();
    eta_curve(d, &grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Indicators,
    FockOracle,
    Conservation,
    Bounds,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "indicators" => Suite::Indicators,
            "fock-oracle" => Suite::FockOracle,
            "conservation" => Suite::Conservation,
            "bounds" => Suite::Bounds,
            "all" => Suite::All,
            _ => return config(format!("unknown suite `{s}`")),
        })
    }
}

/// One invariant with its measured residual.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub invariant: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    /// Passes when `measured <= tolerance`.
    fn at_most(suite: &'static str, invariant: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { suite, invariant: invariant.into(), measured, tolerance, passed: measured <= tolerance }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} suite={} invariant={} measured={:e} tol={:e}", self.suite, self.invariant, self.measured, self.tolerance)
    }
}

fn excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).max(0.0)
}

/// Random density matrices on `M = 6`: `E <= R <= sqrt(8E)`, `E2 <= 2 E1`, and `tr|p - g| = 2 ||p - g||`.
pub fn check_indicators(seed: u64, cases: usize) -> Result<Vec<CheckResult>> {
    const S: &str = "indicators";
    let m = 6;
    let grid = Grid::new(m, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut e_r, mut r_e, mut e2_e1, mut seir) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..cases {
        let phi = Orbital::from_modes(&random::unit_vector(&mut rng, m), grid)?;
        let u = phi.modes();
        let closeness = [None, Some(0.5), Some(0.1), Some(1e-3)][i % 4];
        let near = closeness.map(|eps| (u.as_slice(), eps));
        let rank = 1 + i % m;
        let g1 = random::gamma1(&mut rng, m, rank, near);
        let g2 = random::gamma2(&mut rng, m, rank, near);
        let g21 = partial_trace_2to1(&g2)?;
        for g in [&g1, &g2, &g21] {
            let (e, r) = (e_k(g, &phi)?, r_k(g, &phi)?);
            e_r = e_r.max(excess(e, r));
            r_e = r_e.max(excess(r, (8.0 * e).sqrt()));
            let (tn, on) = seiringer_check(g, &phi)?;
            seir = seir.max((tn - on).abs());
        }
        e2_e1 = e2_e1.max(excess(e_k(&g2, &phi)?, 2.0 * e_k(&g21, &phi)?));
    }
    let tol = 1e-10;
    Ok(vec![
        CheckResult::at_most(S, "E_le_R", e_r, tol),
        CheckResult::at_most(S, "R_le_sqrt8E", r_e, tol),
        CheckResult::at_most(S, "E2_le_2E1", e2_e1, tol),
        CheckResult::at_most(S, "trace_norm_eq_2op_norm", seir, tol),
    ])
}

/// Occupation-basis pipeline against the tensor-space oracle on `(2,2)`, `(3,2)`, `(2,3)`.
pub fn check_fock_oracle() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (m, n) in [(2, 2), (3, 2), (2, 3)] {
        let grid = Grid::new(m, 1.0)?;
        let h = build_h_at(&grid, &PotentialSpec::Harmonic { omega: 1.0 }, 0.0)?;
        let w = sample_interaction(&InteractionSpec::Gaussian { lambda: 1.0, sigma: 1.0 }, &grid)?;
        let phi = gaussian_orbital(&grid, 0.3, 0.8)?;
        let res = compare_with_oracle(&h, &w, &phi, n, 0.01, 100, Method::default())?;
        out.push(CheckResult::at_most("fock-oracle", format!("M{m}_N{n}_max_residual"), res.max(), 1e-10));
    }
    Ok(out)
}

/// Norms and energies over `10^3` steps, plus the factorized energy gap.
pub fn check_conservation(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    const S: &str = "conservation";
    let mut run = cfg.clone();
    run.tfinal = 1000.0 * cfg.dt;
    run.stride = 100;
    let n = cfg.particles[0];
    let d = run_single(&run, n)?.diagnostics;
    let mut out = vec![
        CheckResult::at_most(S, "psi_norm_drift", d.psi_norm_drift, 1e-8),
        CheckResult::at_most(S, "phi_norm_drift", d.phi_mass_drift, 1e-8),
    ];
    if !cfg.potential.is_time_dependent() {
        out.push(CheckResult::at_most(S, "EPsi_relative_drift", d.e_psi_drift, 1e-8));
        out.push(CheckResult::at_most(S, "Ephi_relative_drift", d.e_phi_drift, 1e-6));
    }
    out.push(CheckResult::at_most(S, "factorized_gap", (d.gap - d.factorized_gap).abs(), 1e-10));
    Ok(out)
}

/// Envelope and consistency invariants on every record of the configured runs.
pub fn check_bounds(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    const S: &str = "bounds";
    let outputs = run_all(cfg)?;
    let records: Vec<&TimeRecord> = outputs.iter().flat_map(|o| &o.records).collect();
    let worst = |f: &dyn Fn(&TimeRecord) -> f64| records.iter().fold(0.0f64, |m, r| m.max(f(r)));
    let mut out = Vec::new();
    if cfg.interaction.is_bounded() {
        let slack = outputs.iter().map(|o| o.bounds.min_slack()).fold(f64::INFINITY, f64::min);
        out.push(CheckResult::at_most(S, "alpha_envelope_violation", (-slack).max(0.0), BoundReport::SLACK_TOL));
    }
    out.push(CheckResult::at_most(S, "alpha_le_beta", worst(&|r| excess(r.alpha, r.beta)), 1e-9));
    out.push(CheckResult::at_most(S, "beta_le_sqrt_alpha", worst(&|r| excess(r.beta, r.alpha.sqrt())), 1e-9));
    out.push(CheckResult::at_most(S, "alpha_eq_E1", worst(&|r| (r.alpha - r.e1).abs()), 1e-7));
    out.push(CheckResult::at_most(S, "E2_le_2E1", worst(&|r| excess(r.e2, 2.0 * r.e1)), 1e-10));
    out.push(CheckResult::at_most(S, "R1_le_sqrt8E1", worst(&|r| excess(r.r1, (8.0 * r.e1).sqrt())), 1e-10));
    let ranges = worst(&|r| {
        [excess(-r.e1, 0.0), excess(r.e1, 1.0), excess(-r.e2, 0.0), excess(r.e2, 1.0), excess(-r.r1, 0.0), excess(r.r1, 2.0), excess(-r.r2, 0.0), excess(r.r2, 2.0)]
            .into_iter()
            .fold(0.0, f64::max)
    });
    out.push(CheckResult::at_most(S, "indicator_ranges", ranges, 1e-10));
    let exact = |ok: bool| if ok { 0.0 } else { 1.0 };
    out.push(CheckResult::at_most(S, "p0_d3_is_6/5", exact(p0_of(3)? == Rational::new(6, 5)), 0.0));
    out.push(CheckResult::at_most(S, "eta_3/2_d3_is_1/3", exact(eta_of(Rational::new(3, 2), 3)? == Rational::new(1, 3)), 0.0));
    out.push(CheckResult::at_most(S, "eta_2_d3_is_1/2", exact(eta_of(Rational::from_integer(2), 3)? == Rational::new(1, 2)), 0.0));
    let curve = eta_curve_exact(3, &default_p_grid(3, 200)?)?;
    let drops = curve.points.windows(2).filter(|w| w[1].1 < w[0].1).count();
    out.push(CheckResult::at_most(S, "eta_nondecreasing", drops as f64, 0.0));
    Ok(out)
}

pub fn run_checks(suite: Suite, cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let mut out = Vec::new();
    if matches!(suite, Suite::Indicators | Suite::All) {
        out.extend(check_indicators(cfg.seed, 1000)?);
    }
    if matches!(suite, Suite::FockOracle | Suite::All) {
        out.extend(check_fock_oracle()?);
    }
    if matches!(suite, Suite::Conservation | Suite::All) {
        out.extend(check_conservation(cfg)?);
    }
    if matches!(suite, Suite::Bounds | Suite::All) {
        out.extend(check_bounds(cfg)?);
    }
    Ok(out)
}
