//! One-particle Hamiltonians, condensate projectors and the Hartree propagator.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{config, numerical, Error, Result};
use crate::lattice::{laplacian_eigenvalue, laplacian_matrix, lp_norm, parse_params, FftPair, Grid, LatticeField};
use crate::linalg::{eigh, hermiticity_residual, CMatrix, CVector};

/// Hermitian `M x M` matrix acting on lattice fields (and on mode amplitudes).
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyOperator {
    matrix: CMatrix,
}

impl OneBodyOperator {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return config("one-body operator must be square");
        }
        let r = hermiticity_residual(&matrix);
        if r > 1e-12 {
            return config(format!("one-body operator is not Hermitian (residual {r:e})"));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(m: usize) -> Self {
        Self { matrix: CMatrix::identity(m, m) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = CVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self { matrix: CMatrix::from_diagonal(&d) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, f: &LatticeField) -> LatticeField {
        let v = CVector::from_column_slice(f.values());
        LatticeField::new((&self.matrix * v).iter().copied().collect())
    }

    /// `<f, A f>` in the `dx`-weighted inner product.
    pub fn expectation(&self, f: &LatticeField, grid: &Grid) -> Complex64 {
        f.inner(&self.apply(f), grid)
    }

    pub fn lowest_eigenvalue(&self) -> f64 {
        crate::linalg::eigvalsh(&self.matrix)[0]
    }
}

/// Normalized one-particle wave function, `dx * sum |phi|^2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbital {
    field: LatticeField,
    grid: Grid,
}

impl Orbital {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(field: LatticeField, grid: Grid) -> Result<Self> {
        if field.len() != grid.sites() {
            return config("orbital length does not match the grid");
        }
        if !field.is_finite() {
            return config("orbital has nonfinite amplitudes");
        }
        let mass = field.mass(&grid);
        if (mass - 1.0).abs() > Self::NORM_TOL {
            return config(format!("orbital is not normalized (mass {mass})"));
        }
        Ok(Self { field, grid })
    }

    /// Rescales `field` to unit mass.
    pub fn normalize(mut field: LatticeField, grid: Grid) -> Result<Self> {
        let mass = field.mass(&grid);
        if !(mass > 0.0 && mass.is_finite()) {
            return config("cannot normalize a zero or nonfinite field");
        }
        field.scale(Complex64::new(1.0 / mass.sqrt(), 0.0));
        Self::new(field, grid)
    }

    /// Builds an orbital from a unit vector of mode amplitudes `u = sqrt(dx) phi`.
    pub fn from_modes(modes: &[Complex64], grid: Grid) -> Result<Self> {
        let s = 1.0 / grid.spacing().sqrt();
        Self::new(LatticeField::new(modes.iter().map(|z| z * s).collect()), grid)
    }

    pub fn field(&self) -> &LatticeField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `sqrt(dx) phi(x_j)`, a unit vector in `C^M`.
    pub fn modes(&self) -> Vec<Complex64> {
        let s = self.grid.spacing().sqrt();
        self.field.values().iter().map(|z| z * s).collect()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(&self.field, p, &self.grid)
    }

    pub fn inner(&self, other: &Orbital) -> Complex64 {
        self.field.inner(&other.field, &self.grid)
    }
}

/// External trap `v(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    None,
    /// `v(x) = omega^2 d(x, L/2)^2 / 4`.
    Harmonic { omega: f64 },
    /// Harmonic trap with strength modulated as `1 + amplitude sin(frequency t)`.
    Driven { omega: f64, amplitude: f64, frequency: f64 },
    Sampled(Vec<f64>),
}

impl PotentialSpec {
    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Self::Driven { .. })
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> Result<Vec<f64>> {
        let m = grid.sites();
        let harmonic = |omega: f64| -> Vec<f64> {
            let c = grid.length() / 2.0;
            (0..m)
                .map(|j| {
                    let d = grid.distance(grid.coordinate(j), c);
                    omega * omega * d * d / 4.0
                })
                .collect()
        };
        Ok(match self {
            Self::None => vec![0.0; m],
            Self::Harmonic { omega } => harmonic(*omega),
            Self::Driven { omega, amplitude, frequency } => {
                let s = 1.0 + amplitude * (frequency * t).sin();
                harmonic(*omega).into_iter().map(|v| v * s).collect()
            }
            Self::Sampled(v) => {
                if v.len() != m {
                    return config("sampled potential does not match the grid");
                }
                v.clone()
            }
        })
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => write!(f, "none"),
            Self::Harmonic { omega } => write!(f, "harmonic:{omega}"),
            Self::Driven { omega, amplitude, frequency } => write!(f, "driven:{omega},{amplitude},{frequency}"),
            Self::Sampled(_) => write!(f, "sampled"),
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "none" if rest.is_empty() => Ok(Self::None),
            "harmonic" => Ok(Self::Harmonic { omega: parse_params(s, rest, 1)?[0] }),
            "driven" => {
                let p = parse_params(s, rest, 3)?;
                Ok(Self::Driven { omega: p[0], amplitude: p[1], frequency: p[2] })
            }
            _ => config(format!("unknown potential `{s}`")),
        }
    }
}

/// Initial condensate orbital.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Gaussian { x0: f64, sigma: f64 },
    /// Lowest eigenvector of `h` at `t = 0`.
    GroundState,
}

impl InitialSpec {
    pub fn build(&self, grid: &Grid, h: &OneBodyOperator) -> Result<Orbital> {
        match *self {
            Self::Gaussian { x0, sigma } => gaussian_orbital(grid, x0, sigma),
            Self::GroundState => ground_state(h, grid),
        }
    }
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { x0, sigma } => write!(f, "gaussian:{x0},{sigma}"),
            Self::GroundState => write!(f, "groundstate"),
        }
    }
}

impl FromStr for InitialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "groundstate" if rest.is_empty() => Ok(Self::GroundState),
            "gaussian" => {
                let p = parse_params(s, rest, 2)?;
                if !(p[1] > 0.0) {
                    return config("gaussian initial orbital needs sigma > 0");
                }
                Ok(Self::Gaussian { x0: p[0], sigma: p[1] })
            }
            _ => config(format!("unknown initial orbital `{s}`")),
        }
    }
}

pub fn gaussian_orbital(grid: &Grid, x0: f64, sigma: f64) -> Result<Orbital> {
    if !(sigma > 0.0) {
        return config("gaussian orbital needs sigma > 0");
    }
    let f = LatticeField::from_fn(grid, |j| {
        let d = grid.distance(grid.coordinate(j), x0);
        Complex64::new((-d * d / (2.0 * sigma * sigma)).exp(), 0.0)
    });
    Orbital::normalize(f, *grid)
}

/// Normalized lowest eigenvector of `h`, phase-fixed so its largest entry is real positive.
pub fn ground_state(h: &OneBodyOperator, grid: &Grid) -> Result<Orbital> {
    let (_, vecs) = eigh(h.matrix());
    let col: Vec<Complex64> = vecs.column(0).iter().copied().collect();
    let big = col.iter().copied().fold(Complex64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    let phase = big.conj() / big.norm();
    let modes: Vec<Complex64> = col.iter().map(|z| z * phase).collect();
    let s = 1.0 / grid.spacing().sqrt();
    Orbital::normalize(LatticeField::new(modes.iter().map(|z| z * s).collect()), *grid)
}

/// `h = -Laplacian + diag(v)`.
pub fn build_h(grid: &Grid, v: &LatticeField) -> Result<OneBodyOperator> {
    if v.len() != grid.sites() {
        return config("potential does not match the grid");
    }
    if !v.is_real(0.0) {
        return config("external potential must be real");
    }
    let mut a = laplacian_matrix(grid).matrix;
    for (j, z) in v.values().iter().enumerate() {
        a[(j, j)] += z;
    }
    Ok(OneBodyOperator { matrix: a })
}

pub fn build_h_at(grid: &Grid, potential: &PotentialSpec, t: f64) -> Result<OneBodyOperator> {
    build_h(grid, &LatticeField::from_real(&potential.sample(grid, t)?))
}

/// `p = |phi><phi|` and `q = 1 - p`.
pub fn condensate_projectors(phi: &Orbital) -> Result<(OneBodyOperator, OneBodyOperator)> {
    let mass = phi.field().mass(phi.grid());
    if (mass - 1.0).abs() > Orbital::NORM_TOL {
        return config(format!("projector needs a normalized orbital (mass {mass})"));
    }
    let u = CVector::from_vec(phi.modes());
    let p = &u * u.adjoint();
    let q = CMatrix::identity(u.len(), u.len()) - &p;
    Ok((OneBodyOperator { matrix: p }, OneBodyOperator { matrix: q }))
}

/// `W^phi = w * |phi|^2`.
pub fn mean_field_potential(phi: &Orbital, w: &[f64]) -> Vec<f64> {
    let m = w.len();
    let rho: Vec<f64> = phi.modes().iter().map(|z| z.norm_sqr()).collect();
    (0..m).map(|i| (0..m).map(|j| w[(i + m - j) % m] * rho[j]).sum()).collect()
}

/// `<phi, h phi> + 1/2 dx sum |phi|^2 (w * |phi|^2)`.
pub fn hartree_energy(phi: &Orbital, h: &OneBodyOperator, w: &LatticeField) -> f64 {
    let wr = w.real_parts();
    let kinetic = h.expectation(phi.field(), phi.grid()).re;
    let wphi = mean_field_potential(phi, &wr);
    let pair: f64 = phi.modes().iter().zip(&wphi).map(|(u, v)| u.norm_sqr() * v).sum();
    kinetic + 0.5 * pair
}

/// Hartree orbitals at every step of a fixed-`dt` run.
#[derive(Debug, Clone)]
pub struct HartreeTrajectory {
    grid: Grid,
    dt: f64,
    times: Vec<f64>,
    orbitals: Vec<Orbital>,
    energies: Vec<f64>,
    norm_cache: Vec<(f64, Vec<f64>)>,
}

impl HartreeTrajectory {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn orbitals(&self) -> &[Orbital] {
        &self.orbitals
    }

    pub fn orbital(&self, step: usize) -> &Orbital {
        &self.orbitals[step]
    }

    /// `E^phi` at every stored time.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn cache_norms(&mut self, qs: &[f64]) -> Result<()> {
        for &q in qs {
            if self.norm_cache.iter().any(|(c, _)| *c == q) {
                continue;
            }
            let series = self.orbitals.iter().map(|o| o.lp_norm(q)).collect::<Result<_>>()?;
            self.norm_cache.push((q, series));
        }
        Ok(())
    }

    /// `||phi(t_i)||_q` for every stored time.
    pub fn lp_norms(&self, q: f64) -> Result<Vec<f64>> {
        if let Some((_, s)) = self.norm_cache.iter().find(|(c, _)| *c == q) {
            return Ok(s.clone());
        }
        self.orbitals.iter().map(|o| o.lp_norm(q)).collect()
    }

    /// Largest `|mass - 1|` over the run.
    pub fn max_mass_drift(&self) -> f64 {
        self.orbitals.iter().fold(0.0, |m, o| m.max((o.field().mass(&self.grid) - 1.0).abs()))
    }

    /// Largest `|E(t) - E(0)| / max(1, |E(0)|)` over the run.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().fold(0.0, |m, e| m.max((e - e0).abs() / e0.abs().max(1.0)))
    }
}

/// Strang split-step integration of `i d/dt phi = h(t) phi + (w * |phi|^2) phi`.
///
/// Each step is a kinetic half-step diagonalized by the DFT, an exact local phase
/// `exp(-i dt (v(t + dt/2) + w * |phi|^2))`, and another kinetic half-step.
pub fn evolve_hartree(
    grid: &Grid,
    potential: &PotentialSpec,
    w: &LatticeField,
    phi0: &Orbital,
    dt: f64,
    steps: usize,
) -> Result<HartreeTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return config(format!("time step must be positive, got {dt}"));
    }
    if phi0.grid() != grid {
        return config("initial orbital lives on a different grid");
    }
    if w.len() != grid.sites() || !w.is_real(0.0) {
        return config("interaction must be a real field on the grid");
    }
    let m = grid.sites();
    let wr = w.real_parts();
    let fft = FftPair::new(m);
    let half_kick: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0 / m as f64, -0.5 * dt * laplacian_eigenvalue(grid, k)))
        .collect();

    let energy_at = |phi: &Orbital, t: f64| -> Result<f64> {
        Ok(hartree_energy(phi, &build_h_at(grid, potential, t)?, w))
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut orbitals = Vec::with_capacity(steps + 1);
    let mut energies = Vec::with_capacity(steps + 1);
    times.push(0.0);
    energies.push(energy_at(phi0, 0.0)?);
    orbitals.push(phi0.clone());

    let mut psi = phi0.modes();
    let static_v = (!potential.is_time_dependent()).then(|| potential.sample(grid, 0.0)).transpose()?;
    let kinetic = |psi: &mut Vec<Complex64>| {
        fft.fwd.process(psi);
        psi.iter_mut().zip(&half_kick).for_each(|(z, k)| *z *= k);
        fft.inv.process(psi);
    };

    for n in 0..steps {
        let t_mid = (n as f64 + 0.5) * dt;
        kinetic(&mut psi);
        let v = match &static_v {
            Some(v) => v.clone(),
            None => potential.sample(grid, t_mid)?,
        };
        // |psi|^2 is unchanged by the phase, so this step is exact
        let rho: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        for i in 0..m {
            let wphi: f64 = (0..m).map(|j| wr[(i + m - j) % m] * rho[j]).sum();
            psi[i] *= Complex64::from_polar(1.0, -dt * (v[i] + wphi));
        }
        kinetic(&mut psi);
        if psi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return numerical(format!("Hartree amplitudes became nonfinite at step {}", n + 1));
        }
        let t = (n + 1) as f64 * dt;
        let orb = Orbital::from_modes(&psi, *grid).map_err(|e| Error::Numerical(format!("Hartree step {}: {e}", n + 1)))?;
        energies.push(energy_at(&orb, t)?);
        times.push(t);
        orbitals.push(orb);
    }
    Ok(HartreeTrajectory { grid: *grid, dt, times, orbitals, energies, norm_cache: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_interaction, InteractionSpec};
    use crate::linalg::{eigvalsh, max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane_wave(grid: &Grid, k: usize) -> Orbital {
        let kk = 2.0 * std::f64::consts::PI * k as f64 / grid.length();
        Orbital::normalize(LatticeField::from_fn(grid, |j| Complex64::from_polar(1.0, kk * grid.coordinate(j))), *grid).unwrap()
    }

    #[test]
    fn build_h_examples() {
        let g = Grid::new(6, 0.5).unwrap();
        let h = build_h(&g, &LatticeField::zeros(6)).unwrap();
        assert_eq!(h.matrix(), laplacian_matrix(&g).matrix());

        let complex_v = LatticeField::new(vec![Complex64::new(0.0, 1.0); 6]);
        assert!(build_h(&g, &complex_v).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..3.0)).collect();
        let h = build_h(&g, &LatticeField::from_real(&v)).unwrap();
        assert!(hermiticity_residual(h.matrix()) < 1e-14);
        assert!(h.lowest_eigenvalue() >= -1e-12);
    }

    #[test]
    fn harmonic_ground_energy_positive() {
        let g = Grid::new(16, 0.5).unwrap();
        let h = build_h_at(&g, &PotentialSpec::Harmonic { omega: 2.0 }, 0.0).unwrap();
        let e0 = eigvalsh(h.matrix())[0];
        assert!(e0 > 0.0);
        let gs = ground_state(&h, &g).unwrap();
        let w = LatticeField::zeros(16);
        assert!((hartree_energy(&gs, &h, &w) - e0).abs() < 1e-12);
    }

    #[test]
    fn constant_interaction_energy_shift() {
        let g = Grid::new(8, 0.7).unwrap();
        let h = build_h_at(&g, &PotentialSpec::Harmonic { omega: 1.0 }, 0.0).unwrap();
        let phi = gaussian_orbital(&g, 1.3, 0.6).unwrap();
        let w = sample_interaction(&InteractionSpec::Constant { c: 2.4 }, &g).unwrap();
        let lhs = hartree_energy(&phi, &h, &w);
        let rhs = h.expectation(phi.field(), &g).re + 1.2;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn projectors_algebra() {
        let g = Grid::new(6, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = LatticeField::new((0..6).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect());
        let phi = Orbital::normalize(f, g).unwrap();
        let (p, q) = condensate_projectors(&phi).unwrap();
        let (pm, qm) = (p.matrix(), q.matrix());
        let id = CMatrix::identity(6, 6);
        assert!(max_abs_diff(&(pm * pm), pm) < 1e-12);
        assert!(max_abs_diff(&(qm * qm), qm) < 1e-12);
        assert!((pm * qm).iter().all(|z| z.norm() < 1e-12));
        assert!(max_abs_diff(&(pm + qm), &id) < 1e-12);
        assert!((pm.trace() - 1.0).norm() < 1e-12);

        let pphi = p.apply(phi.field());
        assert!(pphi.values().iter().zip(phi.field().values()).all(|(a, b)| (a - b).norm() < 1e-12));
        assert!(q.apply(phi.field()).values().iter().all(|z| z.norm() < 1e-12));

        // Gram-Schmidt a random psi against phi
        let r = LatticeField::new((0..6).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect());
        let c = phi.field().inner(&r, &g);
        let perp = LatticeField::new(r.values().iter().zip(phi.field().values()).map(|(a, b)| a - c * b).collect());
        assert!(p.apply(&perp).values().iter().all(|z| z.norm() < 1e-12));
        assert!(q.apply(&perp).values().iter().zip(perp.values()).all(|(a, b)| (a - b).norm() < 1e-12));

        let unnorm = LatticeField::from_real(&[1.0; 6]);
        assert!(Orbital::new(unnorm, g).is_err());
    }

    #[test]
    fn free_plane_wave_is_stationary() {
        let g = Grid::new(12, 0.5).unwrap();
        let phi0 = plane_wave(&g, 2);
        let w = LatticeField::zeros(12);
        let traj = evolve_hartree(&g, &PotentialSpec::None, &w, &phi0, 1e-2, 200).unwrap();
        let eps = laplacian_eigenvalue(&g, 2);
        for (t, phi) in traj.times().iter().zip(traj.orbitals()) {
            let ov = phi0.inner(phi);
            assert!((ov.norm() - 1.0).abs() < 1e-10);
            assert!((ov - Complex64::from_polar(1.0, -eps * t)).norm() < 1e-9);
        }
    }

    #[test]
    fn constant_interaction_is_a_global_phase() {
        let g = Grid::new(10, 0.6).unwrap();
        let pot = PotentialSpec::Harmonic { omega: 1.5 };
        let phi0 = gaussian_orbital(&g, 2.0, 0.8).unwrap();
        let c = 1.7;
        let wc = sample_interaction(&InteractionSpec::Constant { c }, &g).unwrap();
        let a = evolve_hartree(&g, &pot, &wc, &phi0, 1e-3, 500).unwrap();
        let b = evolve_hartree(&g, &pot, &LatticeField::zeros(10), &phi0, 1e-3, 500).unwrap();
        for (t, (x, y)) in a.times().iter().zip(a.orbitals().iter().zip(b.orbitals())) {
            let ov = y.inner(x);
            assert!((ov.norm() - 1.0).abs() < 1e-8);
            assert!((ov - Complex64::from_polar(1.0, -c * t)).norm() < 1e-8);
        }
    }

    #[test]
    fn strang_is_second_order() {
        let g = Grid::new(16, 0.5).unwrap();
        let pot = PotentialSpec::Harmonic { omega: 1.0 };
        let w = sample_interaction(&InteractionSpec::Gaussian { lambda: 3.0, sigma: 1.0 }, &g).unwrap();
        let phi0 = gaussian_orbital(&g, 3.0, 0.9).unwrap();
        let t = 0.5;
        let run = |dt: f64| {
            let steps = (t / dt).round() as usize;
            evolve_hartree(&g, &pot, &w, &phi0, dt, steps).unwrap().orbitals().last().unwrap().modes()
        };
        let reference = run(0.05 / 16.0);
        let err = |dt: f64| crate::linalg::norm(&run(dt).iter().zip(&reference).map(|(a, b)| a - b).collect::<Vec<_>>());
        let (e1, e2) = (err(0.05), err(0.025));
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 4.6, "ratio {ratio}");
    }

    #[test]
    fn mass_energy_and_gauge() {
        let g = Grid::new(8, 1.0).unwrap();
        let pot = PotentialSpec::None;
        let w = sample_interaction(&InteractionSpec::Gaussian { lambda: 1.0, sigma: 1.0 }, &g).unwrap();
        let phi0 = gaussian_orbital(&g, 4.0, 1.0).unwrap();
        let traj = evolve_hartree(&g, &pot, &w, &phi0, 1e-3, 2000).unwrap();
        assert!(traj.max_mass_drift() < 1e-10);
        assert!(traj.max_energy_drift() < 1e-6, "{}", traj.max_energy_drift());

        let phase = Complex64::from_polar(1.0, 0.9);
        let mut f = phi0.field().clone();
        f.scale(phase);
        let rotated = Orbital::new(f, g).unwrap();
        let traj2 = evolve_hartree(&g, &pot, &w, &rotated, 1e-3, 300).unwrap();
        for (a, b) in traj.orbitals().iter().zip(traj2.orbitals()) {
            let (pa, _) = condensate_projectors(a).unwrap();
            let (pb, _) = condensate_projectors(b).unwrap();
            assert!(max_abs_diff(pa.matrix(), pb.matrix()) < 1e-10);
        }
    }

    #[test]
    fn driven_trap_keeps_mass() {
        let g = Grid::new(8, 0.8).unwrap();
        let pot = PotentialSpec::Driven { omega: 1.0, amplitude: 0.5, frequency: 3.0 };
        let w = sample_interaction(&InteractionSpec::SoftCoulomb { lambda: 1.0, eps: 0.5 }, &g).unwrap();
        let phi0 = gaussian_orbital(&g, 2.0, 1.0).unwrap();
        let traj = evolve_hartree(&g, &pot, &w, &phi0, 1e-3, 500).unwrap();
        assert!(traj.max_mass_drift() < 1e-10);
    }

    #[test]
    fn evolve_rejects_bad_step() {
        let g = Grid::new(4, 1.0).unwrap();
        let phi0 = gaussian_orbital(&g, 1.0, 1.0).unwrap();
        assert!(evolve_hartree(&g, &PotentialSpec::None, &LatticeField::zeros(4), &phi0, 0.0, 3).is_err());
    }
}
