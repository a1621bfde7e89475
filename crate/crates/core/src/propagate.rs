//! Unitary evolution `i d/dt Psi = H_N Psi` and expectation values.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{config, numerical, Error, Result};
use crate::fock::{ManyBodyOperator, ManyBodyState};
use crate::linalg::{eigh, inner, norm, CMatrix, CVector, ZERO};

pub const DENSE_MAX_DIM: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Lanczos-subspace exponential with residual-controlled subspace size.
    Krylov { max_dim: usize, tol: f64 },
    /// One-time dense eigendecomposition; only for `dim <= 3000`.
    Dense,
}

impl Default for Method {
    fn default() -> Self {
        Method::Krylov { max_dim: 40, tol: 1e-10 }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Krylov { .. } => write!(f, "krylov"),
            Method::Dense => write!(f, "dense"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "krylov" => Ok(Method::default()),
            "dense" => Ok(Method::Dense),
            _ => config(format!("unknown propagator `{s}`, expected krylov or dense")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    /// Largest allowed `| ||Psi|| - 1 |` over a run.
    pub unitarity_tol: f64,
}

impl PropagatorConfig {
    pub fn new(dt: f64, steps: usize, method: Method) -> Self {
        Self { dt, steps, method, unitarity_tol: 1e-8 }
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return config(format!("time step must be positive, got {}", self.dt));
        }
        if let Method::Krylov { max_dim, tol } = self.method {
            if max_dim < 2 || !(tol > 0.0) {
                return config("krylov needs max_dim >= 2 and tol > 0");
            }
        }
        Ok(())
    }
}

/// One step `exp(-i dt H) v` in a Lanczos subspace.
///
/// The subspace grows until the a-posteriori estimate `beta_m |e_m^T exp(-i dt T_m) e_1|`
/// drops below `tol`, or the Krylov space becomes invariant.
pub fn krylov_step(h: &ManyBodyOperator, v: &[Complex64], dt: f64, max_dim: usize, tol: f64) -> Result<Vec<Complex64>> {
    let n = v.len();
    if h.dim() != n {
        return config("operator and state dimensions differ");
    }
    let beta0 = norm(v);
    if beta0 == 0.0 {
        return Ok(v.to_vec());
    }
    let scale = h.norm_bound().max(1.0);
    let breakdown = 1e-13 * scale;
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|z| z / beta0).collect()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];
    let cap = max_dim.min(n);

    for j in 0..cap {
        h.matvec_into(&basis[j], &mut w);
        let alpha = inner(&basis[j], &w).re;
        alphas.push(alpha);
        // full reorthogonalization, done twice
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = norm(&w);
        let m = j + 1;
        let coeffs = tridiagonal_expm_e1(&alphas, &betas, dt);
        let invariant = beta <= breakdown || m == n;
        let estimate = beta * coeffs[m - 1].norm();
        if invariant || estimate < tol {
            let mut out = vec![ZERO; n];
            for (b, c) in basis.iter().zip(&coeffs) {
                let c = c * beta0;
                out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
            }
            return Ok(out);
        }
        betas.push(beta);
        basis.push(w.iter().map(|z| z / beta).collect());
    }
    numerical(format!("Krylov exponential did not converge within {cap} vectors (dt={dt})"))
}

/// `exp(-i dt T) e_1` for the real symmetric tridiagonal `T`.
fn tridiagonal_expm_e1(alphas: &[f64], betas: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| {
                    let q = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                    Complex64::from_polar(q, -dt * eig.eigenvalues[k])
                })
                .sum()
        })
        .collect()
}

/// Stateful stepper for a time-independent generator.
pub enum Propagator {
    Krylov { h: ManyBodyOperator, max_dim: usize, tol: f64 },
    Dense { values: Vec<f64>, vectors: CMatrix, cached: Option<(f64, CMatrix)> },
}

impl Propagator {
    pub fn new(h: &ManyBodyOperator, method: Method) -> Result<Self> {
        Ok(match method {
            Method::Krylov { max_dim, tol } => Propagator::Krylov { h: h.clone(), max_dim, tol },
            Method::Dense => {
                if h.dim() > DENSE_MAX_DIM {
                    return config(format!("dense propagation limited to dim <= {DENSE_MAX_DIM}, got {}", h.dim()));
                }
                let (values, vectors) = eigh(&h.to_dense());
                Propagator::Dense { values, vectors, cached: None }
            }
        })
    }

    /// `exp(-i dt H) psi`; `dt` may be negative.
    pub fn step(&mut self, psi: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
        let out = match self {
            Propagator::Krylov { h, max_dim, tol } => krylov_step(h, psi, dt, *max_dim, *tol)?,
            Propagator::Dense { values, vectors, cached } => {
                if cached.as_ref().map(|(d, _)| *d) != Some(dt) {
                    let phases = CVector::from_iterator(values.len(), values.iter().map(|&e| Complex64::from_polar(1.0, -e * dt)));
                    let u = &*vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint();
                    *cached = Some((dt, u));
                }
                let u = &cached.as_ref().unwrap().1;
                (u * CVector::from_column_slice(psi)).iter().copied().collect()
            }
        };
        if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return numerical("many-body amplitudes became nonfinite");
        }
        Ok(out)
    }
}

/// States at every step `0..=steps` of a fixed-`dt` run.
pub fn evolve_nbody(h: &ManyBodyOperator, psi0: &ManyBodyState, cfg: &PropagatorConfig) -> Result<Vec<ManyBodyState>> {
    cfg.validate()?;
    if h.dim() != psi0.amplitudes().len() {
        return config("operator and state dimensions differ");
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return config("initial many-body state is not normalized");
    }
    let mut prop = Propagator::new(h, cfg.method)?;
    let mut out = Vec::with_capacity(cfg.steps + 1);
    out.push(psi0.clone());
    let mut cur = psi0.amplitudes().to_vec();
    for n in 0..cfg.steps {
        cur = prop.step(&cur, cfg.dt)?;
        let drift = (norm(&cur) - 1.0).abs();
        if drift > cfg.unitarity_tol {
            return numerical(format!("norm drift {drift:e} at step {} exceeds {:e}", n + 1, cfg.unitarity_tol));
        }
        out.push(psi0.with_amplitudes(cur.clone()));
    }
    Ok(out)
}

/// `<Psi, A Psi>`.
pub fn expectation(psi: &ManyBodyState, a: &ManyBodyOperator) -> Result<Complex64> {
    if a.dim() != psi.amplitudes().len() {
        return config("operator and state dimensions differ");
    }
    Ok(inner(psi.amplitudes(), &a.matvec(psi.amplitudes())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_hn, enumerate_basis, number_operator, product_state};
    use crate::lattice::{sample_interaction, Grid, InteractionSpec, LatticeField};
    use crate::onebody::{build_h, gaussian_orbital};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_setup(seed: u64, m: usize, n: usize) -> (ManyBodyOperator, ManyBodyState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid::new(m, 1.0).unwrap();
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
        let h = build_h(&g, &LatticeField::from_real(&v)).unwrap();
        let w = sample_interaction(&InteractionSpec::Random { seed, amplitude: 2.0 }, &g).unwrap();
        let b = Arc::new(enumerate_basis(m, n).unwrap());
        let hn = build_hn(&h, &w, &b, &g).unwrap();
        let phi = gaussian_orbital(&g, 0.7, 0.8).unwrap();
        (hn, product_state(&phi, &b).unwrap())
    }

    fn diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
    }

    #[test]
    fn scalar_generator_gives_phase() {
        let (hn, psi0) = random_setup(1, 3, 2);
        let e = 1.7;
        let h = ManyBodyOperator::diagonal(&vec![e; hn.dim()]);
        let cfg = PropagatorConfig::new(0.1, 10, Method::default());
        let states = evolve_nbody(&h, &psi0, &cfg).unwrap();
        for (k, s) in states.iter().enumerate() {
            let ov = psi0.inner(s);
            assert!((ov - Complex64::from_polar(1.0, -e * 0.1 * k as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_only_picks_up_phase() {
        let (hn, psi0) = random_setup(2, 3, 3);
        let (vals, vecs) = eigh(&hn.to_dense());
        let v: Vec<Complex64> = vecs.column(2).iter().copied().collect();
        let start = psi0.with_amplitudes(v.clone());
        for method in [Method::default(), Method::Dense] {
            let states = evolve_nbody(&hn, &start, &PropagatorConfig::new(0.05, 20, method)).unwrap();
            let ov = start.inner(states.last().unwrap());
            assert!((ov - Complex64::from_polar(1.0, -vals[2])).norm() < 1e-9, "{method:?}");
        }
    }

    #[test]
    fn krylov_matches_dense() {
        let (hn, psi0) = random_setup(3, 3, 3);
        let k = evolve_nbody(&hn, &psi0, &PropagatorConfig::new(0.01, 100, Method::Krylov { max_dim: 40, tol: 1e-12 })).unwrap();
        let d = evolve_nbody(&hn, &psi0, &PropagatorConfig::new(0.01, 100, Method::Dense)).unwrap();
        assert!(diff(k.last().unwrap().amplitudes(), d.last().unwrap().amplitudes()) < 1e-8);
    }

    #[test]
    fn norm_energy_and_time_reversal() {
        let (hn, psi0) = random_setup(4, 4, 3);
        let cfg = PropagatorConfig::new(0.01, 100, Method::default());
        let states = evolve_nbody(&hn, &psi0, &cfg).unwrap();
        let e0 = expectation(&psi0, &hn).unwrap().re;
        for s in &states {
            assert!((s.norm() - 1.0).abs() < 1e-8);
            let e = expectation(s, &hn).unwrap();
            assert!(e.im.abs() < 1e-12);
            assert!((e.re - e0).abs() / e0.abs().max(1.0) < 1e-8);
        }
        let mut prop = Propagator::new(&hn, Method::default()).unwrap();
        let mut cur = states.last().unwrap().amplitudes().to_vec();
        for _ in 0..100 {
            cur = prop.step(&cur, -0.01).unwrap();
        }
        assert!(diff(&cur, psi0.amplitudes()) < 1e-6);
    }

    #[test]
    fn expectation_examples() {
        let (hn, psi0) = random_setup(5, 3, 4);
        let b = psi0.basis();
        assert!((expectation(&psi0, &ManyBodyOperator::identity(b.dim())).unwrap() - 1.0).norm() < 1e-12);
        assert!((expectation(&psi0, &number_operator(b)).unwrap() - 4.0).norm() < 1e-12);
        let (vals, vecs) = eigh(&hn.to_dense());
        let v = psi0.with_amplitudes(vecs.column(0).iter().copied().collect());
        assert!((expectation(&v, &hn).unwrap().re - vals[0]).abs() < 1e-10);
        assert!(expectation(&psi0, &ManyBodyOperator::identity(3)).is_err());
    }

    #[test]
    fn dense_method_is_capped() {
        let h = ManyBodyOperator::identity(DENSE_MAX_DIM + 1);
        assert!(Propagator::new(&h, Method::Dense).is_err());
    }

    #[test]
    fn krylov_reports_non_convergence() {
        let (hn, psi0) = random_setup(6, 4, 3);
        assert!(krylov_step(&hn, psi0.amplitudes(), 50.0, 3, 1e-12).is_err());
    }
}
