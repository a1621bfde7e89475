//! Reduced density matrices and the closeness indicators `E^(k)`, `R^(k)`.

use num_complex::Complex64;

use crate::error::{config, Result};
use crate::fock::{enumerate_basis, ManyBodyState, OccupationBasis};
use crate::linalg::{eigh, eigvalsh, hermiticity_residual, operator_norm_hermitian, trace_norm_hermitian, CMatrix, CVector, ZERO};
use crate::onebody::{OneBodyOperator, Orbital};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// Unit-trace positive operator on `k` particles, `M^k x M^k` in the mode basis.
///
/// Two-particle indices are `x1 * M + x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    k: usize,
    sites: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(k: usize, sites: usize, matrix: CMatrix) -> Result<Self> {
        if !(k == 1 || k == 2) {
            return config(format!("only k = 1, 2 are supported, got {k}"));
        }
        let dim = sites.pow(k as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return config(format!("density matrix must be {dim}x{dim}"));
        }
        let herm = hermiticity_residual(&matrix);
        if herm > HERMITIAN_TOL {
            return config(format!("density matrix not Hermitian (residual {herm:e})"));
        }
        let tr = matrix.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return config(format!("density matrix trace is {tr}"));
        }
        let low = eigvalsh(&matrix)[0];
        if low < -NEGATIVITY_TOL {
            return config(format!("density matrix has eigenvalue {low:e}"));
        }
        Ok(Self { k, sites, matrix })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Same operator with eigenvalues in `[-1e-10, 0)` set to zero.
    pub fn clamped(&self) -> CMatrix {
        let (vals, vecs) = eigh(&self.matrix);
        let d = CVector::from_iterator(vals.len(), vals.iter().map(|&l| Complex64::new(l.max(0.0), 0.0)));
        &vecs * CMatrix::from_diagonal(&d) * vecs.adjoint()
    }
}

/// `(|phi><phi|)^{(x)k}` in the mode basis.
pub fn condensate_power(phi: &Orbital, k: usize) -> CMatrix {
    let u = CVector::from_vec(phi.modes());
    let p = &u * u.adjoint();
    (1..k).fold(p.clone(), |acc, _| acc.kronecker(&p))
}

fn lower_rank(basis: Option<&OccupationBasis>, occ: &[u8]) -> usize {
    match basis {
        Some(b) => b.index_of(occ).expect("lowered state in basis"),
        None => 0,
    }
}

/// `gamma^(1)_{xy} = <a_y^dag a_x> / N`.
pub fn gamma1(psi: &ManyBodyState) -> Result<DensityMatrix> {
    let basis = psi.basis();
    let (m, n) = (basis.sites(), basis.particles());
    let lower = if n > 1 { Some(enumerate_basis(m, n - 1)?) } else { None };
    let rows = lower.as_ref().map_or(1, |b| b.dim());
    // a_x Psi, stored as rows of M entries
    let mut lowered = vec![ZERO; rows * m];
    let mut scratch = vec![0u8; m];
    for (occ, c) in basis.iter().zip(psi.amplitudes()) {
        if *c == ZERO {
            continue;
        }
        for x in 0..m {
            if occ[x] == 0 {
                continue;
            }
            scratch.copy_from_slice(occ);
            scratch[x] -= 1;
            let r = lower_rank(lower.as_ref(), &scratch);
            lowered[r * m + x] += c * (occ[x] as f64).sqrt();
        }
    }
    let mat = outer_sum(&lowered, rows, m, 1.0 / n as f64);
    DensityMatrix::new(1, m, mat)
}

/// `gamma^(2)_{(x1 x2),(y1 y2)} = <a_{y1}^dag a_{y2}^dag a_{x2} a_{x1}> / (N (N-1))`.
pub fn gamma2(psi: &ManyBodyState) -> Result<DensityMatrix> {
    let basis = psi.basis();
    let (m, n) = (basis.sites(), basis.particles());
    if n < 2 {
        return config("gamma2 needs at least two particles");
    }
    let lower = if n > 2 { Some(enumerate_basis(m, n - 2)?) } else { None };
    let rows = lower.as_ref().map_or(1, |b| b.dim());
    let mm = m * m;
    let mut lowered = vec![ZERO; rows * mm];
    let mut scratch = vec![0u8; m];
    for (occ, c) in basis.iter().zip(psi.amplitudes()) {
        if *c == ZERO {
            continue;
        }
        for x1 in 0..m {
            if occ[x1] == 0 {
                continue;
            }
            for x2 in 0..m {
                let avail = occ[x2] - u8::from(x1 == x2);
                if avail == 0 {
                    continue;
                }
                scratch.copy_from_slice(occ);
                scratch[x1] -= 1;
                scratch[x2] -= 1;
                let amp = ((occ[x1] as f64) * (avail as f64)).sqrt();
                let r = lower_rank(lower.as_ref(), &scratch);
                lowered[r * mm + x1 * m + x2] += c * amp;
            }
        }
    }
    let mat = outer_sum(&lowered, rows, mm, 1.0 / (n * (n - 1)) as f64);
    DensityMatrix::new(2, m, mat)
}

/// `scale * sum_r v_r v_r^dag` for `rows` vectors of length `width`.
fn outer_sum(vs: &[Complex64], rows: usize, width: usize, scale: f64) -> CMatrix {
    let mut g = CMatrix::zeros(width, width);
    for r in 0..rows {
        let v = &vs[r * width..(r + 1) * width];
        for a in 0..width {
            if v[a] == ZERO {
                continue;
            }
            for b in 0..width {
                g[(a, b)] += v[a] * v[b].conj();
            }
        }
    }
    g * Complex64::new(scale, 0.0)
}

/// `tr_2 gamma^(2)`.
pub fn partial_trace_2to1(g2: &DensityMatrix) -> Result<DensityMatrix> {
    if g2.k != 2 {
        return config("partial trace expects a two-particle density matrix");
    }
    let m = g2.sites;
    let g = CMatrix::from_fn(m, m, |x, y| (0..m).map(|z| g2.matrix[(x * m + z, y * m + z)]).sum());
    DensityMatrix::new(1, m, g)
}

fn check_orbital(g: &DensityMatrix, phi: &Orbital) -> Result<()> {
    if phi.grid().sites() != g.sites {
        return config("orbital and density matrix disagree on the number of sites");
    }
    Ok(())
}

/// `E^(k) = 1 - <phi^{(x)k}, gamma^(k) phi^{(x)k}>`.
pub fn e_k(g: &DensityMatrix, phi: &Orbital) -> Result<f64> {
    check_orbital(g, phi)?;
    let u = phi.modes();
    let uk: Vec<Complex64> = if g.k == 1 {
        u
    } else {
        u.iter().flat_map(|a| u.iter().map(move |b| a * b)).collect()
    };
    let v = CVector::from_vec(uk);
    Ok(1.0 - (v.adjoint() * &g.matrix * &v)[(0, 0)].re)
}

/// `R^(k) = tr |gamma^(k) - (|phi><phi|)^{(x)k}|`.
pub fn r_k(g: &DensityMatrix, phi: &Orbital) -> Result<f64> {
    check_orbital(g, phi)?;
    Ok(trace_norm_hermitian(&(&g.matrix - condensate_power(phi, g.k))))
}

/// `(tr|p - gamma|, 2 ||p - gamma||)`, equal for rank-one `p` and positive `gamma`.
pub fn seiringer_check(g: &DensityMatrix, phi: &Orbital) -> Result<(f64, f64)> {
    check_orbital(g, phi)?;
    let diff = condensate_power(phi, g.k) - g.clamped();
    Ok((trace_norm_hermitian(&diff), 2.0 * operator_norm_hermitian(&diff)))
}

/// Diagonal pair interaction `W_12 = w(x1 - x2)` on two particles.
pub fn pair_interaction(w: &[f64]) -> CMatrix {
    let m = w.len();
    CMatrix::from_fn(m * m, m * m, |a, b| {
        if a == b {
            Complex64::new(w[(a / m + m - a % m) % m], 0.0)
        } else {
            ZERO
        }
    })
}

/// Right side of the first hierarchy equation, equal to `i d/dt gamma^(1)`:
/// `[h, gamma1] + (N-1)/N tr_2 [W_12, gamma2]`.
pub fn bbgky_rhs_k1(g1: &DensityMatrix, g2: &DensityMatrix, h: &OneBodyOperator, w: &[f64], particles: usize) -> Result<CMatrix> {
    let m = g1.sites;
    if g1.k != 1 || g2.k != 2 || g2.sites != m || h.dim() != m || w.len() != m {
        return config("hierarchy inputs have inconsistent shapes");
    }
    let hm = h.matrix();
    let comm = hm * &g1.matrix - &g1.matrix * hm;
    let coupling = CMatrix::from_fn(m, m, |x, y| {
        (0..m)
            .map(|z| {
                let dw = w[(x + m - z) % m] - w[(y + m - z) % m];
                g2.matrix[(x * m + z, y * m + z)] * dw
            })
            .sum()
    });
    let f = (particles as f64 - 1.0) / particles as f64;
    Ok(comm + coupling * Complex64::new(f, 0.0))
}

/// Random density matrices and orbitals for property sweeps.
pub mod random {
    use super::*;
    use rand::Rng;

    fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
        // Box-Muller
        let (u1, u2): (f64, f64) = (rng.random_range(f64::EPSILON..1.0), rng.random_range(0.0..1.0));
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        Complex64::new(r * t.cos(), r * t.sin()) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<Complex64> {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        let n = crate::linalg::norm(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    /// `sum_r t_r |v_r><v_r|` with random weights; `vectors` supplies the pure states.
    fn mixture<R: Rng>(rng: &mut R, vectors: Vec<Vec<Complex64>>) -> CMatrix {
        let dim = vectors[0].len();
        let weights: Vec<f64> = vectors.iter().map(|_| rng.random_range(0.0..1.0f64).powi(3)).collect();
        let total: f64 = weights.iter().sum();
        let mut g = CMatrix::zeros(dim, dim);
        for (v, t) in vectors.iter().zip(&weights) {
            let col = CVector::from_column_slice(v);
            g += &col * col.adjoint() * Complex64::new(t / total, 0.0);
        }
        g
    }

    /// One-particle density matrix of rank `rank`, optionally biased toward `near`.
    pub fn gamma1<R: Rng>(rng: &mut R, sites: usize, rank: usize, near: Option<(&[Complex64], f64)>) -> DensityMatrix {
        let vectors = (0..rank.max(1))
            .map(|_| {
                let v = unit_vector(rng, sites);
                bias(rng, v, near)
            })
            .collect();
        DensityMatrix::new(1, sites, hermitize(mixture(rng, vectors))).expect("valid random density matrix")
    }

    /// Two-particle density matrix supported on the symmetric subspace.
    pub fn gamma2<R: Rng>(rng: &mut R, sites: usize, rank: usize, near: Option<(&[Complex64], f64)>) -> DensityMatrix {
        let near2: Option<Vec<Complex64>> =
            near.map(|(u, _)| u.iter().flat_map(|a| u.iter().map(move |b| a * b)).collect());
        let vectors = (0..rank.max(1))
            .map(|_| {
                let raw = unit_vector(rng, sites * sites);
                let sym = symmetrize_pair(&raw, sites);
                match (&near2, near) {
                    (Some(v), Some((_, eps))) => bias(rng, sym, Some((v.as_slice(), eps))),
                    _ => sym,
                }
            })
            .collect();
        DensityMatrix::new(2, sites, hermitize(mixture(rng, vectors))).expect("valid random density matrix")
    }

    fn symmetrize_pair(v: &[Complex64], m: usize) -> Vec<Complex64> {
        let s: Vec<Complex64> = (0..m * m).map(|i| (v[i] + v[(i % m) * m + i / m]) * 0.5).collect();
        let n = crate::linalg::norm(&s);
        s.into_iter().map(|z| z / n).collect()
    }

    /// `normalize(target + eps * v)` when `near = Some((target, eps))`.
    fn bias<R: Rng>(_rng: &mut R, v: Vec<Complex64>, near: Option<(&[Complex64], f64)>) -> Vec<Complex64> {
        match near {
            None => v,
            Some((target, eps)) => {
                let mixed: Vec<Complex64> = target.iter().zip(&v).map(|(a, b)| a + b * eps).collect();
                let n = crate::linalg::norm(&mixed);
                mixed.into_iter().map(|z| z / n).collect()
            }
        }
    }

    fn hermitize(g: CMatrix) -> CMatrix {
        let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = h.trace().re;
        h * Complex64::new(1.0 / tr, 0.0)
    }
}
