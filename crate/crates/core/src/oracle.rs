//! First-quantized dense reference on the full tensor space `(C^M)^{(x)N}`.
//!
//! Everything here is brute force and exists to cross-check the occupation-basis
//! code paths on tiny systems. Tensor index of `(x_1, .., x_N)` is `sum x_i M^(N-i)`.

use num_complex::Complex64;

use std::sync::Arc;

use crate::error::{config, Result};
use crate::fock::{build_hn, enumerate_basis, product_state, OccupationBasis};
use crate::lattice::{Grid, LatticeField};
use crate::linalg::{expm_hermitian, max_abs_diff, CMatrix, CVector, ZERO};
use crate::onebody::{OneBodyOperator, Orbital};
use crate::propagate::{evolve_nbody, Method, PropagatorConfig};
use crate::reduce::{gamma1, gamma2};

pub const MAX_TENSOR_DIM: usize = 4096;
pub const MAX_PERMUTED_PARTICLES: usize = 8;

pub struct DenseOracle {
    pub sites: usize,
    pub particles: usize,
    /// `sum_i h_i + (1/N) sum_{i<j} W_ij`.
    pub hamiltonian: CMatrix,
    /// `(1/N!) sum_perm P_perm`.
    pub symmetrizer: CMatrix,
}

pub fn tensor_dim(sites: usize, particles: usize) -> Option<usize> {
    let mut d: usize = 1;
    for _ in 0..particles {
        d = d.checked_mul(sites)?;
    }
    Some(d)
}

fn check_size(sites: usize, particles: usize) -> Result<usize> {
    match tensor_dim(sites, particles) {
        Some(d) if d <= MAX_TENSOR_DIM => Ok(d),
        _ => config(format!("tensor space {sites}^{particles} exceeds {MAX_TENSOR_DIM}")),
    }
}

pub fn decode(mut idx: usize, sites: usize, particles: usize) -> Vec<usize> {
    let mut xs = vec![0; particles];
    for slot in xs.iter_mut().rev() {
        *slot = idx % sites;
        idx /= sites;
    }
    xs
}

pub fn encode(xs: &[usize], sites: usize) -> usize {
    xs.iter().fold(0, |acc, &x| acc * sites + x)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// `A` acting on particle `i` (0-based) of `n`.
pub fn single_particle(a: &CMatrix, i: usize, particles: usize) -> CMatrix {
    let m = a.nrows();
    let mut out = CMatrix::identity(1, 1);
    for k in 0..particles {
        let factor = if k == i { a.clone() } else { CMatrix::identity(m, m) };
        out = out.kronecker(&factor);
    }
    out
}

pub fn dense_oracle(h: &OneBodyOperator, w: &LatticeField, grid: &Grid, particles: usize) -> Result<DenseOracle> {
    let m = grid.sites();
    if h.dim() != m || w.len() != m {
        return config("oracle inputs disagree on the number of sites");
    }
    if particles > MAX_PERMUTED_PARTICLES {
        return config(format!("oracle symmetrizer limited to {MAX_PERMUTED_PARTICLES} particles"));
    }
    let dim = check_size(m, particles)?;
    let mut ham = CMatrix::zeros(dim, dim);
    for i in 0..particles {
        ham += single_particle(h.matrix(), i, particles);
    }
    let wr = w.real_parts();
    let scale = 1.0 / particles as f64;
    for idx in 0..dim {
        let xs = decode(idx, m, particles);
        let mut e = 0.0;
        for i in 0..particles {
            for j in (i + 1)..particles {
                e += wr[(xs[i] + m - xs[j]) % m];
            }
        }
        ham[(idx, idx)] += Complex64::new(e * scale, 0.0);
    }

    let perms = permutations(particles);
    let weight = Complex64::new(1.0 / perms.len() as f64, 0.0);
    let mut sym = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let xs = decode(col, m, particles);
        for perm in &perms {
            let ys: Vec<usize> = perm.iter().map(|&k| xs[k]).collect();
            sym[(encode(&ys, m), col)] += weight;
        }
    }
    Ok(DenseOracle { sites: m, particles, hamiltonian: ham, symmetrizer: sym })
}

/// Columns are the normalized symmetric tensors `|n>` of each occupation vector.
pub fn symmetric_isometry(basis: &OccupationBasis) -> CMatrix {
    let (m, n) = (basis.sites(), basis.particles());
    let dim = tensor_dim(m, n).expect("tensor space too large");
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); basis.dim()];
    for idx in 0..dim {
        let mut occ = vec![0u8; m];
        for x in decode(idx, m, n) {
            occ[x] += 1;
        }
        groups[basis.index_of(&occ).expect("occupation in basis")].push(idx);
    }
    let mut j = CMatrix::zeros(dim, basis.dim());
    for (col, members) in groups.iter().enumerate() {
        let amp = Complex64::new(1.0 / (members.len() as f64).sqrt(), 0.0);
        for &idx in members {
            j[(idx, col)] = amp;
        }
    }
    j
}

/// `gamma^(k) = tr_{k+1..N} |psi><psi|` for a tensor-space vector.
pub fn partial_trace(psi: &[Complex64], sites: usize, particles: usize, k: usize) -> CMatrix {
    assert!(k <= particles);
    let keep = tensor_dim(sites, k).unwrap();
    let rest = tensor_dim(sites, particles - k).unwrap();
    assert_eq!(psi.len(), keep * rest);
    let mut g = CMatrix::zeros(keep, keep);
    for a in 0..keep {
        for b in 0..keep {
            let mut s = ZERO;
            for r in 0..rest {
                s += psi[a * rest + r] * psi[b * rest + r].conj();
            }
            g[(a, b)] = s;
        }
    }
    g
}

/// Largest entrywise disagreement between the occupation-basis pipeline and the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResiduals {
    pub hamiltonian: f64,
    pub state: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl OracleResiduals {
    pub fn max(&self) -> f64 {
        self.hamiltonian.max(self.state).max(self.gamma1).max(self.gamma2)
    }
}

/// Evolves `phi^{(x)N}` to `steps * dt` both ways and compares `H_N`, `Psi(T)`, `gamma^(1)`, `gamma^(2)`.
pub fn compare_with_oracle(
    h: &OneBodyOperator,
    w: &LatticeField,
    phi: &Orbital,
    particles: usize,
    dt: f64,
    steps: usize,
    method: Method,
) -> Result<OracleResiduals> {
    let grid = phi.grid();
    let m = grid.sites();
    let oracle = dense_oracle(h, w, grid, particles)?;
    let basis = Arc::new(enumerate_basis(m, particles)?);
    let j = symmetric_isometry(&basis);
    let hn = build_hn(h, w, &basis, grid)?;
    let hamiltonian = max_abs_diff(&(j.adjoint() * &oracle.hamiltonian * &j), &hn.to_dense());

    let psi0 = product_state(phi, &basis)?;
    let psi_t = evolve_nbody(&hn, &psi0, &PropagatorConfig::new(dt, steps, method))?.pop().expect("nonempty run");
    let dense0 = &j * CVector::from_column_slice(psi0.amplitudes());
    let dense_t = expm_hermitian(&oracle.hamiltonian, dt * steps as f64) * dense0;
    let lifted = &j * CVector::from_column_slice(psi_t.amplitudes());
    let state = (&lifted - &dense_t).iter().fold(0.0f64, |m, z| m.max(z.norm()));

    let tensor: Vec<_> = dense_t.iter().copied().collect();
    let g1 = max_abs_diff(gamma1(&psi_t)?.matrix(), &partial_trace(&tensor, m, particles, 1));
    let g2 = if particles >= 2 {
        max_abs_diff(gamma2(&psi_t)?.matrix(), &partial_trace(&tensor, m, particles, 2))
    } else {
        0.0
    };
    Ok(OracleResiduals { hamiltonian, state, gamma1: g1, gamma2: g2 })
}
