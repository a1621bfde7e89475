//! Symmetric N-particle subspace in the occupation-number basis.
//!
//! States are ordered reverse-lexicographically, so for `(M, N) = (2, 2)` the basis
//! reads `(2,0), (1,1), (0,2)`. Ranking uses the combinatorial number system, no hash map.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{config, Result};
use crate::lattice::{Grid, LatticeField};
use crate::linalg::{hermiticity_residual, CMatrix, ZERO};
use crate::onebody::{OneBodyOperator, Orbital};

pub const DEFAULT_BASIS_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationBasis {
    sites: usize,
    particles: usize,
    /// Flat storage, `sites` occupations per state.
    states: Vec<u8>,
    /// `compositions[r][m]`: ways to put `r` bosons on `m` sites.
    compositions: Vec<Vec<usize>>,
}

/// `C(n + m - 1, n)`, or `None` on overflow.
pub fn basis_dimension(sites: usize, particles: usize) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 0..particles as u128 {
        acc = acc * (sites as u128 + i) / (i + 1);
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    usize::try_from(acc).ok()
}

pub fn enumerate_basis(sites: usize, particles: usize) -> Result<OccupationBasis> {
    enumerate_basis_with_cap(sites, particles, DEFAULT_BASIS_CAP)
}

pub fn enumerate_basis_with_cap(sites: usize, particles: usize, cap: usize) -> Result<OccupationBasis> {
    if sites < 1 || particles < 1 {
        return config(format!("basis needs M >= 1 and N >= 1, got M={sites} N={particles}"));
    }
    if particles > u8::MAX as usize {
        return config("at most 255 particles are supported");
    }
    let dim = match basis_dimension(sites, particles) {
        Some(d) if d <= cap => d,
        _ => {
            return config(format!(
                "basis for M={sites} N={particles} exceeds the cap of {cap} states"
            ))
        }
    };
    let mut compositions = vec![vec![0usize; sites + 1]; particles + 1];
    for (r, row) in compositions.iter_mut().enumerate() {
        row[0] = usize::from(r == 0);
        for (m, c) in row.iter_mut().enumerate().skip(1) {
            *c = basis_dimension(m, r).unwrap_or(usize::MAX);
        }
    }
    let mut states = Vec::with_capacity(dim * sites);
    let mut current = vec![0u8; sites];
    fill(&mut states, &mut current, 0, particles);
    debug_assert_eq!(states.len(), dim * sites);
    Ok(OccupationBasis { sites, particles, states, compositions })
}

fn fill(out: &mut Vec<u8>, current: &mut [u8], site: usize, remaining: usize) {
    if site + 1 == current.len() {
        current[site] = remaining as u8;
        out.extend_from_slice(current);
        return;
    }
    for n in (0..=remaining).rev() {
        current[site] = n as u8;
        fill(out, current, site + 1, remaining - n);
    }
    current[site] = 0;
}

impl OccupationBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len() / self.sites
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i * self.sites..(i + 1) * self.sites]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.states.chunks_exact(self.sites)
    }

    /// Position of an occupation vector, or `None` if it is not in this basis.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.sites || occ.iter().map(|&n| n as usize).sum::<usize>() != self.particles {
            return None;
        }
        let mut idx = 0;
        let mut remaining = self.particles;
        for (x, &n) in occ.iter().enumerate().take(self.sites - 1) {
            let rest = self.sites - x - 1;
            for v in (n as usize + 1)..=remaining {
                idx += self.compositions[remaining - v][rest];
            }
            remaining -= n as usize;
        }
        Some(idx)
    }
}

/// Complex amplitudes over an [`OccupationBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    basis: Arc<OccupationBasis>,
    amplitudes: Vec<Complex64>,
}

impl ManyBodyState {
    pub fn new(basis: Arc<OccupationBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return config(format!(
                "state has {} amplitudes, basis has {} states",
                amplitudes.len(),
                basis.dim()
            ));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Unit amplitude on a single occupation vector.
    pub fn basis_state(basis: Arc<OccupationBasis>, occ: &[u8]) -> Result<Self> {
        let Some(i) = basis.index_of(occ) else {
            return config(format!("occupation {occ:?} is not in the basis"));
        };
        let mut amplitudes = vec![ZERO; basis.dim()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &OccupationBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(amplitudes.len(), self.amplitudes.len());
        Self { basis: Arc::clone(&self.basis), amplitudes }
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &ManyBodyState) -> Complex64 {
        crate::linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Sparse operator on the occupation basis in CSR layout.
///
/// Row order is deterministic and `matvec` reduces each row left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl ManyBodyOperator {
    /// Builds from unsorted triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let trip = values.iter().enumerate().map(|(i, &v)| (i, i, Complex64::new(v, 0.0))).collect();
        Self::from_triplets(values.len(), trip)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn apply(&self, psi: &ManyBodyState) -> Result<ManyBodyState> {
        if psi.amplitudes().len() != self.dim {
            return config("operator and state dimensions differ");
        }
        Ok(psi.with_amplitudes(self.matvec(psi.amplitudes())))
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k])))
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &ManyBodyOperator, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return config("operator dimensions differ");
        }
        let trip = self
            .triplets()
            .map(|(r, c, v)| (r, c, v * a))
            .chain(other.triplets().map(|(r, c, v)| (r, c, v * b)))
            .collect();
        Ok(Self::from_triplets(self.dim, trip))
    }

    /// `self + diag(values)`.
    pub fn add_diagonal(&self, values: &[f64]) -> Result<Self> {
        self.linear_combination(1.0, &Self::diagonal(values), 1.0)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut a = CMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            a[(r, c)] += v;
        }
        a
    }

    /// `max |A_rc - conj(A_cr)|` over stored entries.
    pub fn hermiticity_residual(&self) -> f64 {
        if self.dim <= 2048 {
            return hermiticity_residual(&self.to_dense());
        }
        let adj = Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect());
        self.linear_combination(1.0, &adj, -1.0)
            .map(|d| d.vals.iter().fold(0.0f64, |m, z| m.max(z.norm())))
            .unwrap_or(f64::INFINITY)
    }

    /// Cheap upper bound on the spectral radius (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `dGamma(A) = sum_ij A_ij a_i^dag a_j` restricted to the basis.
pub fn second_quantize_onebody(a: &OneBodyOperator, basis: &OccupationBasis) -> Result<ManyBodyOperator> {
    let m = basis.sites();
    if a.dim() != m {
        return config(format!("one-body operator has dimension {} but the basis has {m} sites", a.dim()));
    }
    let mat = a.matrix();
    let mut trip = Vec::new();
    let mut scratch = vec![0u8; m];
    for (col, occ) in basis.iter().enumerate() {
        let diag: Complex64 = (0..m).map(|x| mat[(x, x)] * occ[x] as f64).sum();
        if diag != ZERO {
            trip.push((col, col, diag));
        }
        for j in 0..m {
            if occ[j] == 0 {
                continue;
            }
            for i in 0..m {
                let aij = mat[(i, j)];
                if i == j || aij == ZERO {
                    continue;
                }
                scratch.copy_from_slice(occ);
                scratch[j] -= 1;
                scratch[i] += 1;
                let row = basis.index_of(&scratch).expect("hop stays in the basis");
                let amp = ((occ[j] as f64) * (occ[i] as f64 + 1.0)).sqrt();
                trip.push((row, col, aij * amp));
            }
        }
    }
    Ok(ManyBodyOperator::from_triplets(basis.dim(), trip))
}

/// `sum_{x<y} w(x-y) n_x n_y + 1/2 w(0) sum_x n_x (n_x - 1)` on the diagonal.
pub fn interaction_diagonal(w: &LatticeField, basis: &OccupationBasis, grid: &Grid) -> Result<ManyBodyOperator> {
    Ok(ManyBodyOperator::diagonal(&interaction_energies(w, basis, grid)?))
}

pub fn interaction_energies(w: &LatticeField, basis: &OccupationBasis, grid: &Grid) -> Result<Vec<f64>> {
    let m = basis.sites();
    if grid.sites() != m || w.len() != m {
        return config("interaction, grid and basis disagree on the number of sites");
    }
    if !w.is_real(0.0) {
        return config("interaction must be real");
    }
    let wr = w.real_parts();
    Ok(basis
        .iter()
        .map(|occ| {
            let mut e = 0.0;
            for x in 0..m {
                let nx = occ[x] as f64;
                if nx == 0.0 {
                    continue;
                }
                e += 0.5 * wr[0] * nx * (nx - 1.0);
                for y in (x + 1)..m {
                    e += wr[y - x] * nx * occ[y] as f64;
                }
            }
            e
        })
        .collect())
}

/// `H_N = dGamma(h) + (1/N) sum_{i<j} w(x_i - x_j)`.
pub fn build_hn(h: &OneBodyOperator, w: &LatticeField, basis: &OccupationBasis, grid: &Grid) -> Result<ManyBodyOperator> {
    let kinetic = second_quantize_onebody(h, basis)?;
    let pair = interaction_diagonal(w, basis, grid)?;
    kinetic.linear_combination(1.0, &pair, 1.0 / basis.particles() as f64)
}

/// `dGamma(1)`, the particle-number operator.
pub fn number_operator(basis: &OccupationBasis) -> ManyBodyOperator {
    ManyBodyOperator::diagonal(&vec![basis.particles() as f64; basis.dim()])
}

/// Occupation representation of `phi^{(x)N}`.
pub fn product_state(phi: &Orbital, basis: &Arc<OccupationBasis>) -> Result<ManyBodyState> {
    let mass = phi.field().mass(phi.grid());
    if (mass - 1.0).abs() > Orbital::NORM_TOL {
        return config(format!("product state needs a normalized orbital (mass {mass})"));
    }
    if phi.grid().sites() != basis.sites() {
        return config("orbital and basis disagree on the number of sites");
    }
    let u = phi.modes();
    let ln_fact = |n: usize| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let ln_n = ln_fact(basis.particles());
    let amps = basis
        .iter()
        .map(|occ| {
            let mut ln_w = ln_n;
            let mut amp = Complex64::new(1.0, 0.0);
            for (x, &n) in occ.iter().enumerate() {
                ln_w -= ln_fact(n as usize);
                amp *= u[x].powu(n as u32);
            }
            amp * (0.5 * ln_w).exp()
        })
        .collect();
    ManyBodyState::new(Arc::clone(basis), amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_interaction, InteractionSpec};
    use crate::linalg::{eigvalsh, max_abs_diff};
    use crate::onebody::{build_h, build_h_at, gaussian_orbital, PotentialSpec};
    use crate::oracle::{dense_oracle, symmetric_isometry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, m: usize) -> OneBodyOperator {
        let a = CMatrix::from_fn(m, m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        OneBodyOperator::from_matrix((&a + a.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
    }

    #[test]
    fn small_basis_order() {
        let b = enumerate_basis(2, 2).unwrap();
        let states: Vec<Vec<u8>> = b.iter().map(|s| s.to_vec()).collect();
        assert_eq!(states, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_basis(8, 6).unwrap().dim(), 1716);
        assert!(enumerate_basis(0, 2).is_err());
        assert!(enumerate_basis(2, 0).is_err());
        assert!(enumerate_basis_with_cap(8, 6, 1000).is_err());
        assert!(enumerate_basis(64, 12).is_err());
    }

    #[test]
    fn index_round_trip_and_order() {
        for (m, n) in [(5, 4), (1, 3), (3, 1), (6, 5)] {
            let b = enumerate_basis(m, n).unwrap();
            assert_eq!(Some(b.dim()), basis_dimension(m, n));
            for i in 0..b.dim() {
                assert_eq!(b.index_of(b.state(i)), Some(i));
                if i > 0 {
                    assert!(b.state(i - 1) > b.state(i), "not reverse-lex at {i}");
                }
            }
            assert_eq!(b.index_of(&vec![0u8; m]), None);
        }
    }

    #[test]
    fn dgamma_identity_and_diagonal() {
        let b = enumerate_basis(4, 3).unwrap();
        let n_op = second_quantize_onebody(&OneBodyOperator::identity(4), &b).unwrap();
        assert!(max_abs_diff(&n_op.to_dense(), &(CMatrix::identity(b.dim(), b.dim()) * Complex64::new(3.0, 0.0))) < 1e-14);
        assert_eq!(n_op.to_dense(), number_operator(&b).to_dense());

        let a = [0.5, -1.0, 2.0, 0.25];
        let d = second_quantize_onebody(&OneBodyOperator::diagonal(&a), &b).unwrap().to_dense();
        for (i, occ) in b.iter().enumerate() {
            let want: f64 = occ.iter().zip(&a).map(|(&n, &x)| n as f64 * x).sum();
            assert!((d[(i, i)] - want).norm() < 1e-14);
        }
        assert!(second_quantize_onebody(&OneBodyOperator::identity(3), &b).is_err());
    }

    #[test]
    fn dgamma_is_linear_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = enumerate_basis(3, 3).unwrap();
        let a1 = random_hermitian(&mut rng, 3);
        let a2 = random_hermitian(&mut rng, 3);
        let sum = OneBodyOperator::from_matrix(a1.matrix() * Complex64::new(2.0, 0.0) - a2.matrix()).unwrap();
        let lhs = second_quantize_onebody(&sum, &b).unwrap().to_dense();
        let d1 = second_quantize_onebody(&a1, &b).unwrap().to_dense();
        let d2 = second_quantize_onebody(&a2, &b).unwrap().to_dense();
        assert!(max_abs_diff(&lhs, &(d1 * Complex64::new(2.0, 0.0) - d2)) < 1e-13);
        assert!(second_quantize_onebody(&a1, &b).unwrap().hermiticity_residual() < 1e-14);
    }

    #[test]
    fn dgamma_preserves_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = enumerate_basis(3, 4).unwrap();
        let x = random_hermitian(&mut rng, 3);
        let psd = OneBodyOperator::from_matrix(x.matrix() * x.matrix()).unwrap();
        let vals = eigvalsh(&second_quantize_onebody(&psd, &b).unwrap().to_dense());
        assert!(vals[0] > -1e-12);
    }

    #[test]
    fn dgamma_matches_first_quantized_m2_n2() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Grid::new(2, 1.0).unwrap();
        let b = enumerate_basis(2, 2).unwrap();
        let a = random_hermitian(&mut rng, 2);
        let oracle = dense_oracle(&a, &LatticeField::zeros(2), &g, 2).unwrap();
        let j = symmetric_isometry(&b);
        let sym = j.adjoint() * &oracle.hamiltonian * &j;
        let ours = second_quantize_onebody(&a, &b).unwrap().to_dense();
        assert!(max_abs_diff(&sym, &ours) < 1e-12);
    }

    #[test]
    fn interaction_examples() {
        let g = Grid::new(4, 0.5).unwrap();
        let b = enumerate_basis(4, 3).unwrap();
        let c = sample_interaction(&InteractionSpec::Constant { c: 1.5 }, &g).unwrap();
        let e = interaction_energies(&c, &b, &g).unwrap();
        assert!(e.iter().all(|&x| (x - 1.5 * 3.0).abs() < 1e-13));

        let b1 = enumerate_basis(4, 1).unwrap();
        let w = sample_interaction(&InteractionSpec::Gaussian { lambda: 2.0, sigma: 0.5 }, &g).unwrap();
        assert!(interaction_energies(&w, &b1, &g).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn interaction_matches_first_quantized_m3_n2() {
        let g = Grid::new(3, 0.8).unwrap();
        let b = enumerate_basis(3, 2).unwrap();
        let w = sample_interaction(&InteractionSpec::Random { seed: 17, amplitude: 1.0 }, &g).unwrap();
        // dense oracle with h = 0 carries (1/N) sum_{i<j} W_ij, rescale by N
        let oracle = dense_oracle(&OneBodyOperator::diagonal(&[0.0; 3]), &w, &g, 2).unwrap();
        let j = symmetric_isometry(&b);
        let sym = j.adjoint() * &oracle.hamiltonian * &j * Complex64::new(2.0, 0.0);
        let ours = interaction_diagonal(&w, &b, &g).unwrap().to_dense();
        assert!(max_abs_diff(&sym, &ours) < 1e-12);
    }

    #[test]
    fn hn_constant_interaction_ground_energy() {
        let g = Grid::new(5, 0.6).unwrap();
        let h = build_h_at(&g, &PotentialSpec::Harmonic { omega: 1.3 }, 0.0).unwrap();
        let c = 2.0;
        let w = sample_interaction(&InteractionSpec::Constant { c }, &g).unwrap();
        for n in [2usize, 3, 4] {
            let b = enumerate_basis(5, n).unwrap();
            let hn = build_hn(&h, &w, &b, &g).unwrap();
            let e0 = eigvalsh(&hn.to_dense())[0] / n as f64;
            let want = h.lowest_eigenvalue() + c * (n as f64 - 1.0) / (2.0 * n as f64);
            assert!((e0 - want).abs() < 1e-10, "N={n}");
        }
        let b = enumerate_basis(5, 3).unwrap();
        let free = build_hn(&h, &LatticeField::zeros(5), &b, &g).unwrap();
        assert!(max_abs_diff(&free.to_dense(), &second_quantize_onebody(&h, &b).unwrap().to_dense()) < 1e-15);
    }

    #[test]
    fn hn_conserves_particle_number() {
        let g = Grid::new(4, 1.0).unwrap();
        let h = build_h(&g, &LatticeField::from_real(&[0.0, 1.0, 0.5, 2.0])).unwrap();
        let w = sample_interaction(&InteractionSpec::Gaussian { lambda: 1.0, sigma: 1.0 }, &g).unwrap();
        let b = enumerate_basis(4, 3).unwrap();
        let hn = build_hn(&h, &w, &b, &g).unwrap().to_dense();
        let n = number_operator(&b).to_dense();
        assert!(max_abs_diff(&(&hn * &n), &(&n * &hn)) == 0.0);
    }

    #[test]
    fn product_state_examples() {
        let g = Grid::new(2, 0.5).unwrap();
        let b = Arc::new(enumerate_basis(2, 3).unwrap());
        let s = 1.0 / g.spacing().sqrt();
        let phi = Orbital::new(LatticeField::from_real(&[s, 0.0]), g).unwrap();
        let psi = product_state(&phi, &b).unwrap();
        assert!((psi.amplitudes()[0] - 1.0).norm() < 1e-15);
        assert!(psi.amplitudes()[1..].iter().all(|z| z.norm() == 0.0));

        let b2 = Arc::new(enumerate_basis(2, 2).unwrap());
        let s = 1.0 / (2.0 * g.spacing()).sqrt();
        let phi = Orbital::new(LatticeField::from_real(&[s, s]), g).unwrap();
        let psi = product_state(&phi, &b2).unwrap();
        let want = [0.5, 1.0 / 2f64.sqrt(), 0.5];
        for (a, w) in psi.amplitudes().iter().zip(want) {
            assert!((a - w).norm() < 1e-14);
        }
        assert!((psi.norm() - 1.0).abs() < 1e-14);

        assert!(product_state(&phi, &Arc::new(enumerate_basis(3, 2).unwrap())).is_err());
    }

    #[test]
    fn product_state_is_normalized() {
        let g = Grid::new(8, 0.7).unwrap();
        let phi = gaussian_orbital(&g, 2.0, 0.9).unwrap();
        for n in 1..=6 {
            let b = Arc::new(enumerate_basis(8, n).unwrap());
            assert!((product_state(&phi, &b).unwrap().norm() - 1.0).abs() < 1e-10);
        }
    }
}
