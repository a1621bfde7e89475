//! Shared fixtures for the kernel benchmarks.

use std::sync::Arc;

use mflab_core::fock::{build_hn, enumerate_basis, product_state};
use mflab_core::lattice::sample_interaction;
use mflab_core::onebody::{build_h_at, gaussian_orbital};
use mflab_core::propagate::{evolve_nbody, Method};
use mflab_core::{Grid, InteractionSpec, ManyBodyOperator, ManyBodyState, Orbital, PotentialSpec, PropagatorConfig};

pub struct Fixture {
    pub hamiltonian: ManyBodyOperator,
    pub orbital: Orbital,
    /// `phi^{(x)N}` evolved for a short time so that every kernel sees a generic state.
    pub state: ManyBodyState,
}

impl Fixture {
    pub fn new(sites: usize, particles: usize) -> Self {
        let grid = Grid::new(sites, 1.0).expect("grid");
        let h = build_h_at(&grid, &PotentialSpec::Harmonic { omega: 0.5 }, 0.0).expect("h");
        let w = sample_interaction(&InteractionSpec::Gaussian { lambda: 1.0, sigma: 1.0 }, &grid).expect("w");
        let basis = Arc::new(enumerate_basis(sites, particles).expect("basis"));
        let hamiltonian = build_hn(&h, &w, &basis, &grid).expect("H_N");
        let orbital = gaussian_orbital(&grid, grid.length() / 2.0, 1.0).expect("orbital");
        let psi0 = product_state(&orbital, &basis).expect("product state");
        let state = evolve_nbody(&hamiltonian, &psi0, &PropagatorConfig::new(0.05, 4, Method::default()))
            .expect("warm-up evolution")
            .pop()
            .expect("nonempty");
        Self { hamiltonian, orbital, state }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// `(M, N)` pairs spanning a few hundred to tens of thousands of states.
pub const SIZES: [(usize, usize); 3] = [(8, 4), (8, 8), (12, 6)];
