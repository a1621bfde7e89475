//! Numerical laboratory for the bosonic mean-field limit on a periodic 1-D lattice.
//!
//! The crate evolves an N-boson state exactly inside the symmetric Fock subspace,
//! evolves the Hartree orbital alongside it, and measures how close the reduced
//! density matrices stay to the condensate through the indicators `E^(k)`, `R^(k)`,
//! `alpha` and `beta`. Explicit Grönwall-type envelopes and the rate exponent `eta`
//! are evaluated against the observed values.
//!
//! Conventions used throughout:
//!
//! * Lattice fields `f` are sampled functions with inner product `<f,g> = dx * sum conj(f) g`.
//! * One-body operators are plain `M x M` matrices; the same matrix acts on fields and on
//!   mode amplitudes `u = sqrt(dx) * f`, which are unit vectors in `C^M`.
//! * Reduced density matrices are stored in the mode basis and have unit matrix trace.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod condensate;
mod error;
pub mod fock;
pub mod harness;
pub mod lattice;
pub mod linalg;
pub mod onebody;
pub mod oracle;
pub mod propagate;
pub mod reduce;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use bounds::{BoundReport, ExponentSpec};
pub use condensate::{WeightDistribution, WeightFunction};
pub use fock::{ManyBodyOperator, ManyBodyState, OccupationBasis};
pub use harness::{RunConfig, TimeRecord};
pub use lattice::{Grid, InteractionSpec, LatticeField};
pub use onebody::{HartreeTrajectory, OneBodyOperator, Orbital, PotentialSpec};
pub use propagate::{Method, PropagatorConfig};
pub use reduce::DensityMatrix;
