//! Spatial search by continuous-time quantum walk on Kronecker powers of
//! the complete graph.
//!
//! The crate builds `K_M^{⊗j}` graphs, evolves the search Hamiltonian
//! `H = −γA − |w⟩⟨w|` in the full vertex space or on the quotient of the
//! coarsest equitable partition around the marked vertex, and provides the
//! closed-form jumping rates, strong-regularity checks, and perturbation
//! quantities that predict the search time `π√N/2`.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod io;
pub mod reduce;
pub mod state;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Diameter, Graph, Provenance, SrgCheck, SrgParams, Vertex, VertexCode};
pub use reduce::{Census, Partition, ReducedHamiltonian};
pub use state::{Basis, StateVector};
pub use walk::{Peak, SearchProblem, SimulationResult, Space};
