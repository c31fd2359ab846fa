//! Waveguide QED on a coupled cavity array.
//!
//! Two-level emitters coupled to a tight-binding photonic lattice with
//! hopping `J`, in a frame rotating at the cavity frequency. The crate
//! covers single-photon dressed states and spectra, Born-Markov rates,
//! exact diagonalization in the 1-3 excitation sectors, the variational
//! multi-photon ladder and two-atom / many-atom bound states.

pub mod error;
pub mod exact_diag;
pub mod lattice;
pub mod markov;
pub mod multi_atom;
pub mod numerics;
pub mod par;
pub mod params;
pub mod single_photon;
pub mod variational;

pub use error::{Error, Result};
pub use par::Exec;
pub use params::{Boundary, Branch, LatticeSpec, SystemParams};
