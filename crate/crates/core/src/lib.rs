//! Quantum solution of linear (quadratic-Hamiltonian) systems built from classical data.
//!
//! The pipeline runs normal-form reduction ([`model`]), classical eigenmodes
//! ([`classical`]), Gaussian shape dynamics and the stationary shape
//! ([`riccati`], [`packet`]), and excited and coherent states ([`hermite`],
//! [`states`]). Grid checks live in [`verify`].

// `!(x <= tol)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod hermite;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod packet;
mod quad;
pub mod riccati;
pub mod states;
pub mod verify;

pub use classical::{CoefficientVector, DriveProjection, ModeAmplitude, ModeSet};
pub use error::{Error, Result};
pub use hermite::{HermiteContext, MultiIndex};
pub use model::{GeneralHamiltonian, ModelFile, NormalForm, TimeSignal};
pub use packet::PacketState;
pub use riccati::{LinearPair, ModeSelection, ShapeMatrix};
pub use states::{CoherentState, GroundState, SpectrumBasis, StationaryState};
pub use verify::{Field, Grid};
