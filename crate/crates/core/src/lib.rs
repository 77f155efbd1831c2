//! Driven-dissipative charging of planar bosonic battery arrays.
//!
//! The crate assembles the charger plus cell Hamiltonian on a truncated Fock
//! space, builds eigenbasis jump channels from a Debye bath, integrates the
//! master equation with fixed-step RK4 and reports ergotropy per cell.

pub mod bath;
pub mod cli;
pub mod dynamics;
pub mod ergotropy;
pub mod error;
pub mod hilbert;
pub mod model;

pub use bath::{channel_set, jump_channels, BathConfig, ChannelSet, DissipatorMode, JumpChannel};
pub use dynamics::{evolve, run_evolution, rhs, step_rk4, DenseGenerator, EigenGenerator, EvolutionSpec, Generator, InitialState, Observables, Trajectory};
pub use ergotropy::{compute_ergotropy, local_ergotropy, ErgotropyReport};
pub use error::{Error, Result};
pub use hilbert::{ModeLayout, OperatorMatrix};
pub use model::{build_hamiltonian, rotating_frame, HamiltonianParts, SystemConfig};
