//! Exact density-matrix simulation of the quantum privacy amplification (QPA)
//! purification protocol, run on EPR pairs that were attacked with an
//! isotropic Bužek-Hillery copying machine and then disturbed by one of nine
//! single-qubit noise channels.
//!
//! Everything is deterministic: measurements are handled by projecting and
//! summing the kept branches, never by sampling.
//!
//! Module map:
//!
//! * [`qstate`] dense states on up to four qubits, partial traces, Bloch vectors.
//! * [`gates`] rotations, CNOT and register embedding.
//! * [`channels`] the nine noise channels as Kraus sets, Bloch affine maps and
//!   unitary dilations.
//! * [`eavesdrop`] the isotropic cloner and the Bell-diagonal pairs it leaves.
//! * [`qpa`] the ideal recurrence, the noisy 16-dimensional map and the
//!   noise-threshold solver.
//! * [`experiment`] CSV tables and the verification report used by the CLI.
//!
//! ```
//! use qpa_core::{qpa, ChannelKind, NoiseConfig};
//!
//! let ideal = qpa::run_ideal(0.95, 5).unwrap();
//! let noisy = qpa::run_noisy(0.95, &NoiseConfig::new(ChannelKind::PHASE_FLIP, 0.05).unwrap(), 5).unwrap();
//! assert!(noisy.last().infidelity() > ideal.last().infidelity());
//! ```

pub mod channels;
pub mod eavesdrop;
mod error;
pub mod experiment;
pub mod gates;
pub mod qpa;
pub mod qstate;

pub use channels::{make_channel, Affine, ChannelKind, Dilation, NoiseChannel, Sign};
pub use eavesdrop::{initial_pair, params_from_intrusion, BHParams, BellCoeffs};
pub use error::{Error, Result};
pub use gates::{Axis, Unitary};
pub use qpa::{NoiseConfig, NoiseLocation, ProtocolTrace, Stage, StepRecord, Wire};
pub use qstate::{BlochVector, CMatrix, DensityMatrix, PureState};
