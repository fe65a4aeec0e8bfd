//! Density-matrix circuit simulation with quantum-switch and
//! spatio-temporal stabilizer checks for error mitigation.

pub mod algorithms;
pub mod error;
pub mod gates;
pub mod harness;
pub mod ir;
pub mod kernel;
pub mod linalg;
pub mod noise;
pub mod pauli;
pub mod circuit;
pub mod qswitch;
pub mod random;
pub mod sts;

pub use error::{Error, Result};
pub use circuit::{Circuit, InitialState, Placement, RunResult};
pub use gates::{controlled, gate_library, Polarity, UnitaryGate};
pub use kernel::{apply_channel, apply_unitary};
pub use linalg::{anticommutator, commutator, kron, partial_trace, purity, ComplexMatrix, DensityMatrix, C64};
pub use noise::{ChannelKind, KrausChannel, NoiseSpec, TwoQubitNoise};
pub use pauli::{Pauli, PauliString, Phase};
pub use sts::{CheckMode, StsDescriptor};
