//! Sequential conclusive discrimination of quantum states.
//!
//! A chain of receivers each performs a quantum instrument on the same
//! system and tries to identify which of `r` known states the sender
//! prepared; the chain succeeds only if every receiver answers correctly.
//! This crate provides the linear-algebra substrate, instruments and their
//! sequential composition, channels, success-probability evaluation, the
//! optimal two-state protocols, and the noisy-channel (depolarizing)
//! optimization for qubits.

pub mod channels;
pub mod discrimination;
pub mod error;
pub mod instruments;
pub mod linalg;
pub mod noisy_opt;
pub mod random;
pub mod states;

pub use num_complex::Complex64;

pub use channels::{apply_channel, depolarizing, Channel};
pub use discrimination::{
    helstrom_bound, indirect_realization_for_optimal, multi_state_upper_bound, optimal_projectors,
    optimal_two_state_protocol, success_chain, success_direct, success_product, kraus_projector_protocol,
    DiscriminationResult, Protocol, RotatedBases, Variant,
};
pub use error::{Error, Result};
pub use instruments::{
    compose_sequential, instrument_from_realization, Instrument, Povm, SequentialInstrument,
    StatisticalRealization,
};
pub use linalg::{eig_hermitian, trace_norm, CMatrix, HermitianEig};
pub use noisy_opt::{
    noisy_multi_state_upper_bound, noisy_success, noisy_two_seq_upper_bound, one_receiver_depolarizing_optimum,
    two_seq_depolarizing_closed, two_seq_depolarizing_numeric, Candidates, ExtremeInstrument, NoisyOptimum, Regime,
    Representations, Sign, SweepPoint,
};
pub use states::{bloch_from_qubit, qubit_from_bloch, Bloch, DensityOperator, Ensemble};
