//! Numerical and semi-analytic oracles for the closed forms.

pub mod bound_state;
pub mod invariance;
pub mod kernel;
pub mod spectrum;
pub mod trace;
pub mod transfer;

pub use bound_state::{construct_bound_state, BoundState};
pub use invariance::{perturbation_invariance_test, InvarianceReport};
pub use kernel::{kernel_count_svd, kernel_pair_svd, KernelCount, KernelPair};
pub use spectrum::{sample_spectrum, Spectrum};
pub use trace::{trace_index, trace_report, TraceReport, DEFAULT_T_GRID};
pub use transfer::{sandwich_check, transfer_matrix, TransferMatrix};
