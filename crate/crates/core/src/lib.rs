//! Numerical toolkit for quantum data hiding.
//!
//! The crate builds bit- and qubit-hiding schemes over dense multi-register
//! operators, checks the algebraic identities their security rests on, and
//! bounds how well LOCC adversaries can tell hidden values apart:
//!
//! - [`operators`]: labelled registers, states, norms, partial traces, entropies.
//! - [`pauli`]: Pauli strings with exact phases, twirls and the Bell expansion.
//! - [`channels`]: Kraus/Choi channels, POVMs and finite-round LOCC protocols.
//! - [`bit_hiding`]: Werner hiding pairs, tensoring and a perfect-oracle double.
//! - [`dual_hiding`]: bits→qubits (teleportation form) and qubits→bits (dense coding).
//! - [`security`]: global, PPT, seesaw and tomographic distinguishability, plus the bound-chain verifiers.
//! - [`multiparty`]: access structures, the five-qubit code and the multiparty chain.
//! - [`resources`]: keyed encryption, the Pauli pad and the key-length entropy audit.

#![forbid(unsafe_code)]

pub mod bit_hiding;
pub mod channels;
pub mod dual_hiding;
mod error;
pub mod multiparty;
pub mod operators;
pub mod pauli;
pub mod random;
pub mod resources;
pub mod security;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Numerical tolerances shared by validation routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    pub norm: f64,
    pub compare: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            norm: 1e-9,
            compare: 1e-8,
        }
    }
}

/// Default bound on the total dimension of any layout.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Dimension cap, read once from `QHIDE_DIM_CAP` (falls back to [`DEFAULT_DIM_CAP`]).
pub fn dim_cap() -> usize {
    static CAP: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("QHIDE_DIM_CAP")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_DIM_CAP)
    })
}

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
