//! Quantum secret sharing layered under bit hiding.
//!
//! Shares of a stabilizer code are twirled by Paulis keyed with hidden bits; authorized
//! coalitions decode the key, undo the twirl on their own shares and erasure-decode.
//! Dense simulation covers small share counts; the five-qubit code runs against the
//! perfect oracle with the hidden string kept symbolic.

mod access;
mod chain;
mod code;
mod hiding;

pub use access::{AccessStructure, AccessStructureJson, Coalition, MAX_PARTIES};
pub use chain::{
    default_multiparty_attack, multiparty_seesaw_settings, multiparty_stand_in, verify_multiparty_chain, StandInCore, MAX_CHAIN_QUBITS,
};
pub use code::{five_qubit_encode, party_label, SharedSecret, StabilizerCode, LOGICAL_REGISTER};
pub use hiding::{multihide_encode, multihide_holders, multihide_reconstruct, OracleMultihide};
