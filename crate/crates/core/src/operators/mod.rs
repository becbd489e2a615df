//! Dense operators on labelled multi-register spaces.

mod dense;
mod entangled;
mod entropy;
mod layout;
pub mod linalg;
mod states;

pub use dense::{DenseOperator, OperatorJson};
pub use entangled::{helstrom_channel, max_entangled, max_entangled_on, ricochet};
pub use entropy::{
    conditional_entropy, conditional_mutual_information, entropy_of, mutual_information,
    shannon_entropy, von_neumann_entropy,
};
pub use layout::{HilbertLayout, Register};
pub use linalg::trace_norm_matrix;
pub use states::{DensityOperator, PureState};

/// Trace norm `Tr √(A†A)`.
pub fn trace_norm(a: &DenseOperator) -> f64 {
    a.trace_norm()
}

/// `Tr_rest(A)`, keeping the named registers.
pub fn partial_trace<S: AsRef<str>>(a: &DenseOperator, keep: &[S]) -> crate::Result<DenseOperator> {
    a.partial_trace(keep)
}
