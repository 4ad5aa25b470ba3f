//! Integration of time-varying cocyclic one-forms against group-valued paths.
//!
//! The pieces, bottom up: truncated word and forest algebras ([`algebra`]),
//! sampled group paths with p-variation controls ([`paths`]), cocyclic one-forms
//! ([`forms`]), the sewing integrator ([`sewing`]), level extension
//! ([`extension`]) and the calculus of dominated paths ([`dominated`]).
//! [`oracles`] holds brute-force references that share no code with the rest.

pub mod algebra;
pub mod dominated;
pub mod error;
pub mod extension;
pub mod forms;
pub mod json;
pub mod oracles;
pub mod paths;
pub mod sewing;

pub use algebra::{Forest, Kind, Multi, System, Tensor, Tree};
pub use dominated::{ControlledPath, DominatedPath, GroupEnhancement};
pub use error::{Error, Result};
pub use extension::{extend_to_level, CellLift};
pub use forms::{CocyclicForm, LinearForm, Polynomial, Smooth};
pub use paths::{Control, LengthControl, PvarControl, SampledGroupPath, SumControl};
pub use sewing::{sew, Schedule, SewingResult};

/// Size the global rayon pool from `COCYCLE_THREADS` when set. Later calls are no-ops.
pub fn init_threads() {
    if let Some(n) = std::env::var("COCYCLE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}
