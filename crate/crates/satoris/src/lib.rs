#![doc = include_str!("../../../README.md")]

pub mod error;
pub mod formulations;
pub mod harness;
pub mod imputers;
pub mod io;
pub mod mask;
pub mod matrix;
pub mod metrics;
pub mod sdp;
pub mod subspace;

pub use error::{Error, Result};
pub use mask::{apply_mask, generate_mask, ObservationMask};
pub use matrix::{DensityMatrix, SvdResult};
pub use metrics::{aggregate, evaluate, ErrorReport};
pub use subspace::{build_prior, stability_series, subspace_overlap, SubspacePrior};

// The guide's code blocks run as doctests so the book cannot drift from
// the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/masking-and-metrics.md")]
    mod masking_and_metrics {}
    #[doc = include_str!("../../../book/src/subspace-priors.md")]
    mod subspace_priors {}
    #[doc = include_str!("../../../book/src/sdp-solver.md")]
    mod sdp_solver {}
    #[doc = include_str!("../../../book/src/explicit-methods.md")]
    mod explicit_methods {}
    #[doc = include_str!("../../../book/src/baselines-and-stacking.md")]
    mod baselines_and_stacking {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
}
