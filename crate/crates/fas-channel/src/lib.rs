//! Analytical and Monte Carlo models of the fluid antenna system (FAS)
//! channel.
//!
//! A fluid antenna switches a single radiator among `N` ports spread over an
//! aperture of `W` wavelengths and rides the strongest instantaneous gain,
//! `g_FAS = max_k |g_k|`. The ports are correlated Rayleigh channels under
//! Jake's model, which makes the exact distribution of the maximum an
//! `N`-fold integral. This crate implements the full modelling ladder:
//!
//! * the exact eigen-representation of the correlated gains and a sampler
//!   for it ([`channel::sample_exact`]);
//! * the first-stage approximation that keeps only the epsilon-rank dominant
//!   eigendirections and turns the outage probability into a
//!   `2 x epsilon-rank`-fold integral ([`outage::stage1_cdf`]);
//! * the second-stage replication construction that collapses the outage
//!   probability to a power of single integrals ([`outage::stage2_cdf`]);
//! * the single-shared-latent reference parameterisation whose correlation
//!   matches Jake's model only against the first port
//!   ([`outage::reference_outage_fas1`]);
//! * the spectral side: Jake covariance matrices, their eigendecompositions,
//!   epsilon-rank estimates and the limiting eigenvalue law
//!   ([`covariance`]);
//! * the special-function kernel the evaluators stand on: Bessel `J0`,
//!   scaled `I_k`, and the Marcum Q-function with a cancellation-free
//!   complementary logarithm ([`specfun`]).
//!
//! The `fas` binary exposes the evaluators as subcommands that emit CSV/JSON
//! together with a reproducibility manifest; `fas validate` runs the named
//! invariant suites.

pub mod channel;
pub mod covariance;
pub(crate) mod dd;
pub mod error;
pub mod linalg;
pub mod outage;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod validate;

pub use error::{FasError, Result};

/// Book chapters double as doctest hosts so every snippet in `book/` is
/// compiled and run by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/channel-model.md")]
    mod channel_model {}
    #[doc = include_str!("../../../book/src/approximations.md")]
    mod approximations {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/outage.md")]
    mod outage {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
