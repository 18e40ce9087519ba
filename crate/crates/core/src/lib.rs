//! End-to-end secure connection probability (SCP) of multi-hop relay routes
//! in multi-layer networks under heterogeneous Rician fading.
//!
//! Routes cross layers (satellite, high-altitude platform, ground, sea) with
//! per-layer path loss, transmit power, and eavesdropper density. Each layer
//! is secure when its weakest legitimate hop still outperforms the strongest
//! eavesdropper, whose locations follow a homogeneous Poisson process.
//!
//! | module | contents |
//! |---|---|
//! | [`specfun`] | Marcum Q, incomplete gamma, log-gamma, Kummer M, Rician sampling |
//! | [`model`] | layers, hops, routes, scenarios, topology sampling |
//! | [`closedform`] | the heterogeneous-Rician SCP expression and Rayleigh/Erlang baselines |
//! | [`montecarlo`] | ground-truth simulation with Poisson-deployed eavesdroppers |
//! | [`verify`] | quadrature and sampling oracles for the identities behind the closed form |

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN along with the
// out-of-range values, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod error;
pub mod model;
pub mod montecarlo;
pub(crate) mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
