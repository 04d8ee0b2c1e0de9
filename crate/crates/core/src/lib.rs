//! Sum-rate analysis for large OFDMA downlink networks.
//!
//! The crate models a circular network of `B` transmitters serving `K`
//! uniformly scattered users over `N` OFDMA blocks, with truncated
//! power-law path loss and one of four small-scale fading families
//! (Rayleigh, Nakagami, Weibull, log-normal). On top of that model it
//! provides:
//!
//! * Monte Carlo lower/upper bounds on the optimal downlink sum rate
//!   ([`bounds::mc_bounds`]) plus closed-form asymptotic brackets and
//!   scaling-law tables ([`bounds`]).
//! * Extreme-value machinery for the per-user SNR: the exact gain and
//!   SNR distributions induced by the geometry, scaling points
//!   `l_K` with `F(l_K) = 1 - 1/K`, growth functions and concentration
//!   bands ([`snr`], [`fading`]).
//! * A deterministic fixed-point relaxation of the sum-rate problem and
//!   a block-coordinate projected-gradient solver for it ([`op`]),
//!   including a multi-beam (MISO) variant ([`miso`]).
//! * A distributed max-quotient scheduler and its achieved-rate
//!   simulator ([`sched`]).
//! * Numeric versions of five network design rules ([`design`]).
//!
//! Fading families are strategy objects behind the [`fading::Fading`]
//! trait, looked up by name in a runtime registry, so configuration
//! files select them as tagged unions like
//! `{"family": "nakagami", "m": 2.0, "w": 3.0}`.
//!
//! All Monte Carlo entry points take an explicit seed and derive
//! per-entity ChaCha substreams from it, so results are reproducible
//! bit-for-bit, independent of thread count, and nested: enlarging
//! `K`, `B` or the trial count never changes the draws already made.
//! Rates are in nats throughout.

pub mod bounds;
pub mod design;
pub mod error;
pub mod fading;
pub mod geometry;
pub mod miso;
pub mod numerics;
pub mod op;
pub mod rng;
pub mod sched;
pub mod snr;

pub use error::Error;

/// Euler-Mascheroni constant, used by the fixed-point bracket prefactors.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Crate result type.
pub type Result<T> = std::result::Result<T, Error>;
