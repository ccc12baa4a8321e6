//! Transmit power minimization for a full-duplex base station serving an
//! uplink and a downlink user through a simultaneously transmitting and
//! reflecting surface.
//!
//! The linear algebra, system model, closed-form power allocation and the QSDP
//! solver are generic over [`scalar::Real`] (`f32` or `f64`). Everything that
//! draws channels or runs the optimization pipeline is `f64`; the aliases
//! below name those instantiations.

pub mod error;
pub mod numerics;
pub mod scalar;
pub mod channel;
pub mod system;
pub mod power;
pub mod qsdp;
pub mod beamforming;
pub mod ao;
pub mod benchmarks;
pub mod experiment;

pub use error::{Error, Result, Stage};

pub type Complex = scalar::Cx<f64>;
pub type Matrix = numerics::HermitianMatrix<f64>;
pub type Channels = channel::ChannelSet<f64>;
pub type Profile = system::StarProfile<f64>;
pub type Powers = system::PowerPair<f64>;
pub type Rates = system::RateRequirements<f64>;
pub type Noise = system::NoiseParams<f64>;
pub type Problem = qsdp::QsdpProblem<f64>;
pub type Solution = qsdp::QsdpSolution<f64>;

pub type Matrix32 = numerics::HermitianMatrix<f32>;
pub type Profile32 = system::StarProfile<f32>;
pub type Problem32 = qsdp::QsdpProblem<f32>;
