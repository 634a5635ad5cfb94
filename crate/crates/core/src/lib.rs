//! Coherent-state quantization toolkit: canonical and affine coherent
//! states, weak operator symbols, phase-space geometry, enhanced classical
//! dynamics, a Crank–Nicolson reference solver and the reducible-representation
//! ladder algebra. Every numerical type is generic over `f32`/`f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod coherent;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod model_two;
pub mod numerics;
pub mod scalar;
pub mod schrodinger;
pub mod symbols;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Grid64 = numerics::Grid<f64>;
pub type Grid32 = numerics::Grid<f32>;
pub type WaveFunction64 = numerics::WaveFunction<f64>;
pub type WaveFunction32 = numerics::WaveFunction<f32>;
pub type Fiducial64 = coherent::Fiducial<f64>;
pub type Fiducial32 = coherent::Fiducial<f32>;
pub type PhasePoint64 = coherent::PhasePoint<f64>;
pub type PhasePoint32 = coherent::PhasePoint<f32>;
pub type SymbolFn64 = symbols::SymbolFn<f64>;
pub type SymbolFn32 = symbols::SymbolFn<f32>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type Trajectory32 = dynamics::Trajectory<f32>;
pub type ReducibleRep64 = model_two::ReducibleRep<f64>;
pub type ReducibleRep32 = model_two::ReducibleRep<f32>;
