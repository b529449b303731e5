//! Simulation and compilation for polarization-encoded quantum-to-quantum
//! Bernoulli factories.
//!
//! A quantum coin `|z⟩ ∝ z|H⟩ + |V⟩` is stored homogeneously as a pair
//! `(a, b)` with `z = a / b`, so the pole `z = ∞` is an ordinary value.
//! Three probabilistic linear-optical blocks act on coins:
//!
//! - [`blocks::invert`]: `|z⟩ → |1/z⟩`, deterministic.
//! - product / antiproduct: `|z₁⟩|z₂⟩ → |±z₁z₂⟩`, heralded.
//! - arithmetic / harmonic mean: `|z₁⟩|z₂⟩ → |(z₁+z₂)/2⟩` or `|2z₁z₂/(z₁+z₂)⟩`.
//!
//! [`chain`] wires blocks into circuits, [`compiler`] lowers rational
//! functions onto them, [`fock`] is an independent second-quantized model
//! of the optics (including partial photon distinguishability) and
//! [`estimation`] covers tomography and uniform coin sampling.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod blocks;
pub mod chain;
pub mod coin;
pub mod compiler;
pub mod density;
pub mod error;
pub mod estimation;
pub mod fock;
pub mod numeric;
pub mod reference_table;

pub use num_complex::Complex64;

pub use blocks::{BlockOutcome, ProductBranch, SumBranch};
pub use chain::{BlockCircuit, BlockKind, ChainCombo, WireRef};
pub use coin::{BlochPoint, Coin, Extended, ProjectiveAmplitude};
pub use density::{fidelity, DensityMatrix2, Mat2};
pub use error::{CircuitError, CompileError, Indefinite, StateError};
pub use numeric::{NumericPolicy, Visibility};
