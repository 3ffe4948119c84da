//! Time grid, random streams, correlation algebra and Brownian increments.
//!
//! The model is driven by a `2d`-dimensional Brownian motion
//! `B = (Bˢ₁..Bˢ_d, Bʸ₁..Bʸ_d)` with correlation matrix `Σ`. Internally we
//! simulate the canonical independent motion `W̃ = 𝒰⁻¹B`, where `𝒰` is the
//! upper-triangular factor of `Σ`, and derive `B = 𝒰W̃` and the lower-factor
//! motion `W = L⁻¹B = ρW̃` on demand.

mod correlation;
mod grid;
mod increments;
mod rng;

pub use correlation::{CorrelationError, CorrelationStructure, SquareMatrix};
pub use grid::TimeGrid;
pub use increments::{mix_increments, sample_driver, DriverIncrements, MixedIncrements, RowMatrix};
pub use rng::{PathRng, StreamFactory};
