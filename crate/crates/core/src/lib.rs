//! Monte Carlo engine for the Volterra sandwiched volatility (VSV) market.
//!
//! Volatility `Y` is a sandwiched process kept strictly between two
//! deterministic curves `φ < ψ` by a drift that explodes at both edges and is
//! driven additively by a Gaussian Volterra noise `Z` (fractional Brownian
//! motion by default). Prices are geometric with volatility `Y`.
//!
//! Options with discontinuous payoffs are priced through Malliavin
//! integration-by-parts representations, which replace the payoff by its
//! antiderivative times a stochastic weight so that discretisation error does
//! not blow up at the discontinuities.
//!
//! Module map:
//!
//! * [`driver`]: time grid, seeded streams, correlation algebra, Brownian increments.
//! * [`noise`]: Volterra kernels and the two noise backends.
//! * [`sde`]: sandwich bounds, singular drifts, drift-implicit Euler stepping.
//! * [`market`]: log-price scheme, martingale density, stochastic integrals.
//! * [`payoff`]: atomic payoffs with closed-form `F`, `G` and basket `G₁`.
//! * [`estimators`]: the five expectation estimators and sample statistics.
//! * [`simulation`]: per-path assembly of everything above into path bundles.

pub mod driver;
pub mod error;
pub mod estimators;
pub mod market;
pub mod noise;
pub mod payoff;
pub mod quad;
pub mod sde;
pub mod simulation;
pub mod timefn;

pub use driver::{CorrelationStructure, DriverIncrements, MixedIncrements, StreamFactory, TimeGrid};
pub use error::{Error, Result};
pub use estimators::{EstimatorKind, EstimatorResult, PathSummary};
pub use market::MarketParams;
pub use noise::{BackendMode, KernelSpec, NoiseBackend};
pub use payoff::{Atom, AtomKind, PayoffSpec};
pub use sde::{DriftSpec, SandwichBounds, VolatilityPath};
pub use simulation::{PathBundle, PathSimulator, VsvModel};
pub use timefn::TimeFn;
