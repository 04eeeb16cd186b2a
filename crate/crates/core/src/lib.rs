//! Exact computations with formal group laws, their Bernoulli numbers, the
//! cobar cocycles attached to the circle transfer, level one modular forms
//! and the resulting invariants on comodule primitives.

pub mod cobar;
pub mod error;
pub mod fgl;
pub mod invariants;
pub mod modular;
pub mod poly;
pub mod rational;
pub mod series;

pub use error::{Error, Result};
pub use poly::{Gen, Homogeneity, Mono, Poly};
pub use rational::{p_valuation, Rat, Valuation};
pub use series::{TruncSeries, Vars};
