//! Finite Ramsey combinatorics for colourings of pairs with bounded row
//! alternation.
//!
//! * [`colouring`]: packed 2-colourings of `[m]^2`, unstability, homogeneity.
//! * [`construct`]: product colourings with few alternations and no large
//!   homogeneous sets.
//! * [`extract`]: homogeneous sets from colourings with few alternations.
//! * [`oracle`]: exact maximum homogeneous set search.
//! * [`montecarlo`]: run probabilities in random bit strings.

pub mod clr;
pub mod colouring;
pub mod construct;
pub mod error;
pub mod extract;
pub mod montecarlo;
pub mod oracle;
pub mod selftest;

pub use colouring::{Colouring, Homogeneity, IndexSet, InstabilityProfile};
pub use error::{Error, Result};
