//! Wind Riemannian structures: Zermelo data with winds of any strength, the
//! conic Finsler metric they induce, lightlike geodesics of the associated
//! stationary spacetime, wind balls, and completeness criteria.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod geodesic;
pub mod manifold;
pub mod output;
pub mod reachability;
pub mod scenarios;
pub mod wind;

pub use error::{ConeCondition, DomainError, Error, Result};
