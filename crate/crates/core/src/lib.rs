//! Wiener and Ornstein–Uhlenbeck bridges built three ways from one driving
//! Wiener path, with exact closed-form deviation statistics and a Monte
//! Carlo harness that checks the two against each other.
//!
//! The three constructions are:
//!
//! * anticipative ([`BridgeKind::Av`]): pointwise correction by the terminal
//!   value of the driver,
//! * integral representation ([`BridgeKind::Ir`]): a stochastic integral
//!   against the driver, the strong solution of the bridge SDE,
//! * space-time transform ([`BridgeKind::St`]): the driver evaluated at a
//!   transformed time and rescaled.
//!
//! All three have the same law as processes but different joint laws with
//! the process they are built from. [`wiener`] and [`ou`] hold the closed
//! forms, [`path`] samples the coupled paths exactly, and [`mc`] estimates
//! the same quantities and gates them against the oracles.

pub mod error;
pub mod hyper;
pub mod mc;
pub mod ou;
pub mod path;
pub mod quadrature;
pub mod scalar_gauss;
pub mod wiener;

pub use error::{Error, Result};
pub use ou::{ProcessParams, TimeChange};
pub use scalar_gauss::GaussianMoment;
pub use wiener::{BridgeKind, BridgeSpec, RegionLabel, RegionPoint};
