//! Error taxonomy shared by every module.
//!
//! Three classes cover everything the crate can reject:
//!
//! * [`Error::Structural`] — malformed input: shapes disagree, indices out of
//!   range, unparseable rationals, serialisation failures.
//! * [`Error::Domain`] — well-formed input outside an operation's documented
//!   domain: a non-symmetric table passed to a reflection solver, a
//!   non-stochastic distribution, a mortal starting point for an orbit that
//!   requires immortality.
//! * [`Error::Resource`] — the operation was abandoned because it would
//!   exceed an explicit budget (enumeration sizes, iteration caps).

use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input (shape, range, or parse failure).
    #[error("structural error: {0}")]
    Structural(String),
    /// Input is well formed but outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An explicit budget or resource cap was exceeded.
    #[error("resource error: {0}")]
    Resource(String),
}

impl Error {
    /// Convenience constructor for [`Error::Structural`].
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    /// Convenience constructor for [`Error::Domain`].
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Convenience constructor for [`Error::Resource`].
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}
