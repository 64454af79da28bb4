//! Energy-minimal scheduling of multi-cell OFDMA networks under a deadline.
//!
//! Base stations that transmit together interfere, so every subset of cells
//! (a cluster) has its own achievable rates. A schedule picks clusters and
//! time shares so every user receives its demand before the deadline at the
//! lowest energy. [`algorithms::ocs`] solves this exactly by column
//! generation; [`algorithms::bound`] brackets the optimum with local
//! interference enumeration for networks too large to price exactly.
//!
//! [`netgen`] builds hexagonal test networks and [`oracle`] holds the
//! brute-force references used in tests.

pub mod algorithms;
pub mod error;
pub mod lp;
pub mod master;
pub mod model;
pub mod netgen;
pub mod oracle;
pub mod pricing_exact;
pub mod pricing_local;

pub use error::{Error, ModelError, Result};
