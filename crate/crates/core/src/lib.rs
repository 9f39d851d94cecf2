//! Compact routing schemes with one-round locally verifiable certificates.
//!
//! Three schemes are built over a [`graph::WeightedGraph`]:
//!
//! * [`tz`]: the landmark/cluster stretch-3 scheme with its certifier in [`tz_cert`];
//! * [`ni`]: a name-independent scheme using vicinity balls, color classes and
//!   per-color directories, certified by [`ni_cert`] with hash fingerprints;
//! * [`hk`]: a k-level landmark hierarchy with tree routing, certified by [`hk_cert`].
//!
//! Routing is executed by [`sim`], tampering is produced by [`adversary`], and the
//! counterexample graphs live in [`fixture`]. The crate is `no_std` and only
//! needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adversary;
pub mod color;
pub mod error;
pub mod fingerprint;
pub mod fixture;
pub mod generate;
pub mod graph;
pub mod hk;
pub mod hk_cert;
pub mod ni;
pub mod ni_cert;
pub mod oracle;
pub mod params;
pub mod sim;
pub mod tree;
pub mod tz;
pub mod tz_cert;
pub mod verdict;

pub use error::BuildError;
pub use graph::{Edge, GraphError, NodeId, Port, PortOverride, WeightedGraph};
pub use oracle::DistanceOracle;
pub use verdict::{Reason, Step, Verdict, Witness};
