//! Shortest-path-biased backpressure (SP-BP) routing and distributed MaxWeight
//! link scheduling for wireless multi-hop networks.
//!
//! The crate is organized along the per-slot pipeline:
//!
//! - [`topology`]: random connectivity graphs, link rates and antenna counts.
//! - [`conflicts`]: SISO conflict graphs and attributed capacity hypergraphs.
//! - [`bias`]: shortest-path bias matrices.
//! - [`queueing`]: per-commodity FIFO queues, backlogs and queue evolution.
//! - [`commodity`]: exclusive and MaxU (link-sharing) rate assignment.
//! - [`scheduler`]: LGS, LGS-ACH and LGS-MIMO schedulers.
//! - [`engine`]: traffic generation and the time-slotted simulation loop.
//! - [`experiment`]: config-driven sweeps, CSV output and summaries.

pub mod bias;
pub mod commodity;
pub mod conflicts;
pub mod engine;
mod error;
pub mod experiment;
pub mod queueing;
mod seed;
pub mod scheduler;
pub mod topology;

pub use error::{Error, Result};
pub use seed::{derive_seed, seeded_rng};
