//! Scheduling of multi-stage jobs, each a DAG of coflows, on an `m x m`
//! non-blocking switch.
//!
//! The crate provides single-coflow optimal scheduling by matching
//! decomposition ([`bna`]), randomized delay-and-merge makespan schedulers for
//! general DAGs ([`dma`]) and rooted trees ([`rooted`]), a primal-dual job
//! ordering ([`ordering`]) with geometric grouping ([`grouping`]) for total
//! weighted completion time ([`gdm`]), plus an independent verifier, an
//! exhaustive oracle for tiny instances and workload generators.

pub mod baseline;
pub mod bna;
pub mod dagstats;
pub mod dma;
pub mod error;
pub mod gdm;
pub mod grouping;
pub mod model;
pub mod oracle;
pub mod ordering;
pub mod params;
pub mod rooted;
pub mod verify;
pub mod workload;

pub use error::{Error, Result};
pub use model::{Assignment, Coflow, CoflowId, DemandMatrix, Instance, Job, JobId, Schedule, TimedMatching};
pub use params::Beta;
pub use verify::Metrics;
