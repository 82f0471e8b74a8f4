//! Resource distribution policies for multilevel security systems, and the
//! evaluation nets that run user sessions against them.
//!
//! - [`policy`]: the group-first and level-first models and their access and
//!   interaction predicates.
//! - [`net`]: the session nets and their execution engine.
//! - [`audit`]: the append-only decision log.
//! - [`policy_io`]: policy files.
//! - [`verify`]: brute-force cross-checks.
//! - [`cli`]: the `enetacl` command line.

pub mod audit;
pub mod cli;
pub mod net;
pub mod policy;
pub mod policy_io;
pub mod verify;

pub use net::{build_engl_net, build_enlg_net, build_net, ENet, Session, Trace};
pub use policy::{AccessWitness, EnglPolicy, EnlgPolicy, Model, Policy, SecurityLevel};
