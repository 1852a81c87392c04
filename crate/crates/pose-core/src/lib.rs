//! Memory-erasure challenge-response protocols over depth-robust graphs.
//!
//! The crate provides:
//!
//! - a keyed random-oracle abstraction with call counting and budgets
//!   ([`oracle`]);
//! - the DAG families the protocols label: butterfly connectors, the
//!   recursive depth-robust family, its partial and composite variants
//!   ([`graph`]);
//! - reference and memory-metered in-place labelling ([`labeling`]);
//! - the three protocol instantiations behind one five-algorithm interface
//!   ([`protocol`]);
//! - the bounded-adversary security experiment and Monte Carlo driver
//!   ([`experiment`], [`adversary`]);
//! - verification oracles (depth-robustness, connector routing) and every
//!   closed-form security bound ([`analysis`]).

pub mod adversary;
pub mod analysis;
pub mod experiment;
pub mod graph;
pub mod labeling;
pub mod oracle;
pub mod protocol;
