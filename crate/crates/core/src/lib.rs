//! Local covariate selection and causal effect estimation that works the same
//! way in acyclic and cyclic structural causal models.
//!
//! * [`graph`]: directed graphs, σ/d-separation, acyclification and the
//!   backdoor criterion.
//! * [`sim`]: random simple SCMs (linear and tanh), observational and
//!   interventional sampling, closed-form effects.
//! * [`ci`]: conditional-independence answering over a graph oracle or
//!   Fisher-Z tests on data.
//! * [`mb`]: Markov blanket discovery (TC, Fast-IAMB, IAMB, HITON-MB).
//! * [`lsas`]: the local adjustment-set search with rules R1 and R2.
//! * [`bench`]: the benchmark grid and its metrics.

pub mod bench;
pub mod ci;
pub mod error;
pub mod graph;
pub mod lsas;
pub mod mb;
pub mod par;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, Node, NodeSet, SeparationKind};
