//! Exact truncated Fock-space calculus for weighted shift algebras on
//! directed graphs.
//!
//! The library builds finite truncations of the Fock space of a directed
//! graph, evaluates rationally-weighted creation operators on them, and
//! solves windowed commutant problems by exact rational elimination. A
//! batch CLI (`fockweight`) drives scenario configs combining a graph, a
//! weight-rule program and a task list.

pub mod commutant;
pub mod config;
pub mod fock;
pub mod graph;
pub mod lexer;
pub mod linalg;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod weight;
