//! QAOA for MAX k-SAT: instance handling, circuit synthesis for 3- and
//! 4-literal clauses, exact simulation with mid-circuit measurement, a
//! direct statevector evaluator with adjoint gradients, basin-hopping angle
//! search and the benchmark quantities built on top of them.

pub mod bench;
pub mod circuit;
pub mod error;
pub mod fastsim;
pub mod optimizer;
pub mod sat;
pub mod sim;

pub use circuit::{AngleSchedule, Circuit, GateKind, GateOp};
pub use error::{Error, Result};
pub use fastsim::QaoaEvaluator;
pub use sat::{Assignment, Clause, KSatInstance, Literal};
