//! Programmable SumCheck for high-degree custom gates.
//!
//! The crate covers the functional protocol (field, MLE tables, gate IR,
//! SumCheck/ZeroCheck/PermCheck) and an analytical model of the accelerator
//! datapath that runs it (scheduler, lane plans, cycle and bandwidth model,
//! design-space exploration).

pub mod binding;
pub mod field;
pub mod gates;
pub mod io;
pub mod mle;
pub mod perf;
pub mod permcheck;
pub mod schedule;
pub mod sumcheck;
pub mod transcript;
pub mod witness;

pub use binding::{Binding, BindingError};
pub use field::{batch_inverse, Fr};
pub use gates::{builtin_gate, CompositePoly, GateId, Scalars};
pub use mle::Mle;
pub use perf::{model_sumcheck, HwConfig, PerfReport};
pub use schedule::{build_schedule, HwShape, Schedule};
pub use sumcheck::{FinalCheck, GateProof, ProofKind, Reject, SumcheckProof};
pub use transcript::Transcript;
