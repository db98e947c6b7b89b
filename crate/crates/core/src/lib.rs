//! Promises about programs between autonomous agents: statement grammar,
//! fragments and their life-cycle, trust appreciation and trust-driven
//! behaviour, reputation spreading, and a deterministic scenario engine.
//!
//! The numeric core is generic over [`Scalar`]; `f64` aliases are provided
//! at the root, and exact arithmetic is available through [`Rational`].

pub mod agent;
pub mod appraisal;
pub mod corpus;
pub mod engine;
pub mod ids;
pub mod level;
pub mod lifecycle;
pub mod reputation;
pub mod scalar;
pub mod statement;
pub mod trust;

/// Discrete simulation time.
pub type Tick = u64;

pub use agent::{Action, AgentError, FailReason, Reply};
pub use appraisal::{Attribute, AttributeVector, ConsultantProfile, InstallVerdict, Route};
pub use engine::{expect_check, run, EngineError, Policy, Report, Scenario, Trace};
pub use ids::{AgentId, InvalidName, ProgramId, TaskId};
pub use level::TrustLevel;
pub use lifecycle::{LifecycleError, LifecycleState};
pub use scalar::{format_scalar, Rational, Scalar};
pub use statement::{parse, render, DirectionalKind, Statement, StatementError};
pub use trust::{AppreciationKey, AppreciationKind, Outcome, TramPolicy, TrustError, TrustStore};

pub type Engine = engine::Engine<f64>;
pub type ExactEngine = engine::Engine<Rational>;
pub type AgentState = agent::AgentState<f64>;
pub type LifecycleRecord = lifecycle::LifecycleRecord<f64>;
