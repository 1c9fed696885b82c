//! Democratic sequences.
//!
//! A democratic sequence over an alphabet with assigned frequencies λ(a) is
//! built greedily: each new term is the letter whose running frequency lags
//! its target the most. Every letter then attains its assigned frequency,
//! for finite and countable alphabets alike.
//!
//! Modules:
//! - [`spec`] and [`scheduler`]: frequency tables and the selection rule.
//! - [`diagnostics`]: deficit/excess ledgers, deviation traces, per-step audits.
//! - [`numeration`]: base-b digit-increment words and their three generators.
//! - [`torus`]: certified β whose powers visit torus cells on a democratic plan.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod numeration;
pub mod scalar;
pub mod scheduler;
pub mod spec;
pub mod torus;

pub use error::{DiagError, NumerationError, ScheduleError, SpecError, TorusError};
pub use scalar::{Mode, Scalar};
pub use scheduler::{generate, LetterId, SchedulerState, Sequence};
pub use spec::{FrequencySpec, LazyWeights};

/// Exact arbitrary-size rationals, the exact-mode scalar.
pub type Rational = num_rational::BigRational;
