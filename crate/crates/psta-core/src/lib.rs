//! A probabilistic soft type assignment calculus, end to end: raw terms
//! with surface reduction, exact evaluation of terms to rational
//! distributions over surface normal forms, a checker for explicit typing
//! derivations with the quantitative rank/depth/weight metrics and their
//! subject-reduction transformers, data encodings up to a full
//! probabilistic-Turing-machine compiler, and an independent machine
//! simulator to compare against.

pub mod builders;
pub mod derivation;
pub mod dist;
pub mod encode;
pub mod eval;
pub mod generate;
pub mod json;
pub mod ptm;
pub mod sugar;
pub mod surface;
pub mod syntax;
pub mod term;
pub mod transform;
pub mod types;

pub use derivation::{check_derivation, metrics, Derivation, Judgment};
pub use dist::SurfaceDistribution;
pub use eval::{confluence_oracle, evaluate, uniformity_check, EvalReport, Strategy};
pub use surface::{find_redexes, is_snf, step, RedexSite, StepResult};
pub use term::Term;
pub use transform::{generation_peel, subject_reduce, weighted_substitute};
pub use types::Type;
