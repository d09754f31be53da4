//! Interprocedural tactic weaving for a Java-like mini-language.
//!
//! Pipeline: parse a program, load an API flow specification, enumerate its
//! branches and cluster each branch's nodes by annotation similarity, score
//! candidate code locations per cluster, generate typed statement sketches,
//! resolve sketch holes against visible initialized variables, then weave
//! the filled sketches into the program with export channels carrying
//! values between distant clusters. An evaluation harness replays the whole
//! flow over a bundled dataset and reports hit-rate and reciprocal-rank
//! quality metrics.

pub mod analysis;
pub mod annotate;
pub mod conform;
pub mod dataset;
pub mod eval;
pub mod fspec;
pub mod metrics;
pub mod minilang;
pub mod pipeline;
pub mod resolver;
pub mod score;
pub mod sketch;
pub mod weave;

/// Scalar used by the concrete pipeline for all scores and metrics. The
/// scoring kernel itself is generic over `num_traits::Float`.
pub type Score = f64;

/// Coefficients instantiated at the pipeline scalar.
pub type ScoreCoefficients = score::Coefficients<Score>;
