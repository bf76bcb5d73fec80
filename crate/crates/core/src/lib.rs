//! Game-description analysis workbench.
//!
//! The crate parses a small S-expression game-description language, compiles
//! a playable subset into fast engines, measures how well simple heuristics
//! play each game, and runs the downstream analytics: feature extraction,
//! regression from description features to heuristic strength, and
//! embedding/clustering of the game corpus.
//!
//! Module map:
//! - [`parser`]: tokens, trees, ludeme extraction, deterministic printing.
//! - [`engine`]: compiled games, boards, states, legal moves, outcomes.
//! - [`heuristics`]: the portfolio of state evaluators.
//! - [`search`]: depth-limited alpha-beta plus reference oracles.
//! - [`tournament`]: the win-rate measurement protocol.
//! - [`dataset`]: the games-by-ludemes feature matrix and label joins.
//! - [`regress`]: from-scratch regressors with leave-one-out evaluation.
//! - [`cluster`]: exact t-SNE, DBSCAN, and decision-tree explanations.

pub mod cluster;
pub mod dataset;
pub mod engine;
pub mod heuristics;
pub mod parser;
pub mod regress;
pub mod search;
pub mod tournament;
