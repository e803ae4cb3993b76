//! Two-stage topic/intent classification for microblog posts.
//!
//! The crate covers the whole pipeline: post ingestion and cleaning
//! ([`corpus`]), tag-driven collection over a local corpus ([`bootstrap`]),
//! annotator agreement ([`annotation`]), lexicon-driven feature extraction
//! ([`features`]), the topic lookup stage and one-class intent models
//! ([`classify`]), and metrics, ROC and feature-group ablation ([`eval`]).

pub mod corpus;
pub mod bootstrap;
pub mod annotation;
pub mod features;
pub mod classify;
pub mod eval;
pub mod fixture;
