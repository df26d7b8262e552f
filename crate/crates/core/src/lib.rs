//! Scene-aware trajectory forecasting toolkit.
//!
//! The crate discovers a taxonomy of motion scenes from interpretable
//! trajectory features, trains a lightweight tree-ensemble classifier over
//! the discovered pseudo-labels, scores a pool of frozen expert predictors
//! per scene, and routes each input segment to the expert with the best
//! held-out accuracy for its predicted scene.
//!
//! Pipeline stages, bottom to top:
//!
//! - [`trajdata`]: log ingestion, sliding-window segmentation, augmentation
//! - [`features`]: the 7-component per-segment scene descriptor
//! - [`encoder`] + [`kmeans`]: scene context encoding and taxonomy discovery
//! - [`classifier`]: gradient-boosted scene classification
//! - [`experts`]: the frozen predictor pool
//! - [`scheduler`]: evidence table, policy table, and routed inference
//! - [`eval`]: metrics, baselines, ablations, sweeps, and the synthetic
//!   benchmark

pub mod classifier;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod experts;
pub mod features;
pub mod geom;
pub mod kmeans;
pub mod scheduler;
pub mod trajdata;

pub use error::{Error, Result};
