//! Deterministic and randomly initialized one-layer ReLU networks that map
//! separated point sets to linearly separable feature sets, with the matching
//! width and margin bounds and Monte Carlo checks of their probabilistic claims.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cover;
pub mod detnet;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod mc_verify;
pub mod rinn;
pub mod scalar;
pub mod seeding;
pub mod sep_check;

pub use error::{Error, Result};
pub use geometry::{LabeledDataset, MulticlassDataset, OrderedPoints, Sign};
pub use scalar::Scalar;

pub type Dataset = LabeledDataset<f64>;
pub type Dataset32 = LabeledDataset<f32>;
pub type Multiclass = MulticlassDataset<f64>;
pub type Layer = rinn::ReluLayer<f64>;
