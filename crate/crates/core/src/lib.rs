//! Engine for programming interactive D3-style visualizations: template
//! fitting, interaction recommendation and automatic code augmentation.

pub mod ast;
pub mod augment;
pub mod classifier;
pub mod corpus;
pub mod dataset;
pub mod fitter;
pub mod mdp;
pub mod templates;
pub mod vocab;

pub use vocab::{InteractionState, InteractionType, VizType};
