//! Pattern recognition for Whitehead-minimal words in free groups.
//!
//! The crate is organized bottom-up:
//!
//! * [`freegroup`]: words, cyclic words, Whitehead automorphisms and the
//!   deterministic greedy minimization used to label data.
//! * [`features`]: subword counting functions and the feature maps built on
//!   them.
//! * [`numerics`]: the small dense linear algebra the classifiers need.
//! * [`classifiers`]: principal-component flats, distance classifiers, linear
//!   classifiers, quantizers, decision trees and K-means.
//! * [`harness`]: dataset generation, training/evaluation pipelines, feature
//!   selection and the length-reduction clustering experiment.

pub mod classifiers;
pub mod error;
pub mod features;
pub mod freegroup;
pub mod harness;
pub mod numerics;

pub use error::{Error, Result};
