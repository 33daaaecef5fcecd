//! Multi-constitutive neural network (MCNN) solver for one-dimensional
//! large-strain consolidation.
//!
//! A single tanh network takes `(X, t)` plus a one-hot selector of the
//! constitutive law and predicts the deformation measure `J` for that law.
//! The crate also carries an explicit finite-difference reference solver and
//! the post-processing used to compare the two.

pub mod analysis;
pub mod constitutive;
pub mod error;
pub mod fdref;
pub mod mlp;
pub mod physics;
pub mod sampling;
pub mod training;

pub use constitutive::{encode_law, LawId, MaterialProps, OneHotLaw};
pub use error::{Error, Result};
pub use mlp::{Jet, MlpArch, ParamVector, SamplePoint};
