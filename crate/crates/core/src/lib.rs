pub mod continuum;
pub mod coupling;
pub mod discrete;
pub mod error;
pub mod experiment;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod tree;
