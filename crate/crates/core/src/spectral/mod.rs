//! Spectral densities, tent smoothing, and translation-invariant kernels.

pub mod density;
pub mod kernel;
pub mod quadrature;
pub mod tent;

pub use density::{bound_densities, smooth_density, BaseProfile, DensityConfig, Derivation, GridProfile, SpectralDensity};
pub use kernel::{kernel_eval, kernel_table, smoothed_kernel_identity_check, write_kernel_csv, KernelEvaluator, KernelRow, KernelSpec, Variant};
pub use quadrature::{QuadratureRule, SpectralGrid};
pub use tent::{tent_eval, tent_ft_eval, TentWindow};
