//! Tree representation: cell-supported bases, the kernel `K^Φ` on `ℤᵈ × ℕ`,
//! and the maps `π` and `ϖ_N` out of it.

mod basis;
mod kernel;
mod window;

pub use basis::CellBasis;
pub use kernel::{tree_kernel_entry, tree_kernel_matrix, TreeKernel, SECTION_HERMITIAN_TOLERANCE, SECTION_SPECTRUM_TOLERANCE};
pub use window::{pi_project, varpi_truncate, BinaryField, LevelPartition, TreeWindow, MAX_WINDOW_SITES};
