//! Element-level HDG discretization: unknown layout, local bilinear forms,
//! stabilization, and the Crank-Nicolson element system.

pub mod local;
pub mod space;
pub mod stabilization;
pub mod system;

pub use local::{face_reduction, local_matrices, LocalBlocks};
pub use space::{Discretization, ElementKernel, FaceKernel, Layout, SpaceError};
pub use stabilization::{Stabilization, StabilizationError};
pub use system::{cn_element_system, CnElementSystem, ElementSystem};
