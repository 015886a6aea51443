//! FRSZ2 block floating-point compression and a restarted GMRES solver
//! whose Krylov basis is stored in a configurable compressed format.

pub mod analyze;
pub mod basis;
pub mod bench;
pub mod codec;
pub mod solver;
pub mod sparsela;
