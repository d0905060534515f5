//! Construction and numerical verification of strongly nonlocal unextendible
//! product bases (UPBs) in heterogeneous tripartite systems.
//!
//! The crate is organized around five layers:
//!
//! - [`linalg`]: dense complex linear algebra with explicit tolerances
//!   (tensor products, bipartition matricization, rank/nullspace/eigh,
//!   partial transpose).
//! - [`constructions`]: generators for the state families — the 3⊗3⊗4 set of
//!   size 28, its generalization to d_A⊗d_B⊗d_C of size d_Ad_Bd_C − 8, the
//!   layered families of size d_Ad_Bd_C − 8(n+1), their removed-state
//!   complements, and the grid/tiling model behind them.
//! - [`verify`]: executable checks — orthogonality, completeness,
//!   unextendibility evidence via seesaw search, strong-nonlocality
//!   certificates via orthogonality-preserving POVM triviality, block
//!   lemma verifiers, and a greedy LOCC distinguishability test.
//! - [`entanglement`]: the PPT entangled state built from a UPB complement
//!   and its spectral / partial-transpose / range analysis.
//! - [`protocol`]: the entanglement-assisted LOCC discrimination protocol
//!   for the 3⊗3⊗4 set, with resource accounting.
//!
//! File formats for the CLI live in [`io`].

pub mod constructions;
pub mod entanglement;
pub mod io;
pub mod linalg;
pub mod protocol;
pub mod verify;

pub use linalg::{Bipartition, CMatrix, CVector, SystemDims, ToleranceConfig, C64};
