//! Polyhedral models of generalised probabilistic theories, bipartite boxes,
//! and optimal winning probabilities for the adaptive CHSH game.

pub mod boxes;
pub mod chsh;
pub mod composite;
pub mod cone;
pub mod dd;
pub mod epsilon;
pub mod game;
pub mod gpt;
pub mod linalg;
pub mod lp;
pub mod quantum;
pub mod sample;
pub mod scalar;

pub use cone::{ConeH, ConeV, GeometryError};
pub use lp::{Cmp, LinearProgram, LpError, LpSolution};
pub use scalar::{rat, Rat, Scalar};
