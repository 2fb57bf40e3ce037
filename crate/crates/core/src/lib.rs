pub mod algebra;
pub mod deformation;
pub mod error;
pub mod numerics;
pub mod orbit;
pub mod semidirect;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
