pub mod bounds;
pub mod equidist;
pub mod error;
pub mod intarith;
pub mod occurrence;
pub mod polygon;
pub mod verify;
pub mod weil;

pub use error::{Error, Result};
