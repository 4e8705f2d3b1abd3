pub mod adm;
pub mod census;
pub mod cli;
pub mod deform;
pub mod display;
pub mod error;
pub mod matrix;
pub mod pair;
pub mod poly;
pub mod ring;
pub mod witt;
pub mod zink;

pub use error::{Error, Result};
