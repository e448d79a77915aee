pub mod codes;
pub mod config;
pub mod draw;
pub mod error;
pub mod eval;
pub mod flow;
pub mod geom;
pub mod lines;
pub mod overlay;
pub mod pipeline;
pub mod raster;
pub mod result;
pub mod symbols;
pub mod synth;
pub mod tags;

pub use error::{Error, Result};
