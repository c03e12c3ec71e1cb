//! Benchmark harness for optical chemical structure recognition (OCSR)
//! tools under graphical damage.
//!
//! The pipeline renders reference molfiles to raster images, damages them
//! (JPEG compression, black-overlay blending, impulse noise, Shepard's
//! distortion), runs external recognizers through a subprocess protocol, and
//! scores each output by canonical molecular identity.

pub mod chemgraph;
pub mod render;
pub mod degrade;
pub mod harness;
pub mod evaluate;
pub mod ensemble;
