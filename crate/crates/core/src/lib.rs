//! Decisions and estimates for unitary and similarity orbits of normal
//! operators described by rasterized spectra with K-theory labels.

pub mod decisions;
pub mod distances;
pub mod geometry;
pub mod kdata;
pub mod matching;
pub mod sandbox;
