//! Symbolic energy and latency analysis of tiled loop programs on processor
//! arrays.

pub mod cli;
pub mod energy;
pub mod linear;
pub mod mapping;
pub mod par;
pub mod poly;
pub mod polycount;
pub mod pra;
pub mod report;
pub mod schedule;
pub mod sim;
pub mod sweep;
pub mod tiling;
