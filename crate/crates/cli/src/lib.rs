//! Benchmarks, EDD counts and multidegree checks for triangulation of points
//! on a line, with CSV tables and SVG histograms as output.

pub mod commands;
pub mod config;
pub mod histogram;
pub mod report;
pub mod scene_io;
