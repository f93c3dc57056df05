#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod heuristics;
pub mod model;
pub mod pha;
pub mod scenario;
pub mod simulate;
pub mod solver;
pub mod worked_example;
