pub mod arena;
pub mod config;
pub mod engine;
pub mod heuristic;
pub mod record;
pub mod search;
pub mod solver;
