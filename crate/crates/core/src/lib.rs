//! Noisy quantum-circuit simulation and Grover search noise experiments.

pub mod circuit;
pub mod grover;
pub mod lab;
pub mod noise;
pub mod sim;
