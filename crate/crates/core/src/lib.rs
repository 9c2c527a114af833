pub mod discretization;
pub mod energy;
pub mod error;
pub mod linalg;
pub mod spectrum;
pub mod shooting;
pub mod morse;
pub mod solvers;
pub mod reduction;
pub mod config;
pub mod az;
pub mod report;
pub mod verify;
