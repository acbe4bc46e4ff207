//! Generalized Jang equation solver and Penrose inequality verifier for
//! spherically symmetric initial data.

pub mod fit;
pub mod geometry;
pub mod grid;
pub mod initial_data;
pub mod jang_solver;
pub mod pipeline;
pub mod verifier;

#[cfg(test)]
mod test_support;
