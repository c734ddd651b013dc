//! Session API for the interactive teaching loop.
//!
//! A human plays the demonstrator step by step, the robot's particle belief
//! is previewed after every step and committed when the learning phase ends,
//! and deployment rolls out the robot's plan from a random start.

pub mod api;
mod app;
mod error;
pub mod session;

pub use app::{router, serve, AppState};
pub use error::ApiError;
