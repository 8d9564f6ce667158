//! Desk-scale simulation of Merlin-aided one-way quantum communication:
//! measurement damage lemmas, two-layer witness amplification, witness
//! enumeration, classical random-access-code protocols and advice fixing.

pub mod advice;
pub mod amplify;
pub mod demerlin;
pub mod error;
pub mod qcore;
pub mod protocol;
pub mod qlemmas;
pub mod rac;
pub mod seeding;
pub mod tails;

pub use error::{Error, Result};
pub use qcore::*;
