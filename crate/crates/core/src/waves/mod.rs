//! Wave fans, relaxation shock profiles, contact waves and their superposition.

pub mod ansatz;
pub mod contact;
pub mod fan;
pub mod profile;
