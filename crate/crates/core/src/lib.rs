//! FMCW MIMO radar toolkit: simulate a breathing subject, form point
//! clouds, regress body key points with a small CNN and extract breathing
//! and heart rates by beamforming toward the estimated chest.

pub mod detect;
pub mod dsp;
pub mod error;
pub mod pipeline;
pub mod posture;
pub mod sim;
pub mod vitals;

pub use error::{Error, Result};
