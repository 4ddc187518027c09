//! Numeric kernels shared by detection and vital-sign extraction.

mod circle;
mod fft;
mod filter;
mod phase;
mod spectrum;

pub use circle::{fit_circle_dc, CircleFit};
pub use fft::{range_fft, RangeFft, Window};
pub use filter::{butterworth_bandpass, filter_apply, BandpassSpec, Biquad, Sos};
pub use phase::{diff_phase, unwrap_phase, wrap_phase};
pub use spectrum::{papr, peak_pick, spectrum, spectrum_windowed, Spectrum};
