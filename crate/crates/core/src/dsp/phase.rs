use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Maps an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    x - 2.0 * PI * ((x - PI) / (2.0 * PI)).ceil()
}

/// Removes 2π jumps so successive differences lie in (−π, π].
pub fn unwrap_phase(seq: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(seq.len());
    let Some(&first) = seq.first() else {
        return out;
    };
    out.push(first);
    let mut acc = first;
    for w in seq.windows(2) {
        acc += wrap_phase(w[1] - w[0]);
        out.push(acc);
    }
    out
}

/// First difference; damps the breathing fundamental relative to the
/// heartbeat.
pub fn diff_phase(seq: &[f64]) -> Result<Vec<f64>> {
    if seq.len() < 2 {
        return Err(Error::Argument(format!(
            "phase difference needs at least 2 samples, got {}",
            seq.len()
        )));
    }
    Ok(seq.windows(2).map(|w| w[1] - w[0]).collect())
}
