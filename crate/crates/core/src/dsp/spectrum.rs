use rustfft::FftPlanner;
use num_complex::Complex64;

use super::fft::Window;
use crate::error::{Error, Result};

/// One-sided power spectrum on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub mags: Vec<f64>,
    pub resolution: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Indices of bins with `band[0] <= f <= band[1]`.
    pub fn band_indices(&self, band: [f64; 2]) -> std::ops::Range<usize> {
        let lo = self.freqs.partition_point(|&f| f < band[0]);
        let hi = self.freqs.partition_point(|&f| f <= band[1]);
        lo..hi.max(lo)
    }
}

/// Mean-removed, Hann-windowed spectrum zero-padded to `nfft`.
pub fn spectrum(seq: &[f64], sample_rate: f64, nfft: usize) -> Result<Spectrum> {
    spectrum_windowed(seq, sample_rate, nfft, Window::Hann)
}

pub fn spectrum_windowed(
    seq: &[f64],
    sample_rate: f64,
    nfft: usize,
    window: Window,
) -> Result<Spectrum> {
    if seq.is_empty() {
        return Err(Error::Argument("spectrum of an empty sequence".into()));
    }
    if nfft < seq.len() {
        return Err(Error::Argument(format!(
            "nfft {nfft} shorter than sequence length {}",
            seq.len()
        )));
    }
    let mean = seq.iter().sum::<f64>() / seq.len() as f64;
    let w = window.coefficients(seq.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for ((b, &x), &wk) in buf.iter_mut().zip(seq).zip(&w) {
        b.re = (x - mean) * wk;
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let half = nfft / 2;
    let scale = 1.0 / nfft as f64;
    let mags = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || (nfft % 2 == 0 && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let resolution = sample_rate / nfft as f64;
    Ok(Spectrum {
        freqs: (0..=half).map(|k| k as f64 * resolution).collect(),
        mags,
        resolution,
    })
}

/// Frequency of the largest in-band bin; ties go to the lower frequency.
pub fn peak_pick(spec: &Spectrum, band: [f64; 2]) -> Result<f64> {
    let idx = spec.band_indices(band);
    if idx.is_empty() {
        return Err(Error::Argument(format!(
            "band [{}, {}] Hz contains no spectrum bins",
            band[0], band[1]
        )));
    }
    let mut best = idx.start;
    for k in idx {
        if spec.mags[k] > spec.mags[best] {
            best = k;
        }
    }
    Ok(spec.freqs[best])
}

/// Peak-to-average power ratio of the in-band bins, in dB.
pub fn papr(spec: &Spectrum, band: [f64; 2]) -> Result<f64> {
    let idx = spec.band_indices(band);
    if idx.len() < 2 {
        return Err(Error::Argument(format!(
            "PAPR needs at least 2 bins in [{}, {}] Hz",
            band[0], band[1]
        )));
    }
    let vals = &spec.mags[idx];
    let max = vals.iter().copied().fold(0.0, f64::max);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    if !(max > 0.0) {
        return Err(Error::UndefinedMetric("all in-band power is zero".into()));
    }
    Ok(10.0 * (max / mean).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const FS: f64 = 1.0 / 0.24;

    fn from_mags(mags: Vec<f64>, res: f64) -> Spectrum {
        Spectrum {
            freqs: (0..mags.len()).map(|k| k as f64 * res).collect(),
            mags,
            resolution: res,
        }
    }

    #[test]
    fn tone_peak_within_a_bin() {
        let x: Vec<f64> = (0..200).map(|k| (2.0 * PI * 1.1 * k as f64 / FS).cos()).collect();
        let s = spectrum(&x, FS, 512).unwrap();
        assert_eq!(s.len(), 257);
        let f = peak_pick(&s, [0.0, FS / 2.0]).unwrap();
        assert!((f - 1.1).abs() <= s.resolution, "{f}");
    }

    #[test]
    fn dc_vanishes() {
        let s = spectrum(&[3.5; 100], FS, 128).unwrap();
        assert!(s.mags.iter().all(|&m| m < 1e-20));
    }

    #[test]
    fn parseval_rect() {
        let x: Vec<f64> = (0..100).map(|k| ((k * 37 % 11) as f64).sin() + 0.1 * k as f64).collect();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let energy: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        for nfft in [100, 128, 257] {
            let s = spectrum_windowed(&x, FS, nfft, Window::Rect).unwrap();
            let total: f64 = s.mags.iter().sum();
            assert!(((total - energy) / energy).abs() < 1e-6, "nfft {nfft}");
        }
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(spectrum(&[], FS, 8), Err(Error::Argument(_))));
        assert!(matches!(spectrum(&[1.0; 9], FS, 8), Err(Error::Argument(_))));
        let s = from_mags(vec![1.0; 10], 0.1);
        assert!(matches!(peak_pick(&s, [2.0, 3.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn peak_and_tie_rule() {
        let mut m = vec![0.0; 20];
        m[3] = 1.0;
        let s = from_mags(m, 0.1);
        assert!((peak_pick(&s, [0.1, 0.5]).unwrap() - 0.3).abs() < 1e-12);
        let mut m = vec![0.0; 20];
        m[10] = 2.0;
        m[12] = 2.0;
        let s = from_mags(m, 0.1);
        assert!((peak_pick(&s, [0.8, 1.5]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn papr_values() {
        let s = from_mags(vec![1.0, 0.0, 0.0, 0.0], 1.0);
        assert!((papr(&s, [0.0, 3.0]).unwrap() - 10.0 * 4f64.log10()).abs() < 1e-12);
        let flat = from_mags(vec![2.0; 6], 1.0);
        assert!(papr(&flat, [0.0, 5.0]).unwrap().abs() < 1e-12);
        let zero = from_mags(vec![0.0; 6], 1.0);
        assert!(matches!(papr(&zero, [0.0, 5.0]), Err(Error::UndefinedMetric(_))));
        assert!(matches!(papr(&flat, [0.0, 0.5]), Err(Error::Argument(_))));
    }
}
