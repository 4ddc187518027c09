use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub order: usize,
    pub low: f64,
    pub high: f64,
    pub sample_rate: f64,
}

impl BandpassSpec {
    pub fn new(order: usize, low: f64, high: f64, sample_rate: f64) -> Self {
        Self {
            order,
            low,
            high,
            sample_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nyq = self.sample_rate / 2.0;
        if self.order == 0 {
            return Err(Error::Design("filter order must be at least 1".into()));
        }
        if !(self.low > 0.0 && self.low < self.high && self.high < nyq) {
            return Err(Error::Design(format!(
                "band [{}, {}] Hz must satisfy 0 < low < high < {nyq} Hz",
                self.low, self.high
            )));
        }
        if self.high > 0.95 * nyq {
            return Err(Error::Design(format!(
                "upper edge {} Hz is too close to Nyquist ({nyq} Hz)",
                self.high
            )));
        }
        Ok(())
    }
}

/// One second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let num = self.b[0] + zi * (self.b[1] + zi * self.b[2]);
        let den = self.a[0] + zi * (self.a[1] + zi * self.a[2]);
        num / den
    }

    pub fn poles(&self) -> [Complex64; 2] {
        let (p, q) = (self.a[1], self.a[2]);
        let disc = Complex64::new(p * p - 4.0 * q, 0.0).sqrt();
        [(-p + disc) / 2.0, (-p - disc) / 2.0]
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
    pub sample_rate: f64,
}

impl Sos {
    /// Complex frequency response at `freq` Hz.
    pub fn response(&self, freq: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * freq / self.sample_rate);
        self.sections.iter().map(|s| s.response(z)).product()
    }

    pub fn magnitude(&self, freq: f64) -> f64 {
        self.response(freq).norm()
    }

    pub fn max_pole_radius(&self) -> f64 {
        self.sections
            .iter()
            .flat_map(|s| s.poles())
            .map(|p| p.norm())
            .fold(0.0, f64::max)
    }
}

fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    // s² + b s + c = 0
    let disc = (b * b - 4.0 * c).sqrt();
    [(-b + disc) / 2.0, (-b - disc) / 2.0]
}

fn biquad_from_poles(p1: Complex64, p2: Complex64) -> Biquad {
    let sum = p1 + p2;
    let prod = p1 * p2;
    Biquad {
        b: [1.0, 0.0, -1.0],
        a: [1.0, -sum.re, prod.re],
    }
}

/// Digital Butterworth band-pass of the given prototype order.
///
/// The low-pass prototype is moved to the prewarped band and mapped by the
/// bilinear transform. Each prototype pole yields one pair of band-pass
/// poles and therefore one biquad with zeros at z = ±1, so the cascade has
/// `order` sections. Gain is unity at the band's geometric center and is
/// spread evenly across sections.
pub fn butterworth_bandpass(spec: &BandpassSpec) -> Result<Sos> {
    spec.validate()?;
    let n = spec.order;
    let fs = spec.sample_rate;
    let k = 2.0 * fs;
    let w1 = k * (PI * spec.low / fs).tan();
    let w2 = k * (PI * spec.high / fs).tan();
    let bw = w2 - w1;
    let w0sq = w1 * w2;
    let bilinear = |s: Complex64| (k + s) / (k - s);

    let mut sections = Vec::with_capacity(n);
    // prototype poles in the upper half plane plus the real pole for odd n
    for i in 0..n.div_ceil(2) {
        let theta = PI * (2 * i + n + 1) as f64 / (2 * n) as f64;
        let p = Complex64::from_polar(1.0, theta);
        // s² − p·bw·s + ω0² = 0
        let [s1, s2] = quadratic_roots(-p * bw, Complex64::new(w0sq, 0.0));
        let (z1, z2) = (bilinear(s1), bilinear(s2));
        if 2 * i + 1 == n {
            // real prototype pole: its two band-pass poles form one section
            sections.push(biquad_from_poles(z1, z2));
        } else {
            // partner prototype pole is the conjugate
            sections.push(biquad_from_poles(z1, z1.conj()));
            sections.push(biquad_from_poles(z2, z2.conj()));
        }
    }
    let mut sos = Sos {
        sections,
        sample_rate: fs,
    };
    let center = fs / PI * (w0sq.sqrt() / k).atan();
    let g = sos.magnitude(center);
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::Design("degenerate band-pass gain".into()));
    }
    let per = g.powf(-1.0 / n as f64);
    for s in &mut sos.sections {
        for b in &mut s.b {
            *b *= per;
        }
    }
    Ok(sos)
}

/// Causal direct-form II transposed filtering, zero initial state.
pub fn filter_apply(sos: &Sos, seq: &[f64]) -> Vec<f64> {
    let mut out = seq.to_vec();
    for s in &sos.sections {
        let (mut z1, mut z2) = (0.0, 0.0);
        for x in out.iter_mut() {
            let y = s.b[0] * *x + z1;
            z1 = s.b[1] * *x - s.a[1] * y + z2;
            z2 = s.b[2] * *x - s.a[2] * y;
            *x = y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 1.0 / 0.24;

    fn db(x: f64) -> f64 {
        20.0 * x.log10()
    }

    #[test]
    fn breathing_band_shape() {
        let sos = butterworth_bandpass(&BandpassSpec::new(5, 0.1, 0.5, FS)).unwrap();
        assert_eq!(sos.sections.len(), 5);
        let mid = sos.magnitude((0.1f64 * 0.5).sqrt());
        assert!((0.99..=1.0 + 1e-9).contains(&mid), "{mid}");
        assert!(sos.magnitude(0.0) < 1e-4);
        assert!((db(sos.magnitude(0.1)) + 3.0103).abs() < 0.1);
        assert!((db(sos.magnitude(0.5)) + 3.0103).abs() < 0.1);
    }

    #[test]
    fn heart_band_edges_at_minus_three_db() {
        let sos = butterworth_bandpass(&BandpassSpec::new(5, 0.8, 1.7, FS)).unwrap();
        for f in [0.8, 1.7] {
            let m = db(sos.magnitude(f));
            assert!((m + 3.0103).abs() < 0.1, "{f} Hz: {m} dB");
        }
        assert!(sos.max_pole_radius() < 1.0);
    }

    #[test]
    fn narrow_first_order_is_stable() {
        let sos = butterworth_bandpass(&BandpassSpec::new(1, 0.2, 0.21, FS)).unwrap();
        assert_eq!(sos.sections.len(), 1);
        assert!(sos.max_pole_radius() < 1.0);
    }

    #[test]
    fn design_errors() {
        for spec in [
            BandpassSpec::new(5, 0.8, 2.0, FS),
            BandpassSpec::new(0, 0.1, 0.5, FS),
            BandpassSpec::new(5, 0.5, 0.1, FS),
            BandpassSpec::new(5, 0.0, 0.5, FS),
        ] {
            assert!(matches!(butterworth_bandpass(&spec), Err(Error::Design(_))), "{spec:?}");
        }
    }

    #[test]
    fn impulse_response_follows_recursion() {
        let sos = butterworth_bandpass(&BandpassSpec::new(2, 0.1, 0.5, FS)).unwrap();
        let mut imp = vec![0.0; 40];
        imp[0] = 1.0;
        let y = filter_apply(&sos, &imp);
        // direct-form I recursion per section as the oracle
        let mut x = imp.clone();
        for s in &sos.sections {
            let mut out = vec![0.0; x.len()];
            for n in 0..x.len() {
                let xm = |k: usize| if n >= k { x[n - k] } else { 0.0 };
                let ym = |k: usize, o: &[f64]| if n >= k { o[n - k] } else { 0.0 };
                out[n] = s.b[0] * xm(0) + s.b[1] * xm(1) + s.b[2] * xm(2)
                    - s.a[1] * ym(1, &out)
                    - s.a[2] * ym(2, &out);
            }
            x = out;
        }
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(filter_apply(&sos, &[0.0; 16]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn passband_tone_keeps_amplitude() {
        let sos = butterworth_bandpass(&BandpassSpec::new(5, 0.1, 0.5, FS)).unwrap();
        let x: Vec<f64> = (0..600).map(|k| (2.0 * PI * 0.3 * k as f64 / FS).sin()).collect();
        let y = filter_apply(&sos, &x);
        let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
        let half = x.len() / 2;
        assert!(rms(&y[half..]) >= 0.9 * rms(&x[half..]));
    }
}
