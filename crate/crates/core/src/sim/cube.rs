//! Raw complex baseband cube and its `VBC1` file format.
//!
//! Layout: `"VBC1"`, four little-endian u32 dimensions (frames, chirps,
//! channels, samples), seven f64 config echo fields (carrier frequency,
//! chirp slope, idle time, ADC start time, ramp end time, ADC sample rate,
//! frame duration), then interleaved f32 (re, im) in
//! (frame, chirp, channel, sample) order.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex32;

use super::config::RadarConfig;
use crate::error::{Error, Result};

pub const CUBE_MAGIC: &[u8; 4] = b"VBC1";

/// Borrowed view of one frame: (chirp, channel, sample).
#[derive(Debug, Clone, Copy)]
pub struct FrameRef<'a> {
    pub data: &'a [Complex32],
    pub chirps: usize,
    pub channels: usize,
    pub samples: usize,
}

impl<'a> FrameRef<'a> {
    pub fn chirp(&self, chirp: usize, channel: usize) -> &'a [Complex32] {
        let start = (chirp * self.channels + channel) * self.samples;
        &self.data[start..start + self.samples]
    }
}

/// Samples of one synthesized frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub data: Vec<Complex32>,
    pub chirps: usize,
    pub channels: usize,
    pub samples: usize,
}

impl Frame {
    pub fn zeros(chirps: usize, channels: usize, samples: usize) -> Self {
        Self {
            data: vec![Complex32::new(0.0, 0.0); chirps * channels * samples],
            chirps,
            channels,
            samples,
        }
    }

    pub fn as_ref(&self) -> FrameRef<'_> {
        FrameRef {
            data: &self.data,
            chirps: self.chirps,
            channels: self.channels,
            samples: self.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    samples: Vec<Complex32>,
    n_frames: usize,
    config: RadarConfig,
}

impl DataCube {
    pub fn from_frames(config: &RadarConfig, frames: Vec<Frame>) -> Result<Self> {
        let per_frame = config.chirps_per_frame * config.n_virtual() * config.adc_samples_per_chirp;
        let n_frames = frames.len();
        let mut samples = Vec::with_capacity(n_frames * per_frame);
        for f in frames {
            if f.data.len() != per_frame {
                return Err(Error::Argument(format!(
                    "frame has {} samples, expected {per_frame}",
                    f.data.len()
                )));
            }
            samples.extend_from_slice(&f.data);
        }
        Ok(Self {
            samples,
            n_frames,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.config
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    /// (frames, chirps, channels, samples)
    pub fn dims(&self) -> [usize; 4] {
        [
            self.n_frames,
            self.config.chirps_per_frame,
            self.config.n_virtual(),
            self.config.adc_samples_per_chirp,
        ]
    }

    pub fn samples(&self) -> &[Complex32] {
        &self.samples
    }

    pub fn frame(&self, index: usize) -> FrameRef<'_> {
        let [_, chirps, channels, samples] = self.dims();
        let len = chirps * channels * samples;
        FrameRef {
            data: &self.samples[index * len..(index + 1) * len],
            chirps,
            channels,
            samples,
        }
    }

    /// Frames `start..end` as a new cube.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<DataCube> {
        if start >= end || end > self.n_frames {
            return Err(Error::Argument(format!(
                "frame range {start}..{end} invalid for {} frames",
                self.n_frames
            )));
        }
        let len = self.frame(0).data.len();
        Ok(DataCube {
            samples: self.samples[start * len..end * len].to_vec(),
            n_frames: end - start,
            config: self.config.clone(),
        })
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(CUBE_MAGIC)?;
        for d in self.dims() {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for v in config_echo(&self.config) {
            w.write_all(&v.to_le_bytes())?;
        }
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    /// Reads a cube; the header must agree with `config`.
    pub fn read_from<R: Read>(r: R, config: &RadarConfig) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CUBE_MAGIC {
            return Err(Error::Format("not a VBC1 cube".into()));
        }
        let mut dims = [0usize; 4];
        let mut b4 = [0u8; 4];
        for d in &mut dims {
            r.read_exact(&mut b4)?;
            *d = u32::from_le_bytes(b4) as usize;
        }
        let mut b8 = [0u8; 8];
        for (i, expected) in config_echo(config).into_iter().enumerate() {
            r.read_exact(&mut b8)?;
            let got = f64::from_le_bytes(b8);
            if got.to_bits() != expected.to_bits() {
                return Err(Error::Format(format!(
                    "config echo field {i} is {got}, config says {expected}"
                )));
            }
        }
        if dims[1] != config.chirps_per_frame
            || dims[2] != config.n_virtual()
            || dims[3] != config.adc_samples_per_chirp
        {
            return Err(Error::Format(format!("cube dims {dims:?} do not match config")));
        }
        let total = dims.iter().product::<usize>();
        let mut raw = vec![0u8; total * 8];
        r.read_exact(&mut raw)?;
        let samples = raw
            .chunks_exact(8)
            .map(|c| {
                Complex32::new(
                    f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                    f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
                )
            })
            .collect();
        Ok(Self {
            samples,
            n_frames: dims[0],
            config: config.clone(),
        })
    }

    pub fn load(path: &Path, config: &RadarConfig) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?, config)
    }
}

fn config_echo(c: &RadarConfig) -> [f64; 7] {
    [
        c.carrier_frequency,
        c.chirp_slope,
        c.idle_time,
        c.adc_start_time,
        c.ramp_end_time,
        c.adc_sample_rate,
        c.frame_duration,
    ]
}
