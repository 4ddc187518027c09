//! VBNN parameter files: magic, version, architecture, shape table, then
//! little-endian f32 tensors in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use super::cnn::{Architecture, Network};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"VBNN";
const VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<usize> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

pub fn write_network<W: Write>(mut w: W, net: &Network) -> Result<()> {
    let a = &net.arch;
    w.write_all(MAGIC)?;
    put_u32(&mut w, VERSION as usize)?;
    for v in [a.input_side, a.in_channels, a.conv_depths.len()] {
        put_u32(&mut w, v)?;
    }
    for &d in &a.conv_depths {
        put_u32(&mut w, d)?;
    }
    put_u32(&mut w, a.hidden)?;
    put_u32(&mut w, a.outputs)?;
    let tensors = net.tensors();
    put_u32(&mut w, tensors.len())?;
    for (shape, _) in &tensors {
        put_u32(&mut w, shape.len())?;
        for &d in shape {
            put_u32(&mut w, d)?;
        }
    }
    for (_, data) in &tensors {
        for &v in *data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_network<R: Read>(mut r: R) -> Result<Network> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a VBNN file (bad magic)".into()));
    }
    let version = get_u32(&mut r)?;
    if version != VERSION as usize {
        return Err(Error::Format(format!("unsupported VBNN version {version}")));
    }
    let input_side = get_u32(&mut r)?;
    let in_channels = get_u32(&mut r)?;
    let n_conv = get_u32(&mut r)?;
    if n_conv > 64 {
        return Err(Error::Format(format!("implausible conv layer count {n_conv}")));
    }
    let conv_depths = (0..n_conv).map(|_| get_u32(&mut r)).collect::<Result<Vec<_>>>()?;
    let hidden = get_u32(&mut r)?;
    let outputs = get_u32(&mut r)?;
    let arch = Architecture {
        input_side,
        in_channels,
        conv_depths,
        hidden,
        outputs,
    };
    let mut net = Network::zeros(&arch)?;
    let expected: Vec<Vec<usize>> = net.tensors().into_iter().map(|(s, _)| s).collect();
    let n = get_u32(&mut r)?;
    if n != expected.len() {
        return Err(Error::Format(format!("{n} tensors, architecture needs {}", expected.len())));
    }
    for want in &expected {
        let ndim = get_u32(&mut r)?;
        let shape = (0..ndim).map(|_| get_u32(&mut r)).collect::<Result<Vec<_>>>()?;
        if &shape != want {
            return Err(Error::Format(format!("tensor shape {shape:?}, expected {want:?}")));
        }
    }
    for t in net.tensors_mut() {
        for v in t.iter_mut() {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            *v = f32::from_le_bytes(b) as f64;
        }
    }
    Ok(net)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    write_network(std::io::BufWriter::new(std::fs::File::create(path)?), net)
}

pub fn load_network(path: &Path) -> Result<Network> {
    read_network(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_f32_exact() {
        let net = Network::init(&Architecture::reduced(), 3).unwrap();
        let mut buf = Vec::new();
        write_network(&mut buf, &net).unwrap();
        let back = read_network(&buf[..]).unwrap();
        assert_eq!(back.arch, net.arch);
        for ((_, a), (_, b)) in net.tensors().iter().zip(back.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(*x as f32 as f64, *y);
            }
        }
        let mut again = Vec::new();
        write_network(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_network(&b"NOPE0000"[..]), Err(Error::Format(_))));
        let net = Network::init(&Architecture::reduced(), 3).unwrap();
        let mut buf = Vec::new();
        write_network(&mut buf, &net).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_network(&buf[..]).is_err());
    }
}
