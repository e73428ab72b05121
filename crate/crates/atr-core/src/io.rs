//! Channel response serialization.
//!
//! Two formats:
//! - CSV with columns `f_hz, re, im` (shortest round-trip float text, so
//!   values parse back exactly; the grid is re-inferred from the rows)
//! - binary `.atrh`: magic `"ATRH"`, version byte, grid triple, then
//!   little-endian 64-bit float pairs. Bit-exact round trip.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ChannelResponse, FrequencyGrid};

const MAGIC: &[u8; 4] = b"ATRH";
const VERSION: u8 = 1;

pub fn write_csv<W: Write>(response: &ChannelResponse, mut w: W) -> Result<()> {
    writeln!(w, "f_hz,re,im")?;
    for (f, s) in response.grid().frequencies().zip(response.samples()) {
        writeln!(w, "{},{},{}", f, s.re, s.im)?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<ChannelResponse> {
    let reader = BufReader::new(r);
    let mut freqs = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 && line.starts_with("f_hz") {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |field: Option<&str>, name: &str| -> Result<f64> {
            field
                .ok_or_else(|| Error::Malformed(format!("line {}: missing {name}", i + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Malformed(format!("line {}: {e}", i + 1)))
        };
        freqs.push(parse(parts.next(), "f_hz")?);
        let re = parse(parts.next(), "re")?;
        let im = parse(parts.next(), "im")?;
        samples.push(Complex64::new(re, im));
    }
    if freqs.is_empty() {
        return Err(Error::Malformed("CSV contains no samples".into()));
    }
    let f_start = freqs[0];
    let f_step = if freqs.len() == 1 {
        1.0
    } else {
        (freqs[freqs.len() - 1] - f_start) / (freqs.len() - 1) as f64
    };
    let grid = FrequencyGrid::new(f_start, f_step, freqs.len())?;
    for (k, &f) in freqs.iter().enumerate() {
        let expect = grid.frequency_hz(k);
        if (f - expect).abs() > f_step * 1e-6 {
            return Err(Error::Malformed(format!(
                "non-uniform frequency column at row {k}: {f} vs {expect}"
            )));
        }
    }
    ChannelResponse::new(grid, samples)
}

pub fn write_binary<W: Write>(response: &ChannelResponse, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    let g = response.grid();
    w.write_all(&g.f_start_hz().to_le_bytes())?;
    w.write_all(&g.f_step_hz().to_le_bytes())?;
    w.write_all(&(g.n_points() as u64).to_le_bytes())?;
    for s in response.samples() {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<ChannelResponse> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Malformed("bad magic bytes".into()));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(Error::Malformed(format!(
            "unsupported version {}",
            version[0]
        )));
    }
    let mut f64_buf = [0u8; 8];
    let mut read_f64 = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut f64_buf)?;
        Ok(f64::from_le_bytes(f64_buf))
    };
    let f_start = read_f64(&mut r)?;
    let f_step = read_f64(&mut r)?;
    let mut u64_buf = [0u8; 8];
    r.read_exact(&mut u64_buf)?;
    let n_points = u64::from_le_bytes(u64_buf) as usize;
    let grid = FrequencyGrid::new(f_start, f_step, n_points)?;
    let mut samples = Vec::with_capacity(n_points);
    let mut buf = [0u8; 16];
    for _ in 0..n_points {
        r.read_exact(&mut buf)?;
        samples.push(Complex64::new(
            f64::from_le_bytes(buf[0..8].try_into().unwrap()),
            f64::from_le_bytes(buf[8..16].try_into().unwrap()),
        ));
    }
    ChannelResponse::new(grid, samples)
}

/// Writes CSV or binary depending on the path extension (`.csv` vs anything
/// else, conventionally `.atrh`).
pub fn write_response_file(response: &ChannelResponse, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        write_csv(response, file)
    } else {
        write_binary(response, file)
    }
}

pub fn read_response_file(path: &Path) -> Result<ChannelResponse> {
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        read_csv(file)
    } else {
        read_binary(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_response() -> ChannelResponse {
        let grid = FrequencyGrid::new(3.0e9, 1.0e6, 64).unwrap();
        let samples = (0..64)
            .map(|k| {
                let x = k as f64 * 0.37;
                Complex64::new(x.sin() * 1.7e-3, x.cos() / (k as f64 + 1.0))
            })
            .collect();
        ChannelResponse::new(grid, samples).unwrap()
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let resp = sample_response();
        let mut buf = Vec::new();
        write_binary(&resp, &mut buf).unwrap();
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), resp.grid());
        for (a, b) in back.samples().iter().zip(resp.samples()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn csv_round_trip_recovers_values() {
        let resp = sample_response();
        let mut buf = Vec::new();
        write_csv(&resp, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), resp.grid());
        assert_eq!(back.samples(), resp.samples());
    }

    #[test]
    fn binary_rejects_bad_magic() {
        let mut buf = Vec::new();
        write_binary(&sample_response(), &mut buf).unwrap();
        buf[0] = b'X';
        assert!(matches!(read_binary(buf.as_slice()), Err(Error::Malformed(_))));
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(read_csv("f_hz,re,im\n1e9,abc,0\n".as_bytes()).is_err());
        assert!(read_csv("".as_bytes()).is_err());
    }
}
