//! `.sfld` field snapshots.
//!
//! Layout: one line of JSON metadata terminated by `\n`, followed by the
//! coefficients as little-endian `f64` pairs `(re, im)`, three components
//! per mode, modes in lexicographic order `(kx, ky, kz)` with `kz` fastest,
//! each coordinate running from `-N` to `N`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{SpectralField, WaveLattice};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const EXTENSION: &str = "sfld";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub lattice_scale: f64,
    pub tag: String,
}

pub fn write_to(field: &SpectralField, mut w: impl Write) -> Result<()> {
    let header = SnapshotHeader {
        format: "sfld".into(),
        version: FORMAT_VERSION,
        n: field.lattice().n(),
        lattice_scale: field.lattice().scale(),
        tag: field.tag().to_string(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(field.coeffs().len() * 48);
    for v in field.coeffs() {
        for z in v {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_from(r: impl Read) -> Result<SpectralField> {
    let mut r = BufReader::new(r);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Snapshot("missing header terminator".into()));
    }
    let header: SnapshotHeader = serde_json::from_slice(&line[..line.len() - 1])
        .map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
    if header.format != "sfld" || header.version != FORMAT_VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    let lattice = WaveLattice::new(header.n, header.lattice_scale)
        .map_err(|e| Error::Snapshot(e.to_string()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let expected = lattice.len() * 3 * 2 * 8;
    if payload.len() != expected {
        return Err(Error::Snapshot(format!(
            "payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
        .collect();
    let coeffs = values
        .chunks_exact(6)
        .map(|c| {
            [
                Complex64::new(c[0], c[1]),
                Complex64::new(c[2], c[3]),
                Complex64::new(c[4], c[5]),
            ]
        })
        .collect();
    Ok(SpectralField::from_coeffs(lattice, coeffs)?.with_tag(header.tag))
}

pub fn save(field: &SpectralField, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = Vec::new();
    write_to(field, &mut bytes)?;
    crate::harness::io::write_atomic(path.as_ref(), &bytes)
}

pub fn load(path: impl AsRef<Path>) -> Result<SpectralField> {
    read_from(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_divfree_field;

    #[test]
    fn roundtrip_is_bit_exact() {
        let u = random_divfree_field(3, 3, 1.5, 2.0);
        let mut bytes = Vec::new();
        write_to(&u, &mut bytes).unwrap();
        let v = read_from(bytes.as_slice()).unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn payload_layout() {
        let l = WaveLattice::unit(1).unwrap();
        let mut u = SpectralField::zeros(l).with_tag("t");
        u.set_mode([-1, -1, -1], [Complex64::new(1.5, -2.0), Complex64::default(), Complex64::default()]);
        let mut bytes = Vec::new();
        write_to(&u, &mut bytes).unwrap();
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header: serde_json::Value = serde_json::from_slice(&bytes[..nl]).unwrap();
        assert_eq!(header["n"], 1);
        assert_eq!(header["version"], 1);
        let payload = &bytes[nl + 1..];
        assert_eq!(payload.len(), 27 * 48);
        // first mode is (-1,-1,-1), first component
        assert_eq!(f64::from_le_bytes(payload[0..8].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(payload[8..16].try_into().unwrap()), -2.0);
        // last mode (1,1,1) holds the conjugate
        let off = 26 * 48;
        assert_eq!(f64::from_le_bytes(payload[off + 8..off + 16].try_into().unwrap()), 2.0);
    }

    #[test]
    fn rejects_truncated_payload() {
        let u = random_divfree_field(3, 2, 1.5, 2.0);
        let mut bytes = Vec::new();
        write_to(&u, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(read_from(bytes.as_slice()), Err(Error::Snapshot(_))));
        assert!(read_from(&b"{\"format\":\"sfld\"}"[..]).is_err());
    }
}
