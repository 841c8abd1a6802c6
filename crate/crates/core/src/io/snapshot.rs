//! Binary field snapshots.
//!
//! Layout (little endian): 8-byte magic `VTXFLD01`, `nx` and `ny` as u32,
//! `lx`, `ly` and `time` as f64, one field-id byte, 7 zero bytes, then
//! `nx * (ny + 1)` f64 interior samples with x varying fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};

pub const MAGIC: &[u8; 8] = b"VTXFLD01";
pub const HEADER_LEN: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FieldId {
    #[default]
    Xi,
    Eta,
}

impl FieldId {
    pub fn code(self) -> u8 {
        match self {
            FieldId::Xi => 0,
            FieldId::Eta => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FieldId::Xi),
            1 => Some(FieldId::Eta),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldId::Xi => "xi",
            FieldId::Eta => "eta",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub nx: u32,
    pub ny: u32,
    pub lx: f64,
    pub ly: f64,
    pub time: f64,
    pub field_id: FieldId,
}

impl SnapshotHeader {
    pub fn for_field(field: &Field2D<f64>, time: f64, field_id: FieldId) -> Result<Self> {
        let g = field.grid();
        let nx = u32::try_from(g.nx).map_err(|_| Error::BadHeader(format!("nx = {} does not fit in u32", g.nx)))?;
        let ny = u32::try_from(g.ny).map_err(|_| Error::BadHeader(format!("ny = {} does not fit in u32", g.ny)))?;
        Ok(Self {
            nx,
            ny,
            lx: g.lx,
            ly: g.ly,
            time,
            field_id,
        })
    }

    /// Number of payload values.
    pub fn samples(&self) -> Result<usize> {
        let overflow = || Error::DimensionOverflow { nx: self.nx, ny: self.ny };
        (self.nx as usize)
            .checked_mul((self.ny as usize).checked_add(1).ok_or_else(overflow)?)
            .filter(|n| n.checked_mul(8).and_then(|b| b.checked_add(HEADER_LEN)).is_some())
            .ok_or_else(overflow)
    }

    /// Total encoded size in bytes.
    pub fn file_len(&self) -> Result<usize> {
        Ok(HEADER_LEN + 8 * self.samples()?)
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..8].copy_from_slice(MAGIC);
        h[8..12].copy_from_slice(&self.nx.to_le_bytes());
        h[12..16].copy_from_slice(&self.ny.to_le_bytes());
        h[16..24].copy_from_slice(&self.lx.to_le_bytes());
        h[24..32].copy_from_slice(&self.ly.to_le_bytes());
        h[32..40].copy_from_slice(&self.time.to_le_bytes());
        h[40] = self.field_id.code();
        h
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..8] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let field_id = FieldId::from_code(bytes[40])
            .ok_or_else(|| Error::BadHeader(format!("unknown field id {} at byte 40", bytes[40])))?;
        if let Some(k) = bytes[41..HEADER_LEN].iter().position(|&b| b != 0) {
            return Err(Error::BadHeader(format!("reserved byte {} is not zero", 41 + k)));
        }
        Ok(Self {
            nx: u32_at(8),
            ny: u32_at(12),
            lx: f64_at(16),
            ly: f64_at(24),
            time: f64_at(32),
            field_id,
        })
    }
}

/// Header plus interior samples of `field`.
pub fn encode_snapshot(field: &Field2D<f64>, header: &SnapshotHeader) -> Result<Vec<u8>> {
    let g = field.grid();
    if header.nx as usize != g.nx || header.ny as usize != g.ny || header.lx != g.lx || header.ly != g.ly {
        return Err(Error::GridMismatch);
    }
    let mut out = Vec::with_capacity(header.file_len()?);
    out.extend_from_slice(&header.encode());
    for j in 0..g.rows() {
        for v in field.interior_row(j) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses and validates a snapshot byte stream.
pub fn decode_snapshot(bytes: &[u8]) -> Result<(SnapshotHeader, Field2D<f64>)> {
    let header = SnapshotHeader::decode(bytes)?;
    let expected = header.file_len()?;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::BadHeader(format!(
            "{} trailing bytes after offset {expected}",
            bytes.len() - expected
        )));
    }
    let grid = Grid2D::new(header.nx as usize, header.ny as usize, header.lx, header.ly)
        .map_err(|e| Error::BadHeader(e.to_string()))?;
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, Field2D::from_interior(grid, &values)?))
}

pub fn write_snapshot(path: &Path, field: &Field2D<f64>, header: &SnapshotHeader) -> Result<()> {
    let bytes = encode_snapshot(field, header)?;
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, Field2D<f64>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_snapshot(&bytes)
}

/// File name used by the run driver for the snapshot taken at `step`.
pub fn snapshot_file_name(field_id: FieldId, step: u64) -> String {
    format!("{}_{step:09}.bin", field_id.name())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field2D<f64> {
        let g = Grid2D::new(12, 9, 3.0, 2.0).unwrap();
        Field2D::from_fn(g, |x, y| (x * 1.7).sin() * (y - 0.3).exp() + 1e-300)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let h = SnapshotHeader::for_field(&f, 12.5, FieldId::Eta).unwrap();
        let bytes = encode_snapshot(&f, &h).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 12 * 10 * 8);
        let (h2, g) = decode_snapshot(&bytes).unwrap();
        assert_eq!(h2, h);
        for ((_, _, a), (_, _, b)) in f.iter_interior().zip(g.iter_interior()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn paper_grid_size() {
        let h = SnapshotHeader {
            nx: 200,
            ny: 100,
            lx: 20.0,
            ly: 10.0,
            time: 0.0,
            field_id: FieldId::Xi,
        };
        assert_eq!(h.file_len().unwrap(), 161_648);
    }

    #[test]
    fn corrupt_streams_are_rejected() {
        let f = sample();
        let h = SnapshotHeader::for_field(&f, 0.0, FieldId::Xi).unwrap();
        let good = encode_snapshot(&f, &h).unwrap();

        let mut bad = good.clone();
        bad[3] = b'?';
        assert!(matches!(decode_snapshot(&bad), Err(Error::BadMagic)));
        assert!(matches!(decode_snapshot(&good[..good.len() - 1]), Err(Error::Truncated { .. })));
        assert!(matches!(decode_snapshot(&good[..20]), Err(Error::Truncated { .. })));

        let mut huge = good.clone();
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(
            decode_snapshot(&huge),
            Err(Error::DimensionOverflow { .. }) | Err(Error::Truncated { .. })
        ));

        let mut reserved = good.clone();
        reserved[45] = 1;
        assert!(matches!(decode_snapshot(&reserved), Err(Error::BadHeader(_))));
        let mut id = good;
        id[40] = 7;
        assert!(matches!(decode_snapshot(&id), Err(Error::BadHeader(_))));
    }
}
