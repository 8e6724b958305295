//! `CVS1` field snapshots.
//!
//! A snapshot is one ASCII header line `CVS1 <Nx> <Ny> [<Nz>] <name>\n`
//! followed by the values as little-endian `f64`, row-major over
//! `(Nx, Ny[, Nz])` (the last index varies fastest).

use std::io::Write;
use std::path::Path;

use super::strip::{StripGrid, StripScalar};
use super::torus::{TorusGrid, TorusScalar};
use crate::{Error, Result, Side};

const MAGIC: &str = "CVS1";
const MAX_HEADER: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub ny: usize,
    pub nz: Option<usize>,
    pub name: String,
    pub data: Vec<f64>,
}

impl Snapshot {
    pub fn from_torus(name: &str, g: &TorusScalar) -> Self {
        let t = g.grid();
        Self { nx: t.nx, ny: t.ny, nz: None, name: name.to_string(), data: g.values().to_vec() }
    }

    pub fn from_strip(name: &str, s: &StripScalar) -> Self {
        let grid = s.grid();
        let (n, nz) = (grid.nxy(), grid.nz);
        let mut data = vec![0.0; grid.len()];
        for k in 0..nz {
            for (p, v) in s.level_slice(k).iter().enumerate() {
                data[p * nz + k] = *v;
            }
        }
        debug_assert_eq!(data.len(), n * nz);
        Self { nx: grid.torus.nx, ny: grid.torus.ny, nz: Some(nz), name: name.to_string(), data }
    }

    pub fn to_torus(&self) -> Result<TorusScalar> {
        if self.nz.is_some() {
            return Err(Error::Snapshot("expected a torus field, found a strip field".into()));
        }
        let grid = TorusGrid::new(self.nx, self.ny)?;
        Ok(TorusScalar::from_values(grid, self.data.clone()))
    }

    pub fn to_strip(&self, side: Side) -> Result<StripScalar> {
        let nz = self.nz.ok_or_else(|| Error::Snapshot("expected a strip field, found a torus field".into()))?;
        let grid = StripGrid::new(TorusGrid::new(self.nx, self.ny)?, nz, side)?;
        let n = grid.nxy();
        let mut values = vec![0.0; grid.len()];
        for p in 0..n {
            for k in 0..nz {
                values[k * n + p] = self.data[p * nz + k];
            }
        }
        Ok(StripScalar::from_values(grid, values))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = match self.nz {
            Some(nz) => format!("{MAGIC} {} {} {} {}\n", self.nx, self.ny, nz, self.name),
            None => format!("{MAGIC} {} {} {}\n", self.nx, self.ny, self.name),
        }
        .into_bytes();
        out.reserve(self.data.len() * 8);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parse a snapshot from raw bytes.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .take(MAX_HEADER)
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Snapshot("missing header line".into()))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Snapshot("header is not UTF-8".into()))?;
        let tokens: Vec<&str> = header.split(' ').collect();
        if tokens.first() != Some(&MAGIC) {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let dim = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| Error::Snapshot(format!("bad dimension {s:?}")))?;
            if v == 0 {
                return Err(Error::Snapshot("zero dimension".into()));
            }
            Ok(v)
        };
        let (nx, ny, nz, name) = match tokens.len() {
            4 => (dim(tokens[1])?, dim(tokens[2])?, None, tokens[3]),
            5 => (dim(tokens[1])?, dim(tokens[2])?, Some(dim(tokens[3])?), tokens[4]),
            n => return Err(Error::Snapshot(format!("header has {n} fields"))),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_graphic()) {
            return Err(Error::Snapshot("invalid field name".into()));
        }
        let count = nx
            .checked_mul(ny)
            .and_then(|v| v.checked_mul(nz.unwrap_or(1)))
            .ok_or_else(|| Error::Snapshot("dimensions overflow".into()))?;
        let body = &bytes[nl + 1..];
        if Some(body.len()) != count.checked_mul(8) {
            return Err(Error::Snapshot(format!(
                "payload has {} bytes, header implies {count} values",
                body.len()
            )));
        }
        let data: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight")))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Snapshot("non-finite value in payload".into()));
        }
        Ok(Self { nx, ny, nz, name: name.to_string(), data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_torus_and_strip() {
        let t = TorusGrid::new(4, 6).unwrap();
        let g = TorusScalar::from_fn(t, |x, y| x - 2.0 * y);
        let s = Snapshot::from_torus("f", &g);
        let back = Snapshot::decode(&s.encode()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_torus().unwrap().values(), g.values());

        let sg = StripGrid::new(t, 5, Side::Plus).unwrap();
        let st = StripScalar::from_fn(sg, |x, y, z| x + 10.0 * y + 100.0 * z);
        let snap = Snapshot::from_strip("omega_x", &st);
        // last index (z) fastest
        assert_eq!(snap.data[1], st.level_slice(1)[0]);
        let back = Snapshot::decode(&snap.encode()).unwrap().to_strip(Side::Plus).unwrap();
        assert_eq!(back.values(), st.values());
    }

    #[test]
    fn rejects_malformed() {
        assert!(Snapshot::decode(b"").is_err());
        assert!(Snapshot::decode(b"CVS2 4 4 f\n").is_err());
        assert!(Snapshot::decode(b"CVS1 4 4 f\n\0\0").is_err());
        assert!(Snapshot::decode(b"CVS1 0 4 f\n").is_err());
        assert!(Snapshot::decode(b"CVS1 99999999999 99999999999 9999999999 f\n").is_err());
        let mut nan = b"CVS1 1 1 f\n".to_vec();
        nan.extend_from_slice(&f64::NAN.to_le_bytes());
        assert!(Snapshot::decode(&nan).is_err());
    }
}
