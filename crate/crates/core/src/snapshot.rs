//! `FWS1` binary snapshot format.
//!
//! Layout (little-endian): magic `FWS1`, `u32` N, `f64` L, `u8` frame,
//! `f64` t, then N `f64` samples. Profile dumps append one trailing tag byte.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Frame, Grid};

pub const MAGIC: &[u8; 4] = b"FWS1";
const HEADER_LEN: usize = 4 + 4 + 8 + 1 + 8;

/// Tag byte carried by profile dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileTag {
    HeatKernel = 1,
    SelfSimilar = 2,
    TheoremProfile = 3,
    Residual = 4,
}

impl ProfileTag {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(ProfileTag::HeatKernel),
            2 => Some(ProfileTag::SelfSimilar),
            3 => Some(ProfileTag::TheoremProfile),
            4 => Some(ProfileTag::Residual),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
    pub profile: Option<ProfileTag>,
}

impl Snapshot {
    pub fn new(t: f64, field: Field) -> Self {
        Snapshot {
            t,
            field,
            profile: None,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let grid = self.field.grid();
        let n = grid.len();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * n + 1);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&grid.half_length().to_le_bytes());
        out.push(grid.frame().to_byte());
        out.extend_from_slice(&self.t.to_le_bytes());
        for v in self.field.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(tag) = self.profile {
            out.push(tag as u8);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "snapshot too short: {} bytes",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format("bad magic, expected FWS1".into()));
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let half_length = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let frame = Frame::from_byte(bytes[16])
            .ok_or_else(|| Error::Format(format!("unknown frame byte {}", bytes[16])))?;
        let t = f64::from_le_bytes(bytes[17..25].try_into().unwrap());
        if !t.is_finite() {
            return Err(Error::Format(format!("non-finite snapshot time {t}")));
        }
        let body = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format("sample count overflows".into()))?;
        let expected = HEADER_LEN + body;
        let profile = match bytes.len() {
            len if len == expected => None,
            len if len == expected + 1 => {
                Some(ProfileTag::from_byte(bytes[expected]).ok_or_else(|| {
                    Error::Format(format!("unknown profile tag {}", bytes[expected]))
                })?)
            }
            len => {
                return Err(Error::Format(format!(
                    "snapshot length {len} does not match N = {n} (expected {expected})"
                )))
            }
        };
        let grid = Grid::new(half_length, n, frame).map_err(|e| Error::Format(e.to_string()))?;
        let values = bytes[HEADER_LEN..expected]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let field = Field::new(grid, values).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Snapshot { t, field, profile })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Snapshot::decode(&fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_snapshot() -> Snapshot {
        let grid = Grid::new(3.5, 8, Frame::Comoving).unwrap();
        Snapshot::new(2.25, grid.sample(|x| x * x - 1.0))
    }

    #[test]
    fn header_layout_is_exact() {
        let bytes = sample_snapshot().encode();
        assert_eq!(&bytes[..4], b"FWS1");
        assert_eq!(&bytes[4..8], &8u32.to_le_bytes());
        assert_eq!(&bytes[8..16], &3.5f64.to_le_bytes());
        assert_eq!(bytes[16], 1);
        assert_eq!(&bytes[17..25], &2.25f64.to_le_bytes());
        assert_eq!(bytes.len(), 25 + 64);
    }

    #[test]
    fn profile_tag_is_trailing_byte() {
        let mut s = sample_snapshot();
        s.profile = Some(ProfileTag::SelfSimilar);
        let bytes = s.encode();
        assert_eq!(*bytes.last().unwrap(), 2);
        assert_eq!(Snapshot::decode(&bytes).unwrap(), s);
    }

    #[test]
    fn rejects_malformed() {
        let good = sample_snapshot().encode();
        assert!(Snapshot::decode(&good[..20]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(Snapshot::decode(&bad).is_err());
        let mut bad = good.clone();
        bad[16] = 7;
        assert!(Snapshot::decode(&bad).is_err());
        let mut bad = good.clone();
        bad[4..8].copy_from_slice(&12u32.to_le_bytes());
        assert!(Snapshot::decode(&bad).is_err());
        let mut bad = good.clone();
        bad.extend_from_slice(&[0, 0]);
        assert!(Snapshot::decode(&bad).is_err());
        let mut bad = good;
        bad[25..33].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(Snapshot::decode(&bad).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(values in proptest::collection::vec(-1e6f64..1e6, 16),
                      t in 0.0f64..1e4, l in 0.1f64..1e3, lab in any::<bool>()) {
            let frame = if lab { Frame::Lab } else { Frame::Comoving };
            let grid = Grid::new(l, 16, frame).unwrap();
            let s = Snapshot::new(t, Field::new(grid, values).unwrap());
            prop_assert_eq!(Snapshot::decode(&s.encode()).unwrap(), s);
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = Snapshot::decode(&bytes);
        }
    }
}
