use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scan geometry: an `n`×`n` object viewed through `m`×`m` frames at `K`
/// integer offsets with circular (wrap-around) boundaries.
///
/// Offsets are reduced modulo `n` on construction, so frame `i` covers object
/// pixels `((row_i + r) mod n, (col_i + c) mod n)` for `0 <= r, c < m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct ScanGeometry {
    n: usize,
    m: usize,
    positions: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    n: usize,
    m: usize,
    positions: Vec<[i64; 2]>,
}

impl TryFrom<RawGeometry> for ScanGeometry {
    type Error = Error;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        ScanGeometry::new(raw.n, raw.m, &raw.positions)
    }
}

impl From<ScanGeometry> for RawGeometry {
    fn from(g: ScanGeometry) -> Self {
        RawGeometry {
            n: g.n,
            m: g.m,
            positions: g
                .positions
                .iter()
                .map(|p| [p[0] as i64, p[1] as i64])
                .collect(),
        }
    }
}

impl ScanGeometry {
    /// Builds a geometry from signed offsets; offsets are wrapped into `0..n`.
    pub fn new(n: usize, m: usize, positions: &[[i64; 2]]) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("frame size m must be at least 1".into()));
        }
        if m > n {
            return Err(Error::InvalidInput(format!(
                "frame size m = {m} exceeds object size n = {n}"
            )));
        }
        if positions.is_empty() {
            return Err(Error::InvalidInput("geometry needs at least one scan position".into()));
        }
        let nn = n as i64;
        let positions = positions
            .iter()
            .map(|p| [p[0].rem_euclid(nn) as usize, p[1].rem_euclid(nn) as usize])
            .collect();
        Ok(ScanGeometry { n, m, positions })
    }

    /// Object side length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Frame side length.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of frames.
    pub fn k(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[usize; 2]] {
        &self.positions
    }

    /// Object pixel seen by frame pixel `(r, c)` of a frame at `pos`.
    #[inline]
    pub fn object_pixel(&self, pos: [usize; 2], r: usize, c: usize) -> (usize, usize) {
        ((pos[0] + r) % self.n, (pos[1] + c) % self.n)
    }

    /// Boolean mask of object pixels touched by at least one frame.
    pub fn coverage_mask(&self) -> ndarray::Array2<bool> {
        let mut mask = ndarray::Array2::from_elem((self.n, self.n), false);
        for &pos in &self.positions {
            for r in 0..self.m {
                for c in 0..self.m {
                    mask[self.object_pixel(pos, r, c)] = true;
                }
            }
        }
        mask
    }
}
