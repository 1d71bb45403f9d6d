//! Explicit matrices for `T`, `S` and `Q` on small instances.
//!
//! These exist to check the matrix-free operators. They share the row-major
//! flattening of [`crate::operators`].

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::arrays::{FrameStack, ObjectImage, Probe};
use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;

/// Upper bound on `K m² · n²` accepted by [`dense_operators`].
pub const DENSE_ENTRY_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct DenseOperators {
    /// `K m² × n²` frame extraction.
    pub t: Array2<Complex64>,
    /// `K m² × m²` probe replication.
    pub s: Array2<Complex64>,
    /// `K m² × n²`, `diag(S w) T`.
    pub q: Array2<Complex64>,
}

pub fn dense_operators(w: &Probe, g: &ScanGeometry) -> Result<DenseOperators> {
    w.check(g)?;
    let (n, m, k) = (g.n(), g.m(), g.k());
    let rows = k * m * m;
    let entries = rows * n * n;
    if entries > DENSE_ENTRY_LIMIT {
        return Err(Error::TooLarge {
            entries,
            limit: DENSE_ENTRY_LIMIT,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let mut t = Array2::zeros((rows, n * n));
    let mut s = Array2::zeros((rows, m * m));
    for (i, &pos) in g.positions().iter().enumerate() {
        for r in 0..m {
            for c in 0..m {
                let row = i * m * m + r * m + c;
                let (pr, pc) = g.object_pixel(pos, r, c);
                t[[row, pr * n + pc]] = one;
                s[[row, r * m + c]] = one;
            }
        }
    }
    let sw = s.dot(&flatten(&w.values));
    let mut q = t.clone();
    for (mut row, scale) in q.rows_mut().into_iter().zip(sw.iter()) {
        row.mapv_inplace(|v| v * scale);
    }
    Ok(DenseOperators { t, s, q })
}

/// Row-major vector form of any complex array.
pub fn flatten<D: ndarray::Dimension>(a: &ndarray::Array<Complex64, D>) -> Array1<Complex64> {
    a.iter().copied().collect()
}

pub fn object_vector(psi: &ObjectImage) -> Array1<Complex64> {
    flatten(&psi.values)
}

pub fn stack_vector(z: &FrameStack) -> Array1<Complex64> {
    flatten(&z.values)
}

/// Conjugate transpose.
pub fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|v| v.conj())
}
