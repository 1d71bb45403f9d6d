#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array3};
use ptycho::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod oracle;

pub type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(r: &mut ChaCha8Rng) -> C {
    C::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn random_object(n: usize, seed: u64) -> ObjectImage {
    let mut r = rng(seed);
    ObjectImage::new(Array2::from_shape_fn((n, n), |_| rand_c(&mut r))).unwrap()
}

pub fn random_probe(m: usize, seed: u64) -> Probe {
    let mut r = rng(seed);
    Probe::new(Array2::from_shape_fn((m, m), |_| rand_c(&mut r))).unwrap()
}

pub fn random_stack(k: usize, m: usize, seed: u64) -> FrameStack {
    let mut r = rng(seed);
    FrameStack::new(Array3::from_shape_fn((k, m, m), |_| rand_c(&mut r))).unwrap()
}

/// `k` scan positions drawn uniformly from the `n`×`n` grid.
pub fn random_geometry(n: usize, m: usize, k: usize, seed: u64) -> ScanGeometry {
    let mut r = rng(seed);
    let pos: Vec<[i64; 2]> = (0..k)
        .map(|_| [r.random_range(0..n as i64), r.random_range(0..n as i64)])
        .collect();
    ScanGeometry::new(n, m, &pos).unwrap()
}

/// Positions whose union of windows covers every object pixel.
pub fn covering_geometry(n: usize, m: usize, k: usize, seed: u64) -> ScanGeometry {
    (seed..)
        .map(|s| random_geometry(n, m, k, s))
        .find(|g| g.coverage_mask().iter().all(|&c| c))
        .unwrap()
}

pub fn to_na(a: &ndarray::Array2<C>) -> DMatrix<C> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn vec_na<'a>(it: impl IntoIterator<Item = &'a C>) -> DVector<C> {
    DVector::from_vec(it.into_iter().copied().collect())
}

pub fn rel_err(a: &DVector<C>, b: &DVector<C>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Minimum-norm least squares: normal equations over the nonzero columns,
/// solved by LU; components on zero columns are 0.
pub fn lstsq(a: &DMatrix<C>, b: &DVector<C>) -> DVector<C> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| a.column(j).norm() > 0.0).collect();
    let ar = a.select_columns(&cols);
    let normal = ar.adjoint() * &ar;
    let xr = normal.lu().solve(&(ar.adjoint() * b)).expect("full column rank");
    let mut x = DVector::zeros(a.ncols());
    for (i, &j) in cols.iter().enumerate() {
        x[j] = xr[i];
    }
    x
}
