use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrays::{FrameStack, ObjectImage, Probe};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn random_object(n: usize, seed: u64) -> ObjectImage {
    let mut r = rng(seed);
    ObjectImage {
        values: Array2::from_shape_simple_fn((n, n), || sample(&mut r)),
    }
}

pub fn random_probe(m: usize, seed: u64) -> Probe {
    let mut r = rng(seed);
    Probe {
        values: Array2::from_shape_simple_fn((m, m), || sample(&mut r)),
    }
}

pub fn random_stack(k: usize, m: usize, seed: u64) -> FrameStack {
    let mut r = rng(seed);
    FrameStack {
        values: Array3::from_shape_simple_fn((k, m, m), || sample(&mut r)),
    }
}
