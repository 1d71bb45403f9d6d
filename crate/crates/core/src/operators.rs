//! Matrix-free structured operators of the ptychographic forward model.
//!
//! With `T` the stacked frame extraction, `S` the probe replication and
//! `Q = diag(S w) T`, every operator here acts on arrays directly and never
//! forms a matrix. Vector forms are row-major throughout (object pixel
//! `(r, c)` is entry `r * n + c`; frame pixel `(i, r, c)` is `i * m² + r * m + c`).

use std::ops::AddAssign;

use ndarray::{Array2, Array3, ArrayView2, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::arrays::{FrameStack, ObjectImage, Probe};
use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;

/// Gathers the `K` circular `m`×`m` windows of an `n`×`n` array (`T`).
pub fn gather_frames<T>(image: ArrayView2<'_, T>, g: &ScanGeometry) -> Array3<T>
where
    T: Copy + Default + Send + Sync,
{
    let (n, m) = (g.n(), g.m());
    debug_assert_eq!(image.dim(), (n, n));
    let mut out = Array3::from_elem((g.k(), m, m), T::default());
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(g.positions().par_iter())
        .for_each(|(mut frame, pos)| {
            for r in 0..m {
                let src = image.row((pos[0] + r) % n);
                for c in 0..m {
                    frame[[r, c]] = src[(pos[1] + c) % n];
                }
            }
        });
    out
}

/// Scatter-adds every frame back onto an `n`×`n` canvas (`T*`).
///
/// Accumulation runs frame-ascending then row-major, so results are
/// bit-reproducible.
pub fn scatter_add_frames<T>(frames: &Array3<T>, g: &ScanGeometry) -> Array2<T>
where
    T: Copy + Default + AddAssign,
{
    let (n, m) = (g.n(), g.m());
    debug_assert_eq!(frames.dim(), (g.k(), m, m));
    let mut canvas = Array2::from_elem((n, n), T::default());
    for (frame, pos) in frames.outer_iter().zip(g.positions()) {
        for r in 0..m {
            let row = (pos[0] + r) % n;
            for c in 0..m {
                canvas[[row, (pos[1] + c) % n]] += frame[[r, c]];
            }
        }
    }
    canvas
}

/// Sums a stack over the frame axis (`S*`), frame-ascending.
pub fn sum_over_frames<T>(frames: &Array3<T>) -> Array2<T>
where
    T: Copy + Default + AddAssign,
{
    let (_, r, c) = frames.dim();
    let mut acc = Array2::from_elem((r, c), T::default());
    for frame in frames.outer_iter() {
        Zip::from(&mut acc).and(&frame).for_each(|a, &b| *a += b);
    }
    acc
}

/// `T ψ`: the object seen through each scan window.
pub fn extract_frames(psi: &ObjectImage, g: &ScanGeometry) -> Result<FrameStack> {
    psi.check(g)?;
    Ok(FrameStack {
        values: gather_frames(psi.values.view(), g),
    })
}

/// `T* z`: adjoint of [`extract_frames`]; overlapping frames sum.
pub fn embed_add_frames(z: &FrameStack, g: &ScanGeometry) -> Result<ObjectImage> {
    z.check(g)?;
    Ok(ObjectImage {
        values: scatter_add_frames(&z.values, g),
    })
}

/// `S w`: one copy of the probe per frame.
pub fn replicate_probe(w: &Probe, g: &ScanGeometry) -> Result<FrameStack> {
    w.check(g)?;
    let m = g.m();
    let values = w
        .values
        .broadcast((g.k(), m, m))
        .expect("probe broadcasts over frames")
        .to_owned();
    Ok(FrameStack { values })
}

/// `S* z`: elementwise sum of all frames.
pub fn sum_frames(z: &FrameStack) -> Array2<Complex64> {
    sum_over_frames(&z.values)
}

/// `Q ψ = diag(S w) T ψ`.
pub fn apply_q(psi: &ObjectImage, w: &Probe, g: &ScanGeometry) -> Result<FrameStack> {
    w.check(g)?;
    let mut z = extract_frames(psi, g)?;
    z.values *= &w.values;
    Ok(z)
}

/// `Q* z = T* diag(S w̄) z`.
pub fn apply_q_adjoint(z: &FrameStack, w: &Probe, g: &ScanGeometry) -> Result<ObjectImage> {
    w.check(g)?;
    z.check(g)?;
    let conj_w = w.values.mapv(|v| v.conj());
    let weighted = &z.values * &conj_w;
    Ok(ObjectImage {
        values: scatter_add_frames(&weighted, g),
    })
}

/// Diagonals of `Q*Q` (object side) and `Q²` (frame side) for one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMaps {
    /// `T* S |w|²`, `n`×`n`.
    pub object_coverage: Array2<f64>,
    /// `T T* S |w|²`, `K`×`m`×`m`.
    pub frame_coverage: Array3<f64>,
}

impl CoverageMaps {
    pub fn max_object(&self) -> f64 {
        self.object_coverage.iter().copied().fold(0.0, f64::max)
    }

    /// Object coverage floored at `epsilon_rel * max`; errors when the probe
    /// illuminates nothing.
    pub(crate) fn floored_object(&self, epsilon_rel: f64) -> Result<Array2<f64>> {
        let max = self.max_object();
        if max <= 0.0 {
            return Err(Error::InvalidInput(
                "object coverage is identically zero (all-zero probe)".into(),
            ));
        }
        let eps = epsilon_rel * max;
        Ok(self.object_coverage.mapv(|c| c.max(eps)))
    }
}

/// Coverage diagonals `Q*Q = diag(T* S |w|²)` and `Q² = diag(T T* S |w|²)`.
pub fn coverage_maps(w: &Probe, g: &ScanGeometry) -> Result<CoverageMaps> {
    w.check(g)?;
    let m = g.m();
    let intensity = w.values.mapv(|v| v.norm_sqr());
    let stack = intensity
        .broadcast((g.k(), m, m))
        .expect("probe broadcasts over frames")
        .to_owned();
    let object_coverage = scatter_add_frames(&stack, g);
    let frame_coverage = gather_frames(object_coverage.view(), g);
    Ok(CoverageMaps {
        object_coverage,
        frame_coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::inner;
    use crate::test_util::{random_object, random_probe, random_stack};
    use ndarray::array;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_pixel_window() {
        let g = ScanGeometry::new(2, 1, &[[0, 0]]).unwrap();
        let psi = ObjectImage::new(array![[c(1.0), c(2.0)], [c(3.0), c(4.0)]]).unwrap();
        let z = extract_frames(&psi, &g).unwrap();
        assert_eq!(z.values, array![[[c(1.0)]]]);
    }

    #[test]
    fn full_window_is_identity() {
        let g = ScanGeometry::new(5, 5, &[[0, 0]]).unwrap();
        let psi = random_object(5, 1);
        let z = extract_frames(&psi, &g).unwrap();
        assert_eq!(z.values.index_axis(Axis(0), 0), psi.values);
        let back = embed_add_frames(&z, &g).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn overlapping_frames_add() {
        let g = ScanGeometry::new(4, 2, &[[1, 1], [1, 1]]).unwrap();
        let z = FrameStack {
            values: Array3::from_elem((2, 2, 2), c(1.0)),
        };
        let img = embed_add_frames(&z, &g).unwrap();
        for ((r, col), v) in img.values.indexed_iter() {
            let inside = (1..3).contains(&r) && (1..3).contains(&col);
            assert_eq!(*v, if inside { c(2.0) } else { c(0.0) });
        }
    }

    #[test]
    fn replicate_and_sum() {
        let g = ScanGeometry::new(4, 2, &[[0, 0], [1, 2], [3, 3]]).unwrap();
        let w = Probe::ones(2);
        let s = replicate_probe(&w, &g).unwrap();
        assert!(s.values.iter().all(|&v| v == c(1.0)));
        assert_eq!(sum_frames(&s), Array2::from_elem((2, 2), c(3.0)));
    }

    #[test]
    fn q_degenerates_to_t_and_s() {
        let g = ScanGeometry::new(6, 3, &[[0, 0], [2, 5], [4, 1]]).unwrap();
        let psi = random_object(6, 2);
        let w = random_probe(3, 3);
        assert_eq!(
            apply_q(&psi, &Probe::ones(3), &g).unwrap(),
            extract_frames(&psi, &g).unwrap()
        );
        let ones = ObjectImage::from_elem(6, c(1.0));
        assert_eq!(apply_q(&ones, &w, &g).unwrap(), replicate_probe(&w, &g).unwrap());
    }

    #[test]
    fn adjoint_of_q_on_single_full_frame() {
        let g = ScanGeometry::new(4, 4, &[[0, 0]]).unwrap();
        let psi = random_object(4, 5);
        let w = random_probe(4, 6);
        let back = apply_q_adjoint(&apply_q(&psi, &w, &g).unwrap(), &w, &g).unwrap();
        for ((idx, v), p) in back.values.indexed_iter().zip(psi.values.iter()) {
            let expect = p * w.values[idx].norm_sqr();
            assert!((v - expect).norm() <= 1e-14 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn coverage_of_single_flat_probe() {
        let g = ScanGeometry::new(5, 2, &[[1, 2]]).unwrap();
        let cov = coverage_maps(&Probe::ones(2), &g).unwrap();
        assert_eq!(cov.object_coverage.sum(), 4.0);
        assert_eq!(cov.object_coverage[[1, 2]], 1.0);
        assert_eq!(cov.object_coverage[[0, 0]], 0.0);
        assert!(cov.frame_coverage.iter().all(|&v| v == 1.0));

        let g2 = ScanGeometry::new(5, 2, &[[1, 2], [1, 2]]).unwrap();
        let cov2 = coverage_maps(&Probe::ones(2), &g2).unwrap();
        assert_eq!(cov2.object_coverage, &cov.object_coverage * 2.0);
    }

    #[test]
    fn q_commutes_in_frame_product() {
        let g = ScanGeometry::new(7, 3, &[[0, 0], [5, 6], [2, 3], [6, 1]]).unwrap();
        let psi = random_object(7, 8);
        let w = random_probe(3, 9);
        let a = apply_q(&psi, &w, &g).unwrap();
        let mut b = replicate_probe(&w, &g).unwrap();
        b.values *= &extract_frames(&psi, &g).unwrap().values;
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert!((x - y).norm() <= 1e-15 * x.norm().max(1e-300));
        }
    }

    #[test]
    fn shifting_positions_by_n_changes_nothing() {
        let g = ScanGeometry::new(6, 3, &[[0, 1], [4, 5], [2, 2]]).unwrap();
        let g2 = ScanGeometry::new(6, 3, &[[6, 1], [10, 5], [8, 2]]).unwrap();
        let psi = random_object(6, 10);
        let w = random_probe(3, 11);
        let z = random_stack(3, 3, 12);
        assert_eq!(apply_q(&psi, &w, &g).unwrap(), apply_q(&psi, &w, &g2).unwrap());
        assert_eq!(
            apply_q_adjoint(&z, &w, &g).unwrap(),
            apply_q_adjoint(&z, &w, &g2).unwrap()
        );
        assert_eq!(coverage_maps(&w, &g).unwrap(), coverage_maps(&w, &g2).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let g = ScanGeometry::new(6, 3, &[[0, 0]]).unwrap();
        assert!(extract_frames(&random_object(5, 1), &g).is_err());
        assert!(embed_add_frames(&random_stack(2, 3, 1), &g).is_err());
        assert!(replicate_probe(&random_probe(4, 1), &g).is_err());
    }

    #[test]
    fn adjoint_pairs_hold() {
        let g = ScanGeometry::new(8, 4, &[[0, 0], [3, 6], [7, 7], [2, 1], [5, 3]]).unwrap();
        let psi = random_object(8, 20);
        let w = random_probe(4, 21);
        let z = random_stack(5, 4, 22);
        let lhs = inner(&extract_frames(&psi, &g).unwrap().values, &z.values);
        let rhs = inner(&psi.values, &embed_add_frames(&z, &g).unwrap().values);
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
        let lhs = inner(&apply_q(&psi, &w, &g).unwrap().values, &z.values);
        let rhs = inner(&psi.values, &apply_q_adjoint(&z, &w, &g).unwrap().values);
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
    }
}
