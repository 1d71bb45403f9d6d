//! Batched unitary 2D DFT over frame stacks and the Fourier-magnitude
//! projection.

use std::sync::Arc;

use ndarray::{Array2, Array3, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::arrays::FrameStack;
use crate::error::{Error, Result};

/// Measured far-field magnitudes, `K`×`m`×`m`, nonnegative and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionAmplitudes {
    values: Array3<f64>,
}

impl DiffractionAmplitudes {
    pub fn new(values: Array3<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "amplitudes must be finite and nonnegative, found {bad}"
            )));
        }
        let (_, r, c) = values.dim();
        if r != c {
            return Err(Error::Shape(format!("amplitude frames must be square, got {r}x{c}")));
        }
        Ok(DiffractionAmplitudes { values })
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn into_inner(self) -> Array3<f64> {
        self.values
    }

    pub fn frame_count(&self) -> usize {
        self.values.dim().0
    }

    pub fn frame_size(&self) -> usize {
        self.values.dim().1
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cached forward and inverse plans for square `size`×`size` transforms.
///
/// Both directions carry a `1/size` factor, so the pair is unitary.
#[derive(Clone)]
pub struct FourierPlan {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan").field("size", &self.size).finish()
    }
}

impl FourierPlan {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        FourierPlan {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Transforms one contiguous row-major `size`×`size` buffer in place.
    fn transform_slice(&self, data: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
        let m = self.size;
        let fft = if inverse { &self.inverse } else { &self.forward };
        fft.process(data);
        for r in 0..m {
            for c in 0..m {
                scratch[c * m + r] = data[r * m + c];
            }
        }
        fft.process(scratch);
        let scale = 1.0 / m as f64;
        for r in 0..m {
            for c in 0..m {
                data[r * m + c] = scratch[c * m + r] * scale;
            }
        }
    }

    fn transform_stack(&self, values: &mut Array3<Complex64>, inverse: bool) {
        assert_eq!(values.dim().1, self.size, "frame size does not match the plan");
        assert_eq!(values.dim().2, self.size, "frame size does not match the plan");
        if !values.is_standard_layout() {
            *values = values.as_standard_layout().into_owned();
        }
        let m2 = self.size * self.size;
        values
            .axis_iter_mut(Axis(0))
            .into_par_iter()
            .for_each_init(
                || vec![Complex64::default(); m2],
                |scratch, mut frame| {
                    let data = frame.as_slice_mut().expect("standard layout frame");
                    self.transform_slice(data, scratch, inverse);
                },
            );
    }

    /// Unitary forward DFT of every frame.
    pub fn forward(&self, z: &FrameStack) -> FrameStack {
        let mut values = z.values.clone();
        self.transform_stack(&mut values, false);
        FrameStack { values }
    }

    /// Unitary inverse DFT of every frame.
    pub fn inverse(&self, spectrum: &FrameStack) -> FrameStack {
        let mut values = spectrum.values.clone();
        self.transform_stack(&mut values, true);
        FrameStack { values }
    }

    /// Unitary 2D DFT of a single square array, in place.
    pub fn transform_2d(&self, a: &mut Array2<Complex64>, inverse: bool) {
        assert_eq!(a.dim(), (self.size, self.size), "array size does not match the plan");
        if !a.is_standard_layout() {
            *a = a.as_standard_layout().into_owned();
        }
        let mut scratch = vec![Complex64::default(); self.size * self.size];
        self.transform_slice(a.as_slice_mut().expect("standard layout"), &mut scratch, inverse);
    }

    /// Replaces Fourier magnitudes with `a`, keeping phases (`P_a`).
    ///
    /// Also returns `‖ |F z| − a ‖ / ‖a‖` of the input, which falls out of
    /// the same transform.
    pub fn magnitude_project_with_residual(
        &self,
        z: &FrameStack,
        a: &DiffractionAmplitudes,
    ) -> Result<(FrameStack, f64)> {
        check_amplitudes(z, a)?;
        let mut spectrum = z.values.clone();
        self.transform_stack(&mut spectrum, false);
        let mut diff2 = 0.0;
        Zip::from(&mut spectrum).and(&a.values).for_each(|u, &amp| {
            let mag = u.norm();
            diff2 += (mag - amp) * (mag - amp);
            *u = phase(*u, mag) * amp;
        });
        self.transform_stack(&mut spectrum, true);
        let a_norm = a.norm();
        let residual = if a_norm > 0.0 { diff2.sqrt() / a_norm } else { diff2.sqrt() };
        Ok((FrameStack { values: spectrum }, residual))
    }

    pub fn magnitude_project(&self, z: &FrameStack, a: &DiffractionAmplitudes) -> Result<FrameStack> {
        self.magnitude_project_with_residual(z, a).map(|(p, _)| p)
    }
}

/// `u / |u|`, with the convention `phase(0) = 1`.
#[inline]
fn phase(u: Complex64, mag: f64) -> Complex64 {
    if mag > 0.0 {
        u / mag
    } else {
        Complex64::new(1.0, 0.0)
    }
}

fn check_amplitudes(z: &FrameStack, a: &DiffractionAmplitudes) -> Result<()> {
    if z.values.dim() != a.values.dim() {
        return Err(Error::Shape(format!(
            "frame stack {:?} vs amplitudes {:?}",
            z.values.dim(),
            a.values.dim()
        )));
    }
    Ok(())
}

pub fn frame_dft(z: &FrameStack) -> FrameStack {
    FourierPlan::new(z.frame_size()).forward(z)
}

pub fn frame_idft(spectrum: &FrameStack) -> FrameStack {
    FourierPlan::new(spectrum.frame_size()).inverse(spectrum)
}

pub fn magnitude_project(z: &FrameStack, a: &DiffractionAmplitudes) -> Result<FrameStack> {
    FourierPlan::new(z.frame_size()).magnitude_project(z, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::random_stack;
    use std::f64::consts::PI;

    fn naive_dft(frame: &Array2<Complex64>, sign: f64) -> Array2<Complex64> {
        let m = frame.nrows();
        Array2::from_shape_fn((m, m), |(u, v)| {
            let mut acc = Complex64::default();
            for r in 0..m {
                for c in 0..m {
                    let ang = sign * 2.0 * PI * ((u * r + v * c) as f64) / m as f64;
                    acc += frame[[r, c]] * Complex64::from_polar(1.0, ang);
                }
            }
            acc / m as f64
        })
    }

    fn max_rel(a: &Array3<Complex64>, b: &Array3<Complex64>) -> f64 {
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn ones_frame_maps_to_dc_delta() {
        let z = FrameStack {
            values: Array3::from_elem((1, 4, 4), Complex64::new(1.0, 0.0)),
        };
        let spec = frame_dft(&z);
        for ((_, u, v), val) in spec.values.indexed_iter() {
            let expect = if u == 0 && v == 0 { 4.0 } else { 0.0 };
            assert!((val - Complex64::new(expect, 0.0)).norm() < 1e-14);
        }
        let back = frame_idft(&spec);
        assert!(max_rel(&back.values, &z.values) < 1e-14);
    }

    #[test]
    fn delta_maps_to_constant() {
        let mut z = FrameStack::zeros(1, 5);
        z.values[[0, 0, 0]] = Complex64::new(1.0, 0.0);
        let spec = frame_dft(&z);
        for v in spec.values.iter() {
            assert!((v - Complex64::new(0.2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_naive_summation() {
        let z = random_stack(3, 4, 1);
        let fwd = frame_dft(&z);
        let inv = frame_idft(&z);
        for i in 0..3 {
            let frame = z.values.index_axis(Axis(0), i).to_owned();
            let f = naive_dft(&frame, -1.0);
            let b = naive_dft(&frame, 1.0);
            for ((x, y), (p, q)) in fwd
                .values
                .index_axis(Axis(0), i)
                .iter()
                .zip(f.iter())
                .zip(inv.values.index_axis(Axis(0), i).iter().zip(b.iter()))
            {
                assert!((x - y).norm() < 1e-13);
                assert!((p - q).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn round_trip_and_unitarity() {
        let z = random_stack(6, 7, 2);
        let spec = frame_dft(&z);
        assert!((spec.norm() - z.norm()).abs() <= 1e-13 * z.norm());
        assert!(max_rel(&frame_idft(&spec).values, &z.values) < 1e-13);
    }

    #[test]
    fn feasible_stack_is_unchanged() {
        let z = random_stack(4, 4, 3);
        let a = DiffractionAmplitudes::new(frame_dft(&z).values.mapv(|v| v.norm())).unwrap();
        let p = magnitude_project(&z, &a).unwrap();
        assert!(max_rel(&p.values, &z.values) < 1e-12);
    }

    #[test]
    fn zero_stack_takes_unit_phase() {
        let z = FrameStack::zeros(2, 4);
        let amps = random_stack(2, 4, 4).values.mapv(|v| v.norm());
        let a = DiffractionAmplitudes::new(amps.clone()).unwrap();
        let p = magnitude_project(&z, &a).unwrap();
        let expect = frame_idft(&FrameStack {
            values: amps.mapv(|v| Complex64::new(v, 0.0)),
        });
        assert!(max_rel(&p.values, &expect.values) < 1e-14);
    }

    #[test]
    fn projection_enforces_magnitudes() {
        let z = random_stack(3, 4, 5);
        let a = DiffractionAmplitudes::new(random_stack(3, 4, 6).values.mapv(|v| v.norm())).unwrap();
        let p = magnitude_project(&z, &a).unwrap();
        let mags = frame_dft(&p).values.mapv(|v| v.norm());
        for (x, y) in mags.iter().zip(a.values().iter()) {
            assert!((x - y).abs() <= 1e-12 * a.norm());
        }
        let twice = magnitude_project(&p, &a).unwrap();
        assert!(max_rel(&twice.values, &p.values) < 1e-12);
        assert!((frame_dft(&p).norm() - a.norm()).abs() <= 1e-12 * a.norm());
    }

    #[test]
    fn amplitudes_reject_negative_values() {
        let mut v = Array3::zeros((1, 2, 2));
        v[[0, 1, 1]] = -1.0;
        assert!(DiffractionAmplitudes::new(v).is_err());
        assert!(magnitude_project(
            &FrameStack::zeros(2, 2),
            &DiffractionAmplitudes::new(Array3::zeros((1, 2, 2))).unwrap()
        )
        .is_err());
    }
}
