//! Seeded synthetic experiments: phantoms, probes, raster scans and
//! forward-simulated amplitudes.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::arrays::{norm, ObjectImage, Probe};
use crate::error::{Error, Result};
use crate::fourier::{DiffractionAmplitudes, FourierPlan};
use crate::geometry::ScanGeometry;
use crate::operators::apply_q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextureKind {
    /// Low-pass filtered complex noise.
    Smooth,
    /// The smooth field quantized into flat complex-valued regions.
    Piecewise,
}

fn default_smoothing() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub n: usize,
    /// Fraction of the object's energy held by its constant component.
    pub dc_fraction: f64,
    pub texture_seed: u64,
    pub texture_kind: TextureKind,
    /// Gaussian correlation length of the texture, in pixels.
    #[serde(default = "default_smoothing")]
    pub smoothing_px: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Gaussian-apodized circular aperture with a quadratic phase.
    ApertureGauss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub m: usize,
    pub kind: ProbeKind,
    pub aperture_radius_px: f64,
    /// Quadratic phase in radians reached at the aperture edge.
    pub defocus_phase_strength: f64,
    pub seed: u64,
}

fn complex_noise(rng: &mut ChaCha8Rng, shape: (usize, usize), sigma: f64) -> Array2<Complex64> {
    Array2::from_shape_simple_fn(shape, || {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * sigma, im * sigma)
    })
}

/// Signed DFT frequency of index `k` in cycles per sample.
fn freq(k: usize, size: usize) -> f64 {
    let k = k as f64;
    let s = size as f64;
    if k < s / 2.0 {
        k / s
    } else {
        k / s - 1.0
    }
}

/// Gaussian blur with standard deviation `sigma_px`, applied as a
/// multiplier in the Fourier domain (circular boundaries).
fn gaussian_blur(a: &Array2<Complex64>, sigma_px: f64) -> Array2<Complex64> {
    if sigma_px <= 0.0 {
        return a.clone();
    }
    let size = a.nrows();
    let plan = FourierPlan::new(size);
    let mut spec = a.clone();
    plan.transform_2d(&mut spec, false);
    for ((u, v), val) in spec.indexed_iter_mut() {
        let f2 = freq(u, size).powi(2) + freq(v, size).powi(2);
        *val *= (-2.0 * PI * PI * sigma_px * sigma_px * f2).exp();
    }
    plan.transform_2d(&mut spec, true);
    spec
}

/// Phantom `ψ = α·1 + β·t` with `t` zero-mean, so that the constant part
/// holds exactly `dc_fraction` of `‖ψ‖² = n²`.
pub fn make_test_object(spec: &PhantomSpec) -> Result<ObjectImage> {
    if !(0.0..1.0).contains(&spec.dc_fraction) {
        return Err(Error::InvalidInput(format!(
            "dc_fraction must lie in [0, 1), got {}",
            spec.dc_fraction
        )));
    }
    if spec.n == 0 {
        return Err(Error::InvalidInput("phantom size must be positive".into()));
    }
    if !(spec.smoothing_px.is_finite() && spec.smoothing_px >= 0.0) {
        return Err(Error::InvalidInput("smoothing_px must be finite and >= 0".into()));
    }
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.texture_seed);
    let field = gaussian_blur(&complex_noise(&mut rng, (n, n), 1.0), spec.smoothing_px);
    let mut texture = match spec.texture_kind {
        TextureKind::Smooth => field,
        TextureKind::Piecewise => field.mapv(|v| {
            Complex64::new(if v.re >= 0.0 { 1.0 } else { -1.0 }, if v.im >= 0.0 { 0.5 } else { -0.5 })
        }),
    };
    let mean = texture.sum() / (n * n) as f64;
    texture.mapv_inplace(|v| v - mean);
    let t_norm = norm(&texture);
    if t_norm == 0.0 {
        return Err(Error::Degenerate("phantom texture is constant".into()));
    }
    let alpha = spec.dc_fraction.sqrt();
    let beta = ((1.0 - spec.dc_fraction) * (n * n) as f64).sqrt() / t_norm;
    Ok(ObjectImage {
        values: texture.mapv(|v| Complex64::new(alpha, 0.0) + v * beta),
    })
}

/// Share of `‖ψ‖²` carried by the mean of `ψ`.
pub fn dc_energy_fraction(psi: &ObjectImage) -> f64 {
    let count = psi.values.len() as f64;
    let mean = psi.values.sum() / count;
    mean.norm_sqr() * count / psi.norm().powi(2)
}

/// Apodized aperture centered at `((m−1)/2, (m−1)/2)` with a quadratic phase
/// and a weak seeded amplitude ripple (within ±10 %).
pub fn make_probe(spec: &ProbeSpec) -> Result<Probe> {
    let m = spec.m;
    let radius = spec.aperture_radius_px;
    if m == 0 || !(radius > 0.0 && radius <= m as f64 / 2.0) {
        return Err(Error::InvalidInput(format!(
            "aperture radius must lie in (0, m/2] with m = {m}, got {radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ripple = gaussian_blur(&complex_noise(&mut rng, (m, m), 1.0), radius / 3.0).mapv(|v| v.re);
    let peak = ripple.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c = (m as f64 - 1.0) / 2.0;
    let values = Array2::from_shape_fn((m, m), |(r, col)| {
        let rho2 = (r as f64 - c).powi(2) + (col as f64 - c).powi(2);
        if rho2 > radius * radius {
            return Complex64::default();
        }
        let mut amp = (-rho2 / (radius * radius)).exp();
        if peak > 0.0 {
            amp *= 1.0 + 0.1 * ripple[[r, col]] / peak;
        }
        Complex64::from_polar(amp, spec.defocus_phase_strength * rho2 / (radius * radius))
    });
    Probe::new(values)
}

/// Raster scan with positions `(step·r, step·c)` over a `rows`×`cols` grid.
pub fn make_raster_geometry(n: usize, m: usize, step: usize, grid: (usize, usize)) -> Result<ScanGeometry> {
    if step == 0 || grid.0 == 0 || grid.1 == 0 {
        return Err(Error::InvalidInput("raster step and grid must be positive".into()));
    }
    let positions: Vec<[i64; 2]> = (0..grid.0)
        .flat_map(|r| (0..grid.1).map(move |c| [(r * step) as i64, (c * step) as i64]))
        .collect();
    ScanGeometry::new(n, m, &positions)
}

/// Far-field amplitudes `a = |F Q ψ|`.
pub fn simulate_data(psi: &ObjectImage, w: &Probe, g: &ScanGeometry) -> Result<DiffractionAmplitudes> {
    let z = apply_q(psi, w, g)?;
    let spectrum = FourierPlan::new(g.m()).forward(&z);
    DiffractionAmplitudes::new(spectrum.values.mapv(|v| v.norm()))
}

/// Degraded probe guess: Gaussian blur plus seeded complex noise of norm
/// about `noise_level · ‖w‖`, rescaled back to `‖w‖`.
pub fn perturb_probe(w: &Probe, blur_sigma_px: f64, noise_level: f64, seed: u64) -> Result<Probe> {
    if !(blur_sigma_px >= 0.0 && noise_level >= 0.0) {
        return Err(Error::InvalidInput("blur and noise levels must be >= 0".into()));
    }
    let m = w.size();
    let w_norm = w.norm();
    let mut out = gaussian_blur(&w.values, blur_sigma_px);
    if noise_level > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = noise_level * w_norm / (m as f64 * std::f64::consts::SQRT_2);
        out += &complex_noise(&mut rng, (m, m), sigma);
    }
    let out_norm = norm(&out);
    if out_norm > 0.0 {
        out.mapv_inplace(|v| v * (w_norm / out_norm));
    }
    Probe::new(out)
}
