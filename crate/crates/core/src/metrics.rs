//! Convergence diagnostics.

use serde::{Deserialize, Serialize};

use crate::arrays::{inner, FrameStack, Probe};
use crate::error::{Error, Result};
use crate::fourier::{DiffractionAmplitudes, FourierPlan};

/// One line of a convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iter: usize,
    pub nrmse_probe: Option<f64>,
    pub data_residual: f64,
    pub pairwise: f64,
    pub wall_ms: f64,
}

/// `min_c ‖c w_est − w_true‖ / ‖w_true‖` over complex scalars `c`.
///
/// The minimizer is `c = <w_est, w_true> / ‖w_est‖²`.
pub fn nrmse_probe(w_est: &Probe, w_true: &Probe) -> Result<f64> {
    if w_est.values.dim() != w_true.values.dim() {
        return Err(Error::Shape(format!(
            "probe shapes differ: {:?} vs {:?}",
            w_est.values.dim(),
            w_true.values.dim()
        )));
    }
    let est2 = w_est.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let true2 = w_true.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
    if est2 == 0.0 || true2 == 0.0 {
        return Err(Error::InvalidInput("nrmse of a zero-norm probe".into()));
    }
    let c = inner(&w_est.values, &w_true.values) / est2;
    let err2: f64 = w_est
        .values
        .iter()
        .zip(w_true.values.iter())
        .map(|(e, t)| (c * e - t).norm_sqr())
        .sum();
    Ok((err2 / true2).sqrt())
}

/// `‖ |F z| − a ‖ / ‖a‖`; zero when both sides vanish.
pub fn data_residual(z: &FrameStack, a: &DiffractionAmplitudes) -> Result<f64> {
    if z.values.dim() != a.values().dim() {
        return Err(Error::Shape(format!(
            "frame stack {:?} vs amplitudes {:?}",
            z.values.dim(),
            a.values().dim()
        )));
    }
    let spectrum = FourierPlan::new(z.frame_size()).forward(z);
    let diff2: f64 = spectrum
        .values
        .iter()
        .zip(a.values().iter())
        .map(|(u, amp)| (u.norm() - amp).powi(2))
        .sum();
    let a_norm = a.norm();
    Ok(if a_norm > 0.0 { diff2.sqrt() / a_norm } else { diff2.sqrt() })
}
