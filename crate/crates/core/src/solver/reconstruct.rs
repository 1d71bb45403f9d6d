use std::time::Instant;

use ndarray::Zip;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrays::{FrameStack, ObjectImage, Probe};
use crate::error::{Error, Result};
use crate::fourier::{DiffractionAmplitudes, FourierPlan};
use crate::geometry::ScanGeometry;
use crate::metrics::{nrmse_probe, MetricsRow};
use crate::operators::{apply_q, coverage_maps, CoverageMaps};

use super::center::{center_probe, roll_object};
use super::transparency::{
    build_overlap_matrix, transparency_framewise, transparency_global, update_probe_rank1,
    OverlapMatrix, TransparencyEstimate,
};
use super::updates::{
    pairwise_discrepancy_with, update_object_with, update_probe_power, update_probe_standard,
};
use super::{InitFrames, ProbeMode, SolverConfig};

/// Estimates after outer iteration `iter`.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub iter: usize,
    pub w: Probe,
    pub psi: ObjectImage,
    pub z: FrameStack,
    /// Coverage of `w`, cached for the next object update.
    pub coverage: CoverageMaps,
}

impl IterationState {
    pub fn new(iter: usize, w: Probe, psi: ObjectImage, z: FrameStack, g: &ScanGeometry) -> Result<Self> {
        psi.check(g)?;
        z.check(g)?;
        let coverage = coverage_maps(&w, g)?;
        Ok(IterationState {
            iter,
            w,
            psi,
            z,
            coverage,
        })
    }
}

/// Things worth knowing about a run besides the metric trace.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverEvent {
    /// The transparency-shifted frames vanished; the plain power step was
    /// used for this iteration instead.
    Rank1Fallback { iter: usize },
    ProbeCentered { iter: usize, shift: [i64; 2] },
}

#[derive(Debug, Clone)]
pub struct History {
    pub rows: Vec<MetricsRow>,
    pub events: Vec<SolverEvent>,
    pub final_state: IterationState,
    /// True when the run stopped on `stop_nrmse` before `max_iters`.
    pub converged: bool,
}

impl History {
    /// First iteration whose probe NRMSE is at or below `threshold`.
    pub fn iterations_to(&self, threshold: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.nrmse_probe.is_some_and(|e| e <= threshold))
            .map(|r| r.iter)
    }
}

/// Outer alternating-projection loop bound to one dataset.
#[derive(Debug)]
pub struct Reconstruction<'a> {
    a: &'a DiffractionAmplitudes,
    g: &'a ScanGeometry,
    cfg: SolverConfig,
    plan: FourierPlan,
    overlap: Option<OverlapMatrix>,
    norm_target: Option<f64>,
}

impl<'a> Reconstruction<'a> {
    /// `probe_norm` is the Frobenius norm the probe is locked to when
    /// `cfg.probe_norm_lock` is set.
    pub fn new(
        a: &'a DiffractionAmplitudes,
        g: &'a ScanGeometry,
        cfg: SolverConfig,
        probe_norm: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        if a.values().dim() != (g.k(), g.m(), g.m()) {
            return Err(Error::Shape(format!(
                "amplitudes {:?} do not match geometry ({}, {}, {})",
                a.values().dim(),
                g.k(),
                g.m(),
                g.m()
            )));
        }
        let overlap = (cfg.probe_mode == ProbeMode::Rank1Framewise).then(|| build_overlap_matrix(g));
        let norm_target = cfg.probe_norm_lock.then_some(probe_norm);
        Ok(Reconstruction {
            a,
            g,
            plan: FourierPlan::new(g.m()),
            cfg,
            overlap,
            norm_target,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Iteration-0 state: frames carry the measured magnitudes (with seeded
    /// random phases, or the phases of a flat object under `w_init`), and
    /// the object is their least-squares fit.
    pub fn initial_state(&self, w_init: &Probe) -> Result<IterationState> {
        w_init.check(self.g)?;
        w_init.require_nonzero()?;
        let z = match self.cfg.init_frames {
            InitFrames::RandomPhase => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.init_seed);
                let spectrum = self
                    .a
                    .values()
                    .mapv(|amp| Complex64::from_polar(amp, rng.random_range(0.0..std::f64::consts::TAU)));
                self.plan.inverse(&FrameStack { values: spectrum })
            }
            InitFrames::FlatObject => {
                let flat = ObjectImage::from_elem(self.g.n(), Complex64::new(1.0, 0.0));
                self.plan.magnitude_project(&apply_q(&flat, w_init, self.g)?, self.a)?
            }
        };
        let coverage = coverage_maps(w_init, self.g)?;
        let psi = update_object_with(&z, w_init, self.g, &coverage, self.cfg.epsilon_rel)?;
        Ok(IterationState {
            iter: 0,
            w: w_init.clone(),
            psi,
            z,
            coverage,
        })
    }

    fn probe_update(&self, state: &IterationState, psi: &ObjectImage, events: &mut Vec<SolverEvent>) -> Result<Probe> {
        let (z, w, g, cfg) = (&state.z, &state.w, self.g, &self.cfg);
        match cfg.probe_mode {
            ProbeMode::Standard => update_probe_standard(z, psi, g, cfg),
            ProbeMode::Power => update_probe_power(z, w, g, cfg),
            ProbeMode::Rank1Global | ProbeMode::Rank1Framewise => {
                let nu = transparency_global(z, w)?;
                let upsilon = match &self.overlap {
                    Some(x) => Some(transparency_framewise(z, w, x)?),
                    None => None,
                };
                let t = TransparencyEstimate {
                    global_nu: nu,
                    framewise_upsilon: upsilon,
                };
                match update_probe_rank1(z, w, g, &t, cfg) {
                    Err(e) if e.is_degenerate() => {
                        events.push(SolverEvent::Rank1Fallback { iter: state.iter + 1 });
                        update_probe_power(z, w, g, cfg)
                    }
                    other => other,
                }
            }
        }
    }

    /// One outer iteration: object, then probe, then frames.
    ///
    /// Returns the new state and the data residual of the model frames
    /// `Q ψ` that were projected.
    pub fn step(&self, state: &IterationState, events: &mut Vec<SolverEvent>) -> Result<(IterationState, f64)> {
        let iter = state.iter + 1;
        let wrap = |e: Error| Error::AtIteration {
            iter,
            source: Box::new(e),
        };
        let mut psi = update_object_with(&state.z, &state.w, self.g, &state.coverage, self.cfg.epsilon_rel)
            .map_err(wrap)?;
        let mut w = self.probe_update(state, &psi, events).map_err(wrap)?;
        if self.cfg.center_probe_each_iter {
            let (centered, shift) = center_probe(&w).map_err(wrap)?;
            if shift != [0, 0] {
                w = centered;
                psi = roll_object(&psi, shift);
                events.push(SolverEvent::ProbeCentered { iter, shift });
            }
        }
        if let Some(target) = self.norm_target {
            let norm = w.norm();
            if norm > 0.0 {
                let s = target / norm;
                w.values.mapv_inplace(|v| v * s);
            }
        }
        let model = apply_q(&psi, &w, self.g).map_err(wrap)?;
        let (z, residual) = self
            .plan
            .magnitude_project_with_residual(&model, self.a)
            .map_err(wrap)?;
        let coverage = coverage_maps(&w, self.g).map_err(wrap)?;
        Ok((
            IterationState {
                iter,
                w,
                psi,
                z,
                coverage,
            },
            residual,
        ))
    }

    /// Residual of the model frames `Q ψ` built from `state`.
    pub fn model_residual(&self, state: &IterationState) -> Result<f64> {
        let model = apply_q(&state.psi, &state.w, self.g)?;
        let spectrum = self.plan.forward(&model);
        let mut diff2 = 0.0;
        Zip::from(&spectrum.values)
            .and(self.a.values())
            .for_each(|u, &amp| diff2 += (u.norm() - amp).powi(2));
        let a_norm = self.a.norm();
        Ok(if a_norm > 0.0 { diff2.sqrt() / a_norm } else { diff2.sqrt() })
    }

    fn row(&self, state: &IterationState, residual: f64, w_true: Option<&Probe>, started: Instant) -> Result<MetricsRow> {
        Ok(MetricsRow {
            iter: state.iter,
            nrmse_probe: w_true.map(|t| nrmse_probe(&state.w, t)).transpose()?,
            data_residual: residual,
            pairwise: pairwise_discrepancy_with(&state.z, &state.w, self.g, &state.coverage)?,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Runs from `state` until `max_iters` or the NRMSE stop.
    pub fn run_from(&self, mut state: IterationState, w_true: Option<&Probe>) -> Result<History> {
        if self.cfg.stop_nrmse.is_some() && w_true.is_none() {
            return Err(Error::InvalidInput("stop_nrmse needs the true probe".into()));
        }
        let started = Instant::now();
        let mut events = Vec::new();
        let residual = self.model_residual(&state)?;
        let mut rows = vec![self.row(&state, residual, w_true, started)?];
        let reached = |row: &MetricsRow| match (self.cfg.stop_nrmse, row.nrmse_probe) {
            (Some(t), Some(e)) => e <= t,
            _ => false,
        };
        let mut converged = reached(&rows[0]);
        let last = state.iter + self.cfg.max_iters;
        while !converged && state.iter < last {
            let (next, residual) = self.step(&state, &mut events)?;
            state = next;
            let row = self.row(&state, residual, w_true, started)?;
            converged = reached(&row);
            rows.push(row);
        }
        Ok(History {
            rows,
            events,
            final_state: state,
            converged,
        })
    }
}

/// Blind reconstruction from amplitudes `a`, starting at probe `w_init`.
///
/// With `w_true` supplied each metrics row carries the probe NRMSE and
/// `cfg.stop_nrmse` becomes usable.
pub fn run_reconstruction(
    a: &DiffractionAmplitudes,
    g: &ScanGeometry,
    w_init: &Probe,
    cfg: &SolverConfig,
    w_true: Option<&Probe>,
) -> Result<History> {
    let rec = Reconstruction::new(a, g, cfg.clone(), w_init.norm())?;
    let state = rec.initial_state(w_init)?;
    rec.run_from(state, w_true)
}
