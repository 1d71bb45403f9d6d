use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which probe update the outer loop applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    Standard,
    Power,
    Rank1Global,
    Rank1Framewise,
}

impl std::fmt::Display for ProbeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProbeMode::Standard => "standard",
            ProbeMode::Power => "power",
            ProbeMode::Rank1Global => "rank1_global",
            ProbeMode::Rank1Framewise => "rank1_framewise",
        })
    }
}

/// How the iteration-0 frames are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitFrames {
    /// Measured magnitudes with seeded uniform random phases.
    #[default]
    RandomPhase,
    /// `P_a` of the frames of a unit object under the initial probe.
    FlatObject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Coverage divisions use `max(d, epsilon_rel * max(d))`.
    pub epsilon_rel: f64,
    pub max_iters: usize,
    pub probe_mode: ProbeMode,
    pub center_probe_each_iter: bool,
    /// Stop once the probe NRMSE reaches this value (needs the true probe).
    pub stop_nrmse: Option<f64>,
    /// Rescale the probe to its initial norm after every update.
    pub probe_norm_lock: bool,
    pub init_frames: InitFrames,
    /// Seed for the random phases of the initial frames.
    pub init_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon_rel: 1e-8,
            max_iters: 100,
            probe_mode: ProbeMode::Rank1Global,
            center_probe_each_iter: false,
            stop_nrmse: None,
            probe_norm_lock: true,
            init_frames: InitFrames::RandomPhase,
            init_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_rel.is_finite() && self.epsilon_rel > 0.0) {
            return Err(Error::Config(format!(
                "solver.epsilon_rel must be positive, got {}",
                self.epsilon_rel
            )));
        }
        if let Some(t) = self.stop_nrmse {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!("solver.stop_nrmse must be >= 0, got {t}")));
            }
        }
        Ok(())
    }
}
