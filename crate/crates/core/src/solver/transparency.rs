//! Transparency (average transmission) estimates and the rank-1
//! accelerated probe update.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::arrays::{inner, FrameStack, ObjectImage, Probe};
use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::operators::{
    apply_q, apply_q_adjoint, coverage_maps, gather_frames, scatter_add_frames, sum_over_frames,
};

use super::updates::{floored_divide, update_probe_power};
use super::SolverConfig;

/// Relative size below which the transparency-shifted stack counts as zero.
const DEGENERATE_SHIFT_REL: f64 = 1e-12;

/// Estimated transparency: one global value and optionally one per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TransparencyEstimate {
    pub global_nu: Complex64,
    pub framewise_upsilon: Option<Vec<Complex64>>,
}

impl TransparencyEstimate {
    pub fn global(nu: Complex64) -> Self {
        TransparencyEstimate {
            global_nu: nu,
            framewise_upsilon: None,
        }
    }
}

/// Symmetric frame-overlap indicator, `X(i, j) = 1` iff windows `i` and `j`
/// share an object pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapMatrix {
    values: Array2<bool>,
}

impl OverlapMatrix {
    pub fn new(values: Array2<bool>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::Shape(format!("overlap matrix must be square, got {r}x{c}")));
        }
        for i in 0..r {
            if !values[[i, i]] {
                return Err(Error::InvalidInput(format!("overlap matrix diagonal entry {i} is 0")));
            }
            for j in 0..i {
                if values[[i, j]] != values[[j, i]] {
                    return Err(Error::InvalidInput(format!(
                        "overlap matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(OverlapMatrix { values })
    }

    pub fn values(&self) -> &Array2<bool> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Do the circular intervals `[p, p+m)` and `[q, q+m)` mod `n` intersect?
fn circular_overlap(p: usize, q: usize, m: usize, n: usize) -> bool {
    let d = (q + n - p) % n;
    d < m || d + m > n
}

pub fn build_overlap_matrix(g: &ScanGeometry) -> OverlapMatrix {
    let (n, m) = (g.n(), g.m());
    let pos = g.positions();
    let values = Array2::from_shape_fn((g.k(), g.k()), |(i, j)| {
        circular_overlap(pos[i][0], pos[j][0], m, n) && circular_overlap(pos[i][1], pos[j][1], m, n)
    });
    OverlapMatrix { values }
}

/// `ν = (S w)* z / ‖S w‖²`.
pub fn transparency_global(z: &FrameStack, w: &Probe) -> Result<Complex64> {
    let w2 = w.require_nonzero()?;
    check_frames(z, w)?;
    let k = z.frame_count();
    let mut acc = Complex64::default();
    for frame in z.values.outer_iter() {
        acc += inner(&w.values, frame);
    }
    Ok(acc / (k as f64 * w2))
}

/// `υ_i = Σ_j X(i,j) w* z_j / (‖w‖² Σ_j X(i,j))`, the transparency averaged
/// over each frame's overlapping neighbourhood (itself included).
pub fn transparency_framewise(
    z: &FrameStack,
    w: &Probe,
    overlap: &OverlapMatrix,
) -> Result<Vec<Complex64>> {
    let w2 = w.require_nonzero()?;
    check_frames(z, w)?;
    if overlap.len() != z.frame_count() {
        return Err(Error::Shape(format!(
            "overlap matrix is {0}x{0} for {1} frames",
            overlap.len(),
            z.frame_count()
        )));
    }
    let projections: Vec<Complex64> = z.values.outer_iter().map(|f| inner(&w.values, f)).collect();
    Ok(overlap
        .values
        .outer_iter()
        .map(|row| {
            let (sum, count) = row
                .iter()
                .zip(&projections)
                .filter(|(x, _)| **x)
                .fold((Complex64::default(), 0usize), |(s, c), (_, p)| (s + p, c + 1));
            sum / (w2 * count as f64)
        })
        .collect())
}

fn check_frames(z: &FrameStack, w: &Probe) -> Result<()> {
    if z.frame_size() != w.size() {
        return Err(Error::Shape(format!(
            "frames are {0}x{0}, probe is {1}x{1}",
            z.frame_size(),
            w.size()
        )));
    }
    Ok(())
}

/// Object-space transparency map whose `Q`-image is subtracted from the
/// frames.
///
/// A global estimate is the constant `ν`, so `Q ν = ν S w`. Frame-wise
/// values are spread onto the object as the illumination-weighted average of
/// the `υ_i` of every frame covering a pixel, `T* (B υ ⊙ S |w|²) / Q*Q`.
pub fn transparency_map(
    t: &TransparencyEstimate,
    w: &Probe,
    g: &ScanGeometry,
    cfg: &SolverConfig,
) -> Result<ObjectImage> {
    let n = g.n();
    match &t.framewise_upsilon {
        None => Ok(ObjectImage::from_elem(n, t.global_nu)),
        Some(upsilon) => {
            if upsilon.len() != g.k() {
                return Err(Error::Shape(format!(
                    "{} frame-wise transparencies for {} frames",
                    upsilon.len(),
                    g.k()
                )));
            }
            let cov = coverage_maps(w, g)?;
            let intensity = w.values.mapv(|v| v.norm_sqr());
            let mut weighted = ndarray::Array3::zeros((g.k(), g.m(), g.m()));
            for (mut frame, u) in weighted.outer_iter_mut().zip(upsilon) {
                Zip::from(&mut frame).and(&intensity).for_each(|f, &i| *f = u * i);
            }
            let num = scatter_add_frames(&weighted, g);
            let values = floored_divide(num, &cov.object_coverage, cfg.epsilon_rel, "transparency map")
                .map_err(|_| Error::InvalidInput("probe is identically zero".into()))?;
            Ok(ObjectImage { values })
        }
    }
}

fn shifted_frames(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    map: &ObjectImage,
) -> Result<FrameStack> {
    let shift = apply_q(map, w, g)?;
    let shifted = z.sub(&shift);
    if shifted.norm() <= DEGENERATE_SHIFT_REL * z.norm() {
        return Err(Error::Degenerate(
            "frames are pure transparency; a constant object carries no probe information".into(),
        ));
    }
    Ok(shifted)
}

/// Rank-1 accelerated probe update: the power step applied to the frames
/// with the estimated transparency removed, `z' = z − Q ν`.
pub fn update_probe_rank1(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    t: &TransparencyEstimate,
    cfg: &SolverConfig,
) -> Result<Probe> {
    z.check(g)?;
    w.check(g)?;
    let map = transparency_map(t, w, g, cfg)?;
    let shifted = shifted_frames(z, w, g, &map)?;
    update_probe_power(&shifted, w, g, cfg)
}

/// The same update as [`update_probe_rank1`], evaluated from the unshifted
/// frames with the shift expanded analytically:
///
/// ```text
///          S* [ (z − Qν) ⊙ T( conj(Q* z) − ν̄ Q*Q ) ]
/// w ← ──────────────────────────────────────────────────────────
///      S* T [ T* |z|² − 2 Re(ν̄ Q* z) + Q*Q |ν|² ]
/// ```
///
/// With a global `ν` the `T Q*Q` terms reduce to the frame coverage `Q²`.
pub fn update_probe_rank1_expanded(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    t: &TransparencyEstimate,
    cfg: &SolverConfig,
) -> Result<Probe> {
    z.check(g)?;
    w.check(g)?;
    let map = transparency_map(t, w, g, cfg)?;
    let shifted = shifted_frames(z, w, g, &map)?;
    let cov = coverage_maps(w, g)?;
    let qz = apply_q_adjoint(z, w, g)?;

    let mut conj_term = qz.values.mapv(|v| v.conj());
    Zip::from(&mut conj_term)
        .and(&map.values)
        .and(&cov.object_coverage)
        .for_each(|v, nu, &c| *v -= nu.conj() * c);
    let mut num_frames = gather_frames(conj_term.view(), g);
    num_frames *= &shifted.values;
    let num = sum_over_frames(&num_frames);

    let mut spread = scatter_add_frames(&z.values.mapv(|v| v.norm_sqr()), g);
    Zip::from(&mut spread)
        .and(&map.values)
        .and(&qz.values)
        .and(&cov.object_coverage)
        .for_each(|s, nu, qzv, &c| *s += -2.0 * (nu.conj() * qzv).re + c * nu.norm_sqr());
    let den = sum_over_frames(&gather_frames(spread.view(), g));

    let values = floored_divide(num, &den, cfg.epsilon_rel, "rank-1 probe update")?;
    Ok(Probe { values })
}
