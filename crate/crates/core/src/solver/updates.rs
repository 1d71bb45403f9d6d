use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::arrays::{FrameStack, ObjectImage, Probe};
use crate::error::{Error, Result};
use crate::fourier::{DiffractionAmplitudes, FourierPlan};
use crate::geometry::ScanGeometry;
use crate::operators::{
    apply_q, apply_q_adjoint, coverage_maps, gather_frames, scatter_add_frames, sum_over_frames,
    CoverageMaps,
};

use super::SolverConfig;

/// Divides `num` by `den` floored at `epsilon_rel * max(den)`.
pub(super) fn floored_divide(
    num: Array2<Complex64>,
    den: &Array2<f64>,
    epsilon_rel: f64,
    what: &str,
) -> Result<Array2<Complex64>> {
    let max = den.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Degenerate(format!("{what} denominator is identically zero")));
    }
    let eps = epsilon_rel * max;
    let mut out = num;
    Zip::from(&mut out).and(den).for_each(|v, &d| *v /= d.max(eps));
    Ok(out)
}

/// Object least squares `ψ = (Q*Q)⁻¹ Q* z`.
pub fn update_object(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    cfg: &SolverConfig,
) -> Result<ObjectImage> {
    let cov = coverage_maps(w, g)?;
    update_object_with(z, w, g, &cov, cfg.epsilon_rel)
}

/// [`update_object`] with precomputed coverage.
pub fn update_object_with(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    cov: &CoverageMaps,
    epsilon_rel: f64,
) -> Result<ObjectImage> {
    let den = cov.floored_object(epsilon_rel)?;
    let mut psi = apply_q_adjoint(z, w, g)?;
    Zip::from(&mut psi.values).and(&den).for_each(|v, &d| *v /= d);
    Ok(psi)
}

/// Probe least squares against a fixed object:
/// `w = S* diag(T ψ̄) z / S* T |ψ|²`.
pub fn update_probe_standard(
    z: &FrameStack,
    psi: &ObjectImage,
    g: &ScanGeometry,
    cfg: &SolverConfig,
) -> Result<Probe> {
    psi.check(g)?;
    z.check(g)?;
    let views = gather_frames(psi.values.view(), g);
    let mut weighted = views.mapv(|v| v.conj());
    weighted *= &z.values;
    let num = sum_over_frames(&weighted);
    let den = sum_over_frames(&views.mapv(|v| v.norm_sqr()));
    let values = floored_divide(num, &den, cfg.epsilon_rel, "standard probe update").map_err(|_| {
        Error::InvalidInput("object is identically zero over the scanned region".into())
    })?;
    Ok(Probe { values })
}

/// `z ← P_a diag(S w) T ψ`.
pub fn update_frames(
    a: &DiffractionAmplitudes,
    w: &Probe,
    psi: &ObjectImage,
    g: &ScanGeometry,
) -> Result<FrameStack> {
    let plan = FourierPlan::new(g.m());
    plan.magnitude_project(&apply_q(psi, w, g)?, a)
}

/// Projection onto the range of `Q`: `z ← Q (Q*Q)⁻¹ Q* z`.
pub fn frame_consistency_project(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    cfg: &SolverConfig,
) -> Result<FrameStack> {
    let psi = update_object(z, w, g, cfg)?;
    apply_q(&psi, w, g)
}

/// `z* [Q² − P] z`, the summed squared discrepancy between every pair of
/// overlapping frames.
pub fn pairwise_discrepancy(z: &FrameStack, w: &Probe, g: &ScanGeometry) -> Result<f64> {
    let cov = coverage_maps(w, g)?;
    pairwise_discrepancy_with(z, w, g, &cov)
}

/// [`pairwise_discrepancy`] with precomputed coverage.
pub fn pairwise_discrepancy_with(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    cov: &CoverageMaps,
) -> Result<f64> {
    z.check(g)?;
    let mut weighted = 0.0;
    Zip::from(&z.values)
        .and(&cov.frame_coverage)
        .for_each(|v, &c| weighted += c * v.norm_sqr());
    let qz = apply_q_adjoint(z, w, g)?;
    let projected = qz.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
    Ok((weighted - projected).max(0.0))
}

/// `S* diag(z) T conj(Q* z)`, the numerator `A w` of the power step.
pub(super) fn power_numerator(z: &FrameStack, w: &Probe, g: &ScanGeometry) -> Result<Array2<Complex64>> {
    let qz = apply_q_adjoint(z, w, g)?;
    let mut frames = gather_frames(qz.values.mapv(|v| v.conj()).view(), g);
    frames *= &z.values;
    Ok(sum_over_frames(&frames))
}

/// `S* T T* |z|²`, the diagonal `D` of the power step.
pub(super) fn power_denominator(z: &FrameStack, g: &ScanGeometry) -> Array2<f64> {
    let spread = scatter_add_frames(&z.values.mapv(|v| v.norm_sqr()), g);
    sum_over_frames(&gather_frames(spread.view(), g))
}

/// One power-iteration step `w ← D⁻¹ A w` with
/// `D = diag(S* T T* |z|²)` and `A = S* diag(z) T T* diag(z̄) S`.
pub fn update_probe_power(
    z: &FrameStack,
    w: &Probe,
    g: &ScanGeometry,
    cfg: &SolverConfig,
) -> Result<Probe> {
    z.check(g)?;
    w.check(g)?;
    let num = power_numerator(z, w, g)?;
    let den = power_denominator(z, g);
    let values = floored_divide(num, &den, cfg.epsilon_rel, "power probe update")?;
    Ok(Probe { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::frame_dft;
    use crate::metrics::nrmse_probe;
    use crate::test_util::{random_object, random_probe, random_stack};

    fn geom() -> ScanGeometry {
        ScanGeometry::new(8, 4, &[[0, 0], [0, 3], [3, 0], [3, 3], [5, 6], [6, 2]]).unwrap()
    }

    fn full_cover() -> ScanGeometry {
        let pos: Vec<[i64; 2]> = (0..3).flat_map(|r| (0..3).map(move |c| [2 * r, 2 * c])).collect();
        ScanGeometry::new(6, 3, &pos).unwrap()
    }

    fn rel(a: &ndarray::Array2<Complex64>, b: &ndarray::Array2<Complex64>) -> f64 {
        crate::arrays::norm(&(a - b)) / crate::arrays::norm(b)
    }

    #[test]
    fn object_recovered_from_consistent_frames() {
        let g = full_cover();
        assert!(g.coverage_mask().iter().all(|&b| b));
        let psi = random_object(6, 1);
        let w = random_probe(3, 2);
        let z = apply_q(&psi, &w, &g).unwrap();
        let got = update_object(&z, &w, &g, &SolverConfig::default()).unwrap();
        assert!(rel(&got.values, &psi.values) < 1e-12);
    }

    #[test]
    fn object_update_single_flat_frame_is_identity() {
        let g = ScanGeometry::new(4, 4, &[[0, 0]]).unwrap();
        let z = random_stack(1, 4, 3);
        let got = update_object(&z, &Probe::ones(4), &g, &SolverConfig::default()).unwrap();
        assert_eq!(got.values, z.values.index_axis(ndarray::Axis(0), 0));
    }

    #[test]
    fn zero_probe_is_rejected() {
        let g = geom();
        let w = Probe { values: Array2::zeros((4, 4)) };
        let err = update_object(&random_stack(6, 4, 1), &w, &g, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn standard_update_with_flat_object_averages() {
        let g = geom();
        let z = random_stack(6, 4, 4);
        let ones = ObjectImage::from_elem(8, Complex64::new(1.0, 0.0));
        let got = update_probe_standard(&z, &ones, &g, &SolverConfig::default()).unwrap();
        let expect = crate::operators::sum_frames(&z) / Complex64::new(6.0, 0.0);
        assert!(rel(&got.values, &expect) < 1e-14);
    }

    #[test]
    fn standard_update_fixed_point() {
        let g = geom();
        let psi = random_object(8, 5);
        let w = random_probe(4, 6);
        let z = apply_q(&psi, &w, &g).unwrap();
        let got = update_probe_standard(&z, &psi, &g, &SolverConfig::default()).unwrap();
        assert!(rel(&got.values, &w.values) < 1e-12);
    }

    #[test]
    fn standard_update_rejects_zero_object() {
        let g = geom();
        let zero = ObjectImage::from_elem(8, Complex64::default());
        assert!(update_probe_standard(&random_stack(6, 4, 1), &zero, &g, &SolverConfig::default()).is_err());
    }

    #[test]
    fn update_frames_keeps_feasible_point() {
        let g = geom();
        let psi = random_object(8, 7);
        let w = random_probe(4, 8);
        let z = apply_q(&psi, &w, &g).unwrap();
        let a = DiffractionAmplitudes::new(frame_dft(&z).values.mapv(|v| v.norm())).unwrap();
        let got = update_frames(&a, &w, &psi, &g).unwrap();
        assert!(crate::arrays::norm(&(&got.values - &z.values)) <= 1e-12 * z.norm());
    }

    #[test]
    fn projector_fixes_range_and_is_idempotent() {
        let g = geom();
        let cfg = SolverConfig::default();
        let psi = random_object(8, 9);
        let w = random_probe(4, 10);
        let z = apply_q(&psi, &w, &g).unwrap();
        let p = frame_consistency_project(&z, &w, &g, &cfg).unwrap();
        assert!(crate::arrays::norm(&(&p.values - &z.values)) <= 1e-12 * z.norm());

        let r = random_stack(6, 4, 11);
        let once = frame_consistency_project(&r, &w, &g, &cfg).unwrap();
        let twice = frame_consistency_project(&once, &w, &g, &cfg).unwrap();
        assert!(crate::arrays::norm(&(&twice.values - &once.values)) <= 1e-10 * once.norm());
    }

    #[test]
    fn pairwise_vanishes_for_consistent_and_single_frames() {
        let g = geom();
        let psi = random_object(8, 12);
        let w = random_probe(4, 13);
        let z = apply_q(&psi, &w, &g).unwrap();
        let cov = coverage_maps(&w, &g).unwrap();
        let scale = z.norm().powi(2) * cov.max_object();
        assert!(pairwise_discrepancy(&z, &w, &g).unwrap() <= 1e-12 * scale);

        let g1 = ScanGeometry::new(8, 4, &[[2, 5]]).unwrap();
        let z1 = random_stack(1, 4, 14);
        let cov1 = coverage_maps(&w, &g1).unwrap();
        let scale1 = z1.norm().powi(2) * cov1.max_object();
        assert!(pairwise_discrepancy(&z1, &w, &g1).unwrap() <= 1e-12 * scale1);
    }

    #[test]
    fn power_update_fixed_point() {
        let g = geom();
        let psi = random_object(8, 15);
        let w = random_probe(4, 16);
        let z = apply_q(&psi, &w, &g).unwrap();
        let got = update_probe_power(&z, &w, &g, &SolverConfig::default()).unwrap();
        assert!(rel(&got.values, &w.values) < 1e-10);
    }

    #[test]
    fn power_update_zero_frames_is_degenerate() {
        let g = geom();
        let err = update_probe_power(&FrameStack::zeros(6, 4), &random_probe(4, 1), &g, &SolverConfig::default())
            .unwrap_err();
        assert!(err.is_degenerate());
    }

    #[test]
    fn power_update_direction_ignores_probe_scale() {
        let g = geom();
        let cfg = SolverConfig::default();
        let z = random_stack(6, 4, 17);
        let w = random_probe(4, 18);
        let a = update_probe_power(&z, &w, &g, &cfg).unwrap();
        let b = update_probe_power(&z, &w.scaled(Complex64::new(-2.5, 4.0)), &g, &cfg).unwrap();
        assert!(nrmse_probe(&b, &a).unwrap() <= 1e-12);
    }
}
