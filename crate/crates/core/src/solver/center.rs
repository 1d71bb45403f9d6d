use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;

use crate::arrays::{ObjectImage, Probe};
use crate::error::Result;

/// Plain (non-circular) center of mass of `|a|²` as `(row, col)`.
pub fn center_of_mass(a: &Array2<Complex64>) -> Option<[f64; 2]> {
    let mut total = 0.0;
    let mut acc = [0.0; 2];
    for ((r, c), v) in a.indexed_iter() {
        let p = v.norm_sqr();
        total += p;
        acc[0] += p * r as f64;
        acc[1] += p * c as f64;
    }
    (total > 0.0).then(|| [acc[0] / total, acc[1] / total])
}

/// Circular mean position along each axis, in pixels.
fn circular_center(a: &Array2<Complex64>) -> [Option<f64>; 2] {
    let m = a.nrows();
    let step = TAU / m as f64;
    let mut phasors = [Complex64::default(); 2];
    for ((r, c), v) in a.indexed_iter() {
        let p = v.norm_sqr();
        phasors[0] += Complex64::from_polar(p, step * r as f64);
        phasors[1] += Complex64::from_polar(p, step * c as f64);
    }
    let total: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    phasors.map(|z| {
        // a flat marginal has no preferred position
        (z.norm() > 1e-12 * total).then(|| z.arg().rem_euclid(TAU) / step)
    })
}

/// Circular shift by `shift` (positive moves content to higher indices).
pub fn roll(a: &Array2<Complex64>, shift: [i64; 2]) -> Array2<Complex64> {
    let (rows, cols) = a.dim();
    let sr = shift[0].rem_euclid(rows as i64) as usize;
    let sc = shift[1].rem_euclid(cols as i64) as usize;
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        a[[(r + rows - sr) % rows, (c + cols - sc) % cols]]
    })
}

/// Centers the probe's intensity on the frame center `((m−1)/2, (m−1)/2)`
/// with an integer circular shift. Returns the shifted probe and the shift.
pub fn center_probe(w: &Probe) -> Result<(Probe, [i64; 2])> {
    w.require_nonzero()?;
    let m = w.size() as f64;
    let target = (m - 1.0) / 2.0;
    let com = circular_center(&w.values);
    let shift = com.map(|c| match c {
        Some(c) => {
            // nearest representative of (target − c) modulo m
            let d = (target - c).rem_euclid(m);
            let d = if d > m / 2.0 { d - m } else { d };
            d.round() as i64
        }
        None => 0,
    });
    if shift == [0, 0] {
        return Ok((w.clone(), shift));
    }
    Ok((
        Probe {
            values: roll(&w.values, shift),
        },
        shift,
    ))
}

/// Shifts the object by the same integer offset applied to the probe.
pub(super) fn roll_object(psi: &ObjectImage, shift: [i64; 2]) -> ObjectImage {
    ObjectImage {
        values: roll(&psi.values, shift),
    }
}
