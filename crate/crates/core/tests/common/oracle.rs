//! Independent dense constructions of the operators, built from index loops
//! and solved with nalgebra.

use nalgebra::{DMatrix, DVector};
use ptycho::prelude::*;

use super::{lstsq, rel_err, vec_na, C};

pub struct Dense {
    pub t: DMatrix<C>,
    pub s: DMatrix<C>,
    pub q: DMatrix<C>,
}

pub fn dense(w: &Probe, g: &ScanGeometry) -> Dense {
    let (n, m, k) = (g.n(), g.m(), g.k());
    let mut t = DMatrix::zeros(k * m * m, n * n);
    let mut s = DMatrix::zeros(k * m * m, m * m);
    for (i, p) in g.positions().iter().enumerate() {
        for r in 0..m {
            for c in 0..m {
                let row = (i * m + r) * m + c;
                t[(row, ((p[0] + r) % n) * n + (p[1] + c) % n)] = C::new(1.0, 0.0);
                s[(row, r * m + c)] = C::new(1.0, 0.0);
            }
        }
    }
    let sw = &s * vec_na(&w.values);
    let q = DMatrix::from_diagonal(&sw) * &t;
    Dense { t, s, q }
}

/// Orthogonal projector onto the column space of `a`.
pub fn range_projector(a: &DMatrix<C>) -> DMatrix<C> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.unwrap();
    let tol = 1e-10 * svd.singular_values.max();
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    let ur = u.select_columns(&cols);
    &ur * ur.adjoint()
}

/// `D` and `A` of the probe quadratic form `w* (D − A) w`.
pub fn probe_form(z: &FrameStack, d: &Dense) -> (DMatrix<C>, DMatrix<C>) {
    let zv = vec_na(&z.values);
    let tt = &d.t * d.t.adjoint();
    let z2 = zv.map(|v| C::new(v.norm_sqr(), 0.0));
    let dd = DMatrix::from_diagonal(&(d.s.adjoint() * (&tt * z2)));
    let a = d.s.adjoint()
        * DMatrix::from_diagonal(&zv)
        * &tt
        * DMatrix::from_diagonal(&zv.map(|v| v.conj()))
        * &d.s;
    (dd, a)
}

/// Relative error of every matrix-free operation against its dense
/// counterpart on one random instance.
pub fn dense_errors(n: usize, m: usize, k: usize, seed: u64) -> Vec<(&'static str, f64)> {
    let g = super::random_geometry(n, m, k, seed);
    let w = super::random_probe(m, seed + 1);
    let psi = super::random_object(n, seed + 2);
    let z = super::random_stack(k, m, seed + 3);
    let cfg = SolverConfig::default();
    let d = dense(&w, &g);
    let zv = vec_na(&z.values);
    let psiv = vec_na(&psi.values);
    let mut out = Vec::new();

    out.push(("apply_q", rel_err(&vec_na(&apply_q(&psi, &w, &g).unwrap().values), &(&d.q * &psiv))));
    out.push((
        "apply_q_adjoint",
        rel_err(&vec_na(&apply_q_adjoint(&z, &w, &g).unwrap().values), &(d.q.adjoint() * &zv)),
    ));

    let qq = d.q.adjoint() * &d.q;
    let qq_diag: DVector<C> = qq.diagonal();
    let off_diag = (&qq - DMatrix::from_diagonal(&qq_diag)).norm() / qq.norm();
    let cov = coverage_maps(&w, &g).unwrap();
    let obj_cov = DVector::from_iterator(n * n, cov.object_coverage.iter().map(|&v| C::new(v, 0.0)));
    let frame_cov =
        DVector::from_iterator(k * m * m, cov.frame_coverage.iter().map(|&v| C::new(v, 0.0)));
    out.push((
        "coverage_maps",
        rel_err(&obj_cov, &qq_diag)
            .max(rel_err(&frame_cov, &(&d.t * &qq_diag)))
            .max(off_diag),
    ));

    let pq = range_projector(&d.q);
    out.push((
        "frame_consistency_project",
        rel_err(&vec_na(&frame_consistency_project(&z, &w, &g, &cfg).unwrap().values), &(&pq * &zv)),
    ));
    out.push((
        "update_object",
        rel_err(&vec_na(&update_object(&z, &w, &g, &cfg).unwrap().values), &lstsq(&d.q, &zv)),
    ));

    let m_psi = DMatrix::from_diagonal(&(&d.t * &psiv)) * &d.s;
    out.push((
        "update_probe_standard",
        rel_err(
            &vec_na(&update_probe_standard(&z, &psi, &g, &cfg).unwrap().values),
            &lstsq(&m_psi, &zv),
        ),
    ));

    let (dd, a) = probe_form(&z, &d);
    let aw = a * vec_na(&w.values);
    let expected = DVector::from_iterator(m * m, (0..m * m).map(|i| aw[i] / dd[(i, i)]));
    out.push((
        "update_probe_power",
        rel_err(&vec_na(&update_probe_power(&z, &w, &g, &cfg).unwrap().values), &expected),
    ));
    out
}

/// `½ Σ_ij ‖W_j E_i z_i − W_i E_j z_j‖²`, where `E_i` embeds frame `i` into a
/// zero object and `W_j` multiplies by the probe placed at window `j`.
pub fn pairwise_brute(z: &FrameStack, w: &Probe, g: &ScanGeometry) -> f64 {
    let (n, m, k) = (g.n(), g.m(), g.k());
    let place = |i: usize, f: &dyn Fn(usize, usize) -> C| {
        let mut img = vec![C::new(0.0, 0.0); n * n];
        let p = g.positions()[i];
        for r in 0..m {
            for c in 0..m {
                img[((p[0] + r) % n) * n + (p[1] + c) % n] += f(r, c);
            }
        }
        img
    };
    let embedded: Vec<Vec<C>> = (0..k).map(|i| place(i, &|r, c| z.values[[i, r, c]])).collect();
    let probes: Vec<Vec<C>> = (0..k).map(|i| place(i, &|r, c| w.values[[r, c]])).collect();
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            total += (0..n * n)
                .map(|x| (probes[j][x] * embedded[i][x] - probes[i][x] * embedded[j][x]).norm_sqr())
                .sum::<f64>();
        }
    }
    0.5 * total
}

/// Overlap by explicit pixel-set intersection of the windows.
pub fn overlap_by_sets(g: &ScanGeometry) -> Vec<Vec<bool>> {
    use std::collections::HashSet;
    let (n, m) = (g.n(), g.m());
    let sets: Vec<HashSet<(usize, usize)>> = g
        .positions()
        .iter()
        .map(|p| {
            (0..m)
                .flat_map(|r| (0..m).map(move |c| ((p[0] + r) % n, (p[1] + c) % n)))
                .collect()
        })
        .collect();
    sets.iter()
        .map(|a| sets.iter().map(|b| !a.is_disjoint(b)).collect())
        .collect()
}

/// Grid search of `min_c ‖c w_est − w_true‖ / ‖w_true‖` over a
/// `points`×`points` lattice of complex `c` in the box `|Re c|, |Im c| ≤ bound`.
/// Returns the minimum and the lattice spacing.
pub fn nrmse_grid(w_est: &Probe, w_true: &Probe, bound: f64, points: usize) -> (f64, f64) {
    let h = 2.0 * bound / (points - 1) as f64;
    let t2: f64 = w_true.values.iter().map(|v| v.norm_sqr()).sum();
    let mut best = f64::INFINITY;
    for a in 0..points {
        for b in 0..points {
            let c = C::new(-bound + a as f64 * h, -bound + b as f64 * h);
            let e2: f64 = w_est
                .values
                .iter()
                .zip(w_true.values.iter())
                .map(|(e, t)| (c * e - t).norm_sqr())
                .sum();
            best = best.min((e2 / t2).sqrt());
        }
    }
    (best, h)
}
