//! Empirical Korn constant over a finite tangential trial space.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::calculus::{gradient_values, strain_rate, vector_gradient};
use crate::error::{Error, Result};
use crate::field::{MatrixField, TangentField};
use crate::grid::SurfaceGrid;
use crate::surface::V3;

pub const DEFAULT_MODES: usize = 6;
const DEPENDENCE_CUT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KornEstimate {
    /// max over the trial space of |grad v|^2 / (|D(v)|^2 + |v|^2)
    pub c_est: f64,
    /// independent trial fields kept
    pub dim: usize,
    /// trial fields offered
    pub offered: usize,
}

/// |grad v|^2 / (|D(v)|^2 + |v|^2) by direct quadrature.
pub fn korn_quotient(grid: &SurfaceGrid, v: &TangentField) -> f64 {
    let grad = grid.norm_matrix(&vector_gradient(grid, &v.values)).powi(2);
    let d = grid.norm_matrix(&strain_rate(grid, v)).powi(2);
    grad / (d + grid.norm(v).powi(2))
}

/// Gradients and rotated gradients of (phi / phi_max)^j c_i(s) trig_j(theta).
pub fn korn_trial_space(grid: &SurfaceGrid, m_s: usize, m_theta: usize) -> Vec<TangentField> {
    let len = grid.surface.length();
    let phi_max = grid.points.iter().map(|p| p.phi).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(2 * m_s * m_theta);
    for i in 0..m_s {
        for jm in 0..m_theta {
            // jm = 0 -> 1, then cos theta, sin theta, cos 2 theta, ...
            let j = jm.div_ceil(2);
            let eta: Vec<f64> = grid
                .points
                .iter()
                .map(|p| {
                    let radial = (i as f64 * std::f64::consts::PI * p.s / len).cos() * (p.phi / phi_max).powi(j as i32);
                    let ang = match jm {
                        0 => 1.0,
                        _ if jm % 2 == 1 => (j as f64 * p.theta).cos(),
                        _ => (j as f64 * p.theta).sin(),
                    };
                    radial * ang
                })
                .collect();
            let grad = gradient_values(grid, &eta);
            let rot: Vec<V3> = grad.iter().zip(&grid.points).map(|(g, p)| p.n.cross(g)).collect();
            out.push(grid.tangent_from_values(grad));
            out.push(grid.tangent_from_values(rot));
        }
    }
    out
}

pub fn korn_constant_estimate(grid: &SurfaceGrid, m_s: usize, m_theta: usize) -> Result<KornEstimate> {
    korn_estimate_from_fields(grid, &korn_trial_space(grid, m_s, m_theta))
}

/// Largest generalized eigenvalue of (|grad v|^2, |D(v)|^2 + |v|^2) over span(fields).
pub fn korn_estimate_from_fields(grid: &SurfaceGrid, fields: &[TangentField]) -> Result<KornEstimate> {
    if fields.is_empty() {
        return Err(Error::EigSolverFailure("empty trial space".into()));
    }
    let n = fields.len();
    let grads: Vec<MatrixField> = fields.iter().map(|v| vector_gradient(grid, &v.values)).collect();
    let strains: Vec<MatrixField> = fields.iter().map(|v| strain_rate(grid, v)).collect();
    let mut mass = DMatrix::zeros(n, n);
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let m = grid.dot(&fields[i], &fields[j]);
            let d = matrix_dot(grid, &strains[i], &strains[j]);
            let g = matrix_dot(grid, &grads[i], &grads[j]);
            for (mat, val) in [(&mut mass, m), (&mut a, d + m), (&mut b, g)] {
                mat[(i, j)] = val;
                mat[(j, i)] = val;
            }
        }
    }
    // orthonormal basis of the independent part of the span
    let eig = SymmetricEigen::new(mass);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > DEPENDENCE_CUT * top).collect();
    if keep.is_empty() {
        return Err(Error::EigSolverFailure("trial fields are all zero".into()));
    }
    let mut basis = DMatrix::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        basis.set_column(c, &(eig.eigenvectors.column(k) / eig.eigenvalues[k].sqrt()));
    }
    let a = basis.transpose() * a * &basis;
    let b = basis.transpose() * b * &basis;
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::EigSolverFailure("form |D v|^2 + |v|^2 is not positive definite".into()))?;
    let linv = chol.l().try_inverse().ok_or_else(|| Error::EigSolverFailure("singular factor".into()))?;
    let c = &linv * b * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mu = SymmetricEigen::try_new(c, 1e-14, 10_000)
        .ok_or_else(|| Error::EigSolverFailure("eigen iteration did not converge".into()))?
        .eigenvalues;
    let c_est = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(KornEstimate { c_est, dim: keep.len(), offered: n })
}

fn matrix_dot(grid: &SurfaceGrid, a: &MatrixField, b: &MatrixField) -> f64 {
    a.values.iter().zip(&b.values).zip(&grid.weights).map(|((a, b), w)| w * a.dot(b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Surface;

    fn sphere(n: usize) -> SurfaceGrid {
        SurfaceGrid::new(&Surface::sphere(1.0, n, n).unwrap()).unwrap()
    }

    #[test]
    fn single_field_matches_quotient() {
        let grid = sphere(32);
        let v = grid.eval_tangent(|p| V3::new(0.0, 0.0, 1.0) - p.y * p.y[2]);
        let est = korn_estimate_from_fields(&grid, std::slice::from_ref(&v)).unwrap();
        assert!((est.c_est - korn_quotient(&grid, &v)).abs() < 1e-8 * est.c_est);
    }

    #[test]
    fn killing_field_quotient() {
        // e3 x y on the unit sphere: D = 0 and |grad v|^2 = 2 - |v|^2, so the quotient is 2
        let grid = sphere(32);
        let v = grid.eval_tangent(|p| V3::new(0.0, 0.0, 1.0).cross(&p.y));
        let est = korn_estimate_from_fields(&grid, &[v.clone(), v.scale(2.0)]).unwrap();
        assert_eq!(est.dim, 1);
        assert!((est.c_est - korn_quotient(&grid, &v)).abs() < 1e-8);
        assert!((est.c_est - 2.0).abs() < 1e-8, "{}", est.c_est);
    }

    #[test]
    fn empty_trial_space() {
        let grid = sphere(8);
        assert!(matches!(korn_estimate_from_fields(&grid, &[]), Err(Error::EigSolverFailure(_))));
    }

    #[test]
    fn default_trial_space_is_finite() {
        let grid = sphere(32);
        let est = korn_constant_estimate(&grid, DEFAULT_MODES, DEFAULT_MODES).unwrap();
        assert!(est.c_est.is_finite() && est.c_est >= 1.0, "{est:?}");
        assert!(est.dim <= est.offered);
    }
}
