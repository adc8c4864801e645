//! Tangential differential operators on sampled fields.
//!
//! Every operator works on embedded Cartesian components and assembles chart
//! derivatives through grad = (d_s / sigma) t_s + (d_theta / phi) e_theta.
//! Matrix conventions: (grad v)_ij = D_i v_j, [div A]_j = sum_i D_i A_ij.

use crate::field::{MatrixField, ScalarField, TangentField, VectorField};
use crate::grid::SurfaceGrid;
use crate::surface::V3;

/// Tangential gradient of a scalar field.
pub fn tangential_gradient(grid: &SurfaceGrid, eta: &ScalarField) -> TangentField {
    TangentField::from_raw(grid.shape, gradient_values(grid, &eta.values))
}

pub(crate) fn gradient_values(grid: &SurfaceGrid, f: &[f64]) -> Vec<V3> {
    let ds = grid.d_s(f);
    let dt = grid.d_theta(f);
    grid.points
        .iter()
        .zip(ds.iter().zip(&dt))
        .map(|(p, (a, b))| p.t_s * (a / p.sigma) + p.e_theta * (b / p.phi))
        .collect()
}

/// Tangential gradient of a 3-vector field, rows are derivative directions.
pub fn vector_gradient(grid: &SurfaceGrid, v: &[V3]) -> MatrixField {
    let ds = grid.d_s(v);
    let dt = grid.d_theta(v);
    MatrixField {
        shape: grid.shape,
        values: grid
            .points
            .iter()
            .zip(ds.iter().zip(&dt))
            .map(|(p, (a, b))| p.t_s * (a / p.sigma).transpose() + p.e_theta * (b / p.phi).transpose())
            .collect(),
    }
}

/// div_G v = tr grad_G v, for any 3-vector field.
pub fn divergence_values(grid: &SurfaceGrid, v: &[V3]) -> Vec<f64> {
    let ds = grid.d_s(v);
    let dt = grid.d_theta(v);
    grid.points
        .iter()
        .zip(ds.iter().zip(&dt))
        .map(|(p, (a, b))| p.t_s.dot(a) / p.sigma + p.e_theta.dot(b) / p.phi)
        .collect()
}

/// Divergence of a tangent field with its quadrature mean removed.
///
/// The exact divergence of a tangent field integrates to zero; removing the
/// O(h^6) discrete mean makes range(div) match range(div grad) exactly, so
/// projections leave no divergence defect.
pub fn conservative_divergence_values(grid: &SurfaceGrid, v: &[V3]) -> Vec<f64> {
    let mut d = divergence_values(grid, v);
    let m = grid.integrate_values(&d) / grid.area();
    d.iter_mut().for_each(|x| *x -= m);
    d
}

pub fn tangential_divergence(grid: &SurfaceGrid, v: &TangentField) -> ScalarField {
    ScalarField { shape: grid.shape, values: divergence_values(grid, &v.values) }
}

pub fn divergence_general(grid: &SurfaceGrid, v: &VectorField) -> ScalarField {
    ScalarField { shape: grid.shape, values: divergence_values(grid, &v.values) }
}

/// Row-wise divergence of a matrix field.
pub fn matrix_divergence(grid: &SurfaceGrid, a: &MatrixField) -> VectorField {
    let ds = grid.d_s(&a.values);
    let dt = grid.d_theta(&a.values);
    VectorField {
        shape: grid.shape,
        values: grid
            .points
            .iter()
            .zip(ds.iter().zip(&dt))
            .map(|(p, (a, b))| a.transpose() * p.t_s / p.sigma + b.transpose() * p.e_theta / p.phi)
            .collect(),
    }
}

/// D_G(v) = P (grad v)_S P.
pub fn strain_rate(grid: &SurfaceGrid, v: &TangentField) -> MatrixField {
    strain_from_gradient(grid, &vector_gradient(grid, &v.values))
}

pub(crate) fn strain_from_gradient(grid: &SurfaceGrid, gv: &MatrixField) -> MatrixField {
    MatrixField {
        shape: grid.shape,
        values: gv
            .values
            .iter()
            .zip(&grid.points)
            .map(|(g, p)| p.p * (0.5 * (g + g.transpose())) * p.p)
            .collect(),
    }
}

/// Riemannian connection: P (Y . grad) X.
pub fn covariant_derivative(grid: &SurfaceGrid, x: &TangentField, y: &TangentField) -> TangentField {
    TangentField::from_raw(grid.shape, covariant_values(grid, &x.values, &y.values))
}

pub(crate) fn covariant_values(grid: &SurfaceGrid, x: &[V3], y: &[V3]) -> Vec<V3> {
    directional_derivative(grid, x, y)
        .iter()
        .zip(&grid.points)
        .map(|(d, p)| p.p * d)
        .collect()
}

/// (Y . grad_G) X = (grad_G X)^T Y, not projected.
pub fn directional_derivative(grid: &SurfaceGrid, x: &[V3], y: &[V3]) -> Vec<V3> {
    let ds = grid.d_s(x);
    let dt = grid.d_theta(x);
    grid.points
        .iter()
        .enumerate()
        .map(|(i, p)| ds[i] * (p.t_s.dot(&y[i]) / p.sigma) + dt[i] * (p.e_theta.dot(&y[i]) / p.phi))
        .collect()
}

/// Laplace-Beltrami operator of a scalar field.
pub fn laplace_beltrami(grid: &SurfaceGrid, eta: &ScalarField) -> ScalarField {
    ScalarField {
        shape: grid.shape,
        values: divergence_values(grid, &gradient_values(grid, &eta.values)),
    }
}

/// Componentwise Laplace-Beltrami operator of a 3-vector field.
pub fn laplace_beltrami_vector(grid: &SurfaceGrid, v: &[V3]) -> Vec<V3> {
    matrix_divergence(grid, &vector_gradient(grid, v)).values
}

/// Bochner Laplacian P Delta_G v + W^2 v.
pub fn bochner_laplacian(grid: &SurfaceGrid, v: &TangentField) -> TangentField {
    let lap = laplace_beltrami_vector(grid, &v.values);
    TangentField::from_raw(
        grid.shape,
        lap.iter()
            .zip(&v.values)
            .zip(&grid.points)
            .map(|((l, v), p)| p.p * l + p.w * (p.w * v))
            .collect(),
    )
}

/// Bochner Laplacian through covariant derivatives along the Parseval frame P e_i.
pub fn bochner_laplacian_frame(grid: &SurfaceGrid, v: &TangentField) -> TangentField {
    let mut out = vec![V3::zeros(); grid.len()];
    for i in 0..3 {
        let e: Vec<V3> = grid.points.iter().map(|p| p.p.column(i).into_owned()).collect();
        let d1 = covariant_values(grid, &v.values, &e);
        let d2 = covariant_values(grid, &d1, &e);
        let de = covariant_values(grid, &e, &e);
        let d3 = covariant_values(grid, &v.values, &de);
        for (o, (a, b)) in out.iter_mut().zip(d2.iter().zip(&d3)) {
            *o += a - b;
        }
    }
    TangentField::from_raw(grid.shape, out)
}

/// 2 P div_G[D_G(v)].
pub fn strain_divergence(grid: &SurfaceGrid, v: &TangentField) -> TangentField {
    let d = strain_rate(grid, v);
    let dv = matrix_divergence(grid, &d);
    grid.tangent(&dv.scale(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Surface;

    fn sphere(n: usize) -> SurfaceGrid {
        SurfaceGrid::new(&Surface::sphere(1.0, n, n).unwrap()).unwrap()
    }

    #[test]
    fn gradient_of_height_on_sphere() {
        let g = sphere(48);
        let eta = g.eval_scalar(|p| p.y[2]);
        let grad = tangential_gradient(&g, &eta);
        for (v, p) in grad.values.iter().zip(&g.points) {
            let exact = V3::z() - p.y * p.y[2];
            assert!((v - exact).norm() < 1e-8);
            assert!(v.dot(&p.n).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let g = sphere(16);
        let eta = ScalarField::constant(g.shape, 2.5);
        assert!(tangential_gradient(&g, &eta).max_norm() < 1e-12);
        assert!(laplace_beltrami(&g, &eta).max_abs() < 1e-10);
    }

    #[test]
    fn spherical_harmonic_eigenvalues() {
        let g = sphere(64);
        let y3 = g.eval_scalar(|p| p.y[2]);
        let l1 = laplace_beltrami(&g, &y3);
        let e1 = l1.values.iter().zip(&y3.values).map(|(a, b)| (a + 2.0 * b).abs()).fold(0.0, f64::max);
        assert!(e1 < 1e-7, "{e1}");
        let y2 = g.eval_scalar(|p| p.y[2] * p.y[2] - 1.0 / 3.0);
        let l2 = laplace_beltrami(&g, &y2);
        let e2 = l2.values.iter().zip(&y2.values).map(|(a, b)| (a + 6.0 * b).abs()).fold(0.0, f64::max);
        assert!(e2 < 1e-6, "{e2}");
    }

    #[test]
    fn killing_field_is_divergence_and_strain_free() {
        let g = sphere(32);
        let v = g.eval_tangent(|p| V3::z().cross(&p.y));
        assert!(tangential_divergence(&g, &v).max_abs() < 1e-10);
        let sm = strain_rate(&g, &v).max_norm();
        assert!(sm < 1e-7, "{sm}");
    }

    #[test]
    fn covariant_derivative_of_rotation() {
        let g = sphere(48);
        let v = g.eval_tangent(|p| V3::z().cross(&p.y));
        let d = covariant_derivative(&g, &v, &v);
        for (d, p) in d.values.iter().zip(&g.points) {
            let exact = (V3::z() - p.y * p.y[2]) * p.y[2];
            assert!((d - exact).norm() < 1e-8);
        }
    }

    #[test]
    fn strain_trace_is_divergence() {
        let g = sphere(32);
        let v = g.eval_tangent(|p| V3::new(p.y[1] * p.y[2], 1.0, p.y[0]));
        let d = strain_rate(&g, &v);
        let div = tangential_divergence(&g, &v);
        for (m, dv) in d.values.iter().zip(&div.values) {
            assert!((m.trace() - dv).abs() < 1e-10);
            assert!((m - m.transpose()).amax() < 1e-14);
        }
    }
}
