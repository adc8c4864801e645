//! Residuals of geometric and differential identities on a grid.

use crate::calculus::{
    bochner_laplacian, bochner_laplacian_frame, directional_derivative, matrix_divergence, strain_divergence,
};
use crate::domain::max_curvature;
use crate::error::Result;
use crate::field::{MatrixField, ScalarField, TangentField};
use crate::grid::SurfaceGrid;
use crate::helmholtz::WeightedProjector;
use crate::profile::Profile;
use crate::rates::fit_slope;
use crate::surface::{Surface, M3, V3};

/// Pointwise maxima over the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlgebraicResiduals {
    /// |P^2 - P|
    pub projector: f64,
    /// |W n|
    pub weingarten_normal: f64,
    /// max(|PW - W|, |WP - W|)
    pub weingarten_tangent: f64,
    /// |tr W - H|
    pub mean_curvature: f64,
    /// |(H^2 - tr W^2)/2 - K|
    pub gauss_curvature: f64,
    /// |det(I - rW) - (1 - rH + r^2 K)| over sample heights
    pub jacobian: f64,
    /// |W + P| on a unit sphere
    pub unit_sphere: Option<f64>,
}

impl AlgebraicResiduals {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("projector_idempotent", self.projector),
            ("weingarten_normal", self.weingarten_normal),
            ("weingarten_tangent", self.weingarten_tangent),
            ("trace_w_mean_curvature", self.mean_curvature),
            ("gauss_curvature_invariant", self.gauss_curvature),
            ("jacobian_expansion", self.jacobian),
        ];
        if let Some(u) = self.unit_sphere {
            v.push(("unit_sphere_w_plus_p", u));
        }
        v
    }
}

fn max_abs(m: &M3) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub fn algebraic_residuals(grid: &SurfaceGrid) -> AlgebraicResiduals {
    let kmax = max_curvature(grid).max(1e-12);
    let heights = [-0.3 / kmax, 0.2 / kmax, 0.45 / kmax];
    let unit = matches!(grid.surface.profile, Profile::Sphere { radius } if radius == 1.0);
    let mut r = AlgebraicResiduals { unit_sphere: unit.then_some(0.0), ..Default::default() };
    for p in &grid.points {
        r.projector = r.projector.max(max_abs(&(p.p * p.p - p.p)));
        r.weingarten_normal = r.weingarten_normal.max((p.w * p.n).amax());
        r.weingarten_tangent = r.weingarten_tangent.max(max_abs(&(p.p * p.w - p.w)).max(max_abs(&(p.w * p.p - p.w))));
        r.mean_curvature = r.mean_curvature.max((p.w.trace() - p.h).abs());
        r.gauss_curvature = r.gauss_curvature.max((0.5 * (p.h * p.h - (p.w * p.w).trace()) - p.k).abs());
        for &h in &heights {
            let det = (M3::identity() - h * p.w).determinant();
            r.jacobian = r.jacobian.max((det - (1.0 - h * p.h + h * h * p.k)).abs());
        }
        if let Some(u) = r.unit_sphere.as_mut() {
            *u = u.max(max_abs(&(p.w + p.p)));
        }
    }
    r
}

/// |div P - H n| / |H n|, or absolute when H vanishes.
pub fn form_w_residual(grid: &SurfaceGrid) -> f64 {
    let p = MatrixField { shape: grid.shape, values: grid.points.iter().map(|p| p.p).collect() };
    let div = matrix_divergence(grid, &p);
    let hn: Vec<V3> = grid.points.iter().map(|p| p.n * p.h).collect();
    let diff: Vec<V3> = div.values.iter().zip(&hn).map(|(a, b)| a - b).collect();
    grid.norm_vec(&diff) / grid.norm_vec(&hn).max(1.0)
}

/// Smooth tangent test fields.
pub fn test_field_x(grid: &SurfaceGrid) -> TangentField {
    grid.eval_tangent(|p| V3::new(p.y[1] + 0.3, -p.y[0], p.y[0] * p.y[2]))
}

pub fn test_field_y(grid: &SurfaceGrid) -> TangentField {
    grid.eval_tangent(|p| V3::new((0.5 * p.y[2]).sin(), p.y[0] * p.y[1], 1.0 - 0.2 * p.y[1]))
}

/// Normal part of the ambient derivative against the second fundamental form:
/// |n . (X . grad) Y - Y . W X| / |(X . grad) Y|.
pub fn gauss_formula_residual(grid: &SurfaceGrid, x: &TangentField, y: &TangentField) -> f64 {
    let d = directional_derivative(grid, &y.values, &x.values);
    let res = ScalarField {
        shape: grid.shape,
        values: grid
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| p.n.dot(&d[i]) - y.values[i].dot(&(p.w * x.values[i])))
            .collect(),
    };
    grid.norm_scalar(&res) / grid.norm_vec(&d)
}

/// Two constructions of the Bochner Laplacian, relative difference.
pub fn bochner_residual(grid: &SurfaceGrid, v: &TangentField) -> f64 {
    let a = bochner_laplacian(grid, v);
    let b = bochner_laplacian_frame(grid, v);
    grid.norm(&a.sub(&b)) / grid.norm(&a)
}

/// |2 P div D(v) - Delta_B v - K v| / |Delta_B v| for divergence-free v.
pub fn limit_eq_residual(grid: &SurfaceGrid, v: &TangentField) -> f64 {
    let lhs = strain_divergence(grid, v);
    let db = bochner_laplacian(grid, v);
    let kv: Vec<V3> = v.values.iter().zip(&grid.points).map(|(v, p)| v * p.k).collect();
    let diff: Vec<V3> = (0..grid.len()).map(|i| lhs.values[i] - db.values[i] - kv[i]).collect();
    grid.norm_vec(&diff) / grid.norm(&db)
}

/// Test field with zero divergence: the unweighted projection of `test_field_x`,
/// applied twice to clear roundoff in the divergence.
pub fn solenoidal_test_field(grid: &SurfaceGrid) -> Result<TangentField> {
    let proj = WeightedProjector::new(grid, &ScalarField::constant(grid.shape, 1.0))?;
    let (v, _) = proj.project(grid, &test_field_x(grid).values)?;
    let (v, _) = proj.project(grid, &v)?;
    Ok(grid.tangent_from_values(v))
}

/// max |K + phi''/phi| over the grid nodes.
pub fn revolution_curvature_residual(grid: &SurfaceGrid) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..grid.shape.n_s {
        let jet = grid.surface.profile.jet(grid.s[j]);
        let k_profile = -jet.ddphi / jet.phi;
        for t in 0..grid.shape.n_theta {
            worst = worst.max((grid.points[grid.shape.idx(j, t)].k - k_profile).abs());
        }
    }
    worst
}

pub const DIFFERENTIAL_IDS: [&str; 4] = ["div_projector", "gauss_formula", "bochner_laplacian", "limit_equation"];

/// The four differential residuals on one grid, in the order of `DIFFERENTIAL_IDS`.
pub fn differential_residuals(grid: &SurfaceGrid) -> Result<[f64; 4]> {
    let x = test_field_x(grid);
    Ok([
        form_w_residual(grid),
        gauss_formula_residual(grid, &x, &test_field_y(grid)),
        bochner_residual(grid, &x),
        limit_eq_residual(grid, &solenoidal_test_field(grid)?),
    ])
}

#[derive(Clone, Debug)]
pub struct OrderStudy {
    pub n: Vec<usize>,
    pub residuals: Vec<f64>,
    /// fitted decay order, -d log(res) / d log(N)
    pub order: f64,
}

impl OrderStudy {
    pub fn from_residuals(ns: &[usize], residuals: Vec<f64>) -> Self {
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let (p, _) = fit_slope(&x, &residuals);
        OrderStudy { n: ns.to_vec(), residuals, order: -p }
    }
}

/// Evaluates `residual` at each resolution and fits the decay order.
pub fn order_study(surface: &Surface, ns: &[usize], residual: impl Fn(&SurfaceGrid) -> Result<f64>) -> Result<OrderStudy> {
    let mut residuals = Vec::with_capacity(ns.len());
    for &n in ns {
        let grid = SurfaceGrid::new(&surface.with_resolution(n, n)?)?;
        residuals.push(residual(&grid)?);
    }
    Ok(OrderStudy::from_residuals(ns, residuals))
}

/// Order studies of all differential residuals, one grid per resolution.
pub fn differential_order_studies(surface: &Surface, ns: &[usize]) -> Result<Vec<(&'static str, OrderStudy)>> {
    let mut table = Vec::with_capacity(ns.len());
    for &n in ns {
        let grid = SurfaceGrid::new(&surface.with_resolution(n, n)?)?;
        table.push(differential_residuals(&grid)?);
    }
    Ok(DIFFERENTIAL_IDS
        .iter()
        .enumerate()
        .map(|(k, id)| (*id, OrderStudy::from_residuals(ns, table.iter().map(|r| r[k]).collect())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebraic_identities_hold() {
        for s in [Surface::sphere(1.0, 16, 16).unwrap(), Surface::torus(3.0, 1.0, 16, 16).unwrap()] {
            let r = algebraic_residuals(&SurfaceGrid::new(&s).unwrap());
            for (name, v) in r.entries() {
                assert!(v < 1e-12, "{name} {v}");
            }
        }
    }

    #[test]
    fn revolution_curvature() {
        let grid = SurfaceGrid::new(&Surface::torus(3.0, 1.0, 16, 16).unwrap()).unwrap();
        assert!(revolution_curvature_residual(&grid) < 1e-12);
    }

    #[test]
    fn differential_identities_converge() {
        let s = Surface::sphere(1.0, 8, 8).unwrap();
        let st = order_study(&s, &[16, 32], |g| Ok(gauss_formula_residual(g, &test_field_x(g), &test_field_y(g)))).unwrap();
        assert!(st.order > 3.0, "{st:?}");
        let st = order_study(&s, &[16, 32], |g| Ok(limit_eq_residual(g, &solenoidal_test_field(g)?))).unwrap();
        assert!(st.order > 3.0, "{st:?}");
    }
}
