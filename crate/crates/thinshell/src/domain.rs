//! Thin domains {y + r n(y) : eps g0(y) < r < eps g1(y)} and their boundary frames.

use crate::calculus::gradient_values;
use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField};
use crate::grid::SurfaceGrid;
use crate::surface::{SurfacePoint, M3, V3};

/// Ambient function restricted to the surface, with its ambient gradient.
#[derive(Clone, Debug, PartialEq)]
pub enum AmbientScalar {
    Constant(f64),
    /// c + a . x
    Affine { c: f64, a: V3 },
    /// c + amp cos(k theta(x)), theta the azimuth about the x3-axis
    AzimuthalCos { c: f64, amp: f64, k: u32 },
}

impl AmbientScalar {
    pub fn value(&self, x: &V3) -> f64 {
        match *self {
            AmbientScalar::Constant(c) => c,
            AmbientScalar::Affine { c, a } => c + a.dot(x),
            AmbientScalar::AzimuthalCos { c, amp, k } => c + amp * (k as f64 * x[1].atan2(x[0])).cos(),
        }
    }

    pub fn gradient(&self, x: &V3) -> V3 {
        match *self {
            AmbientScalar::Constant(_) => V3::zeros(),
            AmbientScalar::Affine { a, .. } => a,
            AmbientScalar::AzimuthalCos { amp, k, .. } => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let th = x[1].atan2(x[0]);
                let kf = k as f64;
                V3::new(-x[1], x[0], 0.0) * (-amp * kf * (kf * th).sin() / r2)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            AmbientScalar::Constant(_) => true,
            AmbientScalar::Affine { a, .. } => a == V3::zeros(),
            AmbientScalar::AzimuthalCos { amp, k, .. } => amp == 0.0 || k == 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThinDomainSpec {
    pub g0: ScalarField,
    pub g1: ScalarField,
    pub grad_g0: TangentField,
    pub grad_g1: TangentField,
    pub eps: f64,
    /// bound on eps max|g_i| max|kappa|
    pub safety: f64,
}

pub const DEFAULT_SAFETY: f64 = 0.5;

impl ThinDomainSpec {
    /// Closed-form g0, g1; surface gradients are P applied to the ambient gradients.
    pub fn from_ambient(grid: &SurfaceGrid, g0: &AmbientScalar, g1: &AmbientScalar, eps: f64) -> Result<Self> {
        let spec = ThinDomainSpec {
            g0: grid.eval_scalar(|p| g0.value(&p.y)),
            g1: grid.eval_scalar(|p| g1.value(&p.y)),
            grad_g0: grid.eval_tangent(|p| g0.gradient(&p.y)),
            grad_g1: grid.eval_tangent(|p| g1.gradient(&p.y)),
            eps,
            safety: DEFAULT_SAFETY,
        };
        spec.validate(grid)?;
        Ok(spec)
    }

    /// Sampled g0, g1; surface gradients by chart differentiation.
    pub fn from_fields(grid: &SurfaceGrid, g0: &ScalarField, g1: &ScalarField, eps: f64) -> Result<Self> {
        grid.shape.check(g0.shape)?;
        grid.shape.check(g1.shape)?;
        let spec = ThinDomainSpec {
            g0: g0.clone(),
            g1: g1.clone(),
            grad_g0: grid.tangent_from_values(gradient_values(grid, &g0.values)),
            grad_g1: grid.tangent_from_values(gradient_values(grid, &g1.values)),
            eps,
            safety: DEFAULT_SAFETY,
        };
        spec.validate(grid)?;
        Ok(spec)
    }

    pub fn with_eps(&self, grid: &SurfaceGrid, eps: f64) -> Result<Self> {
        let mut s = self.clone();
        s.eps = eps;
        s.validate(grid)?;
        Ok(s)
    }

    pub fn with_safety(mut self, grid: &SurfaceGrid, safety: f64) -> Result<Self> {
        self.safety = safety;
        self.validate(grid)?;
        Ok(self)
    }

    pub fn g(&self) -> ScalarField {
        self.g1.sub(&self.g0)
    }

    pub fn grad_g(&self) -> TangentField {
        self.grad_g1.sub(&self.grad_g0)
    }

    pub fn g_i(&self, i: usize) -> &ScalarField {
        if i == 0 {
            &self.g0
        } else {
            &self.g1
        }
    }

    pub fn grad_g_i(&self, i: usize) -> &TangentField {
        if i == 0 {
            &self.grad_g0
        } else {
            &self.grad_g1
        }
    }

    pub fn validate(&self, grid: &SurfaceGrid) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidDomain(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        let gmin = self.g().min();
        if !(gmin > 0.0) {
            return Err(Error::InvalidDomain(format!("width g = g1 - g0 must be positive, min {gmin}")));
        }
        let gmax = self.g0.max_abs().max(self.g1.max_abs());
        let kmax = max_curvature(grid);
        let bound = self.eps * gmax * kmax;
        if bound >= self.safety {
            return Err(Error::InvalidDomain(format!(
                "eps max|g_i| max|kappa| = {bound:.3} is not below {}",
                self.safety
            )));
        }
        Ok(())
    }
}

/// max over the grid of the principal curvature magnitudes.
pub fn max_curvature(grid: &SurfaceGrid) -> f64 {
    grid.points.iter().fold(0.0f64, |a, p| {
        let disc = (p.h * p.h - 4.0 * p.k).max(0.0).sqrt();
        a.max((0.5 * (p.h + disc)).abs()).max((0.5 * (p.h - disc)).abs())
    })
}

#[derive(Clone, Copy, Debug)]
pub struct BoundaryFrame {
    pub tau: V3,
    pub normal: V3,
}

/// tau = (I - eps g_i W)^{-1} grad g_i and the unit outward normal of the i-th boundary.
pub fn boundary_frame_at(point: &SurfacePoint, eps: f64, g_i: f64, grad_g_i: &V3, i: usize) -> Result<BoundaryFrame> {
    let a = M3::identity() - eps * g_i * point.w;
    if a.determinant().abs() < 1e-12 {
        return Err(Error::SingularResolvent);
    }
    let tau = a.lu().solve(grad_g_i).ok_or(Error::SingularResolvent)?;
    let sign = if i == 0 { -1.0 } else { 1.0 };
    let normal = (point.n - eps * tau) * (sign / (1.0 + eps * eps * tau.norm_squared()).sqrt());
    Ok(BoundaryFrame { tau, normal })
}

/// Boundary frame at grid node `node` for boundary i in {0, 1}.
pub fn boundary_frame(spec: &ThinDomainSpec, grid: &SurfaceGrid, node: usize, i: usize) -> Result<BoundaryFrame> {
    boundary_frame_at(
        &grid.points[node],
        spec.eps,
        spec.g_i(i).values[node],
        &spec.grad_g_i(i).values[node],
        i,
    )
}

/// Integral over the parametrized surface y + h(y) n(y), pulled back to the grid.
pub fn offset_surface_integral(grid: &SurfaceGrid, field: &ScalarField, h: &ScalarField) -> Result<f64> {
    grid.shape.check(field.shape)?;
    grid.shape.check(h.shape)?;
    let grad_h = gradient_values(grid, &h.values);
    let mut sum = 0.0;
    for (i, p) in grid.points.iter().enumerate() {
        let a = M3::identity() - h.values[i] * p.w;
        let jac = a.determinant();
        if jac <= 0.0 {
            return Err(Error::OutsideReach { jacobian: jac });
        }
        let tau = a.lu().solve(&grad_h[i]).ok_or(Error::OutsideReach { jacobian: jac })?;
        sum += field.values[i] * (jac * (1.0 + tau.norm_squared()).sqrt()) * grid.weights[i];
    }
    Ok(sum)
}
