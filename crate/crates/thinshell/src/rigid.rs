//! Rigid displacements a x x + b tangent to the surface and Killing checks.

use nalgebra::{Matrix6, SymmetricEigen, Vector6};

use crate::domain::ThinDomainSpec;
use crate::error::{Error, Result};
use crate::grid::SurfaceGrid;
use crate::surface::V3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidField {
    pub a: V3,
    pub b: V3,
}

impl RigidField {
    pub fn rotation(axis: V3) -> Self {
        RigidField { a: axis, b: V3::zeros() }
    }

    pub fn value(&self, x: &V3) -> V3 {
        self.a.cross(x) + self.b
    }

    fn from_coeffs(c: &Vector6<f64>) -> Self {
        RigidField { a: V3::new(c[0], c[1], c[2]), b: V3::new(c[3], c[4], c[5]) }
    }

    fn basis(p: usize, x: &V3) -> V3 {
        let mut e = V3::zeros();
        e[p % 3] = 1.0;
        if p < 3 {
            e.cross(x)
        } else {
            e
        }
    }
}

#[derive(Clone, Debug)]
pub struct Subspace {
    pub dim: usize,
    pub basis: Vec<RigidField>,
    /// Gram eigenvalues in ascending order
    pub eigenvalues: Vec<f64>,
    /// max over basis fields of max|w.n| / max|w|
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct RigidScan {
    pub r: Subspace,
    pub r01: Subspace,
    pub rg: Subspace,
}

pub const NULL_THRESHOLD: f64 = 1e-8;

fn gram(grid: &SurfaceGrid, dirs: &[Option<&[V3]>]) -> Matrix6<f64> {
    let mut g = Matrix6::zeros();
    for (node, pt) in grid.points.iter().enumerate() {
        let wv: Vec<V3> = (0..6).map(|p| RigidField::basis(p, &pt.y)).collect();
        for d in dirs {
            let dir = match d {
                None => pt.n,
                Some(f) => f[node],
            };
            let proj: Vec<f64> = wv.iter().map(|w| w.dot(&dir)).collect();
            for p in 0..6 {
                for q in 0..6 {
                    g[(p, q)] += grid.weights[node] * proj[p] * proj[q];
                }
            }
        }
    }
    g
}

fn null_space(grid: &SurfaceGrid, g: Matrix6<f64>) -> Subspace {
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let largest = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let basis: Vec<RigidField> = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i] < NULL_THRESHOLD * largest)
        .map(|&i| RigidField::from_coeffs(&eig.eigenvectors.column(i).into_owned()))
        .collect();
    let residual = basis.iter().map(|w| normal_residual(grid, w)).fold(0.0, f64::max);
    Subspace {
        dim: basis.len(),
        basis,
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        residual,
    }
}

/// max|w.n| / max|w| over the grid.
pub fn normal_residual(grid: &SurfaceGrid, w: &RigidField) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for p in &grid.points {
        let v = w.value(&p.y);
        num = num.max(v.dot(&p.n).abs());
        den = den.max(v.norm());
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Null spaces of the Gram forms defining R, R0 n R1 and R_g.
pub fn rigid_field_scan(grid: &SurfaceGrid, spec: Option<&ThinDomainSpec>) -> RigidScan {
    let r = null_space(grid, gram(grid, &[None]));
    let (r01, rg) = match spec {
        None => (r.clone(), r.clone()),
        Some(s) => {
            let gg = s.grad_g();
            (
                null_space(grid, gram(grid, &[None, Some(&s.grad_g0.values), Some(&s.grad_g1.values)])),
                null_space(grid, gram(grid, &[None, Some(&gg.values)])),
            )
        }
    };
    RigidScan { r, r01, rg }
}

/// Rigid fields tangent to the surface with w . grad g = 0.
pub fn weighted_killing_space(grid: &SurfaceGrid, grad_g: &[V3]) -> Subspace {
    null_space(grid, gram(grid, &[None, Some(grad_g)]))
}

#[derive(Clone, Copy, Debug)]
pub struct KillingResiduals {
    /// |Ww - lambda w| relative
    pub collinearity: f64,
    /// |a x n + lambda w| relative
    pub rotation: f64,
}

/// Checks W w = lambda w and a x n = -lambda w on the grid.
pub fn killing_eigen_check(grid: &SurfaceGrid, w: &RigidField) -> Result<KillingResiduals> {
    let tang = normal_residual(grid, w);
    if tang > NULL_THRESHOLD {
        return Err(Error::NotTangential { residual: tang });
    }
    let wmax = grid.points.iter().fold(0.0f64, |a, p| a.max(w.value(&p.y).norm()));
    let (mut c1, mut c2) = (0.0f64, 0.0f64);
    for p in &grid.points {
        let v = w.value(&p.y);
        if v.norm() <= 1e-8 * wmax {
            continue;
        }
        let wv = p.w * v;
        let lambda = wv.dot(&v) / v.norm_squared();
        let scale = p.w.norm() * v.norm();
        c1 = c1.max((wv - v * lambda).norm() / scale.max(1e-300));
        let rot = w.a.cross(&p.n);
        c2 = c2.max((rot + v * lambda).norm() / (w.a.norm() + lambda.abs() * v.norm()).max(1e-300));
    }
    Ok(KillingResiduals { collinearity: c1, rotation: c2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AmbientScalar;
    use crate::surface::Surface;

    #[test]
    fn sphere_has_three_rotations() {
        let g = SurfaceGrid::new(&Surface::sphere(1.0, 16, 16).unwrap()).unwrap();
        let scan = rigid_field_scan(&g, None);
        assert_eq!(scan.r.dim, 3);
        assert!(scan.r.residual < 1e-12);
        for w in &scan.r.basis {
            assert!(w.b.norm() < 1e-10);
        }
    }

    #[test]
    fn torus_has_axial_rotation_only() {
        let g = SurfaceGrid::new(&Surface::torus(3.0, 1.0, 16, 16).unwrap()).unwrap();
        let scan = rigid_field_scan(&g, None);
        assert_eq!(scan.r.dim, 1);
        let a = scan.r.basis[0].a;
        assert!((a.normalize().z.abs() - 1.0).abs() < 1e-10);
        let spec = ThinDomainSpec::from_ambient(
            &g,
            &AmbientScalar::Constant(0.0),
            &AmbientScalar::AzimuthalCos { c: 1.0, amp: 0.1, k: 1 },
            0.1,
        )
        .unwrap();
        let scan = rigid_field_scan(&g, Some(&spec));
        assert_eq!(scan.rg.dim, 0);
        assert_eq!(scan.r01.dim, 0);
    }

    #[test]
    fn eigenrelation_on_sphere_and_translation_rejected() {
        let g = SurfaceGrid::new(&Surface::sphere(1.0, 12, 12).unwrap()).unwrap();
        let res = killing_eigen_check(&g, &RigidField::rotation(V3::z())).unwrap();
        assert!(res.collinearity < 1e-12 && res.rotation < 1e-12);
        let t = RigidField { a: V3::zeros(), b: V3::x() };
        assert!(matches!(killing_eigen_check(&g, &t), Err(Error::NotTangential { .. })));
    }
}
