//! Closed surfaces of revolution and pointwise surface quantities.

use std::path::Path;

use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::profile::{Profile, ProfileJet, SampledProfile, Topology};

pub type V3 = Vector3<f64>;
pub type M3 = Matrix3<f64>;

/// A surface of revolution about the x3-axis with a chart resolution.
#[derive(Clone, Debug)]
pub struct Surface {
    pub profile: Profile,
    pub n_s: usize,
    pub n_theta: usize,
}

impl Surface {
    pub fn new(profile: Profile, n_s: usize, n_theta: usize) -> Result<Self> {
        profile.validate()?;
        let min_s = match profile.topology() {
            Topology::Sphere => 4,
            Topology::Torus => 8,
        };
        if n_s < min_s {
            return Err(Error::InvalidSurface(format!("N_s must be at least {min_s}, got {n_s}")));
        }
        if n_theta < 4 || n_theta % 2 == 1 {
            return Err(Error::InvalidSurface(format!("N_theta must be even and at least 4, got {n_theta}")));
        }
        Ok(Surface { profile, n_s, n_theta })
    }

    pub fn sphere(radius: f64, n_s: usize, n_theta: usize) -> Result<Self> {
        Self::new(Profile::Sphere { radius }, n_s, n_theta)
    }

    pub fn torus(major: f64, minor: f64, n_s: usize, n_theta: usize) -> Result<Self> {
        Self::new(Profile::Torus { major, minor }, n_s, n_theta)
    }

    pub fn spheroid(length: f64, bulge: f64, n_s: usize, n_theta: usize) -> Result<Self> {
        Self::new(Profile::Spheroid { length, bulge }, n_s, n_theta)
    }

    pub fn from_profile_csv(path: &Path, n_s: usize, n_theta: usize) -> Result<Self> {
        Self::new(Profile::Sampled(SampledProfile::from_csv(path)?), n_s, n_theta)
    }

    /// Same surface at another chart resolution.
    pub fn with_resolution(&self, n_s: usize, n_theta: usize) -> Result<Self> {
        Self::new(self.profile.clone(), n_s, n_theta)
    }

    pub fn length(&self) -> f64 {
        self.profile.length()
    }

    pub fn topology(&self) -> Topology {
        self.profile.topology()
    }

    /// True at an endpoint where phi vanishes.
    pub fn pole_flags(&self) -> [bool; 2] {
        let closed = self.topology() == Topology::Sphere;
        [closed, closed]
    }

    pub fn point(&self, s: f64, theta: f64) -> Result<SurfacePoint> {
        surface_quantities(self, s, theta)
    }
}

/// Geometry of the surface at one chart point.
#[derive(Clone, Copy, Debug)]
pub struct SurfacePoint {
    pub s: f64,
    pub theta: f64,
    pub y: V3,
    pub ds_mu: V3,
    pub dtheta_mu: V3,
    pub metric: Matrix2<f64>,
    pub n: V3,
    pub p: M3,
    pub q: M3,
    pub w: M3,
    pub h: f64,
    pub k: f64,
    /// unit tangent along the meridian
    pub t_s: V3,
    /// unit tangent along the parallel
    pub e_theta: V3,
    /// |d mu / ds|
    pub sigma: f64,
    /// distance to the axis
    pub phi: f64,
}

/// Pointwise surface quantities; W is assembled from chart derivatives of the normal.
pub fn surface_quantities(surface: &Surface, s: f64, theta: f64) -> Result<SurfacePoint> {
    let l = surface.length();
    let tol = 1e-12 * l;
    if !s.is_finite() || !theta.is_finite() || s < -tol || s > l + tol {
        return Err(Error::ChartOutOfRange { s, theta });
    }
    let s = s.clamp(0.0, l);
    point_from_jet(&surface.profile.jet(s), s, theta)
}

pub(crate) fn point_from_jet(j: &ProfileJet, s: f64, theta: f64) -> Result<SurfacePoint> {
    let (sn, cs) = theta.sin_cos();
    let sigma = j.dphi.hypot(j.dpsi);
    let (tp, tq) = (j.dphi / sigma, j.dpsi / sigma);
    let dsig = (j.dphi * j.ddphi + j.dpsi * j.ddpsi) / sigma;
    // derivative of the unit profile tangent
    let dtp = j.ddphi / sigma - j.dphi * dsig / (sigma * sigma);
    let dtq = j.ddpsi / sigma - j.dpsi * dsig / (sigma * sigma);

    let y = V3::new(j.phi * cs, j.phi * sn, j.psi);
    let ds_mu = V3::new(j.dphi * cs, j.dphi * sn, j.dpsi);
    let dtheta_mu = V3::new(-j.phi * sn, j.phi * cs, 0.0);
    let n = V3::new(-tq * cs, -tq * sn, tp);
    let ds_n = V3::new(-dtq * cs, -dtq * sn, dtp);
    let dtheta_n = V3::new(tq * sn, -tq * cs, 0.0);
    let t_s = ds_mu / sigma;
    let e_theta = V3::new(-sn, cs, 0.0);

    let w = if j.phi.abs() > 1e-14 * sigma {
        -(ds_mu / (sigma * sigma)) * ds_n.transpose() - (dtheta_mu / (j.phi * j.phi)) * dtheta_n.transpose()
    } else {
        // umbilic limit at a pole: both principal curvatures equal the meridian one
        if j.dphi.abs() < 1e-8 {
            return Err(Error::PoleSingularity { s });
        }
        let kappa = -(t_s.dot(&ds_n)) / sigma;
        kappa * (M3::identity() - n * n.transpose())
    };
    let q = n * n.transpose();
    let p = M3::identity() - q;
    let h = w.trace();
    let (a, b, c) = (t_s.dot(&(w * t_s)), e_theta.dot(&(w * e_theta)), t_s.dot(&(w * e_theta)));
    let k = a * b - c * c;
    Ok(SurfacePoint {
        s,
        theta,
        y,
        ds_mu,
        dtheta_mu,
        metric: Matrix2::new(sigma * sigma, 0.0, 0.0, j.phi * j.phi),
        n,
        p,
        q,
        w,
        h,
        k,
        t_s,
        e_theta,
        sigma,
        phi: j.phi,
    })
}

/// Principal curvatures from the profile, (meridian, parallel).
pub fn principal_curvatures(j: &ProfileJet) -> (f64, f64) {
    let sigma = j.dphi.hypot(j.dpsi);
    let km = (j.dphi * j.ddpsi - j.ddphi * j.dpsi) / sigma.powi(3);
    let kp = j.dpsi / (sigma * j.phi);
    (km, kp)
}

/// det(I - rW) at the point.
pub fn shell_jacobian(point: &SurfacePoint, r: f64) -> Result<f64> {
    let jac = (M3::identity() - r * point.w).determinant();
    if jac <= 0.0 || !jac.is_finite() {
        return Err(Error::OutsideReach { jacobian: jac });
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn assert_mat_close(a: &M3, b: &M3, tol: f64) {
        assert!((a - b).amax() <= tol, "{a} vs {b}");
    }

    #[test]
    fn unit_sphere_weingarten_is_minus_p() {
        let sf = Surface::sphere(1.0, 16, 16).unwrap();
        for &(s, t) in &[(0.3, 0.0), (1.57, 2.0), (3.0, 5.5)] {
            let p = sf.point(s, t).unwrap();
            assert_mat_close(&(p.w + p.p), &M3::zeros(), 1e-14);
            assert!((p.k - 1.0).abs() < 1e-13 && (p.h + 2.0).abs() < 1e-13);
            assert!((p.n - p.y).norm() < 1e-14, "outward normal");
        }
    }

    #[test]
    fn sphere_pole_uses_limit() {
        let sf = Surface::sphere(2.0, 16, 16).unwrap();
        let p = sf.point(0.0, 1.0).unwrap();
        assert!((p.k - 0.25).abs() < 1e-14);
        assert_mat_close(&(p.w + 0.5 * p.p), &M3::zeros(), 1e-14);
    }

    #[test]
    fn torus_gauss_curvature_vanishes_on_top_circle() {
        let sf = Surface::torus(3.0, 1.0, 16, 16).unwrap();
        let p = sf.point(PI / 2.0, 0.7).unwrap();
        assert!(p.k.abs() < 1e-14);
        let j = sf.profile.jet(1.1);
        let p = sf.point(1.1, 0.2).unwrap();
        assert!((p.k + j.ddphi / j.phi).abs() < 1e-13);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let sf = Surface::sphere(1.0, 16, 16).unwrap();
        assert!(matches!(sf.point(-0.1, 0.0), Err(Error::ChartOutOfRange { .. })));
        assert!(matches!(sf.point(1.0, f64::NAN), Err(Error::ChartOutOfRange { .. })));
    }

    #[test]
    fn jacobian_matches_expansion() {
        let sf = Surface::sphere(1.0, 16, 16).unwrap();
        let p = sf.point(1.0, 1.0).unwrap();
        assert!((shell_jacobian(&p, 0.1).unwrap() - 1.21).abs() < 1e-14);
        assert_eq!(shell_jacobian(&p, 0.0).unwrap(), 1.0);
        assert!(matches!(shell_jacobian(&p, -1.0), Err(Error::OutsideReach { .. })));
    }

    #[test]
    fn odd_theta_resolution_is_rejected() {
        assert!(Surface::sphere(1.0, 16, 15).is_err());
        assert!(Surface::torus(1.0, 2.0, 16, 16).is_err());
    }
}
