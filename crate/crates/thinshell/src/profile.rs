//! Meridian profiles (phi(s), psi(s)) of surfaces of revolution.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate};

/// Values and first two derivatives of a profile at one arc-length value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileJet {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
}

/// Whether the meridian closes at two poles or is a periodic loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Sphere,
    Torus,
}

#[derive(Clone, Debug)]
pub enum Profile {
    Sphere { radius: f64 },
    Torus { major: f64, minor: f64 },
    /// Closed convex profile with tangent angle pi u + bulge sin(2 pi u), u = s/L.
    Spheroid { length: f64, bulge: f64 },
    Sampled(SampledProfile),
}

impl Profile {
    pub fn length(&self) -> f64 {
        match self {
            Profile::Sphere { radius } => PI * radius,
            Profile::Torus { minor, .. } => 2.0 * PI * minor,
            Profile::Spheroid { length, .. } => *length,
            Profile::Sampled(p) => p.length,
        }
    }

    pub fn topology(&self) -> Topology {
        match self {
            Profile::Torus { .. } => Topology::Torus,
            Profile::Sampled(p) => p.topology,
            _ => Topology::Sphere,
        }
    }

    pub fn jet(&self, s: f64) -> ProfileJet {
        match *self {
            Profile::Sphere { radius: r } => {
                let (sn, cs) = (s / r).sin_cos();
                ProfileJet {
                    phi: r * sn,
                    dphi: cs,
                    ddphi: -sn / r,
                    psi: r * cs,
                    dpsi: -sn,
                    ddpsi: -cs / r,
                }
            }
            Profile::Torus { major, minor: a } => {
                let (sn, cs) = (s / a).sin_cos();
                ProfileJet {
                    phi: major + a * cs,
                    dphi: -sn,
                    ddphi: -cs / a,
                    psi: a * sn,
                    dpsi: cs,
                    ddpsi: -sn / a,
                }
            }
            Profile::Spheroid { length, bulge } => spheroid_jet(length, bulge, s),
            Profile::Sampled(ref p) => p.jet(s),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            Profile::Sphere { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::InvalidSurface(format!("sphere radius must be positive, got {radius}")))
            }
            Profile::Torus { major, minor } if !(minor > 0.0 && minor < major && major.is_finite()) => {
                Err(Error::InvalidSurface(format!("torus needs 0 < a < R, got R = {major}, a = {minor}")))
            }
            Profile::Spheroid { length, bulge } if !(length > 0.0 && bulge.abs() < 0.5) => {
                Err(Error::InvalidSurface(format!("spheroid needs L > 0 and |bulge| < 1/2, got {length}, {bulge}")))
            }
            _ => Ok(()),
        }
    }
}

fn spheroid_angle(length: f64, bulge: f64, s: f64) -> (f64, f64) {
    let u = s / length;
    let alpha = PI * u + bulge * (2.0 * PI * u).sin();
    let dalpha = (PI + 2.0 * PI * bulge * (2.0 * PI * u).cos()) / length;
    (alpha, dalpha)
}

fn spheroid_jet(length: f64, bulge: f64, s: f64) -> ProfileJet {
    let rule = gauss_legendre(20);
    let ang = |t: f64| spheroid_angle(length, bulge, t).0;
    let phi = integrate(|t| ang(t).cos(), 0.0, s, 4, &rule);
    let lift = 0.5 * integrate(|t| ang(t).sin(), 0.0, length, 8, &rule);
    let psi = lift - integrate(|t| ang(t).sin(), 0.0, s, 4, &rule);
    let (a, da) = spheroid_angle(length, bulge, s);
    ProfileJet {
        phi,
        dphi: a.cos(),
        ddphi: -da * a.sin(),
        psi,
        dpsi: -a.sin(),
        ddpsi: -da * a.cos(),
    }
}

/// Profile given by equispaced samples on [0, L], interpolated by a
/// trigonometric series (sine/cosine for closed profiles, Fourier for loops).
#[derive(Clone, Debug)]
pub struct SampledProfile {
    pub length: f64,
    pub topology: Topology,
    // phi = sum b_k sin(k w s) (+ a_k cos), psi = sum c_k cos(k w s) (+ d_k sin)
    phi_cos: Vec<f64>,
    phi_sin: Vec<f64>,
    psi_cos: Vec<f64>,
    psi_sin: Vec<f64>,
    omega: f64,
}

impl SampledProfile {
    /// Builds the interpolant from samples at s_i = i L / M, i = 0..=M.
    pub fn new(s: &[f64], phi: &[f64], psi: &[f64]) -> Result<Self> {
        let m1 = s.len();
        if m1 < 5 || phi.len() != m1 || psi.len() != m1 {
            return Err(Error::InvalidSurface("profile needs at least 5 samples of s, phi, psi".into()));
        }
        let m = m1 - 1;
        let length = s[m] - s[0];
        if s[0].abs() > 1e-12 || !(length > 0.0) {
            return Err(Error::InvalidSurface("profile must start at s = 0 and increase".into()));
        }
        let h = length / m as f64;
        if s.iter().enumerate().any(|(i, &si)| (si - i as f64 * h).abs() > 1e-9 * length) {
            return Err(Error::InvalidSurface("profile samples must be equispaced in s".into()));
        }
        if phi[1..m].iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidSurface("phi must be positive away from the endpoints".into()));
        }
        let scale = phi.iter().chain(psi).fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
        let closed = phi[0].abs() <= 1e-12 * scale && phi[m].abs() <= 1e-12 * scale;
        let periodic = (phi[0] - phi[m]).abs() <= 1e-12 * scale && (psi[0] - psi[m]).abs() <= 1e-12 * scale;
        let prof = if closed {
            let mf = m as f64;
            let mut b = vec![0.0; m + 1];
            let mut c = vec![0.0; m + 1];
            for k in 0..=m {
                let mut sb = 0.0;
                let mut sc = 0.5 * psi[0] + 0.5 * psi[m] * if k % 2 == 0 { 1.0 } else { -1.0 };
                for i in 1..m {
                    let arg = PI * (k * i) as f64 / mf;
                    sb += phi[i] * arg.sin();
                    sc += psi[i] * arg.cos();
                }
                b[k] = 2.0 * sb / mf;
                c[k] = 2.0 * sc / mf;
            }
            c[0] *= 0.5;
            c[m] *= 0.5;
            b[m] = 0.0;
            SampledProfile {
                length,
                topology: Topology::Sphere,
                phi_cos: vec![0.0; m + 1],
                phi_sin: b,
                psi_cos: c,
                psi_sin: vec![0.0; m + 1],
                omega: PI / length,
            }
        } else if periodic {
            let (pc, ps) = fourier(&phi[..m]);
            let (qc, qs) = fourier(&psi[..m]);
            SampledProfile {
                length,
                topology: Topology::Torus,
                phi_cos: pc,
                phi_sin: ps,
                psi_cos: qc,
                psi_sin: qs,
                omega: 2.0 * PI / length,
            }
        } else {
            return Err(Error::InvalidSurface(
                "profile is neither closed at two poles nor periodic".into(),
            ));
        };
        for &si in s {
            let j = prof.jet(si);
            let speed = (j.dphi * j.dphi + j.dpsi * j.dpsi).sqrt();
            if (speed - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidSurface(format!(
                    "profile is not arc-length parametrized at s = {si} (|mu'| = {speed})"
                )));
            }
        }
        Ok(prof)
    }

    /// Reads a CSV file with header columns s, phi, psi.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::InvalidSurface(format!("profile file lacks column {name}")))
        };
        let (is, ip, iq) = (col("s")?, col("phi")?, col("psi")?);
        let (mut s, mut phi, mut psi) = (vec![], vec![], vec![]);
        for rec in rdr.records() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::InvalidSurface(format!("bad number in profile row {rec:?}")))
            };
            s.push(get(is)?);
            phi.push(get(ip)?);
            psi.push(get(iq)?);
        }
        Self::new(&s, &phi, &psi)
    }

    pub fn jet(&self, s: f64) -> ProfileJet {
        let w = self.omega;
        let mut j = ProfileJet { phi: 0.0, dphi: 0.0, ddphi: 0.0, psi: 0.0, dpsi: 0.0, ddpsi: 0.0 };
        for k in 0..self.phi_cos.len() {
            let kw = k as f64 * w;
            let (sn, cs) = (kw * s).sin_cos();
            let (pa, pb) = (self.phi_cos[k], self.phi_sin[k]);
            let (qa, qb) = (self.psi_cos[k], self.psi_sin[k]);
            j.phi += pa * cs + pb * sn;
            j.dphi += kw * (pb * cs - pa * sn);
            j.ddphi -= kw * kw * (pa * cs + pb * sn);
            j.psi += qa * cs + qb * sn;
            j.dpsi += kw * (qb * cs - qa * sn);
            j.ddpsi -= kw * kw * (qa * cs + qb * sn);
        }
        j
    }
}

// real Fourier interpolation coefficients of periodic samples
fn fourier(f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = f.len();
    let mf = m as f64;
    let kmax = m / 2;
    let mut a = vec![0.0; kmax + 1];
    let mut b = vec![0.0; kmax + 1];
    for k in 0..=kmax {
        let (mut sa, mut sb) = (0.0, 0.0);
        for (i, &v) in f.iter().enumerate() {
            let arg = 2.0 * PI * (k * i) as f64 / mf;
            sa += v * arg.cos();
            sb += v * arg.sin();
        }
        a[k] = 2.0 * sa / mf;
        b[k] = 2.0 * sb / mf;
    }
    a[0] *= 0.5;
    if m % 2 == 0 {
        a[kmax] *= 0.5;
        b[kmax] = 0.0;
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_arc_length(p: &Profile) {
        let l = p.length();
        for i in 0..=40 {
            let j = p.jet(l * i as f64 / 40.0);
            assert!((j.dphi.hypot(j.dpsi) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn presets_are_arc_length() {
        check_arc_length(&Profile::Sphere { radius: 2.0 });
        check_arc_length(&Profile::Torus { major: 3.0, minor: 1.0 });
        check_arc_length(&Profile::Spheroid { length: 3.0, bulge: 0.2 });
    }

    #[test]
    fn spheroid_closes_and_second_derivatives_match() {
        let p = Profile::Spheroid { length: 2.5, bulge: 0.15 };
        let end = p.jet(2.5);
        assert!(end.phi.abs() < 1e-13);
        assert!((p.jet(0.0).psi + end.psi).abs() < 1e-13);
        let (s, h) = (0.9, 1e-5);
        let fd = (p.jet(s + h).dphi - p.jet(s - h).dphi) / (2.0 * h);
        assert!((fd - p.jet(s).ddphi).abs() < 1e-8);
        let fd = (p.jet(s + h).psi - p.jet(s - h).psi) / (2.0 * h);
        assert!((fd - p.jet(s).dpsi).abs() < 1e-9);
    }

    #[test]
    fn sampled_sphere_reproduces_closed_form() {
        let m = 32;
        let s: Vec<f64> = (0..=m).map(|i| PI * i as f64 / m as f64).collect();
        let phi: Vec<f64> = s.iter().map(|s| s.sin()).collect();
        let psi: Vec<f64> = s.iter().map(|s| s.cos()).collect();
        let p = SampledProfile::new(&s, &phi, &psi).unwrap();
        assert_eq!(p.topology, Topology::Sphere);
        let exact = Profile::Sphere { radius: 1.0 };
        for t in [0.0, 0.3, 1.7, 3.0] {
            let (a, b) = (p.jet(t), exact.jet(t));
            assert!((a.phi - b.phi).abs() < 1e-13 && (a.ddpsi - b.ddpsi).abs() < 1e-11, "{a:?} {b:?}");
        }
    }

    #[test]
    fn sampled_torus_is_periodic() {
        let m = 24;
        let l = 2.0 * PI;
        let s: Vec<f64> = (0..=m).map(|i| l * i as f64 / m as f64).collect();
        let phi: Vec<f64> = s.iter().map(|s| 3.0 + s.cos()).collect();
        let psi: Vec<f64> = s.iter().map(|s| s.sin()).collect();
        let p = SampledProfile::new(&s, &phi, &psi).unwrap();
        assert_eq!(p.topology, Topology::Torus);
        let j = p.jet(0.77);
        assert!((j.phi - 3.0 - 0.77f64.cos()).abs() < 1e-13);
        assert!((j.ddpsi + 0.77f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn open_profile_is_rejected() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        let phi = [1.0, 1.0, 1.0, 1.0, 1.0];
        let psi = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert!(SampledProfile::new(&s, &phi, &psi).is_err());
    }
}
