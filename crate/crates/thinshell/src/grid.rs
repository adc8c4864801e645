//! Chart grid over a surface of revolution: nodes, quadrature and chart derivatives.
//!
//! s-nodes are cell midpoints, so no node sits on a pole. Derivatives use
//! 6th-order centred differences in s and Fourier differentiation in theta.
//! Across a pole a field is continued by f(-s, theta) = f(s, theta + pi), which
//! holds for scalars and for embedded Cartesian components alike.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{MatrixField, ScalarField, Shape, TangentField, VectorField};
use crate::modal::ModalSolver;
use crate::profile::Topology;
use crate::quadrature::pole_weights;
use crate::surface::{point_from_jet, Surface, SurfacePoint, M3, V3};

const FD6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

/// Values with a fixed number of real components, so that theta-FFTs can run per component.
pub trait Comps: Copy + Send + Sync {
    const N: usize;
    fn comp(&self, c: usize) -> f64;
    fn set_comp(&mut self, c: usize, v: f64);
    fn zero() -> Self;
}

impl Comps for f64 {
    const N: usize = 1;
    fn comp(&self, _: usize) -> f64 {
        *self
    }
    fn set_comp(&mut self, _: usize, v: f64) {
        *self = v;
    }
    fn zero() -> Self {
        0.0
    }
}

impl Comps for V3 {
    const N: usize = 3;
    fn comp(&self, c: usize) -> f64 {
        self[c]
    }
    fn set_comp(&mut self, c: usize, v: f64) {
        self[c] = v;
    }
    fn zero() -> Self {
        V3::zeros()
    }
}

impl Comps for M3 {
    const N: usize = 9;
    fn comp(&self, c: usize) -> f64 {
        self[c]
    }
    fn set_comp(&mut self, c: usize, v: f64) {
        self[c] = v;
    }
    fn zero() -> Self {
        M3::zeros()
    }
}

pub struct SurfaceGrid {
    pub surface: Surface,
    pub shape: Shape,
    /// s spacing
    pub h: f64,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub points: Vec<SurfacePoint>,
    /// area weights including the chart density
    pub weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    pub(crate) laplacian: OnceLock<Arc<ModalSolver>>,
}

impl fmt::Debug for SurfaceGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceGrid")
            .field("profile", &self.surface.profile)
            .field("shape", &self.shape)
            .finish()
    }
}

impl SurfaceGrid {
    pub fn new(surface: &Surface) -> Result<Self> {
        let (n_s, n_t) = (surface.n_s, surface.n_theta);
        let l = surface.length();
        let h = l / n_s as f64;
        let topo = surface.topology();
        let s: Vec<f64> = (0..n_s)
            .map(|j| match topo {
                Topology::Sphere => (j as f64 + 0.5) * h,
                Topology::Torus => j as f64 * h,
            })
            .collect();
        let dth = 2.0 * PI / n_t as f64;
        let theta: Vec<f64> = (0..n_t).map(|k| k as f64 * dth).collect();
        let mut points = Vec::with_capacity(n_s * n_t);
        for &sj in &s {
            let jet = surface.profile.jet(sj);
            for &tk in &theta {
                points.push(point_from_jet(&jet, sj, tk)?);
            }
        }
        let sw = match topo {
            Topology::Sphere => pole_weights(n_s, l),
            Topology::Torus => vec![h; n_s],
        };
        let weights = points
            .iter()
            .enumerate()
            .map(|(i, p)| sw[i / n_t] * p.sigma * p.phi * dth)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(SurfaceGrid {
            surface: surface.clone(),
            shape: Shape { n_s, n_theta: n_t },
            h,
            s,
            theta,
            points,
            weights,
            fft: planner.plan_fft_forward(n_t),
            ifft: planner.plan_fft_inverse(n_t),
            laplacian: OnceLock::new(),
        })
    }

    pub fn topology(&self) -> Topology {
        self.surface.topology()
    }

    pub fn len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }

    pub fn eval_scalar(&self, f: impl Fn(&SurfacePoint) -> f64) -> ScalarField {
        ScalarField { shape: self.shape, values: self.points.iter().map(f).collect() }
    }

    pub fn eval_vector(&self, f: impl Fn(&SurfacePoint) -> V3) -> VectorField {
        VectorField { shape: self.shape, values: self.points.iter().map(f).collect() }
    }

    /// Tangential field from pointwise values, projected with P.
    pub fn eval_tangent(&self, f: impl Fn(&SurfacePoint) -> V3) -> TangentField {
        TangentField::from_raw(self.shape, self.points.iter().map(|p| p.p * f(p)).collect())
    }

    pub fn eval_matrix(&self, f: impl Fn(&SurfacePoint) -> M3) -> MatrixField {
        MatrixField { shape: self.shape, values: self.points.iter().map(f).collect() }
    }

    /// Enforces tangency, v <- Pv.
    pub fn tangent(&self, v: &VectorField) -> TangentField {
        assert_eq!(v.shape, self.shape, "field shape differs from grid");
        TangentField::from_raw(
            self.shape,
            v.values.iter().zip(&self.points).map(|(v, p)| p.p * v).collect(),
        )
    }

    pub fn tangent_from_values(&self, values: Vec<V3>) -> TangentField {
        self.tangent(&VectorField { shape: self.shape, values })
    }

    /// Quadrature of a scalar field over the surface.
    pub fn integrate(&self, f: &ScalarField) -> Result<f64> {
        self.shape.check(f.shape)?;
        Ok(self.integrate_values(&f.values))
    }

    pub(crate) fn integrate_values(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self, f: &ScalarField) -> f64 {
        self.integrate_values(&f.values) / self.area()
    }

    pub fn remove_mean(&self, f: &ScalarField) -> ScalarField {
        let m = self.mean(f);
        f.map(|v| v - m)
    }

    pub fn dot_scalar(&self, a: &ScalarField, b: &ScalarField) -> f64 {
        a.values.iter().zip(&b.values).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
    }

    pub fn norm_scalar(&self, a: &ScalarField) -> f64 {
        self.dot_scalar(a, a).sqrt()
    }

    pub fn dot_vec(&self, a: &[V3], b: &[V3]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((a, b), w)| a.dot(b) * w).sum()
    }

    pub fn dot(&self, a: &TangentField, b: &TangentField) -> f64 {
        self.dot_vec(&a.values, &b.values)
    }

    pub fn norm(&self, a: &TangentField) -> f64 {
        self.dot(a, a).sqrt()
    }

    pub fn norm_vec(&self, a: &[V3]) -> f64 {
        self.dot_vec(a, a).sqrt()
    }

    pub fn norm_matrix(&self, a: &MatrixField) -> f64 {
        a.values
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| m.norm_squared() * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Node index of the s-neighbour at offset `m`, continued across poles or periodically.
    #[inline]
    fn neighbour(&self, j: usize, k: usize, m: isize) -> usize {
        let (n_s, n_t) = (self.shape.n_s as isize, self.shape.n_theta);
        let jj = j as isize + m;
        match self.topology() {
            Topology::Torus => self.shape.idx(jj.rem_euclid(n_s) as usize, k),
            Topology::Sphere => {
                if jj < 0 {
                    self.shape.idx((-jj - 1) as usize, (k + n_t / 2) % n_t)
                } else if jj >= n_s {
                    self.shape.idx((2 * n_s - 1 - jj) as usize, (k + n_t / 2) % n_t)
                } else {
                    self.shape.idx(jj as usize, k)
                }
            }
        }
    }

    /// d/ds in chart coordinates.
    pub fn d_s<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        assert_eq!(f.len(), self.len());
        let (n_s, n_t) = (self.shape.n_s, self.shape.n_theta);
        let inv_h = 1.0 / self.h;
        let mut out = Vec::with_capacity(f.len());
        for j in 0..n_s {
            for k in 0..n_t {
                let mut acc = (f[self.neighbour(j, k, 1)] - f[self.neighbour(j, k, -1)]) * FD6[0];
                for (m, c) in FD6.iter().enumerate().skip(1) {
                    let m = m as isize + 1;
                    acc = acc + (f[self.neighbour(j, k, m)] - f[self.neighbour(j, k, -m)]) * *c;
                }
                out.push(acc * inv_h);
            }
        }
        out
    }

    /// d/dtheta by Fourier differentiation, Nyquist mode dropped.
    pub fn d_theta<T: Comps>(&self, f: &[T]) -> Vec<T> {
        assert_eq!(f.len(), self.len());
        let (n_s, n_t) = (self.shape.n_s, self.shape.n_theta);
        let nc = T::N;
        let mut buf = vec![Complex64::new(0.0, 0.0); n_s * nc * n_t];
        for j in 0..n_s {
            for c in 0..nc {
                let row = &mut buf[(j * nc + c) * n_t..(j * nc + c + 1) * n_t];
                for (k, z) in row.iter_mut().enumerate() {
                    z.re = f[j * n_t + k].comp(c);
                }
            }
        }
        self.fft.process(&mut buf);
        let scale = 1.0 / n_t as f64;
        for row in buf.chunks_mut(n_t) {
            for (m, z) in row.iter_mut().enumerate() {
                let wave = if m < n_t / 2 {
                    m as f64
                } else if m > n_t / 2 {
                    m as f64 - n_t as f64
                } else {
                    0.0
                };
                *z = Complex64::new(-z.im, z.re) * (wave * scale);
            }
        }
        self.ifft.process(&mut buf);
        let mut out = vec![T::zero(); f.len()];
        for j in 0..n_s {
            for c in 0..nc {
                let row = &buf[(j * nc + c) * n_t..(j * nc + c + 1) * n_t];
                for (k, z) in row.iter().enumerate() {
                    out[j * n_t + k].set_comp(c, z.re);
                }
            }
        }
        out
    }

    /// Forward real FFT along theta of each (s-row, component) line.
    /// Output index: ((j * nc + c) * n_theta + m).
    pub(crate) fn theta_fft(&self, data: &[f64], nc: usize) -> Vec<Complex64> {
        let (n_s, n_t) = (self.shape.n_s, self.shape.n_theta);
        let mut buf = vec![Complex64::new(0.0, 0.0); n_s * nc * n_t];
        for j in 0..n_s {
            for k in 0..n_t {
                for c in 0..nc {
                    buf[(j * nc + c) * n_t + k].re = data[(j * n_t + k) * nc + c];
                }
            }
        }
        self.fft.process(&mut buf);
        buf
    }

    /// Inverse of `theta_fft` for Hermitian spectra; returns node-major real data.
    pub(crate) fn theta_ifft(&self, mut buf: Vec<Complex64>, nc: usize) -> Vec<f64> {
        let (n_s, n_t) = (self.shape.n_s, self.shape.n_theta);
        self.ifft.process(&mut buf);
        let scale = 1.0 / n_t as f64;
        let mut out = vec![0.0; n_s * n_t * nc];
        for j in 0..n_s {
            for k in 0..n_t {
                for c in 0..nc {
                    out[(j * n_t + k) * nc + c] = buf[(j * nc + c) * n_t + k].re * scale;
                }
            }
        }
        out
    }

    /// Chart components (t_s, e_theta) of a tangent field, interleaved per node.
    pub(crate) fn to_chart(&self, v: &[V3]) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * v.len());
        for (v, p) in v.iter().zip(&self.points) {
            out.push(v.dot(&p.t_s));
            out.push(v.dot(&p.e_theta));
        }
        out
    }

    pub(crate) fn from_chart(&self, c: &[f64]) -> Vec<V3> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| p.t_s * c[2 * i] + p.e_theta * c[2 * i + 1])
            .collect()
    }

    /// A scalar field is axisymmetric when each s-row is constant.
    pub fn is_axisymmetric(&self, f: &ScalarField) -> bool {
        let n_t = self.shape.n_theta;
        let scale = f.max_abs().max(1e-300);
        f.values
            .chunks(n_t)
            .all(|row| row.iter().all(|v| (v - row[0]).abs() <= 1e-13 * scale))
    }

    /// theta-average of each s-row.
    pub fn theta_average(&self, f: &ScalarField) -> ScalarField {
        let n_t = self.shape.n_theta;
        let mut out = f.clone();
        for row in out.values.chunks_mut(n_t) {
            let m = row.iter().sum::<f64>() / n_t as f64;
            row.iter_mut().for_each(|v| *v = m);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_area_is_spectral() {
        for n in [8, 16, 32] {
            let g = SurfaceGrid::new(&Surface::sphere(1.0, n, n).unwrap()).unwrap();
            assert!((g.area() - 4.0 * PI).abs() < 1e-12, "n={n}: {}", g.area());
        }
    }

    #[test]
    fn torus_area_is_exact() {
        let g = SurfaceGrid::new(&Surface::torus(3.0, 1.0, 16, 16).unwrap()).unwrap();
        assert!((g.area() - 12.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn d_theta_of_cosine() {
        let g = SurfaceGrid::new(&Surface::sphere(1.0, 8, 16).unwrap()).unwrap();
        let f: Vec<f64> = g.points.iter().map(|p| (3.0 * p.theta).cos()).collect();
        let d = g.d_theta(&f);
        for (d, p) in d.iter().zip(&g.points) {
            assert!((d + 3.0 * (3.0 * p.theta).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn d_s_across_pole_uses_reflection() {
        // y3 = cos s is smooth through both poles
        let g = SurfaceGrid::new(&Surface::sphere(1.0, 64, 8).unwrap()).unwrap();
        let f: Vec<f64> = g.points.iter().map(|p| p.y[0]).collect();
        let d = g.d_s(&f);
        let err = d
            .iter()
            .zip(&g.points)
            .map(|(d, p)| (d - p.s.cos() * p.theta.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}
