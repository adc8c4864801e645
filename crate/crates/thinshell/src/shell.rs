//! Fields on the thin shell, sampled on (surface node) x (radial Gauss node).
//!
//! Layer k of the lattice sits at r_k(y) = eps g0(y) + xi_k eps g(y) with
//! Gauss-Legendre xi_k in (0, 1), so radial integrals and derivatives are
//! polynomially exact per surface node.

use crate::calculus::{gradient_values, vector_gradient};
use crate::domain::{boundary_frame_at, ThinDomainSpec};
use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField};
use crate::grid::SurfaceGrid;
use crate::quadrature::{diff_matrix, gauss_legendre};
use crate::surface::{SurfacePoint, M3, V3};

pub const DEFAULT_NR: usize = 8;

#[derive(Clone, Debug)]
pub struct ShellGrid {
    pub spec: ThinDomainSpec,
    pub n_r: usize,
    /// radial nodes in (0, 1)
    pub xi: Vec<f64>,
    /// radial weights summing to one
    pub wr: Vec<f64>,
    dxi: Vec<f64>,
    /// r at (node, k), index node * n_r + k
    pub r: Vec<f64>,
    /// shell Jacobian det(I - rW) at (node, k)
    pub jac: Vec<f64>,
    /// tau^0, tau^1 per surface node
    pub tau: [Vec<V3>; 2],
}

/// Value per (surface node, radial node), index node * n_r + k.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellField<T> {
    pub n_r: usize,
    pub values: Vec<T>,
}

pub type ShellScalar = ShellField<f64>;
pub type ShellVector = ShellField<V3>;

impl<T: Copy> ShellField<T> {
    pub fn layer(&self, k: usize) -> Vec<T> {
        self.values.iter().skip(k).step_by(self.n_r).copied().collect()
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.values.len(), other.values.len());
        ShellField { n_r: self.n_r, values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() }
    }
}

impl ShellGrid {
    pub fn new(grid: &SurfaceGrid, spec: &ThinDomainSpec, n_r: usize) -> Result<Self> {
        if n_r < 1 {
            return Err(Error::TooFewRadialNodes { n_r, needed: 1 });
        }
        spec.validate(grid)?;
        let (x, w) = gauss_legendre(n_r);
        let xi: Vec<f64> = x.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let wr: Vec<f64> = w.iter().map(|w| 0.5 * w).collect();
        let dxi = diff_matrix(&xi);
        let eps = spec.eps;
        let mut r = Vec::with_capacity(grid.len() * n_r);
        let mut jac = Vec::with_capacity(grid.len() * n_r);
        let mut tau = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
        for (node, p) in grid.points.iter().enumerate() {
            let (g0, g1) = (spec.g0.values[node], spec.g1.values[node]);
            for &x in &xi {
                let rk = eps * (g0 + x * (g1 - g0));
                let j = (M3::identity() - rk * p.w).determinant();
                if j <= 0.0 {
                    return Err(Error::OutsideReach { jacobian: j });
                }
                r.push(rk);
                jac.push(j);
            }
            for (i, t) in tau.iter_mut().enumerate() {
                t.push(boundary_frame_at(p, eps, spec.g_i(i).values[node], &spec.grad_g_i(i).values[node], i)?.tau);
            }
        }
        Ok(ShellGrid { spec: spec.clone(), n_r, xi, wr, dxi, r, jac, tau })
    }

    pub fn eps(&self) -> f64 {
        self.spec.eps
    }

    /// Samples u(y + r n(y)).
    pub fn sample<T>(&self, grid: &SurfaceGrid, f: impl Fn(&SurfacePoint, f64) -> T) -> ShellField<T> {
        let mut values = Vec::with_capacity(self.r.len());
        for (node, p) in grid.points.iter().enumerate() {
            for k in 0..self.n_r {
                values.push(f(p, self.r[node * self.n_r + k]));
            }
        }
        ShellField { n_r: self.n_r, values }
    }

    /// Samples an ambient function at x = y + r n(y).
    pub fn sample_ambient<T>(&self, grid: &SurfaceGrid, f: impl Fn(&V3) -> T) -> ShellField<T> {
        self.sample(grid, |p, r| f(&(p.y + p.n * r)))
    }

    /// grad_G r_k: surface gradient of the layer height at fixed xi.
    fn layer_gradient(&self, node: usize, k: usize) -> V3 {
        let eps = self.eps();
        let x = self.xi[k];
        (self.spec.grad_g0.values[node] * (1.0 - x) + self.spec.grad_g1.values[node] * x) * eps
    }

    /// psi_eps at (node, k), equal to the layer gradient.
    pub fn psi(&self, grid: &SurfaceGrid, node: usize, k: usize) -> V3 {
        let _ = grid;
        let g = self.spec.g1.values[node] - self.spec.g0.values[node];
        let r = self.r[node * self.n_r + k];
        let eps = self.eps();
        (self.spec.grad_g1.values[node] * (r - eps * self.spec.g0.values[node])
            + self.spec.grad_g0.values[node] * (eps * self.spec.g1.values[node] - r))
            / g
    }

    /// Psi_eps of the impermeable extension at (node, r).
    pub fn big_psi(&self, node: usize, r: f64) -> V3 {
        let eps = self.eps();
        let (g0, g1) = (self.spec.g0.values[node], self.spec.g1.values[node]);
        ((r - eps * g0) * self.tau[1][node] + (eps * g1 - r) * self.tau[0][node]) / (g1 - g0)
    }

    /// Integral over the shell by the layer change of variables.
    pub fn integrate(&self, grid: &SurfaceGrid, f: &ShellScalar) -> f64 {
        let eps = self.eps();
        let mut sum = 0.0;
        for (node, w) in grid.weights.iter().enumerate() {
            let g = self.spec.g1.values[node] - self.spec.g0.values[node];
            let mut acc = 0.0;
            for k in 0..self.n_r {
                let i = node * self.n_r + k;
                acc += self.wr[k] * self.jac[i] * f.values[i];
            }
            sum += w * eps * g * acc;
        }
        sum
    }

    /// |f|_{L2(shell)}, scalar or vector.
    pub fn norm<T: ShellNorm>(&self, grid: &SurfaceGrid, f: &ShellField<T>) -> f64 {
        let sq = ShellField { n_r: f.n_r, values: f.values.iter().map(|v| v.sq()).collect() };
        self.integrate(grid, &sq).sqrt()
    }

    /// int J dr per surface node.
    pub fn fiber_measure(&self, node: usize) -> f64 {
        let g = self.spec.g1.values[node] - self.spec.g0.values[node];
        let acc: f64 = (0..self.n_r).map(|k| self.wr[k] * self.jac[node * self.n_r + k]).sum();
        self.eps() * g * acc
    }
}

pub trait ShellNorm: Copy {
    fn sq(&self) -> f64;
}

impl ShellNorm for f64 {
    fn sq(&self) -> f64 {
        self * self
    }
}

impl ShellNorm for V3 {
    fn sq(&self) -> f64 {
        self.norm_squared()
    }
}

impl ShellNorm for M3 {
    fn sq(&self) -> f64 {
        self.norm_squared()
    }
}

/// eta composed with the closest-point map.
pub fn constant_extension<T: Copy>(sg: &ShellGrid, eta: &[T]) -> ShellField<T> {
    let mut values = Vec::with_capacity(eta.len() * sg.n_r);
    for &v in eta {
        values.extend(std::iter::repeat_n(v, sg.n_r));
    }
    ShellField { n_r: sg.n_r, values }
}

/// d/dr along each fiber by collocation on the radial nodes.
pub fn normal_derivative<T>(sg: &ShellGrid, u: &ShellField<T>) -> Result<ShellField<T>>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = sg.n_r;
    if n < 2 {
        return Err(Error::TooFewRadialNodes { n_r: n, needed: 2 });
    }
    let mut values = Vec::with_capacity(u.values.len());
    for (node, chunk) in u.values.chunks(n).enumerate() {
        let g = sg.spec.g1.values[node] - sg.spec.g0.values[node];
        let scale = 1.0 / (sg.eps() * g);
        for i in 0..n {
            let mut acc = chunk[0] * sg.dxi[i * n];
            for j in 1..n {
                acc = acc + chunk[j] * sg.dxi[i * n + j];
            }
            values.push(acc * scale);
        }
    }
    Ok(ShellField { n_r: n, values })
}

/// Fiber average (1 / (eps g)) int u dr.
pub fn average_m<T>(sg: &ShellGrid, u: &ShellField<T>) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    u.values
        .chunks(sg.n_r)
        .map(|c| {
            let mut acc = c[0] * sg.wr[0];
            for k in 1..sg.n_r {
                acc = acc + c[k] * sg.wr[k];
            }
            acc
        })
        .collect()
}

pub fn average_m_scalar(grid: &SurfaceGrid, sg: &ShellGrid, u: &ShellScalar) -> ScalarField {
    ScalarField { shape: grid.shape, values: average_m(sg, u) }
}

/// P M u.
pub fn average_mtau(grid: &SurfaceGrid, sg: &ShellGrid, u: &ShellVector) -> TangentField {
    grid.tangent_from_values(average_m(sg, u))
}

/// E v at (node, r).
pub fn impermeable_extension_at(sg: &ShellGrid, grid: &SurfaceGrid, v: &TangentField, node: usize, r: f64) -> V3 {
    let vv = v.values[node];
    vv + grid.points[node].n * vv.dot(&sg.big_psi(node, r))
}

/// E v = v + (v . Psi) n on the lattice.
pub fn impermeable_extension(sg: &ShellGrid, grid: &SurfaceGrid, v: &TangentField) -> ShellVector {
    let mut values = Vec::with_capacity(sg.r.len());
    for node in 0..grid.len() {
        for k in 0..sg.n_r {
            values.push(impermeable_extension_at(sg, grid, v, node, sg.r[node * sg.n_r + k]));
        }
    }
    ShellField { n_r: sg.n_r, values }
}

/// max over nodes and both boundaries of |E v . n_eps^i|.
pub fn boundary_impermeability(sg: &ShellGrid, grid: &SurfaceGrid, v: &TangentField) -> Result<f64> {
    let mut worst = 0.0f64;
    for (node, p) in grid.points.iter().enumerate() {
        for i in 0..2 {
            let gi = sg.spec.g_i(i).values[node];
            let frame = boundary_frame_at(p, sg.eps(), gi, &sg.spec.grad_g_i(i).values[node], i)?;
            let ev = impermeable_extension_at(sg, grid, v, node, sg.eps() * gi);
            worst = worst.max(ev.dot(&frame.normal).abs());
        }
    }
    Ok(worst)
}

/// u_a = E M_tau u and u_r = u - u_a.
pub fn average_residual_split(sg: &ShellGrid, grid: &SurfaceGrid, u: &ShellVector) -> (ShellVector, ShellVector) {
    let ua = impermeable_extension(sg, grid, &average_mtau(grid, sg, u));
    let ur = u.zip_with(&ua, |a, b| a - b);
    (ua, ur)
}

/// Ambient gradient of a scalar shell field, assembled from layer and radial derivatives.
pub fn ambient_gradient(sg: &ShellGrid, grid: &SurfaceGrid, u: &ShellScalar) -> Result<ShellVector> {
    let du = normal_derivative(sg, u)?;
    let n_r = sg.n_r;
    let mut out = vec![V3::zeros(); u.values.len()];
    for k in 0..n_r {
        let gl = gradient_values(grid, &u.layer(k));
        for (node, p) in grid.points.iter().enumerate() {
            let i = node * n_r + k;
            let t = gl[node] - sg.layer_gradient(node, k) * du.values[i];
            let inv = resolvent(p, sg.r[i])?;
            out[i] = inv * t + p.n * du.values[i];
        }
    }
    Ok(ShellField { n_r, values: out })
}

/// Ambient divergence of a vector shell field.
pub fn ambient_divergence(sg: &ShellGrid, grid: &SurfaceGrid, u: &ShellVector) -> Result<ShellScalar> {
    let du = normal_derivative(sg, u)?;
    let n_r = sg.n_r;
    let mut out = vec![0.0; u.values.len()];
    for k in 0..n_r {
        let gl = vector_gradient(grid, &u.layer(k));
        for (node, p) in grid.points.iter().enumerate() {
            let i = node * n_r + k;
            let t = gl.values[node] - sg.layer_gradient(node, k) * du.values[i].transpose();
            out[i] = (resolvent(p, sg.r[i])? * t).trace() + p.n.dot(&du.values[i]);
        }
    }
    Ok(ShellField { n_r, values: out })
}

fn resolvent(p: &SurfacePoint, r: f64) -> Result<M3> {
    (M3::identity() - r * p.w).try_inverse().ok_or(Error::SingularResolvent)
}

#[derive(Clone, Copy, Debug)]
pub struct AveragedGradientReport {
    /// |grad M phi - M(B grad phi) - M(d_n phi psi)| / |grad M phi|
    pub residual: f64,
    pub lhs_norm: f64,
}

fn averaged_gradient_from(
    sg: &ShellGrid,
    grid: &SurfaceGrid,
    phi: &ShellScalar,
    grad: &ShellVector,
    dn: &ShellScalar,
) -> AveragedGradientReport {
    let m = average_m(sg, phi);
    let lhs = gradient_values(grid, &m);
    let n_r = sg.n_r;
    let mut terms = Vec::with_capacity(phi.values.len());
    for (node, p) in grid.points.iter().enumerate() {
        for k in 0..n_r {
            let i = node * n_r + k;
            let b = (M3::identity() - sg.r[i] * p.w) * p.p;
            terms.push(b * grad.values[i] + sg.psi(grid, node, k) * dn.values[i]);
        }
    }
    let rhs = average_m(sg, &ShellField { n_r, values: terms });
    let diff: Vec<V3> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let lhs_norm = grid.norm_vec(&lhs);
    AveragedGradientReport { residual: grid.norm_vec(&diff) / lhs_norm.max(1e-300), lhs_norm }
}

/// Averaged-gradient identity with grad phi assembled on the lattice.
pub fn averaged_gradient_check(sg: &ShellGrid, grid: &SurfaceGrid, phi: &ShellScalar) -> Result<AveragedGradientReport> {
    let grad = ambient_gradient(sg, grid, phi)?;
    let dn = normal_derivative(sg, phi)?;
    Ok(averaged_gradient_from(sg, grid, phi, &grad, &dn))
}

/// Same identity for an ambient function with known gradient; only grad M phi is discrete.
pub fn averaged_gradient_check_analytic(
    sg: &ShellGrid,
    grid: &SurfaceGrid,
    value: impl Fn(&V3) -> f64,
    gradient: impl Fn(&V3) -> V3,
) -> AveragedGradientReport {
    let phi = sg.sample_ambient(grid, value);
    let grad = sg.sample_ambient(grid, &gradient);
    let dn = sg.sample(grid, |p, r| p.n.dot(&grad_at(&gradient, p, r)));
    averaged_gradient_from(sg, grid, &phi, &grad, &dn)
}

fn grad_at(gradient: &impl Fn(&V3) -> V3, p: &SurfacePoint, r: f64) -> V3 {
    gradient(&(p.y + p.n * r))
}
