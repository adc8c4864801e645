//! Limit Navier-Stokes equations on the surface with weight g:
//!
//! g (dv/dt + (v . grad) v) + A_g v + g grad q = g f,  div(g v) = 0,
//! A_g v = -2 nu {P div[g D(v)] - (1/g)(grad g (x) grad g) v} + (gamma0 + gamma1) v.
//!
//! Time stepping is incremental pressure correction: the viscous and friction
//! terms are implicit, advection is explicit in skew-symmetric form, and the
//! velocity is projected in the g-weighted inner product after every step.

use std::sync::Arc;

use crate::calculus::{
    conservative_divergence_values, covariant_values, directional_derivative, gradient_values, matrix_divergence,
    strain_from_gradient, vector_gradient,
};
use crate::error::{Error, Result};
use crate::field::{MatrixField, ScalarField, TangentField};
use crate::grid::SurfaceGrid;
use crate::helmholtz::WeightedProjector;
use crate::modal::{gmres, ModalSolver};
use crate::rigid::weighted_killing_space;
use crate::surface::V3;

pub const DEFAULT_CFL: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ImexEuler,
    ImexBdf2,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "imex-euler" => Ok(Scheme::ImexEuler),
            "imex-bdf2" => Ok(Scheme::ImexBdf2),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

pub type ForcingFn = dyn Fn(f64, &SurfaceGrid) -> TangentField + Send + Sync;

#[derive(Clone)]
pub enum Forcing {
    Zero,
    Steady(TangentField),
    Time(Arc<ForcingFn>),
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Steady(_) => write!(f, "Steady"),
            Forcing::Time(_) => write!(f, "Time"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LimitConfig {
    pub g: ScalarField,
    pub nu: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub forcing: Forcing,
    pub v0: TangentField,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// keep every n-th state in the trajectory
    pub output_every: usize,
    /// remove Killing components of f when there is no friction
    pub project_f_kg: bool,
    pub cfl_bound: f64,
    /// admissible |div(g v)| after each step, relative to |v|
    pub div_tol: f64,
}

impl LimitConfig {
    pub fn new(g: ScalarField, v0: TangentField) -> Self {
        LimitConfig {
            g,
            nu: 0.1,
            gamma0: 0.0,
            gamma1: 0.0,
            forcing: Forcing::Zero,
            v0,
            dt: 1e-3,
            t_final: 1.0,
            scheme: Scheme::ImexBdf2,
            output_every: 1,
            project_f_kg: true,
            cfl_bound: DEFAULT_CFL,
            div_tol: 1e-9,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma0 + self.gamma1
    }

    fn validate(&self, grid: &SurfaceGrid) -> Result<()> {
        grid.shape.check(self.g.shape)?;
        grid.shape.check(self.v0.shape)?;
        if let Forcing::Steady(f) = &self.forcing {
            grid.shape.check(f.shape)?;
        }
        let gmin = self.g.min();
        if !(gmin > 0.0) {
            return Err(Error::NonpositiveWeight { min: gmin });
        }
        if !(self.nu > 0.0) || self.gamma0 < 0.0 || self.gamma1 < 0.0 {
            return Err(Error::InvalidInput("need nu > 0 and gamma0, gamma1 >= 0".into()));
        }
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) || self.output_every == 0 {
            return Err(Error::InvalidInput("need dt > 0, t_final >= 0, output_every >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// (g v, v)
    pub energy: f64,
    /// a_g(v, v)
    pub dissipation: f64,
    /// |div(g v)|_{L2}
    pub div_residual: f64,
    /// E_{n+1} - E_n + 2 dt a_g(v, v) - 2 dt (g f, v); zero at t = 0
    pub energy_residual: f64,
    /// (g v, w_k) over a g-orthonormal Killing basis
    pub killing_amps: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LimitState {
    pub t: f64,
    pub step: usize,
    pub v: TangentField,
    pub q: ScalarField,
    pub diagnostics: Diagnostics,
    prev: Option<Vec<V3>>,
    prev_adv: Option<Vec<V3>>,
}

impl LimitState {
    /// (v^n - v^{n-1}) / dt when a previous state is known.
    pub fn time_derivative(&self, dt: f64) -> Option<Vec<V3>> {
        self.prev
            .as_ref()
            .map(|p| self.v.values.iter().zip(p).map(|(a, b)| (a - b) / dt).collect())
    }
}

/// Coefficients of A_g.
#[derive(Clone, Debug)]
struct Viscous {
    g: Vec<f64>,
    grad_g: Vec<V3>,
    nu: f64,
    gamma: f64,
}

impl Viscous {
    fn new(grid: &SurfaceGrid, g: &ScalarField, nu: f64, gamma: f64) -> Self {
        Viscous { g: g.values.clone(), grad_g: gradient_values(grid, &g.values), nu, gamma }
    }

    /// alpha g v + A_g v
    fn apply(&self, grid: &SurfaceGrid, alpha: f64, v: &[V3]) -> Vec<V3> {
        let d = strain_from_gradient(grid, &vector_gradient(grid, v));
        let gd = MatrixField { shape: grid.shape, values: d.values.iter().zip(&self.g).map(|(d, g)| d * *g).collect() };
        let div = matrix_divergence(grid, &gd);
        let nu2 = 2.0 * self.nu;
        grid.points
            .iter()
            .enumerate()
            .map(|i_p| {
                let (i, p) = i_p;
                let gg = self.grad_g[i];
                -nu2 * (p.p * div.values[i]) + gg * (nu2 * gg.dot(&v[i]) / self.g[i]) + v[i] * (self.gamma + alpha * self.g[i])
            })
            .collect()
    }
}

/// Solver for alpha g v + A_g v = r on tangent fields.
struct ImplicitSolver {
    op: Viscous,
    alpha: f64,
    precond: ModalSolver,
    exact: bool,
}

impl ImplicitSolver {
    fn new(grid: &SurfaceGrid, op: &Viscous, g: &ScalarField, alpha: f64) -> Result<Self> {
        let exact = grid.is_axisymmetric(g);
        let avg = if exact { op.clone() } else { Viscous::new(grid, &grid.theta_average(g), op.nu, op.gamma) };
        let precond = ModalSolver::build(grid, 2, |c| grid.to_chart(&avg.apply(grid, alpha, &grid.from_chart(c))))?;
        Ok(ImplicitSolver { op: op.clone(), alpha, precond, exact })
    }

    fn apply_chart(&self, grid: &SurfaceGrid, c: &[f64]) -> Vec<f64> {
        grid.to_chart(&self.op.apply(grid, self.alpha, &grid.from_chart(c)))
    }

    fn solve(&self, grid: &SurfaceGrid, rhs: &[V3]) -> Result<Vec<V3>> {
        let b = grid.to_chart(rhs);
        if b.iter().all(|x| *x == 0.0) {
            return Ok(vec![V3::zeros(); rhs.len()]);
        }
        let x = if self.exact {
            let mut x = self.precond.solve(grid, &b);
            let ax = self.apply_chart(grid, &x);
            let d: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = self.precond.solve(grid, &d);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
            x
        } else {
            let (x, rel, it) = gmres(|x| self.apply_chart(grid, x), |x| self.precond.solve(grid, x), &b, 1e-12, 40, 400);
            if rel > 1e-8 {
                return Err(Error::LinearSolveFailure(format!("implicit solve stalled at {rel:.2e} after {it} iterations")));
            }
            x
        };
        Ok(grid.from_chart(&x))
    }
}

/// a_g(v1, v2).
pub fn form_a_g(grid: &SurfaceGrid, g: &ScalarField, v1: &TangentField, v2: &TangentField, nu: f64, gamma0: f64, gamma1: f64) -> f64 {
    let d1 = strain_from_gradient(grid, &vector_gradient(grid, &v1.values));
    let d2 = strain_from_gradient(grid, &vector_gradient(grid, &v2.values));
    let gg = gradient_values(grid, &g.values);
    let mut visc = 0.0;
    let mut mass = 0.0;
    for i in 0..grid.len() {
        let w = grid.weights[i];
        visc += w * (g.values[i] * d1.values[i].dot(&d2.values[i])
            + v1.values[i].dot(&gg[i]) * v2.values[i].dot(&gg[i]) / g.values[i]);
        mass += w * v1.values[i].dot(&v2.values[i]);
    }
    2.0 * nu * visc + (gamma0 + gamma1) * mass
}

/// b_g(v1, v2, v3) = -(g v1 (x) v2, grad v3).
pub fn form_b_g(grid: &SurfaceGrid, g: &ScalarField, v1: &TangentField, v2: &TangentField, v3: &TangentField) -> f64 {
    let d = directional_derivative(grid, &v3.values, &v1.values);
    -(0..grid.len())
        .map(|i| grid.weights[i] * g.values[i] * v2.values[i].dot(&d[i]))
        .sum::<f64>()
}

/// g P (v . grad) v + div(g v) v / 2.
fn advection(grid: &SurfaceGrid, g: &[f64], v: &[V3]) -> Vec<V3> {
    let cov = covariant_values(grid, v, v);
    let gv: Vec<V3> = v.iter().zip(g).map(|(v, g)| v * *g).collect();
    let div = crate::calculus::divergence_values(grid, &gv);
    (0..v.len()).map(|i| cov[i] * g[i] + v[i] * (0.5 * div[i])).collect()
}

pub struct LimitSolver<'a> {
    grid: &'a SurfaceGrid,
    pub config: LimitConfig,
    visc: Viscous,
    projector: WeightedProjector,
    euler: ImplicitSolver,
    bdf2: Option<ImplicitSolver>,
    /// g-orthonormal Killing fields compatible with g
    pub killing: Vec<Vec<V3>>,
    h: f64,
    /// highest theta mode kept per s-row; None when no row needs filtering
    cutoff: Option<Vec<usize>>,
}

impl<'a> LimitSolver<'a> {
    pub fn new(grid: &'a SurfaceGrid, config: LimitConfig) -> Result<Self> {
        config.validate(grid)?;
        let visc = Viscous::new(grid, &config.g, config.nu, config.gamma());
        let projector = WeightedProjector::new(grid, &config.g)?;
        let euler = ImplicitSolver::new(grid, &visc, &config.g, 1.0 / config.dt)?;
        let bdf2 = match config.scheme {
            Scheme::ImexBdf2 => Some(ImplicitSolver::new(grid, &visc, &config.g, 1.5 / config.dt)?),
            Scheme::ImexEuler => None,
        };
        let space = weighted_killing_space(grid, &visc.grad_g);
        let mut killing: Vec<Vec<V3>> = Vec::new();
        for w in &space.basis {
            let mut f: Vec<V3> = grid.points.iter().map(|p| p.p * w.value(&p.y)).collect();
            for k in &killing {
                let c = weighted_dot(grid, &config.g.values, &f, k);
                f.iter_mut().zip(k).for_each(|(f, k)| *f -= k * c);
            }
            let nrm = weighted_dot(grid, &config.g.values, &f, &f).sqrt();
            if nrm > 0.0 {
                killing.push(f.iter().map(|f| f / nrm).collect());
            }
        }
        let phi_max = grid.points.iter().map(|p| p.phi).fold(0.0, f64::max);
        let h = grid.h.min(phi_max * std::f64::consts::TAU / grid.shape.n_theta as f64);
        let cutoff = pole_cutoff(grid);
        Ok(LimitSolver { grid, config, visc, projector, euler, bdf2, killing, h, cutoff })
    }

    pub fn grid(&self) -> &SurfaceGrid {
        self.grid
    }

    /// Weighted-solenoidal projection of v0, pressure from the initial balance.
    pub fn initial_state(&self) -> Result<LimitState> {
        let (v, _) = self.projector.project(self.grid, &self.config.v0.values)?;
        let v = self.grid.tangent_from_values(v);
        let mut state = LimitState {
            t: 0.0,
            step: 0,
            v,
            q: ScalarField::zeros(self.grid.shape),
            diagnostics: Diagnostics::default(),
            prev: None,
            prev_adv: None,
        };
        state.q = self.pressure_recover(&state)?.q;
        state.diagnostics = self.diagnostics(&state.v, None, 0.0)?;
        Ok(state)
    }

    /// Forcing at time t, with Killing components removed when configured.
    pub fn forcing(&self, t: f64) -> Vec<V3> {
        let f = match &self.config.forcing {
            Forcing::Zero => return vec![V3::zeros(); self.grid.len()],
            Forcing::Steady(f) => f.values.clone(),
            Forcing::Time(f) => f(t, self.grid).values,
        };
        self.project_f_kg(f)
    }

    fn project_f_kg(&self, mut f: Vec<V3>) -> Vec<V3> {
        if self.config.project_f_kg && self.config.gamma() == 0.0 {
            for k in &self.killing {
                let c = weighted_dot(self.grid, &self.config.g.values, &f, k);
                f.iter_mut().zip(k).for_each(|(f, k)| *f -= k * c);
            }
        }
        f
    }

    fn filter(&self, data: &mut [f64], nc: usize) {
        let Some(cut) = &self.cutoff else { return };
        let n_t = self.grid.shape.n_theta;
        let mut spec = self.grid.theta_fft(data, nc);
        for (j, &mc) in cut.iter().enumerate() {
            for c in 0..nc {
                let row = &mut spec[(j * nc + c) * n_t..(j * nc + c + 1) * n_t];
                row[mc + 1..n_t - mc].iter_mut().for_each(|z| *z = num_complex::Complex64::new(0.0, 0.0));
            }
        }
        data.copy_from_slice(&self.grid.theta_ifft(spec, nc));
    }

    fn filter_vectors(&self, v: &mut [V3]) {
        if self.cutoff.is_none() {
            return;
        }
        let mut flat: Vec<f64> = v.iter().flat_map(|x| [x[0], x[1], x[2]]).collect();
        self.filter(&mut flat, 3);
        for (i, x) in v.iter_mut().enumerate() {
            *x = self.grid.points[i].p * V3::new(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
        }
    }

    pub fn cfl(&self, v: &TangentField) -> f64 {
        v.max_norm() * self.config.dt / self.h
    }

    pub fn step(&self, state: &LimitState) -> Result<LimitState> {
        let grid = self.grid;
        let cfg = &self.config;
        let dt = cfg.dt;
        let cfl = self.cfl(&state.v);
        if cfl > cfg.cfl_bound {
            return Err(Error::CflViolation { cfl, bound: cfg.cfl_bound });
        }
        let g = &cfg.g.values;
        let t_new = state.t + dt;
        let f = self.forcing(t_new);
        let adv = advection(grid, g, &state.v.values);
        let gradq = gradient_values(grid, &state.q.values);
        let use_bdf2 = self.bdf2.is_some() && state.prev.is_some();
        let n = grid.len();
        let mut rhs = Vec::with_capacity(n);
        for i in 0..n {
            let gi = g[i];
            let (hist, nonlin) = if use_bdf2 {
                let prev = state.prev.as_ref().unwrap()[i];
                let pa = state.prev_adv.as_ref().unwrap()[i];
                ((state.v.values[i] * 4.0 - prev) * (gi / (2.0 * dt)), adv[i] * 2.0 - pa)
            } else {
                (state.v.values[i] * (gi / dt), adv[i])
            };
            rhs.push(grid.points[i].p * (hist + f[i] * gi - nonlin - gradq[i] * gi));
        }
        let solver = if use_bdf2 { self.bdf2.as_ref().unwrap() } else { &self.euler };
        let mut tilde = solver.solve(grid, &rhs)?;
        self.filter_vectors(&mut tilde);
        let (v, phi) = self.projector.project(grid, &tilde)?;
        let v = grid.tangent_from_values(v);
        let factor = if use_bdf2 { 1.5 / dt } else { 1.0 / dt };
        let q_raw: Vec<f64> = state.q.values.iter().zip(&phi).map(|(q, p)| q + factor * p).collect();
        let mut q = grid.remove_mean(&ScalarField { shape: grid.shape, values: q_raw });
        self.filter(&mut q.values, 1);
        let diagnostics = self.diagnostics(&v, Some((&state.v, state.diagnostics.energy)), t_new)?;
        let vmax = v.max_norm().max(1e-300);
        if diagnostics.div_residual > cfg.div_tol * vmax * grid.area().sqrt() {
            return Err(Error::LinearSolveFailure(format!(
                "projection left div(g v) = {:.2e}",
                diagnostics.div_residual
            )));
        }
        Ok(LimitState {
            t: t_new,
            step: state.step + 1,
            v,
            q,
            diagnostics,
            prev: Some(state.v.values.clone()),
            prev_adv: Some(adv),
        })
    }

    fn diagnostics(&self, v: &TangentField, prev: Option<(&TangentField, f64)>, t: f64) -> Result<Diagnostics> {
        let grid = self.grid;
        let cfg = &self.config;
        let g = &cfg.g.values;
        let energy = weighted_dot(grid, g, &v.values, &v.values);
        let dissipation = form_a_g(grid, &cfg.g, v, v, cfg.nu, cfg.gamma0, cfg.gamma1);
        let gv: Vec<V3> = v.values.iter().zip(g).map(|(v, g)| v * *g).collect();
        let div = conservative_divergence_values(grid, &gv);
        let div_residual = grid.norm_scalar(&ScalarField { shape: grid.shape, values: div });
        let energy_residual = match prev {
            None => 0.0,
            Some((_, e_prev)) => {
                let f = self.forcing(t);
                let work = weighted_dot(grid, g, &f, &v.values);
                energy - e_prev + 2.0 * cfg.dt * dissipation - 2.0 * cfg.dt * work
            }
        };
        Ok(Diagnostics {
            energy,
            dissipation,
            div_residual,
            energy_residual,
            killing_amps: self.killing_mode_monitor(v),
        })
    }

    /// (g v, w_k) for the g-orthonormal Killing basis.
    pub fn killing_mode_monitor(&self, v: &TangentField) -> Vec<f64> {
        self.killing
            .iter()
            .map(|k| weighted_dot(self.grid, &self.config.g.values, &v.values, k))
            .collect()
    }

    /// Pressure from the momentum balance at the state; uses the last time difference if known.
    pub fn pressure_recover(&self, state: &LimitState) -> Result<PressureReport> {
        let grid = self.grid;
        let cfg = &self.config;
        let g = &cfg.g.values;
        let f = self.forcing(state.t);
        let av = self.visc.apply(grid, 0.0, &state.v.values);
        let adv = advection(grid, g, &state.v.values);
        let dvdt = state.time_derivative(cfg.dt);
        let r: Vec<V3> = (0..grid.len())
            .map(|i| {
                let mut r = f[i] * g[i] - av[i] - adv[i];
                if let Some(d) = &dvdt {
                    r -= d[i] * g[i];
                }
                grid.points[i].p * r
            })
            .collect();
        let q = self.projector.potential_of(grid, &r)?;
        let gradq = gradient_values(grid, &q);
        let defect: Vec<V3> = r.iter().zip(&gradq).zip(g).map(|((r, d), g)| r - d * *g).collect();
        let residual = grid.norm_vec(&defect) / grid.norm_vec(&r).max(1e-300);
        Ok(PressureReport { q: ScalarField { shape: grid.shape, values: q }, residual })
    }

    /// Runs to t_final, keeping every `output_every`-th state and all diagnostics.
    pub fn solve(&self) -> Result<Trajectory> {
        let mut state = self.initial_state()?;
        let mut diagnostics = vec![(state.t, state.diagnostics.clone())];
        let mut states = vec![state.clone()];
        let n_steps = (self.config.t_final / self.config.dt).round() as usize;
        for k in 1..=n_steps {
            state = self.step(&state)?;
            diagnostics.push((state.t, state.diagnostics.clone()));
            if k % self.config.output_every == 0 || k == n_steps {
                states.push(state.clone());
            }
        }
        Ok(Trajectory { states, diagnostics })
    }
}

#[derive(Clone, Debug)]
pub struct PressureReport {
    pub q: ScalarField,
    /// |r - g grad q| / |r|
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<LimitState>,
    /// (t, diagnostics) for every step
    pub diagnostics: Vec<(f64, Diagnostics)>,
}

impl Trajectory {
    pub fn last(&self) -> &LimitState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn max_energy_residual(&self) -> f64 {
        self.diagnostics.iter().map(|(_, d)| d.energy_residual.abs()).fold(0.0, f64::max)
    }
}

/// Rows whose circumference cannot carry the full theta resolution keep
/// only the modes they resolve, with a floor that leaves smooth fields intact.
fn pole_cutoff(grid: &SurfaceGrid) -> Option<Vec<usize>> {
    const FLOOR: usize = 8;
    if grid.topology() != crate::profile::Topology::Sphere {
        return None;
    }
    let half = grid.shape.n_theta / 2;
    let phi_max = grid.points.iter().map(|p| p.phi).fold(0.0, f64::max);
    let cut: Vec<usize> = (0..grid.shape.n_s)
        .map(|j| {
            let phi = grid.points[grid.shape.idx(j, 0)].phi;
            ((half as f64 * phi / phi_max).ceil() as usize).clamp(FLOOR.min(half - 1), half - 1)
        })
        .collect();
    Some(cut)
}

fn weighted_dot(grid: &SurfaceGrid, g: &[f64], a: &[V3], b: &[V3]) -> f64 {
    (0..grid.len()).map(|i| grid.weights[i] * g[i] * a[i].dot(&b[i])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Surface;

    fn sphere(n: usize) -> SurfaceGrid {
        SurfaceGrid::new(&Surface::sphere(1.0, n, n).unwrap()).unwrap()
    }

    fn killing(grid: &SurfaceGrid) -> TangentField {
        grid.eval_tangent(|p| V3::new(0.0, 0.0, 1.0).cross(&p.y))
    }

    #[test]
    fn a_g_vanishes_on_killing() {
        let grid = sphere(24);
        let g = ScalarField::constant(grid.shape, 1.0);
        let w = killing(&grid);
        assert!(form_a_g(&grid, &g, &w, &w, 0.3, 0.0, 0.0).abs() < 1e-10);
        let v = grid.eval_tangent(|p| V3::new(p.y[1], 0.3, p.y[0]));
        let gv = grid.eval_scalar(|p| 1.0 + 0.3 * p.y[2]);
        let (ab, ba) = (form_a_g(&grid, &gv, &v, &w, 0.3, 1.0, 0.5), form_a_g(&grid, &gv, &w, &v, 0.3, 1.0, 0.5));
        assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
        assert!(form_a_g(&grid, &gv, &v, &v, 0.3, 0.0, 0.0) >= 0.0);
    }

    #[test]
    fn b_g_vanishes_on_killing() {
        let grid = sphere(24);
        let g = ScalarField::constant(grid.shape, 1.0);
        let w = killing(&grid);
        assert!(form_b_g(&grid, &g, &w, &w, &w).abs() < 1e-10);
    }

    #[test]
    fn operator_is_weak_form() {
        // (A_g v, w) = a_g(v, w) for tangent fields
        let grid = sphere(64);
        let g = grid.eval_scalar(|p| 1.0 + 0.3 * p.y[2]);
        let visc = Viscous::new(&grid, &g, 0.2, 0.7);
        let v = grid.eval_tangent(|p| V3::new(p.y[1] * p.y[2], 0.3, p.y[0]));
        let w = grid.eval_tangent(|p| V3::new(1.0, p.y[0], -p.y[1]));
        let av = visc.apply(&grid, 0.0, &v.values);
        let lhs = grid.dot_vec(&av, &w.values);
        let rhs = form_a_g(&grid, &g, &v, &w, 0.2, 0.7, 0.0);
        assert!((lhs - rhs).abs() < 2e-6 * rhs.abs(), "{lhs} {rhs}");
    }

    #[test]
    fn zero_dynamics() {
        let grid = sphere(12);
        let g = ScalarField::constant(grid.shape, 1.0);
        let mut cfg = LimitConfig::new(g, TangentField::zeros(grid.shape));
        cfg.t_final = 5.0 * cfg.dt;
        let traj = LimitSolver::new(&grid, cfg).unwrap().solve().unwrap();
        for s in &traj.states {
            assert!(s.v.values.iter().all(|v| *v == V3::zeros()));
            assert!(s.q.values.iter().all(|q| *q == 0.0));
        }
    }

    #[test]
    fn killing_state_is_steady() {
        let grid = sphere(16);
        let g = ScalarField::constant(grid.shape, 1.0);
        let w = killing(&grid);
        let mut cfg = LimitConfig::new(g, w.clone());
        cfg.dt = 1e-2;
        cfg.t_final = 0.2;
        let solver = LimitSolver::new(&grid, cfg).unwrap();
        assert_eq!(solver.killing.len(), 3);
        let traj = solver.solve().unwrap();
        let drift = grid.norm(&traj.last().v.sub(&w)) / grid.norm(&w);
        assert!(drift < 1e-6, "{drift}");
        let q = &traj.last().q;
        let exact = grid.remove_mean(&grid.eval_scalar(|p| -0.5 * p.y[2] * p.y[2]));
        let e0 = grid.norm_scalar(&traj.states[0].q.sub(&exact)) / grid.norm_scalar(&exact);
        let e1 = grid.norm_scalar(&q.sub(&exact)) / grid.norm_scalar(&exact);
        assert!(e0 < 1e-4 && e1 < 1e-4, "{e0} {e1}");
    }

    #[test]
    fn pressure_recursion_decays() {
        let grid = sphere(32);
        let g = ScalarField::constant(grid.shape, 1.0);
        let mut cfg = LimitConfig::new(g, TangentField::zeros(grid.shape));
        cfg.scheme = Scheme::ImexEuler;
        let solver = LimitSolver::new(&grid, cfg).unwrap();
        let mut st = solver.initial_state().unwrap();
        st.q = grid.eval_scalar(|p| 1e-6 * ((15.0 * p.theta).cos() + (p.s * 7.0).sin()));
        let start = grid.norm_scalar(&st.q);
        for _ in 0..400 {
            st = solver.step(&st).unwrap();
        }
        assert!(grid.norm_scalar(&st.q) + grid.norm(&st.v) < start);
    }

    #[test]
    fn cfl_violation() {
        let grid = sphere(16);
        let g = ScalarField::constant(grid.shape, 1.0);
        let mut cfg = LimitConfig::new(g, killing(&grid).scale(100.0));
        cfg.dt = 0.1;
        let solver = LimitSolver::new(&grid, cfg).unwrap();
        let s0 = solver.initial_state().unwrap();
        assert!(matches!(solver.step(&s0), Err(Error::CflViolation { .. })));
    }
}
