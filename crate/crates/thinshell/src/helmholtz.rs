//! Surface Poisson solvers and Helmholtz-Leray decompositions.

use std::sync::Arc;

use log::warn;

use crate::calculus::{conservative_divergence_values as divergence_values, gradient_values};
use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField, VectorField};
use crate::grid::SurfaceGrid;
use crate::modal::{gmres, ModalSolver};
use crate::surface::V3;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct PoissonSolveReport {
    pub q: ScalarField,
    /// relative residual of the discrete equation
    pub residual: f64,
    pub iterations: usize,
    pub mean: f64,
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub solenoidal: VectorField,
    /// the part removed from the input, so input = solenoidal + gradient_part
    pub gradient_part: VectorField,
    pub potential: ScalarField,
    pub orthogonality_residual: f64,
    /// L2 norm of the remaining divergence (or H^-1 proxy for the general variant)
    pub divergence_residual: f64,
}

impl DecompositionResult {
    pub fn solenoidal_tangent(&self, grid: &SurfaceGrid) -> TangentField {
        grid.tangent(&self.solenoidal)
    }
}

/// q -> -div(a grad q) + c q.
pub fn elliptic_apply(grid: &SurfaceGrid, a: &[f64], c: Option<&[f64]>, q: &[f64]) -> Vec<f64> {
    let mut gq = gradient_values(grid, q);
    gq.iter_mut().zip(a).for_each(|(v, a)| *v *= *a);
    let mut out = divergence_values(grid, &gq);
    out.iter_mut().for_each(|v| *v = -*v);
    if let Some(c) = c {
        out.iter_mut().zip(c.iter().zip(q)).for_each(|(o, (c, q))| *o += c * q);
    }
    out
}

/// Solver for -div(a grad q) + c q = f with positive a and c >= 0.
pub struct EllipticSolver {
    a: ScalarField,
    c: Option<ScalarField>,
    precond: Arc<ModalSolver>,
    exact: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl EllipticSolver {
    pub fn new(grid: &SurfaceGrid, a: &ScalarField, c: Option<&ScalarField>) -> Result<Self> {
        grid.shape.check(a.shape)?;
        let amin = a.min();
        if !(amin > 0.0) {
            return Err(Error::NonpositiveWeight { min: amin });
        }
        let exact = grid.is_axisymmetric(a) && c.is_none_or(|c| grid.is_axisymmetric(c));
        let unit = a.values.iter().all(|&v| v == 1.0) && c.is_none();
        let precond = if unit {
            laplacian_solver(grid)?
        } else {
            let am = grid.theta_average(a);
            let cm = c.map(|c| grid.theta_average(c));
            Arc::new(ModalSolver::build(grid, 1, |q| {
                elliptic_apply(grid, &am.values, cm.as_ref().map(|c| c.values.as_slice()), q)
            })?)
        };
        Ok(EllipticSolver {
            a: a.clone(),
            c: c.cloned(),
            precond,
            exact,
            tol: DEFAULT_TOL,
            max_iter: 10 * grid.shape.n_s.max(grid.shape.n_theta),
        })
    }

    pub fn apply(&self, grid: &SurfaceGrid, q: &[f64]) -> Vec<f64> {
        elliptic_apply(grid, &self.a.values, self.c.as_ref().map(|c| c.values.as_slice()), q)
    }

    /// Least-squares solution; returns (q, relative residual, iterations).
    pub fn solve(&self, grid: &SurfaceGrid, f: &[f64]) -> Result<(Vec<f64>, f64, usize)> {
        let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if fnorm == 0.0 {
            return Ok((vec![0.0; f.len()], 0.0, 0));
        }
        if self.exact {
            let mut q = self.precond.solve(grid, f);
            // one step of iterative refinement against roundoff in the factors
            let lq = self.apply(grid, &q);
            let d: Vec<f64> = f.iter().zip(&lq).map(|(f, l)| f - l).collect();
            let dq = self.precond.solve(grid, &d);
            q.iter_mut().zip(&dq).for_each(|(q, d)| *q += d);
            let r = residual(&self.apply(grid, &q), f);
            return Ok((q, r, 2));
        }
        let (q, _, it) = gmres(
            |x| self.apply(grid, x),
            |x| self.precond.solve(grid, x),
            f,
            self.tol,
            60,
            self.max_iter,
        );
        let r = residual(&self.apply(grid, &q), f);
        // the iteration stops at the consistency floor of the singular operator;
        // compare with the floor of the exact modal solve of the averaged problem
        if r > 1e-6 {
            return Err(Error::NoConvergence { max_iter: self.max_iter, residual: r });
        }
        Ok((q, r, it))
    }

    pub fn is_singular(&self) -> bool {
        self.c.is_none()
    }
}

fn residual(lq: &[f64], f: &[f64]) -> f64 {
    let num: f64 = lq.iter().zip(f).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = f.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Cached modal inverse of -Delta_G.
pub fn laplacian_solver(grid: &SurfaceGrid) -> Result<Arc<ModalSolver>> {
    if let Some(s) = grid.laplacian.get() {
        return Ok(s.clone());
    }
    let ones = vec![1.0; grid.len()];
    let s = Arc::new(ModalSolver::build(grid, 1, |q| elliptic_apply(grid, &ones, None, q))?);
    Ok(grid.laplacian.get_or_init(|| s).clone())
}

fn compatible(grid: &SurfaceGrid, eta: &ScalarField) -> ScalarField {
    let total = grid.integrate_values(&eta.values);
    let l1: f64 = eta.values.iter().zip(&grid.weights).map(|(v, w)| v.abs() * w).sum();
    if total.abs() > 1e-10 * l1 {
        warn!("right-hand side has nonzero mean {total:.3e}; subtracting it");
    }
    grid.remove_mean(eta)
}

fn mean_zero_report(grid: &SurfaceGrid, q: Vec<f64>, residual: f64, iterations: usize) -> PoissonSolveReport {
    let q = grid.remove_mean(&ScalarField { shape: grid.shape, values: q });
    let mean = grid.mean(&q);
    PoissonSolveReport { q, residual, iterations, mean }
}

/// -Delta_G q = eta with mean-zero q.
pub fn poisson_solve(grid: &SurfaceGrid, eta: &ScalarField) -> Result<PoissonSolveReport> {
    grid.shape.check(eta.shape)?;
    let f = compatible(grid, eta);
    let solver = EllipticSolver::new(grid, &ScalarField::constant(grid.shape, 1.0), None)?;
    let (q, r, it) = solver.solve(grid, &f.values)?;
    Ok(mean_zero_report(grid, q, r, it))
}

/// -div_G(g grad_G q) = xi with mean-zero q.
pub fn weighted_poisson_solve(grid: &SurfaceGrid, g: &ScalarField, xi: &ScalarField) -> Result<PoissonSolveReport> {
    grid.shape.check(xi.shape)?;
    let f = compatible(grid, xi);
    let solver = EllipticSolver::new(grid, g, None)?;
    let (q, r, it) = solver.solve(grid, &f.values)?;
    Ok(mean_zero_report(grid, q, r, it))
}

/// H^-1 proxy |grad (-Delta)^+ eta|.
pub fn h_minus_one_proxy(grid: &SurfaceGrid, eta: &ScalarField) -> Result<f64> {
    let f = grid.remove_mean(eta);
    let q = laplacian_solver(grid)?.solve(grid, &f.values);
    Ok(grid.norm_vec(&gradient_values(grid, &q)))
}

fn check_weight(g: &ScalarField) -> Result<()> {
    let m = g.min();
    if !(m > 0.0) {
        return Err(Error::NonpositiveWeight { min: m });
    }
    Ok(())
}

/// P_g v = v - g^{-1} grad q with -Delta q = -div(g v).
pub fn project_weighted_solenoidal(grid: &SurfaceGrid, g: &ScalarField, v: &TangentField) -> Result<DecompositionResult> {
    grid.shape.check(g.shape)?;
    grid.shape.check(v.shape)?;
    check_weight(g)?;
    let gv: Vec<V3> = v.values.iter().zip(&g.values).map(|(v, g)| v * *g).collect();
    let mut rhs = divergence_values(grid, &gv);
    rhs.iter_mut().for_each(|x| *x = -*x);
    let rhs = grid.remove_mean(&ScalarField { shape: grid.shape, values: rhs });
    let unit = EllipticSolver::new(grid, &ScalarField::constant(grid.shape, 1.0), None)?;
    let (q, _, _) = unit.solve(grid, &rhs.values)?;
    let q = grid.remove_mean(&ScalarField { shape: grid.shape, values: q });
    let grad = gradient_values(grid, &q.values);
    let gradient_part: Vec<V3> = grad.iter().zip(&g.values).map(|(d, g)| d / *g).collect();
    let sol: Vec<V3> = v.values.iter().zip(&gradient_part).map(|(v, d)| v - d).collect();
    let gsol: Vec<V3> = sol.iter().zip(&g.values).map(|(v, g)| v * *g).collect();
    let div = divergence_values(grid, &gsol);
    let div_res = grid.norm_scalar(&ScalarField { shape: grid.shape, values: div.clone() });
    // (P_g v, g grad xi) = -(div(g P_g v), xi); its sup over unit grad xi is the H^-1 proxy
    let orth = h_minus_one_proxy(grid, &ScalarField { shape: grid.shape, values: div })?;
    Ok(DecompositionResult {
        solenoidal: VectorField { shape: grid.shape, values: sol },
        gradient_part: VectorField { shape: grid.shape, values: gradient_part },
        potential: q,
        orthogonality_residual: orth,
        divergence_residual: div_res,
    })
}

/// v = v_sigma + grad q + q H n with q from the least-squares normal equations.
pub fn decompose_general(grid: &SurfaceGrid, v: &VectorField) -> Result<DecompositionResult> {
    decompose_general_weighted(grid, &ScalarField::constant(grid.shape, 1.0), v)
}

/// v = v_g + g (grad q + q H n), v_g orthogonal to g (grad xi + xi H n).
pub fn decompose_general_weighted(grid: &SurfaceGrid, g: &ScalarField, v: &VectorField) -> Result<DecompositionResult> {
    grid.shape.check(g.shape)?;
    grid.shape.check(v.shape)?;
    check_weight(g)?;
    let g2 = g.map(|x| x * x);
    let c = ScalarField {
        shape: grid.shape,
        values: grid.points.iter().zip(&g2.values).map(|(p, g2)| g2 * p.h * p.h).collect(),
    };
    let pgv: Vec<V3> = v
        .values
        .iter()
        .zip(&grid.points)
        .zip(&g.values)
        .map(|((v, p), g)| p.p * v * *g)
        .collect();
    let mut rhs = divergence_values(grid, &pgv);
    for (i, r) in rhs.iter_mut().enumerate() {
        let p = &grid.points[i];
        *r = -*r + g.values[i] * p.h * p.n.dot(&v.values[i]);
    }
    let h_range = grid.points.iter().fold(0.0f64, |a, p| a.max(p.h.abs()));
    let h_min = grid.points.iter().fold(f64::INFINITY, |a, p| a.min(p.h.abs()));
    if h_min < 1e-3 * h_range.max(1e-300) {
        log::info!("general decomposition: mean curvature nearly vanishes somewhere (min |H| = {h_min:.2e})");
    }
    let solver = EllipticSolver::new(grid, &g2, Some(&c))?;
    let (q, _, _) = solver.solve(grid, &rhs)?;
    let q = ScalarField { shape: grid.shape, values: q };
    let grad = gradient_values(grid, &q.values);
    let part: Vec<V3> = grid
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (grad[i] + p.n * (q.values[i] * p.h)) * g.values[i])
        .collect();
    let sol: Vec<V3> = v.values.iter().zip(&part).map(|(v, d)| v - d).collect();
    // residual of the normal equations = the defect of orthogonality, tested by q itself
    let ortho = normal_equation_residual(grid, g, &sol);
    Ok(DecompositionResult {
        solenoidal: VectorField { shape: grid.shape, values: sol },
        gradient_part: VectorField { shape: grid.shape, values: part },
        potential: q,
        orthogonality_residual: ortho,
        divergence_residual: ortho,
    })
}

/// Strong-form defect -div_G(P g w) + g H n.w, the density of (w, g(grad xi + xi H n)).
pub fn normal_equation_defect(grid: &SurfaceGrid, g: &ScalarField, w: &[V3]) -> Vec<f64> {
    let pgw: Vec<V3> = w
        .iter()
        .zip(&grid.points)
        .zip(&g.values)
        .map(|((w, p), g)| p.p * w * *g)
        .collect();
    let mut d = divergence_values(grid, &pgw);
    for (i, r) in d.iter_mut().enumerate() {
        let p = &grid.points[i];
        *r = -*r + g.values[i] * p.h * p.n.dot(&w[i]);
    }
    d
}

fn normal_equation_residual(grid: &SurfaceGrid, g: &ScalarField, w: &[V3]) -> f64 {
    let d = normal_equation_defect(grid, g, w);
    let scale = grid.norm_vec(w).max(1e-300);
    grid.norm_scalar(&ScalarField { shape: grid.shape, values: d }) / scale
}

/// Projection onto weighted-solenoidal fields orthogonal in (g u, w):
/// v - grad phi with div(g grad phi) = div(g v).
pub struct WeightedProjector {
    g: ScalarField,
    solver: EllipticSolver,
}

impl WeightedProjector {
    pub fn new(grid: &SurfaceGrid, g: &ScalarField) -> Result<Self> {
        Ok(WeightedProjector { g: g.clone(), solver: EllipticSolver::new(grid, g, None)? })
    }

    /// Returns (projected field, phi).
    pub fn project(&self, grid: &SurfaceGrid, v: &[V3]) -> Result<(Vec<V3>, Vec<f64>)> {
        let gv: Vec<V3> = v.iter().zip(&self.g.values).map(|(v, g)| v * *g).collect();
        let mut rhs = divergence_values(grid, &gv);
        rhs.iter_mut().for_each(|x| *x = -*x);
        let rhs = grid.remove_mean(&ScalarField { shape: grid.shape, values: rhs });
        let (phi, _, _) = self.solver.solve(grid, &rhs.values)?;
        let phi = grid.remove_mean(&ScalarField { shape: grid.shape, values: phi }).values;
        let grad = gradient_values(grid, &phi);
        Ok((v.iter().zip(&grad).map(|(v, d)| v - d).collect(), phi))
    }

    /// Mean-zero solution of -div(g grad q) = -div(r).
    pub fn potential_of(&self, grid: &SurfaceGrid, r: &[V3]) -> Result<Vec<f64>> {
        let mut rhs = divergence_values(grid, r);
        rhs.iter_mut().for_each(|x| *x = -*x);
        let rhs = grid.remove_mean(&ScalarField { shape: grid.shape, values: rhs });
        let (q, _, _) = self.solver.solve(grid, &rhs.values)?;
        Ok(grid.remove_mean(&ScalarField { shape: grid.shape, values: q }).values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Surface;

    fn sphere(n: usize) -> SurfaceGrid {
        SurfaceGrid::new(&Surface::sphere(1.0, n, n).unwrap()).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = sphere(16);
        let r = poisson_solve(&g, &ScalarField::zeros(g.shape)).unwrap();
        assert!(r.q.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn degree_one_eigenfunction() {
        let g = sphere(48);
        let eta = g.eval_scalar(|p| 2.0 * p.y[2]);
        let r = poisson_solve(&g, &eta).unwrap();
        let exact = g.eval_scalar(|p| p.y[2]);
        let err = g.norm_scalar(&r.q.sub(&exact)) / g.norm_scalar(&exact);
        assert!(err < 1e-7, "{err}");
        assert!(r.mean.abs() < 1e-14);
    }

    #[test]
    fn constant_weight_halves_solution() {
        let g = sphere(24);
        let eta = g.eval_scalar(|p| 6.0 * (p.y[2] * p.y[2] - 1.0 / 3.0));
        let a = poisson_solve(&g, &eta).unwrap();
        let b = weighted_poisson_solve(&g, &ScalarField::constant(g.shape, 2.0), &eta).unwrap();
        let err = a.q.scale(0.5).sub(&b.q).max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn killing_field_is_fixed_by_projection() {
        let g = sphere(32);
        let v = g.eval_tangent(|p| V3::z().cross(&p.y));
        let res = project_weighted_solenoidal(&g, &ScalarField::constant(g.shape, 1.0), &v).unwrap();
        let diff = res.solenoidal.values.iter().zip(&v.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }
}
