//! Convergence-in-eps studies for the thin-shell estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{divergence_values, vector_gradient};
use crate::domain::{boundary_frame, AmbientScalar, ThinDomainSpec};
use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField, VectorField};
use crate::grid::SurfaceGrid;
use crate::helmholtz::project_weighted_solenoidal;
use crate::shell::{
    ambient_divergence, ambient_gradient, average_m, average_mtau, constant_extension, impermeable_extension,
    ShellField, ShellGrid, DEFAULT_NR,
};
use crate::surface::{Surface, M3, V3};

pub const DEFAULT_EPS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
/// allowed relative change of the smallest-eps quantity under one refinement step
pub const REFINEMENT_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Estimate {
    /// boundary normal against n - eps grad g_i
    CompN,
    /// pointwise div(E v) against div(g v) / g
    ExTanDiv,
    /// L2 norm of div(E v) for weighted-solenoidal v
    LpEtdSol,
    /// div(g M_tau u) for nearly solenoidal u
    ADivTanLp,
    /// phi minus its averaged extension
    AveDiffDom,
}

impl Estimate {
    pub const ALL: [Estimate; 5] =
        [Estimate::CompN, Estimate::ExTanDiv, Estimate::LpEtdSol, Estimate::ADivTanLp, Estimate::AveDiffDom];

    pub fn id(self) -> &'static str {
        match self {
            Estimate::CompN => "comp_n",
            Estimate::ExTanDiv => "extan_div",
            Estimate::LpEtdSol => "lp_etd_sol",
            Estimate::ADivTanLp => "adiv_tan_lp",
            Estimate::AveDiffDom => "ave_diff_dom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Estimate::ALL
            .into_iter()
            .find(|e| e.id() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown estimate '{s}'")))
    }

    /// Expected log-log slope of quantity / reference.
    pub fn predicted_slope(self) -> f64 {
        match self {
            Estimate::CompN => 2.0,
            Estimate::ExTanDiv | Estimate::AveDiffDom => 1.0,
            Estimate::LpEtdSol => 1.5,
            Estimate::ADivTanLp => 0.5,
        }
    }

    /// ADivTanLp is a one-sided bound; the others are two-sided orders.
    pub fn is_lower_bound(self) -> bool {
        self == Estimate::ADivTanLp
    }
}

/// c + A x + B (x * x) + d sin(k . x), coefficients drawn from a seed.
#[derive(Clone, Debug)]
pub struct RandomField {
    c: V3,
    a: M3,
    b: M3,
    d: V3,
    k: V3,
}

impl RandomField {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = || V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let c = v();
        let a = M3::from_columns(&[v(), v(), v()]);
        let b = M3::from_columns(&[v(), v(), v()]) * 0.5;
        let d = v() * 0.5;
        let k = v() * 2.0;
        RandomField { c, a, b, d, k }
    }

    pub fn value(&self, x: &V3) -> V3 {
        self.c + self.a * x + self.b * x.component_mul(x) + self.d * self.k.dot(x).sin()
    }

    pub fn gradient(&self, x: &V3) -> M3 {
        // rows are derivative directions
        let mut m = self.a.transpose();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += 2.0 * self.b[(j, i)] * x[i];
            }
        }
        m + self.k * self.d.transpose() * self.k.dot(x).cos()
    }

    pub fn tangent(&self, grid: &SurfaceGrid) -> TangentField {
        grid.eval_tangent(|p| self.value(&p.y))
    }

    pub fn vector(&self, grid: &SurfaceGrid) -> VectorField {
        grid.eval_vector(|p| self.value(&p.y))
    }

    /// Scalar ambient function x -> first component.
    pub fn scalar(&self, x: &V3) -> f64 {
        self.value(x)[0]
    }

    pub fn scalar_gradient(&self, x: &V3) -> V3 {
        self.gradient(x).column(0).into()
    }
}

#[derive(Clone, Debug)]
pub struct RateConfig {
    pub estimate: Estimate,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub n_r: usize,
    pub g0: AmbientScalar,
    pub g1: AmbientScalar,
}

impl RateConfig {
    pub fn new(estimate: Estimate) -> Self {
        RateConfig {
            estimate,
            eps: DEFAULT_EPS.to_vec(),
            seed: 7,
            n_r: DEFAULT_NR,
            g0: AmbientScalar::Constant(0.0),
            g1: AmbientScalar::Affine { c: 1.0, a: V3::new(0.0, 0.0, 0.2) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRow {
    pub eps: f64,
    pub quantity: f64,
    pub reference: f64,
    /// |div u|_{L2} of the test field, ADivTanLp only
    pub solenoidality: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RateStudy {
    pub estimate: Estimate,
    pub rows: Vec<RateRow>,
    pub slope: f64,
    pub prefactor: f64,
    /// relative change of the smallest-eps quantity under refinement
    pub refinement_change: Option<f64>,
}

impl RateStudy {
    pub fn within(&self, band: f64) -> bool {
        let p = self.estimate.predicted_slope();
        if self.estimate.is_lower_bound() {
            self.slope >= p - band
        } else {
            (self.slope - p).abs() <= band
        }
    }
}

pub fn validate_eps(eps: &[f64]) -> Result<()> {
    if eps.len() < 4 {
        return Err(Error::InvalidEpsilonList(format!("need at least 4 values, got {}", eps.len())));
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidEpsilonList("values must lie in (0, 1)".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidEpsilonList("values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Least-squares fit of log y = log c + p log x; returns (p, c).
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let p = sxy / sxx;
    (p, (my - p * mx).exp())
}

/// Runs the study on a fixed grid.
pub fn epsilon_rate_study(grid: &SurfaceGrid, cfg: &RateConfig) -> Result<RateStudy> {
    validate_eps(&cfg.eps)?;
    let base = ThinDomainSpec::from_ambient(grid, &cfg.g0, &cfg.g1, cfg.eps[0])?;
    let mut rows = Vec::with_capacity(cfg.eps.len());
    for &eps in &cfg.eps {
        let spec = base.with_eps(grid, eps)?;
        let sg = ShellGrid::new(grid, &spec, cfg.n_r)?;
        rows.push(measure(grid, &sg, cfg)?);
        log::debug!("{} eps={eps}: {:?}", cfg.estimate.id(), rows.last());
    }
    let x: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.quantity / r.reference).collect();
    let (slope, prefactor) = fit_slope(&x, &y);
    Ok(RateStudy { estimate: cfg.estimate, rows, slope, prefactor, refinement_change: None })
}

/// Runs the study at the surface resolution, then repeats the smallest eps on a grid
/// refined by 1.5 and fails if the quantity moves by more than `REFINEMENT_TOL`.
pub fn epsilon_rate_study_checked(surface: &Surface, cfg: &RateConfig) -> Result<RateStudy> {
    let grid = SurfaceGrid::new(surface)?;
    let mut study = epsilon_rate_study(&grid, cfg)?;
    let even = |n: usize| (3 * n / 2 + 1) & !1;
    let fine = SurfaceGrid::new(&surface.with_resolution(even(surface.n_s), even(surface.n_theta))?)?;
    let eps = *cfg.eps.last().unwrap();
    let spec = ThinDomainSpec::from_ambient(&fine, &cfg.g0, &cfg.g1, eps)?;
    let row = measure(&fine, &ShellGrid::new(&fine, &spec, cfg.n_r)?, cfg)?;
    let coarse = study.rows.last().unwrap();
    let change = ((row.quantity / row.reference) - (coarse.quantity / coarse.reference)).abs()
        / (coarse.quantity / coarse.reference);
    study.refinement_change = Some(change);
    if change > REFINEMENT_TOL {
        return Err(Error::UnderResolved { change, tol: REFINEMENT_TOL });
    }
    Ok(study)
}

fn measure(grid: &SurfaceGrid, sg: &ShellGrid, cfg: &RateConfig) -> Result<RateRow> {
    let eps = sg.eps();
    let field = RandomField::from_seed(cfg.seed);
    let g = sg.spec.g();
    let row = |quantity, reference| RateRow { eps, quantity, reference, solenoidality: None };
    match cfg.estimate {
        Estimate::CompN => {
            let mut worst = 0.0f64;
            for (node, p) in grid.points.iter().enumerate() {
                for i in 0..2 {
                    let frame = boundary_frame(&sg.spec, grid, node, i)?;
                    let sign = if i == 0 { -1.0 } else { 1.0 };
                    let approx = (p.n - sg.spec.grad_g_i(i).values[node] * eps) * sign;
                    worst = worst.max((frame.normal - approx).norm());
                }
            }
            Ok(row(worst, 1.0))
        }
        Estimate::ExTanDiv => {
            let v = field.tangent(grid);
            let div = ambient_divergence(sg, grid, &impermeable_extension(sg, grid, &v))?;
            let gv: Vec<V3> = v.values.iter().zip(&g.values).map(|(v, g)| v * *g).collect();
            let target: Vec<f64> = divergence_values(grid, &gv).iter().zip(&g.values).map(|(d, g)| d / g).collect();
            let ext = constant_extension(sg, &target);
            let worst = div.values.iter().zip(&ext.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let dv = vector_gradient(grid, &v.values);
            let reference = v.max_norm() + dv.max_norm();
            Ok(row(worst, reference))
        }
        Estimate::LpEtdSol => {
            let v = solenoidal(grid, &g, &field)?;
            let div = ambient_divergence(sg, grid, &impermeable_extension(sg, grid, &v))?;
            Ok(row(sg.norm(grid, &div), h1_norm(grid, &v)))
        }
        Estimate::ADivTanLp => {
            let v = solenoidal(grid, &g, &field)?;
            let z = RandomField::from_seed(cfg.seed.wrapping_add(1)).tangent(grid);
            let mut u = impermeable_extension(sg, grid, &v);
            for (node, chunk) in u.values.chunks_mut(sg.n_r).enumerate() {
                for (k, val) in chunk.iter_mut().enumerate() {
                    let x = sg.xi[k];
                    *val += z.values[node] * (4.0 * eps * eps * x * (1.0 - x));
                }
            }
            let mu = average_mtau(grid, sg, &u);
            let gmu: Vec<V3> = mu.values.iter().zip(&g.values).map(|(v, g)| v * *g).collect();
            let div = ScalarField { shape: grid.shape, values: divergence_values(grid, &gmu) };
            let mut grad_sq = 0.0;
            for c in 0..3 {
                let comp = ShellField { n_r: u.n_r, values: u.values.iter().map(|v| v[c]).collect() };
                grad_sq += sg.norm(grid, &ambient_gradient(sg, grid, &comp)?).powi(2);
            }
            let reference = (sg.norm(grid, &u).powi(2) + grad_sq).sqrt();
            let sol = sg.norm(grid, &ambient_divergence(sg, grid, &u)?);
            Ok(RateRow { eps, quantity: grid.norm_scalar(&div), reference, solenoidality: Some(sol) })
        }
        Estimate::AveDiffDom => {
            let phi = sg.sample_ambient(grid, |x| field.scalar(x));
            let m = average_m(sg, &phi);
            let diff = phi.zip_with(&constant_extension(sg, &m), |a, b| a - b);
            let dn = sg.sample(grid, |p, r| p.n.dot(&field.scalar_gradient(&(p.y + p.n * r))));
            Ok(row(sg.norm(grid, &diff), sg.norm(grid, &dn)))
        }
    }
}

fn solenoidal(grid: &SurfaceGrid, g: &ScalarField, field: &RandomField) -> Result<TangentField> {
    let dec = project_weighted_solenoidal(grid, g, &field.tangent(grid))?;
    Ok(dec.solenoidal_tangent(grid))
}

fn h1_norm(grid: &SurfaceGrid, v: &TangentField) -> f64 {
    (grid.norm(v).powi(2) + grid.norm_matrix(&vector_gradient(grid, &v.values)).powi(2)).sqrt()
}
