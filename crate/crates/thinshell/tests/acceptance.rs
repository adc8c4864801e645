//! Acceptance suite: one pass/fail line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use thinshell::calculus::vector_gradient;
use thinshell::domain::{AmbientScalar, ThinDomainSpec};
use thinshell::helmholtz::{decompose_general, poisson_solve, project_weighted_solenoidal, DEFAULT_TOL};
use thinshell::identities::{algebraic_residuals, differential_order_studies, revolution_curvature_residual};
use thinshell::limit::{LimitConfig, LimitSolver, Scheme};
use thinshell::rates::{epsilon_rate_study_checked, Estimate, RandomField, RateConfig};
use thinshell::rigid::{killing_eigen_check, rigid_field_scan, RigidField};
use thinshell::shell::{
    average_m, average_mtau, boundary_impermeability, constant_extension, impermeable_extension, ShellGrid, DEFAULT_NR,
};
use thinshell::{Result, ScalarField, Surface, SurfaceGrid, TangentField, V3};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn grid(surface: Surface) -> Result<SurfaceGrid> {
    SurfaceGrid::new(&surface)
}

fn presets(n: usize) -> Result<Vec<(&'static str, Surface)>> {
    Ok(vec![("sphere", Surface::sphere(1.0, n, n)?), ("torus", Surface::torus(3.0, 1.0, n, n)?)])
}

fn algebraic_suite() -> Result<Outcome> {
    let mut pass = true;
    let mut worst = Vec::new();
    for (name, s) in presets(128)? {
        let r = algebraic_residuals(&grid(s)?);
        let mut m = 0.0f64;
        for (id, v) in r.entries() {
            let tol = if id == "unit_sphere_w_plus_p" { 1e-12 } else { 1e-11 };
            pass &= v <= tol;
            m = m.max(v);
        }
        worst.push(format!("{name} max {m:.1e}"));
    }
    outcome(pass, worst.join(", "))
}

fn differentiation_order_suite() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, s) in presets(64)? {
        let studies = differential_order_studies(&s, &[64, 128, 256])?;
        let min = studies.iter().map(|(_, st)| st.order).fold(f64::INFINITY, f64::min);
        pass &= min >= 3.0;
        parts.push(format!("{name} min slope {min:.2}"));
    }
    outcome(pass, parts.join(", "))
}

fn h1_norm(grid: &SurfaceGrid, v: &TangentField) -> f64 {
    let d = vector_gradient(grid, &v.values);
    (grid.norm(v).powi(2) + grid.norm_matrix(&d).powi(2)).sqrt()
}

fn helmholtz_suite() -> Result<Outcome> {
    let g = grid(Surface::sphere(1.0, 128, 128)?)?;
    let eta = g.eval_scalar(|p| 2.0 * p.y[2]);
    let exact = g.eval_scalar(|p| p.y[2]);
    let q = poisson_solve(&g, &eta)?.q;
    let eig = g.norm_scalar(&q.sub(&exact)) / g.norm_scalar(&exact);

    let w = g.eval_scalar(|p| 1.0 + 0.3 * p.y[2]);
    let (mut idem, mut div) = (0.0f64, 0.0f64);
    for seed in 0..10 {
        let v = RandomField::from_seed(seed).tangent(&g);
        let pv = project_weighted_solenoidal(&g, &w, &v)?;
        let pv_t = pv.solenoidal_tangent(&g);
        let ppv = project_weighted_solenoidal(&g, &w, &pv_t)?.solenoidal_tangent(&g);
        idem = idem.max(g.norm(&ppv.sub(&pv_t)) / g.norm(&v));
        div = div.max(pv.divergence_residual / h1_norm(&g, &v));
    }

    let v = RandomField::from_seed(11).vector(&g);
    let d = decompose_general(&g, &v)?;
    let back: Vec<V3> = d.solenoidal.values.iter().zip(&d.gradient_part.values).map(|(a, b)| a + b).collect();
    let diff: Vec<V3> = back.iter().zip(&v.values).map(|(a, b)| a - b).collect();
    let again = decompose_general(&g, &d.solenoidal)?;
    let roundtrip = (g.norm_vec(&diff) / g.norm_vec(&v.values))
        .max(g.norm_vec(&again.gradient_part.values) / g.norm_vec(&v.values));

    let pass = eig <= 1e-8 && idem <= 2.0 * DEFAULT_TOL && div <= 1e-8 && roundtrip <= 1e-9;
    outcome(
        pass,
        format!("eigen {eig:.1e}, idempotency {idem:.1e}, div/H1 {div:.1e}, round-trip {roundtrip:.1e}"),
    )
}

fn shell_identity_suite() -> Result<Outcome> {
    let g = grid(Surface::sphere(1.0, 32, 32)?)?;
    let spec = ThinDomainSpec::from_ambient(
        &g,
        &AmbientScalar::Constant(0.0),
        &AmbientScalar::Affine { c: 1.0, a: V3::new(0.0, 0.0, 0.2) },
        0.05,
    )?;
    let sg = ShellGrid::new(&g, &spec, DEFAULT_NR)?;
    let eta = g.eval_scalar(|p| (p.y[0] + 2.0 * p.y[2]).sin());
    let back = average_m(&sg, &constant_extension(&sg, &eta.values));
    let ext = back.iter().zip(&eta.values).fold(0.0f64, |a, (b, e)| a.max((b - e).abs())) / eta.max_abs();
    let (mut avg, mut imp) = (0.0f64, 0.0f64);
    for seed in 0..5 {
        let v = RandomField::from_seed(seed).tangent(&g);
        let mv = average_mtau(&g, &sg, &impermeable_extension(&sg, &g, &v));
        avg = avg.max(mv.sub(&v).max_norm() / v.max_norm());
        imp = imp.max(boundary_impermeability(&sg, &g, &v)?);
    }
    let pass = ext <= 1e-12 && avg <= 1e-12 && imp <= 1e-12;
    outcome(pass, format!("M ext {ext:.1e}, M_tau E {avg:.1e}, impermeability {imp:.1e}"))
}

fn rate_suite() -> Result<Outcome> {
    let s = Surface::sphere(1.0, 64, 64)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for e in [Estimate::CompN, Estimate::ExTanDiv, Estimate::LpEtdSol, Estimate::AveDiffDom] {
        let study = epsilon_rate_study_checked(&s, &RateConfig::new(e))?;
        pass &= study.within(0.2);
        parts.push(format!("{} {:.2}", e.id(), study.slope));
    }
    outcome(pass, parts.join(", "))
}

fn solver_suite() -> Result<Outcome> {
    let g = grid(Surface::sphere(1.0, 32, 32)?)?;
    let one = ScalarField::constant(g.shape, 1.0);
    let v0 = g.eval_tangent(|p| V3::z().cross(&p.y));
    let solver = LimitSolver::new(&g, LimitConfig::new(one.clone(), v0.clone()))?;
    let traj = solver.solve()?;
    let drift = traj.states.iter().map(|s| g.norm(&s.v.sub(&v0))).fold(0.0, f64::max) / g.norm(&v0);
    let q = g.remove_mean(&solver.pressure_recover(traj.last())?.q);
    let q_exact = g.remove_mean(&g.eval_scalar(|p| -0.5 * p.y[2] * p.y[2]));
    let q_err = g.norm_scalar(&q.sub(&q_exact)) / g.norm_scalar(&q_exact);

    let random = RandomField::from_seed(3).tangent(&g);
    let mut cfg = LimitConfig::new(one.clone(), random.clone());
    cfg.gamma0 = 1.0;
    cfg.gamma1 = 1.0;
    let traj = LimitSolver::new(&g, cfg)?.solve()?;
    let e: Vec<f64> = traj.diagnostics.iter().map(|(_, d)| d.energy).collect();
    let monotone = e.windows(2).all(|w| w[1] <= w[0]);
    let decay = e[e.len() - 1] / e[0];

    let mut res = Vec::new();
    for dt in [4e-3, 2e-3, 1e-3] {
        let mut cfg = LimitConfig::new(one.clone(), random.clone());
        cfg.gamma0 = 1.0;
        cfg.gamma1 = 1.0;
        cfg.dt = dt;
        cfg.t_final = 0.2;
        cfg.scheme = Scheme::ImexEuler;
        res.push(LimitSolver::new(&g, cfg)?.solve()?.max_energy_residual());
    }
    let halves = res.windows(2).all(|w| w[1] <= 0.55 * w[0]);

    let pass = drift <= 1e-3 && q_err <= 1e-3 && monotone && decay < 1.2 * (-1.0f64).exp() && halves;
    outcome(
        pass,
        format!(
            "killing drift {drift:.1e}, pressure {q_err:.1e}, monotone {monotone}, E(T)/E(0) {decay:.3}, \
             energy residual ratios {:.2} {:.2}",
            res[1] / res[0],
            res[2] / res[1]
        ),
    )
}

fn appendix_d_suite() -> Result<Outcome> {
    let sphere = grid(Surface::sphere(1.0, 32, 32)?)?;
    let torus = grid(Surface::torus(3.0, 1.0, 32, 32)?)?;
    let ds = rigid_field_scan(&sphere, None).r.dim;
    let dt = rigid_field_scan(&torus, None).r.dim;
    let spec = ThinDomainSpec::from_ambient(
        &torus,
        &AmbientScalar::Constant(0.0),
        &AmbientScalar::AzimuthalCos { c: 1.0, amp: 0.1, k: 1 },
        0.1,
    )?;
    let dg = rigid_field_scan(&torus, Some(&spec)).rg.dim;
    let mut eig = 0.0f64;
    for (g, axes) in [(&sphere, vec![V3::x(), V3::y(), V3::z()]), (&torus, vec![V3::z()])] {
        for a in axes {
            let r = killing_eigen_check(g, &RigidField::rotation(a))?;
            eig = eig.max(r.collinearity).max(r.rotation);
        }
    }
    let mut k = 0.0f64;
    for s in [Surface::sphere(1.0, 32, 32)?, Surface::torus(3.0, 1.0, 32, 32)?, Surface::spheroid(3.0, 0.3, 32, 32)?] {
        k = k.max(revolution_curvature_residual(&grid(s)?));
    }
    let pass = ds == 3 && dt == 1 && dg == 0 && eig <= 1e-8 && k <= 1e-9;
    outcome(pass, format!("dims {ds}/{dt}/{dg}, eigenrelation {eig:.1e}, K check {k:.1e}"))
}

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("algebraic geometry suite", Duration::from_secs(10), algebraic_suite),
        ("differentiation order suite", Duration::from_secs(120), differentiation_order_suite),
        ("helmholtz suite", Duration::from_secs(60), helmholtz_suite),
        ("thin-shell exact identities", Duration::from_secs(30), shell_identity_suite),
        ("epsilon rate suite", Duration::from_secs(180), rate_suite),
        ("solver suite", Duration::from_secs(300), solver_suite),
        ("rigid field suite", Duration::from_secs(30), appendix_d_suite),
    ];
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!(
            "{} [{}] {name}: {detail} ({:.1} s of {} s)",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
