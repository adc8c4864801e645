//! Subcommands.

use std::path::PathBuf;

use log::warn;
use thinshell::calculus::{tangential_gradient, vector_gradient};
use thinshell::domain::{AmbientScalar, ThinDomainSpec};
use thinshell::helmholtz::{decompose_general_weighted, project_weighted_solenoidal, DecompositionResult};
use thinshell::identities::{
    algebraic_residuals, differential_order_studies, revolution_curvature_residual, DIFFERENTIAL_IDS,
};
use thinshell::korn::{korn_constant_estimate, DEFAULT_MODES};
use thinshell::limit::{Forcing, LimitConfig, LimitSolver, Scheme};
use thinshell::rates::{epsilon_rate_study_checked, validate_eps, Estimate, RandomField, RateConfig};
use thinshell::rigid::{killing_eigen_check, normal_residual, rigid_field_scan, RigidField};
use thinshell::shell::{
    average_m, average_mtau, averaged_gradient_check, boundary_impermeability, constant_extension,
    impermeable_extension, ShellGrid, DEFAULT_NR,
};
use thinshell::{Error, ScalarField, Surface, SurfaceGrid, V3};

use crate::config::{parse_ambient, parse_surface, split_list, value_error, ConfigError, ConfigResult, KeyValues};
use crate::io;
use crate::plot;
use crate::report::{CheckReport, Relation};

pub const DEFAULT_TOLERANCES: &str = include_str!("../tolerances.conf");

/// Identities below this resolution are too coarse for order fits.
const MIN_ORDER_N: usize = 32;

pub const CONFIG_KEYS: &[&str] = &[
    "run.seed",
    "surface.shape",
    "grid.n",
    "grid.n_s",
    "grid.n_theta",
    "domain.g0",
    "domain.g1",
    "domain.eps",
    "domain.n_r",
    "identities.surfaces",
    "identities.n",
    "rate.estimates",
    "rate.eps",
    "solve.weight",
    "solve.nu",
    "solve.gamma0",
    "solve.gamma1",
    "solve.dt",
    "solve.t_final",
    "solve.scheme",
    "solve.output_every",
    "solve.cfl",
    "solve.v0",
    "solve.forcing",
    "decompose.kind",
    "decompose.weight",
    "decompose.field",
    "killing.expect_r",
    "killing.expect_r01",
    "killing.expect_rg",
    "korn.modes",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    CheckIdentities,
    RateStudy,
    Solve,
    Decompose,
    KillingScan,
    Korn,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckIdentities => "check-identities",
            Command::RateStudy => "rate-study",
            Command::Solve => "solve",
            Command::Decompose => "decompose",
            Command::KillingScan => "killing-scan",
            Command::Korn => "korn",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("cannot write {path}: {msg}")]
    Output { path: PathBuf, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub struct RunConfig {
    pub command: Command,
    pub config: KeyValues,
    pub out: PathBuf,
    pub tolerances: KeyValues,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(
        command: Command,
        config: KeyValues,
        out: PathBuf,
        overrides: Option<KeyValues>,
        seed: Option<u64>,
    ) -> ConfigResult<Self> {
        config.check_known(CONFIG_KEYS)?;
        let mut tolerances = KeyValues::parse(DEFAULT_TOLERANCES, &PathBuf::from("tolerances.conf"))?;
        let known: Vec<String> = tolerances.iter().map(|(k, _)| k.clone()).collect();
        if let Some(o) = overrides {
            o.check_known(&known.iter().map(String::as_str).collect::<Vec<_>>())?;
            tolerances.merge(o);
        }
        for k in &known {
            let v: f64 = tolerances.get(k, 0.0)?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(value_error(k, format!("tolerance must be nonnegative, got {v}")));
            }
        }
        let seed = match seed {
            Some(s) => s,
            None => config.get("run.seed", 7u64)?,
        };
        Ok(RunConfig { command, config, out, tolerances, seed })
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tolerances.get(key, f64::NAN).expect("tolerances validated at load")
    }

    fn output<E: std::fmt::Display>(&self, file: &str, r: Result<(), E>) -> Result<(), CliError> {
        r.map_err(|e| CliError::Output { path: self.out.join(file), msg: e.to_string() })
    }

    fn write_text(&self, file: &str, text: &str) -> Result<(), CliError> {
        self.output(file, std::fs::write(self.out.join(file), text))
    }
}

pub fn run(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let mut report = CheckReport::default();
    report.env("command", cfg.command.name());
    report.env("thinshell_version", env!("CARGO_PKG_VERSION"));
    report.env("tolerances_version", cfg.tolerances.str_or("meta.version", "?"));
    report.env("seed", cfg.seed);
    for (k, v) in cfg.config.iter() {
        report.env(format!("config.{k}"), v);
    }
    for (k, v) in cfg.tolerances.iter() {
        report.env(format!("tolerance.{k}"), v);
    }
    cfg.output("", std::fs::create_dir_all(&cfg.out))?;
    match cfg.command {
        Command::CheckIdentities => check_identities(cfg, &mut report)?,
        Command::RateStudy => rate_study(cfg, &mut report)?,
        Command::Solve => solve(cfg, &mut report)?,
        Command::Decompose => decompose(cfg, &mut report)?,
        Command::KillingScan => killing_scan(cfg, &mut report)?,
        Command::Korn => korn(cfg, &mut report)?,
    }
    cfg.output("report.csv", report.write(&cfg.out))?;
    Ok(report)
}

fn surface(c: &KeyValues, default_n: usize) -> ConfigResult<Surface> {
    let n: usize = c.get("grid.n", default_n)?;
    let n_s = c.get("grid.n_s", n)?;
    let n_theta = c.get("grid.n_theta", n)?;
    parse_surface(c, "surface.shape", c.str_or("surface.shape", "sphere:1"), n_s, n_theta)
}

struct DomainKeys {
    g0: AmbientScalar,
    g1: AmbientScalar,
    eps: f64,
    n_r: usize,
}

fn domain(c: &KeyValues) -> ConfigResult<DomainKeys> {
    let eps = c.positive("domain.eps", 0.05)?;
    if eps >= 1.0 {
        return Err(value_error("domain.eps", "must lie in (0, 1)"));
    }
    let n_r = c.get("domain.n_r", DEFAULT_NR)?;
    if n_r < 2 {
        return Err(value_error("domain.n_r", "need at least 2 radial nodes"));
    }
    Ok(DomainKeys {
        g0: parse_ambient("domain.g0", c.str_or("domain.g0", "const:0"))?,
        g1: parse_ambient("domain.g1", c.str_or("domain.g1", "affine:1,0,0,0.2"))?,
        eps,
        n_r,
    })
}

fn thin_domain(grid: &SurfaceGrid, d: &DomainKeys) -> ConfigResult<ThinDomainSpec> {
    ThinDomainSpec::from_ambient(grid, &d.g0, &d.g1, d.eps).map_err(|e| value_error("domain", e))
}

fn weight(c: &KeyValues, key: &str, grid: &SurfaceGrid) -> ConfigResult<ScalarField> {
    let f = parse_ambient(key, c.str_or(key, "const:1"))?;
    let g = grid.eval_scalar(|p| f.value(&p.y));
    if !(g.min() > 0.0) {
        return Err(value_error(key, format!("weight must be positive on the surface, min {}", g.min())));
    }
    Ok(g)
}

/// The rotation a x y named by `killing:a1,a2,a3`.
fn rotation_source(c: &KeyValues, key: &str) -> ConfigResult<Option<RigidField>> {
    let Some(axis) = c.raw(key).and_then(|s| s.strip_prefix("killing:")) else {
        return Ok(None);
    };
    let a: Vec<f64> = split_list(axis)
        .map(|x| x.parse::<f64>().map_err(|e| value_error(key, e)))
        .collect::<ConfigResult<_>>()?;
    if a.len() != 3 {
        return Err(value_error(key, "killing needs three axis components"));
    }
    Ok(Some(RigidField::rotation(V3::new(a[0], a[1], a[2]))))
}

/// `zero`, `random` (seeded), `file:<csv>` or `killing:a1,a2,a3`.
fn field_source(c: &KeyValues, key: &str, default: &str, grid: &SurfaceGrid, seed: u64) -> ConfigResult<Vec<V3>> {
    let spec = c.str_or(key, default);
    if spec == "random" {
        return Ok(RandomField::from_seed(seed).vector(grid).values);
    }
    if spec == "zero" {
        return Ok(vec![V3::zeros(); grid.len()]);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let path = c.path(path.trim());
        if !path.is_file() {
            return Err(value_error(key, format!("file {} not found", path.display())));
        }
        return io::read_vector_field(&path, grid).map_err(|e| value_error(key, e));
    }
    if let Some(w) = rotation_source(c, key)? {
        return Ok(grid.points.iter().map(|p| w.value(&p.y)).collect());
    }
    Err(value_error(key, format!("unknown field source '{spec}'")))
}

fn check_identities(cfg: &RunConfig, report: &mut CheckReport) -> Result<(), CliError> {
    let c = &cfg.config;
    let n: usize = c.get("identities.n", 128)?;
    let orders = n >= MIN_ORDER_N;
    if orders && n % 4 != 0 {
        return Err(value_error("identities.n", "must be a multiple of 4 for the order study").into());
    }
    let labels: Vec<&str> = split_list(c.str_or("identities.surfaces", "sphere:1, torus:3:1")).collect();
    let surfaces = labels
        .iter()
        .map(|s| parse_surface(c, "identities.surfaces", s, n, n))
        .collect::<ConfigResult<Vec<_>>>()?;
    let d = domain(c)?;
    if !orders {
        warn!("N = {n} is below {MIN_ORDER_N}: refinement-order checks skipped");
    }
    let min_order = cfg.tol("identities.min_order");
    let shell_tol = cfg.tol("identities.shell_exact");
    let mut order_rows = Vec::new();
    for (label, surface) in labels.iter().zip(&surfaces) {
        let grid = SurfaceGrid::new(surface)?;
        for (id, v) in algebraic_residuals(&grid).entries() {
            let key = if id == "unit_sphere_w_plus_p" { "identities.unit_sphere" } else { "identities.algebraic" };
            report.at_most(format!("{label}/{id}"), v, cfg.tol(key));
        }
        report.at_most(
            format!("{label}/curvature_from_profile"),
            revolution_curvature_residual(&grid),
            cfg.tol("identities.curvature"),
        );

        let spec = thin_domain(&grid, &d)?;
        let sg = ShellGrid::new(&grid, &spec, d.n_r)?;
        let eta = grid.eval_scalar(|p| (p.y[0] + 2.0 * p.y[2]).sin() + p.y[1]);
        let back = average_m(&sg, &constant_extension(&sg, &eta.values));
        let ext = back.iter().zip(&eta.values).fold(0.0f64, |a, (b, e)| a.max((b - e).abs())) / eta.max_abs();
        report.at_most(format!("{label}/average_of_extension"), ext, shell_tol);
        let v = RandomField::from_seed(cfg.seed).tangent(&grid);
        let mv = average_mtau(&grid, &sg, &impermeable_extension(&sg, &grid, &v));
        report.at_most(format!("{label}/tangential_average_of_extension"), mv.sub(&v).max_norm() / v.max_norm(), shell_tol);
        report.at_most(format!("{label}/impermeability"), boundary_impermeability(&sg, &grid, &v)?, shell_tol);
        let field = RandomField::from_seed(cfg.seed);
        let phi = sg.sample_ambient(&grid, |x| field.scalar(x));
        report.at_most(format!("{label}/averaged_gradient"), averaged_gradient_check(&sg, &grid, &phi)?.residual, shell_tol);

        if orders {
            let ns = [n / 2, n, 2 * n];
            for (id, study) in differential_order_studies(surface, &ns)? {
                report.at_least(format!("{label}/{id}/order"), study.order, min_order);
                for (n, r) in study.n.iter().zip(&study.residuals) {
                    order_rows.push([label.to_string(), id.to_string(), n.to_string(), io::num(*r)]);
                }
            }
        } else {
            for id in DIFFERENTIAL_IDS {
                report.skip(format!("{label}/{id}/order"), Relation::AtLeast(min_order));
            }
        }
    }
    let path = cfg.out.join("orders.csv");
    let write = || -> csv::Result<()> {
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["surface", "check", "n", "residual"])?;
        for r in &order_rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    };
    cfg.output("orders.csv", write())
}

fn rate_study(cfg: &RunConfig, report: &mut CheckReport) -> Result<(), CliError> {
    let c = &cfg.config;
    let surface = surface(c, 64)?;
    let estimates = split_list(c.str_or("rate.estimates", "comp_n, extan_div, lp_etd_sol, adiv_tan_lp, ave_diff_dom"))
        .map(|s| Estimate::parse(s).map_err(|e| value_error("rate.estimates", e)))
        .collect::<ConfigResult<Vec<_>>>()?;
    let eps: Vec<f64> = c.list("rate.eps", "0.1, 0.05, 0.025, 0.0125")?;
    validate_eps(&eps).map_err(|e| value_error("rate.eps", e))?;
    let d = domain(c)?;
    let band = cfg.tol("rate.band");
    for e in estimates {
        let rc = RateConfig { estimate: e, eps: eps.clone(), seed: cfg.seed, n_r: d.n_r, g0: d.g0.clone(), g1: d.g1.clone() };
        let p = e.predicted_slope();
        let relation =
            if e.is_lower_bound() { Relation::AtLeast(p - band) } else { Relation::Within { center: p, band } };
        match epsilon_rate_study_checked(&surface, &rc) {
            Ok(study) => {
                let file = format!("rate_{}.csv", e.id());
                cfg.output(&file, io::write_rate_study(&cfg.out.join(&file), &study))?;
                report.check(format!("{}/slope", e.id()), study.slope, relation);
                if let Some(change) = study.refinement_change {
                    report.info(format!("{}/refinement_change", e.id()), change);
                }
            }
            Err(Error::UnderResolved { change, tol }) => {
                warn!("{}: {}", e.id(), Error::UnderResolved { change, tol });
                report.at_most(format!("{}/refinement_change", e.id()), change, tol);
                report.fail(format!("{}/slope", e.id()), relation);
            }
            Err(err) => return Err(err.into()),
        }
    }
    Ok(())
}

fn solve(cfg: &RunConfig, report: &mut CheckReport) -> Result<(), CliError> {
    let c = &cfg.config;
    let grid = SurfaceGrid::new(&surface(c, 32)?)?;
    let g = weight(c, "solve.weight", &grid)?;
    let v0 = grid.tangent_from_values(field_source(c, "solve.v0", "random", &grid, cfg.seed)?);
    let forcing_spec = c.str_or("solve.forcing", "zero");
    let forcing = if forcing_spec == "zero" {
        Forcing::Zero
    } else {
        let f = field_source(c, "solve.forcing", "zero", &grid, cfg.seed.wrapping_add(1))?;
        Forcing::Steady(grid.tangent_from_values(f))
    };
    let mut lc = LimitConfig::new(g.clone(), v0.clone());
    lc.nu = c.positive("solve.nu", lc.nu)?;
    lc.gamma0 = c.nonnegative("solve.gamma0", 0.0)?;
    lc.gamma1 = c.nonnegative("solve.gamma1", 0.0)?;
    lc.dt = c.positive("solve.dt", lc.dt)?;
    lc.t_final = c.nonnegative("solve.t_final", lc.t_final)?;
    lc.output_every = c.get("solve.output_every", 10usize)?;
    if lc.output_every == 0 {
        return Err(value_error("solve.output_every", "must be at least 1").into());
    }
    lc.cfl_bound = c.positive("solve.cfl", lc.cfl_bound)?;
    lc.scheme = Scheme::parse(c.str_or("solve.scheme", "imex-bdf2")).map_err(|e| value_error("solve.scheme", e))?;
    lc.forcing = forcing;
    let unforced = matches!(lc.forcing, Forcing::Zero);
    let frictionless = lc.gamma() == 0.0;

    let solver = LimitSolver::new(&grid, lc)?;
    let traj = solver.solve()?;
    let first = &traj.states[0];
    let last = traj.last();
    let v_scale = grid.norm(&first.v).max(1e-300);

    cfg.output("diagnostics.csv", io::write_diagnostics(&cfg.out.join("diagnostics.csv"), &traj.diagnostics))?;
    cfg.output("velocity.csv", io::write_vector_field(&cfg.out.join("velocity.csv"), &grid, &last.v.values))?;
    cfg.output("pressure.csv", io::write_scalar_field(&cfg.out.join("pressure.csv"), &grid, &last.q.values))?;
    let energy: Vec<(f64, f64)> = traj.diagnostics.iter().map(|(t, d)| (*t, d.energy)).collect();
    cfg.write_text("energy.svg", &plot::line_plot("energy", "t", "E(t)", &energy))?;
    let speed: Vec<f64> = last.v.values.iter().map(|v| v.norm()).collect();
    let title = format!("|v| at t = {:.4}", last.t);
    cfg.write_text("speed.svg", &plot::heat_map(&title, grid.shape.n_s, grid.shape.n_theta, &speed))?;

    let div = traj.diagnostics.iter().map(|(_, d)| d.div_residual).fold(0.0, f64::max) / v_scale;
    report.at_most("divergence_residual", div, cfg.tol("solve.div"));
    let e0 = energy[0].1.max(1e-300);
    if unforced {
        let rise = energy.windows(2).map(|w| (w[1].1 - w[0].1) / e0).fold(f64::NEG_INFINITY, f64::max);
        report.at_most("energy_increase", rise.max(0.0), cfg.tol("solve.energy_increase"));
    }
    let rotation = rotation_source(c, "solve.v0")?;
    let steady = rotation.is_some_and(|w| is_weighted_killing(&grid, &g, &w, cfg.tol("killing.residual")));
    if unforced && frictionless && steady {
        let flat = energy.iter().map(|(_, e)| (e - energy[0].1).abs() / e0).fold(0.0, f64::max);
        report.at_most("killing_energy_drift", flat, cfg.tol("solve.killing_drift"));
        let drift = traj.states.iter().map(|s| grid.norm(&s.v.sub(&first.v))).fold(0.0, f64::max) / v_scale;
        report.at_most("killing_velocity_drift", drift, cfg.tol("solve.killing_drift"));
    }
    report.info("energy_ratio", energy[energy.len() - 1].1 / e0);
    report.info("max_energy_residual", traj.max_energy_residual());
    report.info("pressure_residual", solver.pressure_recover(last)?.residual);
    report.env("grid", format!("{}x{}", grid.shape.n_s, grid.shape.n_theta));
    Ok(())
}

/// w tangent to the surface with w . grad g = 0.
fn is_weighted_killing(grid: &SurfaceGrid, g: &ScalarField, w: &RigidField, tol: f64) -> bool {
    if normal_residual(grid, w) > tol {
        return false;
    }
    let dg = tangential_gradient(grid, g);
    let scale = grid.points.iter().fold(0.0f64, |a, p| a.max(w.value(&p.y).norm())) * dg.max_norm().max(1.0);
    grid.points.iter().zip(&dg.values).all(|(p, d)| w.value(&p.y).dot(d).abs() <= tol * scale)
}

fn h1_norm(grid: &SurfaceGrid, v: &[V3]) -> f64 {
    let d = vector_gradient(grid, v);
    (grid.norm_vec(v).powi(2) + grid.norm_matrix(&d).powi(2)).sqrt()
}

fn decompose(cfg: &RunConfig, report: &mut CheckReport) -> Result<(), CliError> {
    let c = &cfg.config;
    let grid = SurfaceGrid::new(&surface(c, 64)?)?;
    let g = weight(c, "decompose.weight", &grid)?;
    let raw = field_source(c, "decompose.field", "random", &grid, cfg.seed)?;
    let kind = c.str_or("decompose.kind", "weighted");
    let (input, result): (Vec<V3>, DecompositionResult) = match kind {
        "weighted" => {
            let v = grid.tangent_from_values(raw);
            let r = project_weighted_solenoidal(&grid, &g, &v)?;
            (v.values, r)
        }
        "general" => {
            let v = thinshell::VectorField { shape: grid.shape, values: raw };
            let r = decompose_general_weighted(&grid, &g, &v)?;
            (v.values, r)
        }
        other => return Err(value_error("decompose.kind", format!("expected weighted or general, got '{other}'")).into()),
    };
    let scale = grid.norm_vec(&input).max(1e-300);
    let diff: Vec<V3> = (0..grid.len())
        .map(|i| input[i] - result.solenoidal.values[i] - result.gradient_part.values[i])
        .collect();
    report.at_most("round_trip", grid.norm_vec(&diff) / scale, cfg.tol("decompose.roundtrip"));
    if kind == "weighted" {
        let h1 = h1_norm(&grid, &input).max(1e-300);
        report.at_most("divergence_over_h1", result.divergence_residual / h1, cfg.tol("decompose.divergence"));
        report.info("orthogonality", result.orthogonality_residual / scale);
    } else {
        report.at_most("orthogonality", result.orthogonality_residual, cfg.tol("decompose.orthogonality"));
    }
    cfg.output("solenoidal.csv", io::write_vector_field(&cfg.out.join("solenoidal.csv"), &grid, &result.solenoidal.values))?;
    cfg.output("gradient.csv", io::write_vector_field(&cfg.out.join("gradient.csv"), &grid, &result.gradient_part.values))?;
    cfg.output("potential.csv", io::write_scalar_field(&cfg.out.join("potential.csv"), &grid, &result.potential.values))?;
    Ok(())
}

fn killing_scan(cfg: &RunConfig, report: &mut CheckReport) -> Result<(), CliError> {
    let c = &cfg.config;
    let grid = SurfaceGrid::new(&surface(c, 32)?)?;
    let weighted = c.raw("domain.g0").is_some() || c.raw("domain.g1").is_some();
    let spec = if weighted { Some(thin_domain(&grid, &domain(c)?)?) } else { None };
    let scan = rigid_field_scan(&grid, spec.as_ref());
    let spaces = [("R", &scan.r), ("R01", &scan.r01), ("Rg", &scan.rg)];
    let expect = ["killing.expect_r", "killing.expect_r01", "killing.expect_rg"];
    for ((name, sub), key) in spaces.iter().zip(expect) {
        match c.raw(key) {
            Some(_) => {
                let want: usize = c.get(key, 0)?;
                report.check(format!("dim_{name}"), sub.dim as f64, Relation::Equals(want as f64));
            }
            None => report.info(format!("dim_{name}"), sub.dim as f64),
        }
        report.at_most(format!("{name}/normal_residual"), sub.residual, cfg.tol("killing.residual"));
    }
    for (k, w) in scan.r.basis.iter().enumerate() {
        let r = killing_eigen_check(&grid, w)?;
        report.at_most(format!("R/{k}/eigenrelation"), r.collinearity.max(r.rotation), cfg.tol("killing.eigen"));
        report.info(format!("R/{k}/rigid_normal_residual"), normal_residual(&grid, w));
    }
    cfg.output("killing.csv", io::write_killing_basis(&cfg.out.join("killing.csv"), &spaces))
}

fn korn(cfg: &RunConfig, report: &mut CheckReport) -> Result<(), CliError> {
    let c = &cfg.config;
    let grid = SurfaceGrid::new(&surface(c, 32)?)?;
    let modes: usize = c.get("korn.modes", DEFAULT_MODES)?;
    if modes < 2 {
        return Err(value_error("korn.modes", "must be at least 2").into());
    }
    let mut rows = Vec::new();
    let mut last = None;
    for m in 2..=modes {
        let est = korn_constant_estimate(&grid, m, m)?;
        rows.push([m.to_string(), est.offered.to_string(), est.dim.to_string(), io::num(est.c_est)]);
        report.info(format!("c_est/modes_{m}"), est.c_est);
        last = Some(est);
    }
    let est = last.expect("at least one mode");
    report.at_least("c_est", est.c_est, cfg.tol("korn.min"));
    let path = cfg.out.join("korn.csv");
    let write = || -> csv::Result<()> {
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["modes", "offered", "dim", "c_est"])?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    };
    cfg.output("korn.csv", write())
}
