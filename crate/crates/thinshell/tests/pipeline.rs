use std::f64::consts::PI;
use std::io::Write;

use thinshell::helmholtz::WeightedProjector;
use thinshell::limit::{LimitConfig, LimitSolver, Scheme, Trajectory};
use thinshell::rates::RandomField;
use thinshell::{Surface, SurfaceGrid};

#[test]
fn sampled_profile_matches_analytic_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sphere.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# unit sphere\ns,phi,psi").unwrap();
    let m = 64;
    for i in 0..=m {
        let s = PI * i as f64 / m as f64;
        let phi = if i == 0 || i == m { 0.0 } else { s.sin() };
        writeln!(f, "{s},{phi},{}", s.cos()).unwrap();
    }
    drop(f);
    let sampled = SurfaceGrid::new(&Surface::from_profile_csv(&path, 24, 24).unwrap()).unwrap();
    let exact = SurfaceGrid::new(&Surface::sphere(1.0, 24, 24).unwrap()).unwrap();
    for (a, b) in sampled.points.iter().zip(&exact.points) {
        assert!((a.y - b.y).norm() < 1e-10, "{} vs {}", a.y, b.y);
        assert!((a.h - b.h).abs() < 1e-8, "{} vs {}", a.h, b.h);
        assert!((a.k - b.k).abs() < 1e-8);
    }
    assert!((sampled.area() - 4.0 * PI).abs() < 1e-8);
}

fn damped_run(grid: &SurfaceGrid, dt: f64) -> (Trajectory, f64) {
    let g = grid.eval_scalar(|p| 1.0 + 0.2 * p.y[2]);
    let raw = RandomField::from_seed(11).tangent(grid);
    let (v0, _) = WeightedProjector::new(grid, &g).unwrap().project(grid, &raw.values).unwrap();
    let mut cfg = LimitConfig::new(g, grid.tangent_from_values(v0));
    cfg.gamma0 = 0.5;
    cfg.dt = dt;
    cfg.t_final = 0.1;
    cfg.scheme = Scheme::ImexBdf2;
    cfg.output_every = 10;
    let solver = LimitSolver::new(grid, cfg).unwrap();
    let traj = solver.solve().unwrap();
    let p = solver.pressure_recover(traj.last()).unwrap();
    assert!(p.q.values.iter().all(|x| x.is_finite()));
    (traj, p.residual)
}

#[test]
fn unforced_flow_on_weighted_sphere() {
    let grid = SurfaceGrid::new(&Surface::sphere(1.0, 24, 24).unwrap()).unwrap();
    let (traj, coarse) = damped_run(&grid, 2e-3);
    let energies: Vec<f64> = traj.diagnostics.iter().map(|(_, d)| d.energy).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert!(energies.last().unwrap() < &energies[0]);
    assert!(traj.diagnostics.iter().all(|(_, d)| d.div_residual < 1e-8));
    assert_eq!(traj.states.len(), 1 + 5);
    let (_, fine) = damped_run(&grid, 1e-3);
    assert!(coarse < 1e-2 && fine < 0.7 * coarse, "{coarse} {fine}");
}
