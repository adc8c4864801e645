//! One-dimensional quadrature rules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs n >= 1");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Integral of a smooth function over [a, b] by composite Gauss-Legendre.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            sum += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// Weights for functions odd about both ends of [0, L], sampled at cell midpoints.
///
/// Such integrands expand in sin(k pi s / L), so the rule integrates the
/// interpolating sine series exactly.
pub fn pole_weights(n: usize, length: f64) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|j| {
            let t = (j as f64 + 0.5) * PI / nf;
            let mut sum = 0.0;
            for k in (1..n).step_by(2) {
                let kf = k as f64;
                sum += (2.0 / nf) * (2.0 / kf) * (kf * t).sin();
            }
            if n % 2 == 1 {
                sum += (1.0 / nf) * (2.0 / nf) * (nf * t).sin();
            }
            sum * length / PI
        })
        .collect()
}

/// Barycentric differentiation matrix for the given nodes (row-major).
pub fn diff_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            let prod: f64 = (0..n).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
            1.0 / prod
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        for deg in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn pole_weights_integrate_sine_area() {
        // area of the unit sphere: 2 pi * int_0^pi sin s ds
        for n in [5, 8, 33] {
            let w = pole_weights(n, PI);
            let q: f64 = w
                .iter()
                .enumerate()
                .map(|(j, w)| w * ((j as f64 + 0.5) * PI / n as f64).sin())
                .sum();
            assert!((q - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diff_matrix_is_exact_on_polynomials() {
        let (x, _) = gauss_legendre(6);
        let d = diff_matrix(&x);
        for i in 0..6 {
            let dv: f64 = (0..6).map(|j| d[i * 6 + j] * x[j].powi(5)).sum();
            assert!((dv - 5.0 * x[i].powi(4)).abs() < 1e-12);
        }
    }
}
