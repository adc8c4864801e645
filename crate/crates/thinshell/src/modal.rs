//! Direct solvers for rotation-equivariant grid operators.
//!
//! On a surface of revolution every operator with theta-independent
//! coefficients commutes with rotations about the axis, so it is block
//! diagonal in the theta Fourier modes. Each block is found by applying the
//! operator to impulses on the theta = 0 meridian and transforming the
//! response; blocks are then factored independently. Modes 0 and N_theta/2
//! are real and may be singular (constants, grid checkerboards); they get a
//! least-squares pseudo-inverse.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SurfaceGrid;

enum Block {
    Lu(nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
    Pinv(DMatrix<f64>),
}

pub struct ModalSolver {
    n_s: usize,
    n_theta: usize,
    ncomp: usize,
    blocks: Vec<Block>,
    /// rank deficiency of the real blocks
    pub null_dims: [usize; 2],
}

impl std::fmt::Debug for ModalSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ModalSolver({}x{}x{})", self.n_s, self.n_theta, self.ncomp)
    }
}

impl ModalSolver {
    /// `apply` maps node-major data with `ncomp` rotation-invariant components per node.
    pub fn build<F>(grid: &SurfaceGrid, ncomp: usize, apply: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        let (n_s, n_t) = (grid.shape.n_s, grid.shape.n_theta);
        let nd = n_s * ncomp;
        let n_modes = n_t / 2 + 1;
        // column (j, c) of every mode block
        let columns: Vec<Vec<Complex64>> = (0..nd)
            .into_par_iter()
            .map(|col| {
                let (j, c) = (col / ncomp, col % ncomp);
                let mut e = vec![0.0; n_s * n_t * ncomp];
                e[grid.shape.idx(j, 0) * ncomp + c] = 1.0;
                let resp = apply(&e);
                let spec = grid.theta_fft(&resp, ncomp);
                let mut out = vec![Complex64::new(0.0, 0.0); n_modes * nd];
                for row in 0..nd {
                    for m in 0..n_modes {
                        out[m * nd + row] = spec[row * n_t + m];
                    }
                }
                out
            })
            .collect();
        let scale = columns
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |a, z| a.max(z.norm()));
        let results: Vec<(Block, usize)> = (0..n_modes)
            .into_par_iter()
            .map(|m| {
                if m == 0 || m == n_t / 2 {
                    let a = DMatrix::from_fn(nd, nd, |r, c| columns[c][m * nd + r].re);
                    pinv(a)
                } else {
                    let a = DMatrix::from_fn(nd, nd, |r, c| columns[c][m * nd + r]);
                    let lu = a.lu();
                    let det_ok = (0..nd).all(|i| lu.u()[(i, i)].norm() > 1e-13 * scale);
                    if det_ok {
                        Ok((Block::Lu(lu), 0))
                    } else {
                        Err(Error::LinearSolveFailure(format!("mode {m} block is singular")))
                    }
                }
            })
            .collect::<Result<_>>()?;
        let null_dims = [results[0].1, results[n_modes - 1].1];
        Ok(ModalSolver {
            n_s,
            n_theta: n_t,
            ncomp,
            blocks: results.into_iter().map(|r| r.0).collect(),
            null_dims,
        })
    }

    /// Applies the (pseudo-)inverse to node-major data.
    pub fn solve(&self, grid: &SurfaceGrid, rhs: &[f64]) -> Vec<f64> {
        let (n_s, n_t, nc) = (self.n_s, self.n_theta, self.ncomp);
        assert_eq!(rhs.len(), n_s * n_t * nc);
        let nd = n_s * nc;
        let spec = grid.theta_fft(rhs, nc);
        let sols: Vec<Vec<Complex64>> = self
            .blocks
            .par_iter()
            .enumerate()
            .map(|(m, block)| {
                let b: Vec<Complex64> = (0..nd).map(|r| spec[r * n_t + m]).collect();
                match block {
                    Block::Lu(lu) => lu.solve(&DVector::from_vec(b)).expect("factored block").data.into(),
                    Block::Pinv(p) => {
                        let br = DVector::from_iterator(nd, b.iter().map(|z| z.re));
                        (p * br).iter().map(|&x| Complex64::new(x, 0.0)).collect()
                    }
                }
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); nd * n_t];
        for (m, x) in sols.iter().enumerate() {
            for r in 0..nd {
                out[r * n_t + m] = x[r];
                if m > 0 && m < n_t - m {
                    out[r * n_t + n_t - m] = x[r].conj();
                }
            }
        }
        grid.theta_ifft(out, nc)
    }
}

fn pinv(a: DMatrix<f64>) -> Result<(Block, usize)> {
    let n = a.nrows();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let cut = 1e-10 * smax;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(Error::LinearSolveFailure("SVD did not converge".into())),
    };
    let mut p = DMatrix::zeros(n, n);
    let mut null = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            p += (vt.row(i).transpose() / s) * u.column(i).transpose();
        } else {
            null += 1;
        }
    }
    Ok((Block::Pinv(p), null))
}

/// Right-preconditioned restarted GMRES. Returns (x, relative residual, iterations).
pub fn gmres<A, M>(apply: A, precond: M, b: &[f64], tol: f64, restart: usize, max_iter: usize) -> (Vec<f64>, f64, usize)
where
    A: Fn(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return (x, 0.0, 0);
    }
    let mut iters = 0;
    let mut rel = 1.0;
    let mut last_cycle = f64::INFINITY;
    while iters < max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        // stagnation at the consistency floor of a singular system
        if rel <= tol || rel > 0.999 * last_cycle {
            break;
        }
        last_cycle = rel;
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut hmat = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            iters += 1;
            let zk = precond(&v[k]);
            let mut w = apply(&zk);
            z.push(zk);
            for i in 0..=k {
                let hik = dot(&w, &v[i]);
                hmat[i][k] = hik;
                w.iter_mut().zip(&v[i]).for_each(|(w, v)| *w -= hik * v);
            }
            let hn = norm(&w);
            hmat[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * hmat[i][k] + sn[i] * hmat[i + 1][k];
                hmat[i + 1][k] = -sn[i] * hmat[i][k] + cs[i] * hmat[i + 1][k];
                hmat[i][k] = t;
            }
            let den = hmat[k][k].hypot(hmat[k + 1][k]);
            cs[k] = if den > 0.0 { hmat[k][k] / den } else { 1.0 };
            sn[k] = if den > 0.0 { hmat[k + 1][k] / den } else { 0.0 };
            hmat[k][k] = den;
            hmat[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= tol || hn <= 1e-300 || iters >= max_iter {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| hmat[i][j] * y[j]).sum();
            y[i] = if hmat[i][i] != 0.0 { (g[i] - s) / hmat[i][i] } else { 0.0 };
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.iter_mut().zip(zi).for_each(|(x, z)| *x += yi * z);
        }
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    rel = rel.min(norm(&r) / bnorm);
    (x, rel, iters)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
