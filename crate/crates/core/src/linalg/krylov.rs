//! Conjugate gradients and flexible restarted GMRES.
//!
//! Both solvers stop on the relative residual `||b - A x|| / ||b||` and verify
//! the true residual before reporting convergence.

use super::{dot, norm2, Identity, LinearOperator, SolverReport};
use crate::error::{ChnsError, Result};

/// Unpreconditioned CG from a zero initial guess.
pub fn cg_solve(a: &dyn LinearOperator, rhs: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, SolverReport)> {
    pcg_solve(a, rhs, None, &Identity(a.dim()), tol, maxit)
}

fn true_residual(a: &dyn LinearOperator, x: &[f64], rhs: &[f64], work: &mut [f64]) -> f64 {
    a.apply(x, work);
    work.iter().zip(rhs).map(|(ax, b)| (b - ax) * (b - ax)).sum::<f64>().sqrt()
}

/// Preconditioned CG for a symmetric positive (semi)definite operator.
///
/// `precond` approximates `A^{-1}` and must be symmetric positive definite.
/// The recursive residual is replaced by the true residual whenever it meets
/// the tolerance, so a converged report is never optimistic.
pub fn pcg_solve(
    a: &dyn LinearOperator,
    rhs: &[f64],
    x0: Option<&[f64]>,
    precond: &dyn LinearOperator,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolverReport)> {
    let n = a.dim();
    assert_eq!(rhs.len(), n, "rhs length does not match operator");
    let bnorm = norm2(rhs);
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((x, SolverReport { iterations: 0, residual: 0.0, converged: true }));
    }
    let mut r = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut it = 0;
    let mut rel;
    // outer loop restarts from the true residual
    loop {
        a.apply(&x, &mut q);
        for i in 0..n {
            r[i] = rhs[i] - q[i];
        }
        rel = norm2(&r) / bnorm;
        if rel <= tol || it >= maxit {
            break;
        }
        precond.apply(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut breakdown = false;
        while it < maxit {
            a.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) || !(rz > 0.0) {
                breakdown = true;
                break;
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            it += 1;
            if norm2(&r) / bnorm <= tol {
                break;
            }
            precond.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let tr = true_residual(a, &x, rhs, &mut q) / bnorm;
        if tr <= tol || it >= maxit || breakdown {
            rel = tr;
            break;
        }
    }
    let report = SolverReport { iterations: it, residual: rel, converged: rel <= tol };
    if report.converged {
        Ok((x, report))
    } else {
        Err(ChnsError::NoConvergence { solver: "cg", report })
    }
}

/// Flexible restarted GMRES with right preconditioning.
///
/// `precond` may be any approximate inverse, including one that changes
/// between applications (e.g. an inner iterative solve).
pub fn gmres_solve(
    a: &dyn LinearOperator,
    rhs: &[f64],
    x0: Option<&[f64]>,
    precond: &dyn LinearOperator,
    tol: f64,
    maxit: usize,
    restart: usize,
) -> Result<(Vec<f64>, SolverReport)> {
    let n = a.dim();
    assert_eq!(rhs.len(), n, "rhs length does not match operator");
    let m = restart.max(1).min(n.max(1));
    let bnorm = norm2(rhs);
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((x, SolverReport { iterations: 0, residual: 0.0, converged: true }));
    }
    let mut work = vec![0.0; n];
    let mut it = 0;
    let mut rel;
    loop {
        a.apply(&x, &mut work);
        let r: Vec<f64> = rhs.iter().zip(&work).map(|(b, ax)| b - ax).collect();
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= tol || it >= maxit {
            break;
        }
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        v.push(r.iter().map(|ri| ri / beta).collect());
        // Hessenberg columns, Givens rotations, rotated rhs
        let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut gvec = vec![0.0; m + 1];
        gvec[0] = beta;
        let mut kdim = 0;
        for j in 0..m {
            let mut z = vec![0.0; n];
            precond.apply(&v[j], &mut z);
            let mut w = vec![0.0; n];
            a.apply(&z, &mut w);
            zs.push(z);
            let mut hcol = vec![0.0; j + 2];
            // modified Gram-Schmidt, two passes
            for _pass in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    hcol[i] += hij;
                    for (wk, vk) in w.iter_mut().zip(vi) {
                        *wk -= hij * vk;
                    }
                }
            }
            let wn = norm2(&w);
            hcol[j + 1] = wn;
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a0, a1) = (hcol[i], hcol[i + 1]);
                hcol[i] = c * a0 + s * a1;
                hcol[i + 1] = -s * a0 + c * a1;
            }
            let (a0, a1) = (hcol[j], hcol[j + 1]);
            let rho = a0.hypot(a1);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a0 / rho, a1 / rho) };
            hcol[j] = rho;
            hcol[j + 1] = 0.0;
            cs.push((c, s));
            gvec[j + 1] = -s * gvec[j];
            gvec[j] *= c;
            hcols.push(hcol);
            it += 1;
            kdim = j + 1;
            let est = gvec[j + 1].abs() / bnorm;
            if est <= tol || it >= maxit || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wk| wk / wn).collect());
        }
        // back substitution on the kdim x kdim triangle
        let mut y = vec![0.0; kdim];
        for i in (0..kdim).rev() {
            let mut s = gvec[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= hcols[jj][i] * yj;
            }
            y[i] = if hcols[i][i] != 0.0 { s / hcols[i][i] } else { 0.0 };
        }
        for (yj, zj) in y.iter().zip(&zs) {
            for (xk, zk) in x.iter_mut().zip(zj) {
                *xk += yj * zk;
            }
        }
    }
    let report = SolverReport { iterations: it, residual: rel, converged: rel <= tol };
    if report.converged {
        Ok((x, report))
    } else {
        Err(ChnsError::NoConvergence { solver: "gmres", report })
    }
}
