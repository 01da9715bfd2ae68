//! First-order solvers for the box-constrained and polyhedral QPs of the control step.

use crate::control::OptimisticQP;
use crate::interval::IVector;
use crate::linalg::{dot, norm_inf, Mat};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QpError {
    #[error("every sign orthant of the control box is infeasible")]
    AllOrthantsInfeasible,
    #[error("no KKT point found among the active-set patterns")]
    NoKktPoint,
    #[error("problem dimension {0} too large for the enumeration oracle")]
    TooLarge(usize),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// `minimize 0.5 u^T Q u + c^T u + p` over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxQP<T> {
    pub q: Mat<T>,
    pub c: Vec<T>,
    pub p: T,
    pub bounds: IVector<T>,
}

impl<T: Scalar> BoxQP<T> {
    pub fn new(q: Mat<T>, c: Vec<T>, p: T, bounds: IVector<T>) -> Result<Self, QpError> {
        let m = c.len();
        if q.rows() != m || q.cols() != m || bounds.len() != m {
            return Err(QpError::Invalid(format!(
                "Q is {}x{}, c has {m} entries, box has {}",
                q.rows(),
                q.cols(),
                bounds.len()
            )));
        }
        Ok(Self { q, c, p, bounds })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, u: &[T]) -> T {
        let qu = self.q.matvec(u);
        T::of(0.5) * dot(u, &qu) + dot(&self.c, u) + self.p
    }

    pub fn gradient(&self, u: &[T]) -> Vec<T> {
        self.q.matvec(u).iter().zip(&self.c).map(|(&a, &b)| a + b).collect()
    }
}

/// Componentwise clamp onto a box.
pub fn box_project<T: Scalar>(v: &[T], b: &IVector<T>) -> Vec<T> {
    v.iter()
        .zip(b.iter())
        .map(|(&x, iv)| x.max(iv.lo()).min(iv.hi()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaResConfig<T> {
    pub eps: T,
    pub mu0: T,
    /// Smoothness constant; `None` lets the driver choose it.
    pub l_smooth: Option<T>,
    /// Start point; `None` uses the box midpoint.
    pub y0: Option<Vec<T>>,
    pub max_total_iters: usize,
}

impl<T: Scalar> Default for AdaResConfig<T> {
    fn default() -> Self {
        Self {
            eps: T::of(1e-8),
            mu0: T::one(),
            l_smooth: None,
            y0: None,
            max_total_iters: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaResOutcome<T> {
    pub y: Vec<T>,
    /// Iteration count `1 + sum_s (t_s K_s + 1)`.
    pub iters: usize,
    /// `mu_s` of the last cycle.
    pub mu_estimate: T,
    pub converged: bool,
    /// Objective at every restart point `y_{s,0}`.
    pub restart_objectives: Vec<T>,
}

/// Accelerated projected gradient with adaptive restart and `mu` halving.
pub fn adares<T: Scalar>(
    grad: impl Fn(&[T]) -> Vec<T>,
    objective: impl Fn(&[T]) -> T,
    project: impl Fn(&[T]) -> Vec<T>,
    l: T,
    y0: &[T],
    cfg: &AdaResConfig<T>,
) -> AdaResOutcome<T> {
    let step = |y: &[T]| -> Vec<T> {
        let g = grad(y);
        let v: Vec<T> = y.iter().zip(&g).map(|(&a, &b)| a - b / l).collect();
        project(&v)
    };
    let sq_dist = |a: &[T], b: &[T]| -> T { a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum() };
    let e = T::of(std::f64::consts::E);
    let eighth = T::of(0.125);

    let mut mu = cfg.mu0;
    let mut prev_end = y0.to_vec();
    let mut start = step(y0);
    let mut iters = 1usize;
    let mut restart_objectives = vec![objective(&start)];
    loop {
        let c_s = T::of(16.0) / mu * sq_dist(&start, &prev_end);
        let k_s = (T::of(2.0) * (e / mu).sqrt() - T::one()).ceil().max(T::one());
        let k_s = k_s.to_usize().unwrap_or(1);
        let mut y = start.clone();
        let mut t = 0usize;
        let mut done = false;
        let mut capped = false;
        loop {
            let mut x = y.clone();
            let mut z = y.clone();
            let mut theta = T::one();
            let mut theta_last = T::one();
            for _ in 0..k_s {
                let x_new = step(&z);
                let th2 = theta * theta;
                let theta_new = (-th2 + theta * (th2 + T::of(4.0)).sqrt()) / T::of(2.0);
                let beta = theta * (T::one() - theta) / (th2 + theta_new);
                z = x_new.iter().zip(&x).map(|(&a, &b)| a + beta * (a - b)).collect();
                x = x_new;
                theta_last = theta;
                theta = theta_new;
            }
            y = z;
            t += 1;
            let ty = step(&y);
            let r = sq_dist(&ty, &y);
            if l * l * r <= cfg.eps * mu * eighth {
                done = true;
            }
            if done || iters + t * k_s + 1 >= cfg.max_total_iters {
                capped = !done;
                break;
            }
            let rate = theta_last * theta_last / mu;
            if r > c_s * rate.powi(t as i32) {
                break;
            }
        }
        iters += t * k_s + 1;
        let next = step(&y);
        if done || capped {
            return AdaResOutcome {
                y: next,
                iters,
                mu_estimate: mu,
                converged: done,
                restart_objectives,
            };
        }
        restart_objectives.push(objective(&next));
        prev_end = y;
        start = next;
        mu = mu / T::of(2.0);
    }
}

/// Smoothness constant `sqrt(m) ||Q||_inf`, floored for the linear case.
pub fn smoothness_constant<T: Scalar>(qp: &BoxQP<T>) -> T {
    let m = T::from_usize(qp.dim().max(1)).unwrap();
    let l_min = T::of(1e-12) * T::one().max(norm_inf(&qp.c));
    (m.sqrt() * qp.q.inf_norm()).max(l_min)
}

/// Idealistic box QP through AdaRES; the result lies in the box.
pub fn solve_idealistic<T: Scalar>(qp: &BoxQP<T>, cfg: &AdaResConfig<T>) -> AdaResOutcome<T> {
    let l = cfg.l_smooth.unwrap_or_else(|| smoothness_constant(qp));
    let y0 = cfg.y0.clone().unwrap_or_else(|| qp.bounds.mid());
    adares(
        |u| qp.gradient(u),
        |u| qp.objective(u),
        |v| box_project(v, &qp.bounds),
        l,
        &y0,
        cfg,
    )
}

/// Exact minimizer of a small convex box QP by enumerating active-set patterns.
pub fn oracle_boxqp<T: Scalar>(qp: &BoxQP<T>) -> Result<(Vec<T>, T), QpError> {
    let m = qp.dim();
    if m > 6 {
        return Err(QpError::TooLarge(m));
    }
    let tol = T::of(1e-9);
    let lo = qp.bounds.lo();
    let hi = qp.bounds.hi();
    let mut best: Option<(Vec<T>, T)> = None;
    for code in 0..3usize.pow(m as u32) {
        let mut pattern = Vec::with_capacity(m);
        let mut c = code;
        for _ in 0..m {
            pattern.push(c % 3);
            c /= 3;
        }
        let mut u = vec![T::zero(); m];
        let free: Vec<usize> = (0..m).filter(|&i| pattern[i] == 2).collect();
        for i in 0..m {
            match pattern[i] {
                0 => u[i] = lo[i],
                1 => u[i] = hi[i],
                _ => {}
            }
        }
        if !free.is_empty() {
            let qff = qp.q.select(&free, &free);
            let rhs: Vec<T> = free
                .iter()
                .map(|&i| {
                    let fixed: T = (0..m).filter(|j| pattern[*j] != 2).map(|j| qp.q.get(i, j) * u[j]).sum();
                    -(qp.c[i] + fixed)
                })
                .collect();
            let Some(sol) = qff.solve(&rhs, T::of(1e-12)) else { continue };
            for (a, &i) in free.iter().enumerate() {
                u[i] = sol[a];
            }
        }
        let scale = T::one() + norm_inf(&lo).max(norm_inf(&hi));
        if free.iter().any(|&i| u[i] < lo[i] - tol * scale || u[i] > hi[i] + tol * scale) {
            continue;
        }
        let g = qp.gradient(&u);
        let gscale = T::one() + norm_inf(&g).max(norm_inf(&qp.c));
        let kkt = (0..m).all(|i| match pattern[i] {
            0 => g[i] >= -tol * gscale || lo[i] == hi[i],
            1 => g[i] <= tol * gscale || lo[i] == hi[i],
            _ => true,
        });
        if !kkt {
            continue;
        }
        let u = box_project(&u, &qp.bounds);
        let val = qp.objective(&u);
        if best.as_ref().is_none_or(|(_, b)| val < *b) {
            best = Some((u, val));
        }
    }
    best.ok_or(QpError::NoKktPoint)
}

/// Settings of the operator-splitting solver for polyhedral QPs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig<T> {
    /// Tikhonov term added to the Hessian.
    pub sigma: T,
    pub rho: T,
    pub alpha: T,
    pub eps_abs: T,
    pub eps_rel: T,
    pub eps_infeasible: T,
    pub max_iters: usize,
}

impl<T: Scalar> Default for AdmmConfig<T> {
    fn default() -> Self {
        Self {
            sigma: T::of(1e-6),
            rho: T::of(0.1),
            alpha: T::of(1.6),
            eps_abs: T::of(1e-9),
            eps_rel: T::of(1e-9),
            eps_infeasible: T::of(1e-7),
            max_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Solved,
    PrimalInfeasible,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpOutcome<T> {
    pub x: Vec<T>,
    pub status: QpStatus,
    pub iters: usize,
}

/// `minimize 0.5 x^T P x + q^T x` subject to `l <= A x <= u` by ADMM with adaptive penalty.
pub fn admm_qp<T: Scalar>(p: &Mat<T>, q: &[T], a: &Mat<T>, l: &[T], u: &[T], cfg: &AdmmConfig<T>) -> QpOutcome<T> {
    let nv = q.len();
    let nc = l.len();
    let p = p.add(&Mat::identity(nv).scale(cfg.sigma));
    let at = a.transpose();
    let ata = at.matmul(a);
    let clamp = |v: &[T]| -> Vec<T> { v.iter().zip(l.iter().zip(u)).map(|(&x, (&a, &b))| x.max(a).min(b)).collect() };
    let mut rho = cfg.rho;
    let factor = |rho: T| p.add(&ata.scale(rho)).inverse(T::of(1e-14));
    let mut kinv = factor(rho).expect("regularized KKT matrix is nonsingular");
    let mut x = vec![T::zero(); nv];
    let mut z = clamp(&a.matvec(&x));
    let mut y = vec![T::zero(); nc];
    let alpha = cfg.alpha;
    for it in 1..=cfg.max_iters {
        let w: Vec<T> = (0..nc).map(|i| rho * z[i] - y[i]).collect();
        let atw = at.matvec(&w);
        let rhs: Vec<T> = (0..nv).map(|i| -q[i] + atw[i]).collect();
        let xt = kinv.matvec(&rhs);
        let zt = a.matvec(&xt);
        let x_new: Vec<T> = (0..nv).map(|i| alpha * xt[i] + (T::one() - alpha) * x[i]).collect();
        let zr: Vec<T> = (0..nc).map(|i| alpha * zt[i] + (T::one() - alpha) * z[i]).collect();
        let z_new = clamp(&(0..nc).map(|i| zr[i] + y[i] / rho).collect::<Vec<_>>());
        let y_new: Vec<T> = (0..nc).map(|i| y[i] + rho * (zr[i] - z_new[i])).collect();
        let dy: Vec<T> = (0..nc).map(|i| y_new[i] - y[i]).collect();
        x = x_new;
        z = z_new;
        y = y_new;

        let ax = a.matvec(&x);
        let r_prim = norm_inf(&ax.iter().zip(&z).map(|(&a, &b)| a - b).collect::<Vec<_>>());
        let px = p.matvec(&x);
        let aty = at.matvec(&y);
        let dual: Vec<T> = (0..nv).map(|i| px[i] + q[i] + aty[i]).collect();
        let r_dual = norm_inf(&dual);
        let e_prim = cfg.eps_abs + cfg.eps_rel * norm_inf(&ax).max(norm_inf(&z));
        let e_dual = cfg.eps_abs + cfg.eps_rel * norm_inf(&px).max(norm_inf(&aty)).max(norm_inf(q));
        if r_prim <= e_prim && r_dual <= e_dual {
            return QpOutcome { x, status: QpStatus::Solved, iters: it };
        }
        let ndy = norm_inf(&dy);
        if ndy > T::zero() {
            let atdy = at.matvec(&dy);
            let support: T = (0..nc)
                .map(|i| {
                    if dy[i] > T::zero() {
                        u[i] * dy[i]
                    } else if dy[i] < T::zero() {
                        l[i] * dy[i]
                    } else {
                        T::zero()
                    }
                })
                .sum();
            if norm_inf(&atdy) <= cfg.eps_infeasible * ndy && support < -cfg.eps_infeasible * ndy {
                return QpOutcome {
                    x,
                    status: QpStatus::PrimalInfeasible,
                    iters: it,
                };
            }
        }
        if it % 25 == 0 && r_dual > T::zero() {
            let sp = r_prim / norm_inf(&ax).max(norm_inf(&z)).max(T::of(1e-30));
            let sd = r_dual / norm_inf(&px).max(norm_inf(&aty)).max(norm_inf(q)).max(T::of(1e-30));
            let ratio = (sp / sd.max(T::of(1e-30))).sqrt();
            let new_rho = (rho * ratio).max(T::of(1e-6)).min(T::of(1e6));
            if new_rho > rho * T::of(5.0) || new_rho < rho / T::of(5.0) {
                rho = new_rho;
                if let Some(k) = factor(rho) {
                    kinv = k;
                }
            }
        }
    }
    QpOutcome {
        x,
        status: QpStatus::MaxIters,
        iters: cfg.max_iters,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticSolution<T> {
    pub u: Vec<T>,
    pub x: Vec<T>,
    pub cost: T,
    /// Upper bound on the cost change caused by the Tikhonov term.
    pub sigma_effect: T,
    pub iters: usize,
    pub orthant: usize,
}

/// Optimistic problem: best `(u, x_next)` over all sign orthants.
pub fn solve_optimistic<T: Scalar>(oqp: &OptimisticQP<T>, cfg: &AdmmConfig<T>) -> Result<OptimisticSolution<T>, QpError> {
    let cost = &oqp.cost;
    let n = oqp.b.len();
    let m = cost.m();
    let nv = m + n;
    // variables ordered (u, x)
    let two = T::of(2.0);
    let mut p = Mat::zeros(nv, nv);
    for i in 0..m {
        for j in 0..m {
            p.set(i, j, two * cost.r_mat().get(i, j));
        }
    }
    for i in 0..n {
        for j in 0..n {
            p.set(m + i, m + j, two * cost.q_mat().get(i, j));
        }
        for j in 0..m {
            let s = two * cost.s_mat().get(i, j);
            p.set(m + i, j, s);
            p.set(j, m + i, s);
        }
    }
    let mut qv = cost.r_vec().to_vec();
    qv.extend_from_slice(cost.q_vec());
    let b_lo = oqp.b.lo();
    let b_hi = oqp.b.hi();
    let mut best: Option<OptimisticSolution<T>> = None;
    let mut total_iters = 0;
    for (oi, orth) in oqp.orthants.iter().enumerate() {
        let nc = 4 * n + nv;
        let mut a = Mat::zeros(nc, nv);
        let mut lo = vec![T::zero(); nc];
        let mut hi = vec![T::zero(); nc];
        let big = T::infinity();
        let pairs = [(&orth.a_l_plus, &orth.a_s_plus), (&orth.a_l_minus, &orth.a_s_minus)];
        for (pi, (al, as_)) in pairs.iter().enumerate() {
            for k in 0..n {
                // x_k - (A^l u)_k >= B_lo
                let r1 = pi * 2 * n + k;
                a.set(r1, m + k, T::one());
                for j in 0..m {
                    a.set(r1, j, -al.get(k, j));
                }
                lo[r1] = b_lo[k];
                hi[r1] = big;
                // x_k - (A^s u)_k <= B_hi
                let r2 = pi * 2 * n + n + k;
                a.set(r2, m + k, T::one());
                for j in 0..m {
                    a.set(r2, j, -as_.get(k, j));
                }
                lo[r2] = -big;
                hi[r2] = b_hi[k];
            }
        }
        for i in 0..nv {
            let r = 4 * n + i;
            a.set(r, i, T::one());
            let iv = if i < m { orth.ubox[i] } else { oqp.x_box[i - m] };
            lo[r] = iv.lo();
            hi[r] = iv.hi();
        }
        let out = admm_qp(&p, &qv, &a, &lo, &hi, cfg);
        total_iters += out.iters;
        if out.status == QpStatus::PrimalInfeasible {
            continue;
        }
        let u = box_project(&out.x[..m], &orth.ubox);
        let x = box_project(&out.x[m..], &oqp.x_box);
        let c = cost.eval(&x, &u);
        let sigma_effect = cfg.sigma * (dot(&u, &u) + dot(&x, &x));
        if best.as_ref().is_none_or(|b| c < b.cost) {
            best = Some(OptimisticSolution {
                u,
                x,
                cost: c,
                sigma_effect,
                iters: 0,
                orthant: oi,
            });
        }
    }
    let mut best = best.ok_or(QpError::AllOrthantsInfeasible)?;
    best.iters = total_iters;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn unit_box(m: usize) -> IVector<f64> {
        IVector::filled(m, Interval::new(-1.0, 1.0).unwrap())
    }

    #[test]
    fn projection_examples() {
        assert_eq!(box_project(&[-9.0, 9.0], &unit_box(2)), vec![-1.0, 1.0]);
        assert_eq!(box_project(&[0.3], &unit_box(1)), vec![0.3]);
        let d = IVector::new(vec![Interval::point(2.5)]);
        assert_eq!(box_project(&[7.0], &d), vec![2.5]);
    }

    #[test]
    fn oracle_examples() {
        let qp = BoxQP::new(Mat::identity(2).scale(2.0), vec![-4.0, 0.0], 0.0, unit_box(2)).unwrap();
        let (u, l) = oracle_boxqp(&qp).unwrap();
        assert_eq!(u, vec![1.0, 0.0]);
        assert!((l + 3.0).abs() < 1e-14);
        let lp = BoxQP::new(Mat::zeros(1, 1), vec![1.0], 0.0, unit_box(1)).unwrap();
        let (u, l) = oracle_boxqp(&lp).unwrap();
        assert_eq!((u[0], l), (-1.0, -1.0));
    }

    #[test]
    fn adares_scalar_cases() {
        let cfg = AdaResConfig {
            y0: Some(vec![0.5]),
            ..AdaResConfig::default()
        };
        let qp = BoxQP::new(Mat::identity(1), vec![0.0], 0.0, unit_box(1)).unwrap();
        let out = solve_idealistic(&qp, &cfg);
        assert!(out.converged && out.y[0].abs() < 1e-4 && qp.objective(&out.y) < 1e-8);
        let qp = BoxQP::new(Mat::identity(1), vec![-2.0], 2.0, unit_box(1)).unwrap();
        let out = solve_idealistic(&qp, &cfg);
        assert_eq!(out.y, vec![1.0]);
    }

    #[test]
    fn linear_program_sign_rule() {
        let qp = BoxQP::new(Mat::zeros(2, 2), vec![1.0, -1.0], 0.0, unit_box(2)).unwrap();
        let out = solve_idealistic(&qp, &AdaResConfig::default());
        assert_eq!(out.y, vec![-1.0, 1.0]);
    }

    #[test]
    fn admm_small_qp() {
        // min (x-2)^2 s.t. x <= 1
        let p = Mat::<f64>::identity(1).scale(2.0);
        let a = Mat::identity(1);
        let out = admm_qp(&p, &[-4.0], &a, &[-10.0], &[1.0], &AdmmConfig::default());
        assert_eq!(out.status, QpStatus::Solved);
        assert!((out.x[0] - 1.0).abs() < 1e-6);
        let a = Mat::from_rows(&[vec![1.0], vec![1.0]]);
        let out = admm_qp(&p, &[-4.0], &a, &[2.0, -10.0], &[10.0, 1.0], &AdmmConfig::default());
        assert_eq!(out.status, QpStatus::PrimalInfeasible);
    }
}
