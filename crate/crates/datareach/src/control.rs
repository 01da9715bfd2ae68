//! One-step control: affine over-approximation of the next state and its convex relaxations.

use crate::interval::{tensor_t_vec, tensor_vec, IMatrix, IVector, Interval, IntervalError};
use crate::knowledge::{KnowledgeBase, KnowledgeError};
use crate::linalg::{dot, norm2, Mat};
use crate::qpsolve::{solve_idealistic, solve_optimistic, AdaResConfig, AdmmConfig, BoxQP, QpError};
use crate::reach::{rough_enclosure, EnclosureMode, ReachConfig, ReachError};
use crate::scalar::Scalar;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid cost: {0}")]
    InvalidCost(String),
    #[error("assembled QP is not convex (smallest eigenvalue {min_eig})")]
    NonConvexAssembly { min_eig: f64 },
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Qp(#[from] QpError),
}

/// `c(y, u) = y^T Q y + 2 y^T S u + u^T R u + q^T y + r^T u + constant` with `y` the next state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCost<T> {
    q_mat: Mat<T>,
    r_mat: Mat<T>,
    s_mat: Mat<T>,
    q_vec: Vec<T>,
    r_vec: Vec<T>,
    constant: T,
}

impl<T: Scalar> QuadraticCost<T> {
    pub fn new(q_mat: Mat<T>, r_mat: Mat<T>, s_mat: Mat<T>, q_vec: Vec<T>, r_vec: Vec<T>, constant: T) -> Result<Self, ControlError> {
        let n = q_vec.len();
        let m = r_vec.len();
        if q_mat.rows() != n || q_mat.cols() != n || r_mat.rows() != m || r_mat.cols() != m || s_mat.rows() != n || s_mat.cols() != m {
            return Err(ControlError::InvalidCost("matrix shapes do not match (n, m)".into()));
        }
        let tol = T::of(1e-12);
        for (name, mat) in [("Q", &q_mat), ("R", &r_mat)] {
            if mat.asymmetry() > tol * (T::one() + mat.max_abs()) {
                return Err(ControlError::InvalidCost(format!("{name} is not symmetric")));
            }
        }
        let q_mat = q_mat.symmetrize();
        let r_mat = r_mat.symmetrize();
        let joint = Mat::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
            (true, true) => q_mat.get(i, j),
            (true, false) => s_mat.get(i, j - n),
            (false, true) => s_mat.get(j, i - n),
            (false, false) => r_mat.get(i - n, j - n),
        });
        let min_eig = joint.min_eigenvalue();
        if min_eig < -T::of(1e-9) {
            return Err(ControlError::InvalidCost(format!(
                "joint matrix is not positive semidefinite (eigenvalue {min_eig})"
            )));
        }
        Ok(Self {
            q_mat,
            r_mat,
            s_mat,
            q_vec,
            r_vec,
            constant,
        })
    }

    /// `weight * ||y||^2`.
    pub fn squared_norm(n: usize, m: usize, weight: T) -> Self {
        Self::new(
            Mat::identity(n).scale(weight),
            Mat::zeros(m, m),
            Mat::zeros(n, m),
            vec![T::zero(); n],
            vec![T::zero(); m],
            T::zero(),
        )
        .expect("nonnegative weight")
    }

    /// `weight * (y_index - target)^2`.
    pub fn setpoint(n: usize, m: usize, index: usize, target: T, weight: T) -> Result<Self, ControlError> {
        if index >= n {
            return Err(ControlError::InvalidCost(format!("setpoint index {index} out of range")));
        }
        let mut q = Mat::zeros(n, n);
        q.set(index, index, weight);
        let mut qv = vec![T::zero(); n];
        qv[index] = -T::of(2.0) * weight * target;
        Self::new(q, Mat::zeros(m, m), Mat::zeros(n, m), qv, vec![T::zero(); m], weight * target * target)
    }

    pub fn n(&self) -> usize {
        self.q_vec.len()
    }

    pub fn m(&self) -> usize {
        self.r_vec.len()
    }

    pub fn q_mat(&self) -> &Mat<T> {
        &self.q_mat
    }

    pub fn r_mat(&self) -> &Mat<T> {
        &self.r_mat
    }

    pub fn s_mat(&self) -> &Mat<T> {
        &self.s_mat
    }

    pub fn q_vec(&self) -> &[T] {
        &self.q_vec
    }

    pub fn r_vec(&self) -> &[T] {
        &self.r_vec
    }

    pub fn constant(&self) -> T {
        self.constant
    }

    pub fn eval(&self, y: &[T], u: &[T]) -> T {
        let two = T::of(2.0);
        dot(y, &self.q_mat.matvec(y))
            + two * dot(y, &self.s_mat.matvec(u))
            + dot(u, &self.r_mat.matvec(u))
            + dot(&self.q_vec, y)
            + dot(&self.r_vec, u)
            + self.constant
    }
}

/// `x_next ∈ (B + A⁺ u) ∩ (B + A⁻ u)` for every `u` in the control box.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOverApprox<T> {
    pub b: IVector<T>,
    pub a_plus: IMatrix<T>,
    pub a_minus: IMatrix<T>,
    /// Rough enclosure used for the second-order terms.
    pub s: IVector<T>,
    pub t: T,
    pub dt: T,
}

impl<T: Scalar> AffineOverApprox<T> {
    /// Box `(B + A⁺ u) ∩ (B + A⁻ u)`, or `None` if empty.
    pub fn next_state_box(&self, u: &[T]) -> Option<IVector<T>> {
        let p = &self.b + &self.a_plus.mul_point(u).ok()?;
        let m = &self.b + &self.a_minus.mul_point(u).ok()?;
        p.intersect(&m)
    }
}

/// Affine over-approximation of the next state from `R`, valid for all controls in `U`.
pub fn linearize<T: Scalar>(
    r: &IVector<T>,
    kb: &KnowledgeBase<T>,
    u: &IVector<T>,
    dt: T,
    rcfg: &ReachConfig<T>,
) -> Result<AffineOverApprox<T>, ControlError> {
    let s = rough_enclosure(r, kb, u, dt, rcfg)?;
    let er = kb.enclosures(r, u)?;
    let es = kb.enclosures(&s, u)?;
    let half = dt * dt / T::of(2.0);
    let gs_u = es.g.mul_vec(u)?;
    let hs = &es.f + &gs_u;
    let jf_gs = es.jf.mul_mat(&es.g)?;
    let a_minus = er.g.scale(dt).add(&jf_gs.add(&tensor_t_vec(&es.jg, &hs)?)?.scale(half))?;
    let jac_u = es.jf.add(&tensor_vec(&es.jg, u)?)?;
    let a_plus = er
        .g
        .scale(dt)
        .add(&jac_u.mul_mat(&es.g)?.add(&tensor_t_vec(&es.jg, &es.f)?)?.scale(half))?;
    let b = &(r + &er.f.scale(dt)) + &es.jf.mul_vec(&es.f)?.scale(half);
    Ok(AffineOverApprox {
        b,
        a_plus,
        a_minus,
        s,
        t: T::zero(),
        dt,
    })
}

fn blend<T: Scalar>(lo: T, hi: T, w: T) -> T {
    w * hi + (T::one() - w) * lo
}

/// Weighted representative `(A_ide, b_ide)` of the affine over-approximation.
pub fn idealistic_coeffs<T: Scalar>(aff: &AffineOverApprox<T>, wplus: T, wminus: T) -> (Mat<T>, Vec<T>) {
    let half = T::of(0.5);
    let b = aff
        .b
        .iter()
        .map(|iv| half * (blend(iv.lo(), iv.hi(), wplus) + blend(iv.lo(), iv.hi(), wminus)))
        .collect();
    let (n, m) = (aff.a_plus.rows(), aff.a_plus.cols());
    let a = Mat::from_fn(n, m, |k, l| {
        let p = aff.a_plus.get(k, l);
        let q = aff.a_minus.get(k, l);
        half * (blend(p.lo(), p.hi(), wplus) + blend(q.lo(), q.hi(), wminus))
    });
    (a, b)
}

/// `0.5 u^T Qi u + qi^T u + pi`, equal to the cost along `x_next = b_ide + A_ide u`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealisticQP<T> {
    pub qi: Mat<T>,
    pub qv: Vec<T>,
    pub pi: T,
    pub a_ide: Mat<T>,
    pub b_ide: Vec<T>,
    pub wplus: T,
    pub wminus: T,
}

impl<T: Scalar> IdealisticQP<T> {
    pub fn objective(&self, u: &[T]) -> T {
        T::of(0.5) * dot(u, &self.qi.matvec(u)) + dot(&self.qv, u) + self.pi
    }

    pub fn to_box_qp(&self, u: &IVector<T>) -> Result<BoxQP<T>, QpError> {
        BoxQP::new(self.qi.clone(), self.qv.clone(), self.pi, u.clone())
    }
}

/// Substitutes `x_next = b + A u` into the cost.
pub fn assemble_idealistic<T: Scalar>(cost: &QuadraticCost<T>, a: &Mat<T>, b: &[T]) -> Result<IdealisticQP<T>, ControlError> {
    if a.rows() != cost.n() || a.cols() != cost.m() || b.len() != cost.n() {
        return Err(ControlError::InvalidCost("affine model shape does not match the cost".into()));
    }
    let two = T::of(2.0);
    let at = a.transpose();
    let qa = cost.q_mat().matmul(a);
    let ats = at.matmul(cost.s_mat());
    let mut qi = at
        .matmul(&qa)
        .scale(two)
        .add(&ats.add(&ats.transpose()).scale(two))
        .add(&cost.r_mat().scale(two))
        .symmetrize();
    let qb = cost.q_mat().matvec(b);
    let stb = cost.s_mat().tmatvec(b);
    let atqb = at.matvec(&qb);
    let atq = at.matvec(cost.q_vec());
    let qv: Vec<T> = (0..cost.m())
        .map(|l| two * (stb[l] + atqb[l]) + atq[l] + cost.r_vec()[l])
        .collect();
    let pi = dot(b, &qb) + dot(cost.q_vec(), b) + cost.constant();
    let (eig, vecs) = qi.sym_eigen();
    let min_eig = eig.iter().copied().fold(T::infinity(), T::min);
    if min_eig < T::zero() {
        let floor = -T::of(1e-8) * T::one().max(qi.max_abs());
        if min_eig < floor {
            return Err(ControlError::NonConvexAssembly { min_eig: min_eig.as_f64() });
        }
        let d = Mat::diag(&eig.iter().map(|&e| e.max(T::zero())).collect::<Vec<_>>());
        qi = vecs.matmul(&d).matmul(&vecs.transpose()).symmetrize();
    }
    Ok(IdealisticQP {
        qi,
        qv,
        pi,
        a_ide: a.clone(),
        b_ide: b.to_vec(),
        wplus: T::zero(),
        wminus: T::zero(),
    })
}

/// Endpoint matrices for one sign orthant of the control box.
#[derive(Debug, Clone, PartialEq)]
pub struct Orthant<T> {
    pub ubox: IVector<T>,
    pub a_s_plus: Mat<T>,
    pub a_l_plus: Mat<T>,
    pub a_s_minus: Mat<T>,
    pub a_l_minus: Mat<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticQP<T> {
    pub orthants: Vec<Orthant<T>>,
    pub cost: QuadraticCost<T>,
    pub b: IVector<T>,
    pub x_box: IVector<T>,
}

/// Splits `U` into sign orthants and selects interval endpoints by sign.
pub fn assemble_optimistic<T: Scalar>(
    cost: &QuadraticCost<T>,
    aff: &AffineOverApprox<T>,
    u: &IVector<T>,
    x: &IVector<T>,
) -> OptimisticQP<T> {
    let m = u.len();
    let n = aff.b.len();
    let zero = T::zero();
    let pieces: Vec<Vec<(Interval<T>, bool)>> = u
        .iter()
        .map(|iv| {
            if iv.lo() >= zero {
                vec![(*iv, true)]
            } else if iv.hi() <= zero {
                vec![(*iv, false)]
            } else {
                vec![
                    (Interval::hull_of(iv.lo(), zero), false),
                    (Interval::hull_of(zero, iv.hi()), true),
                ]
            }
        })
        .collect();
    let total: usize = pieces.iter().map(Vec::len).product();
    let mut orthants = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut choice = Vec::with_capacity(m);
        for p in &pieces {
            choice.push(p[c % p.len()]);
            c /= p.len();
        }
        let ubox: IVector<T> = choice.iter().map(|(iv, _)| *iv).collect();
        let pick = |a: &IMatrix<T>, upper_if_nonneg: bool| {
            Mat::from_fn(n, m, |k, l| {
                let e = a.get(k, l);
                if choice[l].1 == upper_if_nonneg {
                    e.hi()
                } else {
                    e.lo()
                }
            })
        };
        orthants.push(Orthant {
            ubox,
            a_s_plus: pick(&aff.a_plus, true),
            a_l_plus: pick(&aff.a_plus, false),
            a_s_minus: pick(&aff.a_minus, true),
            a_l_minus: pick(&aff.a_minus, false),
        });
    }
    OptimisticQP {
        orthants,
        cost: cost.clone(),
        b: aff.b.clone(),
        x_box: x.clone(),
    }
}

fn real_times_box<T: Scalar>(m: &Mat<T>, v: &IVector<T>) -> IVector<T> {
    (0..m.rows())
        .map(|r| (0..m.cols()).fold(Interval::zero(), |acc, c| acc + v[c] * m.get(r, c)))
        .collect()
}

/// Bound on the gap between the optimal one-step cost and the relaxed optimum.
pub fn subopt_bound<T: Scalar>(cost: &QuadraticCost<T>, aff: &AffineOverApprox<T>, u: &IVector<T>, x: &IVector<T>) -> T {
    let two = T::of(2.0);
    let uabs = u.abs();
    let wb = aff.b.widths();
    let su = real_times_box(cost.s_mat(), u).abs();
    let qx = real_times_box(cost.q_mat(), x).abs();
    let qabs: Vec<T> = cost.q_vec().iter().map(|v| v.abs()).collect();
    let n = aff.b.len();
    let per = |a: &IMatrix<T>| -> T {
        let w: Vec<T> = (0..n)
            .map(|k| wb[k] + (0..a.cols()).map(|l| a.get(k, l).width() * uabs[l]).sum::<T>())
            .collect();
        let next = &aff.b + &a.mul_vec(u).expect("shape");
        let qn = real_times_box(cost.q_mat(), &next).abs();
        let k1: Vec<T> = (0..n).map(|k| two * su[k] + qabs[k] + two * qn[k]).collect();
        let k2: Vec<T> = (0..n).map(|k| two * su[k] + qabs[k] + two * qx[k]).collect();
        norm2(&w) * norm2(&k1).min(norm2(&k2))
    };
    per(&aff.a_plus).max(per(&aff.a_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlMode {
    #[default]
    Idealistic,
    Optimistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig<T> {
    pub mode: ControlMode,
    pub enclosure: ReachConfig<T>,
    pub adares: AdaResConfig<T>,
    pub admm: AdmmConfig<T>,
    pub wplus: T,
    pub wminus: T,
}

impl<T: Scalar> Default for ControlConfig<T> {
    fn default() -> Self {
        Self {
            mode: ControlMode::Idealistic,
            enclosure: ReachConfig {
                mode: EnclosureMode::Explicit,
                ..ReachConfig::default()
            },
            adares: AdaResConfig::default(),
            admm: AdmmConfig::default(),
            wplus: T::of(0.5),
            wminus: T::of(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlDiagnostics<T> {
    /// Cost predicted by the solved relaxation.
    pub predicted_cost: T,
    pub bound: T,
    pub solver_iters: usize,
    pub micros: u128,
    pub mode_used: ControlMode,
    pub fell_back: bool,
    pub mu_estimate: Option<T>,
    pub converged: bool,
}

/// One control step from state `x`: linearize, relax, solve.
#[allow(clippy::too_many_arguments)]
pub fn datacontrol_step<T: Scalar>(
    kb: &KnowledgeBase<T>,
    x: &[T],
    cost: &QuadraticCost<T>,
    u: &IVector<T>,
    xdom: &IVector<T>,
    dt: T,
    cfg: &ControlConfig<T>,
) -> Result<(Vec<T>, ControlDiagnostics<T>, AffineOverApprox<T>), ControlError> {
    let start = Instant::now();
    let r = IVector::from_point(x);
    let aff = linearize(&r, kb, u, dt, &cfg.enclosure)?;
    let bound = subopt_bound(cost, &aff, u, xdom);
    let idealistic = |fell_back: bool| -> Result<(Vec<T>, ControlDiagnostics<T>), ControlError> {
        let (a, b) = idealistic_coeffs(&aff, cfg.wplus, cfg.wminus);
        let mut qp = assemble_idealistic(cost, &a, &b)?;
        qp.wplus = cfg.wplus;
        qp.wminus = cfg.wminus;
        let out = solve_idealistic(&qp.to_box_qp(u)?, &cfg.adares);
        let predicted_cost = qp.objective(&out.y);
        Ok((
            out.y,
            ControlDiagnostics {
                predicted_cost,
                bound,
                solver_iters: out.iters,
                micros: 0,
                mode_used: ControlMode::Idealistic,
                fell_back,
                mu_estimate: Some(out.mu_estimate),
                converged: out.converged,
            },
        ))
    };
    let (uhat, mut diag) = match cfg.mode {
        ControlMode::Idealistic => idealistic(false)?,
        ControlMode::Optimistic => {
            let oqp = assemble_optimistic(cost, &aff, u, xdom);
            match solve_optimistic(&oqp, &cfg.admm) {
                Ok(sol) => (
                    sol.u,
                    ControlDiagnostics {
                        predicted_cost: sol.cost,
                        bound,
                        solver_iters: sol.iters,
                        micros: 0,
                        mode_used: ControlMode::Optimistic,
                        fell_back: false,
                        mu_estimate: None,
                        converged: true,
                    },
                ),
                Err(QpError::AllOrthantsInfeasible) => {
                    log::warn!("all optimistic orthants infeasible; using the idealistic relaxation");
                    idealistic(true)?
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    diag.micros = start.elapsed().as_micros();
    Ok((uhat, diag, aff))
}
