//! Over-approximation of reachable sets over the data-driven differential inclusion.

use crate::interval::{tensor_vec, IVector, Interval, IntervalError};
use crate::knowledge::{KnowledgeBase, KnowledgeError, LipschitzBounds};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error("time step {dt} is too large: the step-size bound requires dt < {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("no a priori enclosure found after {iters} iterations")]
    NoEnclosure { iters: usize },
    #[error("reachable set left the domain (component {component})")]
    LeftDomain { component: usize },
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Family of admissible control signals.
pub trait ControlClass<T>: Send + Sync {
    /// Enclosure of the control value at time `t`.
    fn eval_point(&self, t: T) -> IVector<T>;
    /// Enclosure of the control range over `[t0, t1]`.
    fn eval_range(&self, t0: T, t1: T) -> IVector<T>;
    /// Enclosure of the first time derivative over `[t0, t1]`.
    fn eval_deriv_range(&self, t0: T, t1: T) -> IVector<T>;
    /// Number of continuous derivatives; `usize::MAX` for smooth families.
    fn smoothness(&self) -> usize;
}

/// Constant control taking values in a fixed box.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantControl<T> {
    pub value: IVector<T>,
}

impl<T: Scalar> ControlClass<T> for ConstantControl<T> {
    fn eval_point(&self, _t: T) -> IVector<T> {
        self.value.clone()
    }
    fn eval_range(&self, _t0: T, _t1: T) -> IVector<T> {
        self.value.clone()
    }
    fn eval_deriv_range(&self, _t0: T, _t1: T) -> IVector<T> {
        IVector::zeros(self.value.len())
    }
    fn smoothness(&self) -> usize {
        usize::MAX
    }
}

/// Piecewise-constant control with grid-aligned pieces `values[i]` on `[t0 + i dt, t0 + (i+1) dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant<T> {
    pub t0: T,
    pub dt: T,
    pub values: Vec<IVector<T>>,
}

impl<T: Scalar> PiecewiseConstant<T> {
    fn piece(&self, t: T) -> usize {
        let r = ((t - self.t0) / self.dt + T::of(1e-9)).floor();
        let i = r.to_usize().unwrap_or(0);
        i.min(self.values.len().saturating_sub(1))
    }
}

impl<T: Scalar> ControlClass<T> for PiecewiseConstant<T> {
    fn eval_point(&self, t: T) -> IVector<T> {
        self.values[self.piece(t)].clone()
    }
    fn eval_range(&self, t0: T, t1: T) -> IVector<T> {
        let a = self.piece(t0);
        let b = self.piece(t1 - self.dt * T::of(1e-6)).max(a);
        (a + 1..=b).fold(self.values[a].clone(), |acc, i| acc.hull(&self.values[i]))
    }
    fn eval_deriv_range(&self, _t0: T, _t1: T) -> IVector<T> {
        IVector::zeros(self.values.first().map_or(0, IVector::len))
    }
    fn smoothness(&self) -> usize {
        0
    }
}

/// `u(t) = offset + amplitude * cos(freq * (t - t_ref)) + delta` with interval `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineComponent<T> {
    pub offset: T,
    pub amplitude: T,
    pub freq: T,
    pub delta: Interval<T>,
}

impl<T: Scalar> CosineComponent<T> {
    pub fn constant(offset: T, delta: Interval<T>) -> Self {
        Self {
            offset,
            amplitude: T::zero(),
            freq: T::zero(),
            delta,
        }
    }

    fn phase(&self, t0: T, t1: T, t_ref: T) -> Interval<T> {
        Interval::hull_of(self.freq * (t0 - t_ref), self.freq * (t1 - t_ref))
    }
}

/// Family of offset cosines with interval parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineFamily<T> {
    pub t_ref: T,
    pub components: Vec<CosineComponent<T>>,
}

impl<T: Scalar> CosineFamily<T> {
    /// Value for one member of the family (a `delta` realization).
    pub fn sample(&self, t: T, deltas: &[T]) -> Vec<T> {
        self.components
            .iter()
            .zip(deltas)
            .map(|(c, &d)| c.offset + c.amplitude * (c.freq * (t - self.t_ref)).cos() + d)
            .collect()
    }
}

impl<T: Scalar> ControlClass<T> for CosineFamily<T> {
    fn eval_point(&self, t: T) -> IVector<T> {
        self.eval_range(t, t)
    }
    fn eval_range(&self, t0: T, t1: T) -> IVector<T> {
        self.components
            .iter()
            .map(|c| c.phase(t0, t1, self.t_ref).cos() * c.amplitude + c.delta + c.offset)
            .collect()
    }
    fn eval_deriv_range(&self, t0: T, t1: T) -> IVector<T> {
        self.components
            .iter()
            .map(|c| c.phase(t0, t1, self.t_ref).sin() * (-c.amplitude * c.freq))
            .collect()
    }
    fn smoothness(&self) -> usize {
        usize::MAX
    }
}

/// Which a priori enclosure is used for `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnclosureMode {
    /// Closed-form enclosure; requires the step-size bound.
    Explicit,
    /// Iterative inclusion search, falling back to the closed form.
    Fixpoint,
    /// Closed form, then the iterative search; the tighter of the two is kept.
    #[default]
    Tightest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachConfig<T> {
    pub mode: EnclosureMode,
    pub inflation: T,
    pub max_enclosure_iters: usize,
}

impl<T: Scalar> Default for ReachConfig<T> {
    fn default() -> Self {
        Self {
            mode: EnclosureMode::Tightest,
            inflation: T::of(1.05),
            max_enclosure_iters: 20,
        }
    }
}

/// Data recorded for grid time `t`: the reachable box, its rough enclosure and `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachStepRecord<T> {
    pub t: T,
    pub r: IVector<T>,
    pub s: IVector<T>,
    pub beta: T,
    pub alpha_norm: T,
}

/// Result of one step: the record at `t` and the box at `t + dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachStep<T> {
    pub record: ReachStepRecord<T>,
    pub next: IVector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachTube<T> {
    pub grid: Vec<T>,
    pub steps: Vec<ReachStepRecord<T>>,
    pub dt: T,
    /// Index and reason of the step that stopped the computation early.
    pub failure: Option<(usize, ReachError)>,
}

impl<T: Scalar> ReachTube<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last_box(&self) -> Option<&IVector<T>> {
        self.steps.last().map(|s| &s.r)
    }
}

/// `sqrt(sum_k (L_fk + sum_l L_Gkl |V_l|)^2)`.
pub fn beta_of<T: Scalar>(lip: &LipschitzBounds<T>, vabs: &[T]) -> T {
    let g = lip.lg();
    (0..lip.n())
        .map(|k| {
            let s = lip.lf()[k] + (0..lip.m()).map(|l| g.get(k, l) * vabs[l]).sum::<T>();
            s * s
        })
        .sum::<T>()
        .sqrt()
}

/// `1 / (sqrt(n) beta_inf)` using the magnitudes of the control box; `+inf` when `beta_inf = 0`.
pub fn max_step_size<T: Scalar>(lip: &LipschitzBounds<T>, u: &IVector<T>) -> T {
    let b = beta_of(lip, &u.abs());
    if b == T::zero() {
        T::infinity()
    } else {
        T::one() / (T::from_usize(lip.n()).unwrap().sqrt() * b)
    }
}

fn clip<T: Scalar>(b: &IVector<T>, domain: &IVector<T>) -> Result<IVector<T>, ReachError> {
    b.iter()
        .zip(domain.iter())
        .enumerate()
        .map(|(k, (a, d))| a.intersect(d).ok_or(ReachError::LeftDomain { component: k }))
        .collect()
}

fn field<T: Scalar>(kb: &KnowledgeBase<T>, x: &IVector<T>, v: &IVector<T>) -> Result<IVector<T>, ReachError> {
    let enc = kb.enclosures(x, v)?;
    Ok(&enc.f + &enc.g.mul_vec(v)?)
}

/// Closed-form a priori enclosure, intersected with the domain.
pub fn rough_enclosure_explicit<T: Scalar>(
    r: &IVector<T>,
    kb: &KnowledgeBase<T>,
    v: &IVector<T>,
    dt: T,
) -> Result<IVector<T>, ReachError> {
    let lip = kb.lip();
    let sqrt_n = T::from_usize(lip.n()).unwrap().sqrt();
    let beta = beta_of(lip, &v.abs());
    let q = sqrt_n * dt * beta;
    if q >= T::one() {
        let limit = if beta == T::zero() { T::infinity() } else { T::one() / (sqrt_n * beta) };
        return Err(ReachError::StepTooLarge {
            dt: dt.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let h = field(kb, r, v)?;
    let rad = dt * h.inf_norm() / (T::one() - q);
    clip(&r.inflate(rad), kb.domain())
}

fn inclusion_image<T: Scalar>(
    r: &IVector<T>,
    s: &IVector<T>,
    kb: &KnowledgeBase<T>,
    v: &IVector<T>,
    dt: T,
) -> Result<IVector<T>, ReachError> {
    let h = field(kb, s, v)?;
    Ok(r.iter()
        .zip(h.iter())
        .map(|(&a, b)| a + b.times_interval_from_zero(dt))
        .collect())
}

/// Checks `R + [0, dt] (f(S) + G(S) V) ⊆ S`.
pub fn is_valid_enclosure<T: Scalar>(
    r: &IVector<T>,
    s: &IVector<T>,
    kb: &KnowledgeBase<T>,
    v: &IVector<T>,
    dt: T,
) -> Result<bool, ReachError> {
    Ok(inclusion_image(r, s, kb, v, dt)?.subset_of(s))
}

/// Iterative a priori enclosure; the returned box satisfies the inclusion test.
pub fn rough_enclosure_fixpoint<T: Scalar>(
    r: &IVector<T>,
    kb: &KnowledgeBase<T>,
    v: &IVector<T>,
    dt: T,
    cfg: &ReachConfig<T>,
) -> Result<IVector<T>, ReachError> {
    let mut s = r.clone();
    for _ in 0..cfg.max_enclosure_iters {
        let img = inclusion_image(r, &s, kb, v, dt)?;
        if img.subset_of(&s) {
            return Ok(s);
        }
        let grown: IVector<T> = s
            .hull(&img)
            .iter()
            .zip(r.iter())
            .map(|(g, r0)| {
                let excess = g.width() - r0.width();
                g.inflate((cfg.inflation - T::one()) * excess / T::of(2.0) + T::epsilon() * (T::one() + g.abs()))
            })
            .collect();
        s = clip(&grown, kb.domain())?;
    }
    Err(ReachError::NoEnclosure {
        iters: cfg.max_enclosure_iters,
    })
}

/// Rough enclosure according to `cfg.mode`.
pub fn rough_enclosure<T: Scalar>(
    r: &IVector<T>,
    kb: &KnowledgeBase<T>,
    v: &IVector<T>,
    dt: T,
    cfg: &ReachConfig<T>,
) -> Result<IVector<T>, ReachError> {
    match cfg.mode {
        EnclosureMode::Explicit => rough_enclosure_explicit(r, kb, v, dt),
        EnclosureMode::Fixpoint => match rough_enclosure_fixpoint(r, kb, v, dt, cfg) {
            Ok(s) => Ok(s),
            Err(ReachError::NoEnclosure { .. }) => rough_enclosure_explicit(r, kb, v, dt),
            Err(e) => Err(e),
        },
        EnclosureMode::Tightest => {
            let explicit = rough_enclosure_explicit(r, kb, v, dt)?;
            match rough_enclosure_fixpoint(r, kb, v, dt, cfg) {
                Ok(fp) if fp.sum_width() < explicit.sum_width() => Ok(fp),
                _ => Ok(explicit),
            }
        }
    }
}

fn alpha_surrogate<T: Scalar>(f: &IVector<T>, g: &crate::interval::IMatrix<T>, v: &IVector<T>) -> T {
    let vabs = v.abs();
    (0..f.len())
        .map(|k| f[k].abs() + (0..g.cols()).map(|l| g.get(k, l).abs() * vabs[l]).sum::<T>())
        .fold(T::zero(), T::max)
}

/// Second-order interval Taylor step from `R` at time `t`.
pub fn datareach_step<T: Scalar>(
    r: &IVector<T>,
    kb: &KnowledgeBase<T>,
    ctrl: &dyn ControlClass<T>,
    t: T,
    dt: T,
    cfg: &ReachConfig<T>,
) -> Result<ReachStep<T>, ReachError> {
    let v = ctrl.eval_range(t, t + dt);
    let vt = ctrl.eval_point(t);
    let v1 = ctrl.eval_deriv_range(t, t + dt);
    let s = rough_enclosure(r, kb, &v, dt, cfg)?;
    let enc_r = kb.enclosures(r, &v)?;
    let enc_s = kb.enclosures(&s, &v)?;
    let first = &enc_r.f + &enc_r.g.mul_vec(&vt)?;
    let jac = enc_s.jf.add(&tensor_vec(&enc_s.jg, &v)?)?;
    let hs = &enc_s.f + &enc_s.g.mul_vec(&v)?;
    let second = jac.mul_vec(&hs)?;
    let third = enc_s.g.mul_vec(&v1)?;
    let half_dt2 = dt * dt / T::of(2.0);
    let taylor = &(r + &first.scale(dt)) + &(&second + &third).scale(half_dt2);
    let euler = r + &hs.scale(dt);
    let next = clip(&taylor.intersect(&euler).unwrap_or(taylor), kb.domain())?;
    Ok(ReachStep {
        record: ReachStepRecord {
            t,
            r: r.clone(),
            s,
            beta: beta_of(kb.lip(), &v.abs()),
            alpha_norm: alpha_surrogate(&enc_r.f, &enc_r.g, &v),
        },
        next,
    })
}

/// First-order step for controls without a continuous derivative.
pub fn datareach_step_c0<T: Scalar>(
    r: &IVector<T>,
    kb: &KnowledgeBase<T>,
    ctrl: &dyn ControlClass<T>,
    t: T,
    dt: T,
    cfg: &ReachConfig<T>,
) -> Result<ReachStep<T>, ReachError> {
    let v = ctrl.eval_range(t, t + dt);
    let s = rough_enclosure(r, kb, &v, dt, cfg)?;
    let enc_r = kb.enclosures(r, &v)?;
    let hs = field(kb, &s, &v)?;
    let next = clip(&(r + &hs.scale(dt)), kb.domain())?;
    Ok(ReachStep {
        record: ReachStepRecord {
            t,
            r: r.clone(),
            s,
            beta: beta_of(kb.lip(), &v.abs()),
            alpha_norm: alpha_surrogate(&enc_r.f, &enc_r.g, &v),
        },
        next,
    })
}

/// Tube of `max(steps, 1)` grid points starting from the point `x_start` at `t0`.
pub fn datareach<T: Scalar>(
    kb: &KnowledgeBase<T>,
    x_start: &[T],
    ctrl: &dyn ControlClass<T>,
    t0: T,
    dt: T,
    steps: usize,
    cfg: &ReachConfig<T>,
) -> ReachTube<T> {
    let rows = steps.max(1);
    let mut tube = ReachTube {
        grid: Vec::with_capacity(rows),
        steps: Vec::with_capacity(rows),
        dt,
        failure: None,
    };
    let mut r = IVector::from_point(x_start);
    for i in 0..rows {
        let t = t0 + dt * T::from_usize(i).unwrap();
        let res = if ctrl.smoothness() == 0 {
            datareach_step_c0(&r, kb, ctrl, t, dt, cfg)
        } else {
            datareach_step(&r, kb, ctrl, t, dt, cfg)
        };
        match res {
            Ok(step) => {
                tube.grid.push(t);
                tube.steps.push(step.record);
                r = step.next;
            }
            Err(_) if i + 1 == rows => {
                let v = ctrl.eval_range(t, t + dt);
                tube.grid.push(t);
                tube.steps.push(ReachStepRecord {
                    t,
                    r: r.clone(),
                    s: r.clone(),
                    beta: beta_of(kb.lip(), &v.abs()),
                    alpha_norm: T::zero(),
                });
            }
            Err(e) => {
                tube.failure = Some((i, e));
                break;
            }
        }
    }
    tube
}
