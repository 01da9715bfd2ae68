//! Benchmark dynamics, an RK4 ground-truth simulator, excitation data and closed-loop drivers.

use crate::control::{
    datacontrol_step, AffineOverApprox, ControlConfig, ControlDiagnostics, ControlError, ControlMode, QuadraticCost,
};
use crate::interval::{IMatrix, IVector, Interval};
use crate::knowledge::{
    Decoupling, GradientBounds, KnowledgeBase, KnowledgeConfig, KnowledgeError, LinearKnown, LipschitzBounds,
    PartialDynamics, Sample, SideInfoSet, VectorFieldBounds,
};
use crate::linalg::Mat;
use crate::reach::{max_step_size, EnclosureMode, ReachConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(&[f64]) -> Mat<f64> + Send + Sync>;

/// Ground-truth control-affine system with the prior knowledge handed to the learner.
#[derive(Clone)]
pub struct SystemSpec {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub f_true: VectorField,
    pub g_true: MatrixField,
    pub u: IVector<f64>,
    pub x: IVector<f64>,
    pub lip: LipschitzBounds<f64>,
    pub side: SideInfoSet<f64>,
    /// Box on which the Lipschitz declarations hold.
    pub test_box: IVector<f64>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl SystemSpec {
    pub fn xdot(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let f = (self.f_true)(x);
        let g = (self.g_true)(x);
        let gu = g.matvec(u);
        f.iter().zip(&gu).map(|(a, b)| a + b).collect()
    }

    pub fn max_step(&self) -> f64 {
        max_step_size(&self.lip, &self.u)
    }

    /// Empty knowledge base over the system domain.
    pub fn empty_knowledge(&self, cfg: KnowledgeConfig<f64>) -> Result<KnowledgeBase<f64>, KnowledgeError> {
        KnowledgeBase::empty(self.lip.clone(), self.side.clone(), self.x.clone(), cfg)
    }

    /// Knowledge base built from `samples` with a final fixpoint refresh.
    pub fn knowledge(&self, samples: &[Sample<f64>], cfg: KnowledgeConfig<f64>) -> Result<KnowledgeBase<f64>, KnowledgeError> {
        crate::knowledge::build_knowledge(samples, self.lip.clone(), self.side.clone(), self.x.clone(), cfg)
    }
}

fn boxes(b: &[(f64, f64)]) -> IVector<f64> {
    b.iter().map(|&(lo, hi)| Interval::hull_of(lo, hi)).collect()
}

/// Side information levels for the unicycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnicycleInfo {
    /// Lipschitz bounds only.
    Lipschitz,
    /// Lipschitz bounds and dependence on the heading only.
    #[default]
    Heading,
    /// Heading dependence plus `f = 0` and `G_32 = 1`.
    Exact,
}

pub fn unicycle() -> SystemSpec {
    unicycle_with(UnicycleInfo::Heading)
}

pub fn unicycle_with(info: UnicycleInfo) -> SystemSpec {
    let n = 3;
    let m = 2;
    let mut lg = Mat::zeros(n, m);
    lg.set(0, 0, 1.1);
    lg.set(1, 0, 1.1);
    lg.set(2, 1, 0.1);
    let lip = LipschitzBounds::new(vec![0.01; 3], lg).expect("valid bounds");
    let x = boxes(&[(-5.0, 5.0), (-5.0, 5.0), (-PI, PI)]);
    let mut side = SideInfoSet::default();
    if info != UnicycleInfo::Lipschitz {
        side.decoupling = Some(Decoupling::uniform(n, m, &[2], &[2]));
    }
    if info == UnicycleInfo::Exact {
        let big = Interval::symmetric(KnowledgeConfig::<f64>::default().m_bound);
        let mut rg = IMatrix::filled(n, m, big);
        rg.set(2, 1, Interval::point(1.0));
        side.vf_bounds = Some(VectorFieldBounds {
            region: x.clone(),
            rf: IVector::zeros(n),
            rg,
        });
        side.grad_bounds = Some(GradientBounds {
            region: None,
            jf: (0..n).flat_map(|k| (0..n).map(move |p| (k, p, Interval::zero()))).collect(),
            jg: (0..n).map(|p| (2, 1, p, Interval::zero())).collect(),
        });
    }
    SystemSpec {
        name: "unicycle".into(),
        n,
        m,
        f_true: Arc::new(|_x| vec![0.0; 3]),
        g_true: Arc::new(|x| Mat::from_rows(&[vec![x[2].cos(), 0.0], vec![x[2].sin(), 0.0], vec![0.0, 1.0]])),
        u: boxes(&[(-3.0, 3.0), (-PI, PI)]),
        test_box: x.clone(),
        x,
        lip,
        side,
    }
}

const QR_CD_V: f64 = 0.25;
const QR_CD_PHI: f64 = 0.02255;
const QR_G: f64 = 9.81;
const QR_MASS: f64 = 1.25;
const QR_ARM: f64 = 0.5;
const QR_IYY: f64 = 0.03;

/// Planar quadrotor with state `[p_x, v_x, p_y, v_y, phi, omega]` and thrusts `[T1, T2]`.
pub fn quadrotor() -> SystemSpec {
    let n = 6;
    let m = 2;
    let f_true: VectorField = Arc::new(|x| {
        vec![
            x[1],
            -QR_CD_V * x[1] / QR_MASS,
            x[3],
            -(QR_MASS * QR_G + QR_CD_V * x[3]) / QR_MASS,
            x[5],
            -QR_CD_PHI * x[5] / (2.0 * QR_IYY),
        ]
    });
    let g_true: MatrixField = Arc::new(|x| {
        let (s, c) = x[4].sin_cos();
        let r = QR_ARM / (2.0 * QR_IYY);
        Mat::from_rows(&[
            vec![0.0, 0.0],
            vec![-s / QR_MASS, -s / QR_MASS],
            vec![0.0, 0.0],
            vec![c / QR_MASS, c / QR_MASS],
            vec![0.0, 0.0],
            vec![-r, r],
        ])
    });
    let mut lg_res = Mat::zeros(n, m);
    for l in 0..m {
        lg_res.set(1, l, 0.9);
        lg_res.set(3, l, 0.9);
        lg_res.set(5, l, 0.01);
    }
    let residual_lip = LipschitzBounds::new(vec![0.0, 0.3, 0.0, 0.3, 0.0, 0.9], lg_res.clone()).expect("valid bounds");
    let lip = LipschitzBounds::new(vec![1.0, 0.3, 1.0, 0.3, 1.0, 0.9], lg_res).expect("valid bounds");
    let mut a = Mat::zeros(n, n);
    a.set(0, 1, 1.0);
    a.set(2, 3, 1.0);
    a.set(4, 5, 1.0);
    let side = SideInfoSet {
        decoupling: Some(Decoupling::uniform(n, m, &[1, 3, 5], &[4])),
        partial: Some(PartialDynamics {
            known: Arc::new(LinearKnown { a, b: Mat::zeros(n, m) }),
            residual_lip,
            residual_f_range: None,
            residual_g_range: None,
        }),
        ..SideInfoSet::default()
    };
    let x = boxes(&[
        (-20.0, 20.0),
        (-10.0, 10.0),
        (-20.0, 20.0),
        (-20.0, 20.0),
        (-FRAC_PI_2, FRAC_PI_2),
        (-5.0, 5.0),
    ]);
    SystemSpec {
        name: "quadrotor".into(),
        n,
        m,
        f_true,
        g_true,
        u: boxes(&[(0.0, 18.4), (0.0, 18.4)]),
        test_box: x.clone(),
        x,
        lip,
        side,
    }
}

/// Damaged aircraft with state `[w_l, w_v, q, theta, h]` and inputs `[delta_e, delta_t]` (centiradians).
pub fn aircraft() -> SystemSpec {
    let n = 5;
    let m = 2;
    let f_true: VectorField = Arc::new(|x| {
        vec![
            -0.021 * x[0] + 0.122 * x[1] - 0.322 * x[2],
            -0.209 * x[0] - 0.53 * x[1] + 2.21 * x[2],
            0.017 * x[0] + 0.01 * x[0].cos() * x[0] - 0.164 * x[1] + 0.15 * x[0].sin() * x[1] - 0.421 * x[2],
            x[2],
            -x[1] + 2.21 * x[3],
        ]
    });
    let g_true: MatrixField = Arc::new(|x| {
        Mat::from_rows(&[
            vec![0.01, 1.0],
            vec![-0.064, -0.044],
            vec![-0.378, 0.544 + 0.5 * x[1].sin()],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        ])
    });
    let mut lg = Mat::from_fn(n, m, |_, _| 0.01);
    lg.set(2, 1, 0.5);
    let lf = vec![0.4, 3.0, 4.0, 1.0, 3.0];
    let lip = LipschitzBounds::new(lf.clone(), lg.clone()).expect("valid bounds");
    let mut lf_res = lf;
    lf_res[3] = 0.0;
    for l in 0..m {
        lg.set(3, l, 0.0);
    }
    let residual_lip = LipschitzBounds::new(lf_res, lg).expect("valid bounds");
    let mut a = Mat::zeros(n, n);
    a.set(3, 2, 1.0);
    let side = SideInfoSet {
        decoupling: Some(Decoupling::uniform(n, m, &[0, 1, 2, 3], &[1, 2])),
        partial: Some(PartialDynamics {
            known: Arc::new(LinearKnown { a, b: Mat::zeros(n, m) }),
            residual_lip,
            residual_f_range: None,
            residual_g_range: None,
        }),
        ..SideInfoSet::default()
    };
    SystemSpec {
        name: "aircraft".into(),
        n,
        m,
        f_true,
        g_true,
        u: boxes(&[(-5.0, 5.0), (-5.0, 5.0)]),
        x: IVector::filled(n, Interval::hull_of(-50.0, 150.0)),
        test_box: IVector::filled(n, Interval::hull_of(-20.0, 20.0)),
        lip,
        side,
    }
}

pub fn by_name(name: &str) -> Option<SystemSpec> {
    match name {
        "unicycle" => Some(unicycle()),
        "quadrotor" => Some(quadrotor()),
        "aircraft" => Some(aircraft()),
        _ => None,
    }
}

fn warn_if_outside(sys: &SystemSpec, x: &[f64], t: f64) {
    if !sys.x.contains_point(x) {
        log::warn!("{}: state left the domain at t = {t}", sys.name);
    }
}

/// Classical RK4 step with `u` held constant.
pub fn rk4_step(sys: &SystemSpec, x: &[f64], u: &[f64], h: f64) -> Vec<f64> {
    rk4_generic(x, h, |y, _| sys.xdot(y, u), 0.0)
}

fn rk4_generic(x: &[f64], h: f64, f: impl Fn(&[f64], f64) -> Vec<f64>, t: f64) -> Vec<f64> {
    let shift = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> { a.iter().zip(k).map(|(a, k)| a + s * k).collect() };
    let k1 = f(x, t);
    let k2 = f(&shift(x, &k1, h / 2.0), t + h / 2.0);
    let k3 = f(&shift(x, &k2, h / 2.0), t + h / 2.0);
    let k4 = f(&shift(x, &k3, h), t + h);
    (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates under `u_signal(t)`, evaluated at the RK4 stage times; returns `(t, x)` at every step.
pub fn simulate(
    sys: &SystemSpec,
    x0: &[f64],
    u_signal: &dyn Fn(f64) -> Vec<f64>,
    t0: f64,
    t1: f64,
    h: f64,
) -> Vec<(f64, Vec<f64>)> {
    let steps = ((t1 - t0) / h - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    out.push((t0, x.clone()));
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let hh = h.min(t1 - t);
        x = rk4_generic(&x, hh, |y, s| sys.xdot(y, &u_signal(s)), t);
        warn_if_outside(sys, &x, t + hh);
        out.push((t + hh, x.clone()));
    }
    out
}

/// Holds `u` for `dt` using `substeps` RK4 steps.
pub fn hold(sys: &SystemSpec, x: &[f64], u: &[f64], dt: f64, substeps: usize) -> Vec<f64> {
    let h = dt / substeps.max(1) as f64;
    let mut y = x.to_vec();
    for _ in 0..substeps.max(1) {
        y = rk4_step(sys, &y, u, h);
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcitationMode {
    /// Every control is the point of `U` closest to zero.
    Zero,
    /// Independent uniform draws per component.
    Random,
    /// A zero first sample, then one random nonzero component per sample (cycling through the axes).
    #[default]
    SingleAxis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationConfig {
    pub mode: ExcitationMode,
    /// Draws are shrunk toward the zero point of `U` by this factor.
    pub scale: f64,
    pub substeps: usize,
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        Self {
            mode: ExcitationMode::SingleAxis,
            scale: 1.0,
            substeps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub samples: Vec<Sample<f64>>,
    pub final_state: Vec<f64>,
    pub final_time: f64,
}

fn zero_point(u: &IVector<f64>) -> Vec<f64> {
    u.iter().map(|iv| 0.0f64.clamp(iv.lo(), iv.hi())).collect()
}

/// Draws the piecewise-constant excitation controls.
pub fn excitation_controls(u: &IVector<f64>, count: usize, seed: u64, cfg: &ExcitationConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = zero_point(u);
    let m = u.len();
    let draw = |l: usize, rng: &mut ChaCha8Rng| {
        let iv = u[l];
        let r = if iv.width() > 0.0 { rng.gen_range(iv.lo()..=iv.hi()) } else { iv.lo() };
        z[l] + cfg.scale * (r - z[l])
    };
    (0..count)
        .map(|i| match cfg.mode {
            ExcitationMode::Zero => z.clone(),
            ExcitationMode::Random => (0..m).map(|l| draw(l, &mut rng)).collect(),
            ExcitationMode::SingleAxis => {
                let mut v = z.clone();
                if i > 0 {
                    let l = (i - 1) % m;
                    v[l] = draw(l, &mut rng);
                }
                v
            }
        })
        .collect()
}

/// `count` samples along the trajectory from `x0` under seeded excitation controls held for `dt` each.
pub fn excite(sys: &SystemSpec, x0: &[f64], count: usize, dt: f64, seed: u64, cfg: &ExcitationConfig) -> Excitation {
    excite_with(sys, x0, &excitation_controls(&sys.u, count, seed, cfg), dt, cfg.substeps)
}

/// Samples along the trajectory under the given controls.
pub fn excite_with(sys: &SystemSpec, x0: &[f64], controls: &[Vec<f64>], dt: f64, substeps: usize) -> Excitation {
    let mut x = x0.to_vec();
    let mut samples = Vec::with_capacity(controls.len());
    for (i, u) in controls.iter().enumerate() {
        let t = i as f64 * dt;
        samples.push(Sample::new(t, x.clone(), sys.xdot(&x, u), u.clone()));
        x = hold(sys, &x, u, dt, substeps);
        warn_if_outside(sys, &x, t + dt);
    }
    Excitation {
        samples,
        final_state: x,
        final_time: controls.len() as f64 * dt,
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dt: f64,
    pub init_len: usize,
    pub x0: Vec<f64>,
    pub cost: QuadraticCost<f64>,
    pub stop_level: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub control: ControlConfig<f64>,
    /// Draw `w+`, `w-` from the seed; otherwise keep the values in `control`.
    pub random_weights: bool,
    pub excitation: ExcitationConfig,
    /// Controls used for the initial trajectory instead of seeded draws.
    pub init_controls: Option<Vec<Vec<f64>>>,
    pub refresh_every: usize,
    pub knowledge: KnowledgeConfig<f64>,
    /// Stop as soon as this component enters the band.
    pub stop_band: Option<(usize, f64, f64)>,
}

impl ExperimentConfig {
    fn base(dt: f64, x0: Vec<f64>, cost: QuadraticCost<f64>) -> Self {
        Self {
            dt,
            init_len: 10,
            x0,
            cost,
            stop_level: 0.1,
            max_steps: 150,
            seed: 0,
            control: ControlConfig::default(),
            random_weights: true,
            excitation: ExcitationConfig::default(),
            init_controls: None,
            refresh_every: 25,
            knowledge: KnowledgeConfig::default(),
            stop_band: None,
        }
    }

    /// Drive the unicycle to the origin.
    pub fn unicycle() -> Self {
        let mut c = Self::base(0.1, vec![-2.0, -2.5, FRAC_PI_2], QuadraticCost::squared_norm(3, 2, 0.5));
        c.excitation.mode = ExcitationMode::Random;
        c.seed = 114;
        c
    }

    /// Horizontal speed to 5.
    pub fn quadrotor() -> Self {
        let cost = QuadraticCost::setpoint(6, 2, 1, 5.0, 0.5).expect("valid cost");
        let mut c = Self::base(0.01, vec![0.0, 0.0, 5.0, 0.0, 0.0, 0.0], cost);
        c.control.enclosure = ReachConfig {
            mode: EnclosureMode::Fixpoint,
            ..ReachConfig::default()
        };
        c.excitation.scale = 0.2;
        c.stop_level = 0.0;
        c.max_steps = 500;
        c.stop_band = Some((1, 4.9, 5.1));
        c
    }

    /// Pitch angle to 5.
    pub fn aircraft() -> Self {
        let cost = QuadraticCost::setpoint(5, 2, 3, 5.0, 0.5).expect("valid cost");
        let mut c = Self::base(0.01, vec![0.0, 0.0, 0.0, 0.0, 100.0], cost);
        c.stop_level = 0.0;
        c.max_steps = 300;
        c.stop_band = Some((3, 4.5, 5.5));
        c
    }

    pub fn for_system(name: &str) -> Option<Self> {
        match name {
            "unicycle" => Some(Self::unicycle()),
            "quadrotor" => Some(Self::quadrotor()),
            "aircraft" => Some(Self::aircraft()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub i: usize,
    pub t: f64,
    pub u: Vec<f64>,
    /// Realized one-step cost at the next state.
    pub cost: f64,
    pub bound: f64,
    pub solver_iters: usize,
    pub micros: u128,
    pub predicted_cost: f64,
    pub x_next: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub system: String,
    pub mode: String,
    pub wplus: f64,
    pub wminus: f64,
    pub init_len: usize,
    pub rows: Vec<StepRow>,
    pub reached: bool,
    pub steps_to_goal: Option<usize>,
    pub cumulative_cost: f64,
    pub mean_micros: f64,
    pub max_micros: u128,
    pub bound_mean: f64,
    pub bound_max: f64,
    pub fallbacks: usize,
    pub failure: Option<(usize, String)>,
    #[serde(skip)]
    pub error: Option<ControlError>,
    pub final_state: Vec<f64>,
}

impl RunReport {
    pub fn steps(&self) -> usize {
        self.rows.len()
    }
}

/// Per-step state exposed to an observer during a closed-loop run.
pub struct StepContext<'a> {
    pub i: usize,
    pub x: &'a [f64],
    pub u: &'a [f64],
    pub kb: &'a KnowledgeBase<f64>,
    pub aff: &'a AffineOverApprox<f64>,
    pub diag: &'a ControlDiagnostics<f64>,
}

pub fn run_closed_loop(sys: &SystemSpec, cfg: &ExperimentConfig) -> Result<RunReport, KnowledgeError> {
    run_closed_loop_with(sys, cfg, &mut |_| {})
}

fn in_goal(cfg: &ExperimentConfig, x: &[f64], realized: f64) -> bool {
    match cfg.stop_band {
        Some((k, lo, hi)) => x[k] >= lo && x[k] <= hi,
        None => realized <= cfg.stop_level,
    }
}

/// Closed loop: excitation data, then one control step, one RK4 hold and one appended sample per iteration.
pub fn run_closed_loop_with(
    sys: &SystemSpec,
    cfg: &ExperimentConfig,
    observer: &mut dyn FnMut(&StepContext<'_>),
) -> Result<RunReport, KnowledgeError> {
    let mut control = cfg.control.clone();
    if cfg.random_weights {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(1);
        control.wplus = rng.gen();
        control.wminus = rng.gen();
    }
    let ex = match &cfg.init_controls {
        Some(c) => excite_with(sys, &cfg.x0, &c[..c.len().min(cfg.init_len)], cfg.dt, cfg.excitation.substeps),
        None => excite(sys, &cfg.x0, cfg.init_len, cfg.dt, cfg.seed, &cfg.excitation),
    };
    let mut kb = sys.knowledge(&ex.samples, cfg.knowledge)?;
    let mut x = ex.final_state.clone();
    let mut t = ex.final_time;
    let mut rows = Vec::new();
    let mut failure = None;
    let mut reached = false;
    let mut fallbacks = 0;
    for i in 0..cfg.max_steps {
        let (u, diag, aff) = match datacontrol_step(&kb, &x, &cfg.cost, &sys.u, &sys.x, cfg.dt, &control) {
            Ok(r) => r,
            Err(e) => {
                failure = Some((i, e));
                break;
            }
        };
        observer(&StepContext {
            i,
            x: &x,
            u: &u,
            kb: &kb,
            aff: &aff,
            diag: &diag,
        });
        if diag.fell_back {
            fallbacks += 1;
        }
        let x_next = hold(sys, &x, &u, cfg.dt, cfg.excitation.substeps);
        warn_if_outside(sys, &x_next, t + cfg.dt);
        let realized = cfg.cost.eval(&x_next, &u);
        let sample = Sample::new(t, x.clone(), sys.xdot(&x, &u), u.clone());
        if let Err(e) = kb.add_sample(sample) {
            failure = Some((i, e.into()));
            break;
        }
        if cfg.refresh_every > 0 && (i + 1) % cfg.refresh_every == 0 {
            kb.refresh()?;
        }
        rows.push(StepRow {
            i,
            t,
            u,
            cost: realized,
            bound: diag.bound,
            solver_iters: diag.solver_iters,
            micros: diag.micros,
            predicted_cost: diag.predicted_cost,
            x_next: x_next.clone(),
        });
        x = x_next;
        t += cfg.dt;
        if in_goal(cfg, &x, realized) {
            reached = true;
            break;
        }
    }
    let k = rows.len().max(1) as f64;
    Ok(RunReport {
        system: sys.name.clone(),
        mode: match control.mode {
            ControlMode::Idealistic => "idealistic".into(),
            ControlMode::Optimistic => "optimistic".into(),
        },
        wplus: control.wplus,
        wminus: control.wminus,
        init_len: ex.samples.len(),
        reached,
        steps_to_goal: reached.then_some(rows.len()),
        cumulative_cost: rows.iter().map(|r| r.cost).sum(),
        mean_micros: rows.iter().map(|r| r.micros as f64).sum::<f64>() / k,
        max_micros: rows.iter().map(|r| r.micros).max().unwrap_or(0),
        bound_mean: rows.iter().map(|r| r.bound).sum::<f64>() / k,
        bound_max: rows.iter().map(|r| r.bound).fold(0.0, f64::max),
        fallbacks,
        failure: failure.as_ref().map(|(i, e)| (*i, e.to_string())),
        error: failure.map(|(_, e)| e),
        final_state: x,
        rows,
    })
}

/// Mean wall time in microseconds of one control step against knowledge bases of the given sizes.
pub fn per_step_timing(
    sys: &SystemSpec,
    cfg: &ExperimentConfig,
    sizes: &[usize],
    reps: usize,
) -> Result<Vec<(usize, f64)>, ControlError> {
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let ex_cfg = ExcitationConfig {
        mode: ExcitationMode::Random,
        scale: 0.05,
        ..cfg.excitation
    };
    let ex = excite(sys, &cfg.x0, largest, cfg.dt, cfg.seed, &ex_cfg);
    let mut out = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let kb = sys.knowledge(&ex.samples[..size], cfg.knowledge)?;
        let x = ex.samples[size - 1].x.clone();
        let start = std::time::Instant::now();
        for _ in 0..reps.max(1) {
            datacontrol_step(&kb, &x, &cfg.cost, &sys.u, &sys.x, cfg.dt, &cfg.control)?;
        }
        out.push((size, start.elapsed().as_secs_f64() * 1e6 / reps.max(1) as f64));
    }
    Ok(out)
}

/// Least-squares slope and R^2 of `log y` against `log x`.
pub fn loglog_slope(points: &[(usize, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| ((x as f64).ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unicycle_input_matrix() {
        let g = (unicycle().g_true)(&[0.0, 0.0, 0.0]);
        assert_eq!(g, Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]]));
    }

    #[test]
    fn quadrotor_hover_balance() {
        let q = quadrotor();
        let h = QR_MASS * QR_G / 2.0;
        let xd = q.xdot(&[0.0; 6], &[h, h]);
        assert!(xd[3].abs() < 1e-12);
        assert_eq!((q.f_true)(&[0.0; 6])[3], -9.81);
    }

    #[test]
    fn aircraft_examples() {
        let a = aircraft();
        assert_eq!(a.xdot(&[0.0; 5], &[0.0; 2]), vec![0.0; 5]);
        assert!(((a.f_true)(&[0.0, 1.0, 0.0, 1.0, 0.0])[4] - 1.21).abs() < 1e-12);
    }
}
