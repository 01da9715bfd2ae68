mod config;

use clap::{Args, Parser, Subcommand};
use config::{
    ControlComponent, CostSection, CustomSection, EnclosureName, ExcitationName, ModeName, RunConfig, SideInfoName,
};
use datareach::io::{write_steps, write_trajectory, write_tube};
use datareach::knowledge::{build_knowledge, Decoupling, KnowledgeConfig, KnowledgeError, LipschitzBounds, SideInfoSet};
use datareach::selfcheck::{check_golden, check_step_bound, interval_property_suite, CheckOutcome, GOLDEN_EXPECTED};
use datareach::systems::{
    by_name, excite, loglog_slope, per_step_timing, run_closed_loop, unicycle_with, ExcitationConfig, ExcitationMode,
    ExperimentConfig, RunReport, SystemSpec, UnicycleInfo,
};
use datareach::{
    datareach, max_step_size, ConstantControl, ControlClass, ControlError, ControlMode, CosineComponent, CosineFamily,
    EnclosureMode, IVector, Interval, Mat, QuadraticCost, ReachConfig, ReachError, Sample,
};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "datareach", version, about = "Data-driven reachability and control of unknown control-affine systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
}

#[derive(Subcommand)]
enum Command {
    /// Over-approximate the reachable set and write the tube.
    Reach(Common),
    /// Run the closed loop and write the per-step log and summary.
    Control(Common),
    /// Sweep systems and modes and write a results table.
    Benchmark(Common),
    /// Run the built-in checks.
    Selftest {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        corrupt_golden: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    StepTooLarge(String),
    Inconsistent(String),
    Run(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Run(_) => 1,
            Failure::Config(_) => 2,
            Failure::StepTooLarge(_) => 3,
            Failure::Inconsistent(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::StepTooLarge(m) | Failure::Inconsistent(m) | Failure::Run(m) => m,
        }
    }
}

impl From<KnowledgeError> for Failure {
    fn from(e: KnowledgeError) -> Self {
        match e {
            KnowledgeError::Dimension(_) | KnowledgeError::Interval(_) => Failure::Config(e.to_string()),
            _ => Failure::Inconsistent(e.to_string()),
        }
    }
}

impl From<ReachError> for Failure {
    fn from(e: ReachError) -> Self {
        match e {
            ReachError::StepTooLarge { .. } => Failure::StepTooLarge(e.to_string()),
            ReachError::Knowledge(k) => k.into(),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<ControlError> for Failure {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::Reach(r) => r.into(),
            ControlError::Knowledge(k) => k.into(),
            ControlError::InvalidCost(m) => Failure::Config(m),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Run(format!("{}: {e}", path.display()))
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let Some(path) = &common.config else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn out_file(common: &Common, name: &str) -> Result<fs::File, Failure> {
    fs::create_dir_all(&common.out).map_err(|e| io_err(&common.out, e))?;
    let p = common.out.join(name);
    fs::File::create(&p).map_err(|e| io_err(&p, e))
}

fn seed_of(common: &Common, cfg: &RunConfig) -> u64 {
    common.seed.or(cfg.seed).unwrap_or(0)
}

fn mode_of(common: &Common, cfg: &RunConfig) -> ControlMode {
    match common.mode.or(cfg.mode) {
        Some(ModeName::Optimistic) => ControlMode::Optimistic,
        _ => ControlMode::Idealistic,
    }
}

fn enclosure(e: EnclosureName) -> EnclosureMode {
    match e {
        EnclosureName::Explicit => EnclosureMode::Explicit,
        EnclosureName::Fixpoint => EnclosureMode::Fixpoint,
        EnclosureName::Tightest => EnclosureMode::Tightest,
    }
}

fn excitation_mode(e: ExcitationName) -> ExcitationMode {
    match e {
        ExcitationName::Zero => ExcitationMode::Zero,
        ExcitationName::Random => ExcitationMode::Random,
        ExcitationName::SingleAxis => ExcitationMode::SingleAxis,
    }
}

fn bounds_box(b: &[[f64; 2]], what: &str) -> Result<IVector<f64>, Failure> {
    b.iter()
        .map(|&[lo, hi]| Interval::new(lo, hi).map_err(|e| Failure::Config(format!("{what}: {e}"))))
        .collect()
}

fn check_len(v: &[f64], n: usize, what: &str) -> Result<(), Failure> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Failure::Config(format!("{what} has {} entries, expected {n}", v.len())))
    }
}

fn zero_based(vars: &[usize], n: usize, what: &str) -> Result<Vec<usize>, Failure> {
    vars.iter()
        .map(|&v| {
            if v >= 1 && v <= n {
                Ok(v - 1)
            } else {
                Err(Failure::Config(format!("{what}: index {v} outside 1..={n}")))
            }
        })
        .collect()
}

/// Prior knowledge of a data-only system.
struct CustomPrior {
    lip: LipschitzBounds<f64>,
    side: SideInfoSet<f64>,
    u: IVector<f64>,
    x: IVector<f64>,
}

fn custom_prior(c: &CustomSection) -> Result<CustomPrior, Failure> {
    let (n, m) = (c.n, c.m);
    if c.u.len() != m || c.x.len() != n || c.lf.len() != n || c.lg.len() != n || c.lg.iter().any(|r| r.len() != m) {
        return Err(Failure::Config("custom: shapes of u, x, lf, lg must match n and m".into()));
    }
    let lip = LipschitzBounds::new(c.lf.clone(), Mat::from_rows(&c.lg)).map_err(|e| Failure::Config(e.to_string()))?;
    let mut side = SideInfoSet::default();
    if c.f_vars.is_some() || c.g_vars.is_some() {
        let all: Vec<usize> = (1..=n).collect();
        let f = zero_based(c.f_vars.as_deref().unwrap_or(&all), n, "f_vars")?;
        let g = zero_based(c.g_vars.as_deref().unwrap_or(&all), n, "g_vars")?;
        side.decoupling = Some(Decoupling::uniform(n, m, &f, &g));
    }
    Ok(CustomPrior {
        lip,
        side,
        u: bounds_box(&c.u, "custom.u")?,
        x: bounds_box(&c.x, "custom.x")?,
    })
}

fn read_samples(path: &Path) -> Result<Vec<Sample<f64>>, Failure> {
    let f = fs::File::open(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    datareach::io::read_trajectory(f).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn control_family(
    comps: Option<&[ControlComponent]>,
    system: &str,
    u: &IVector<f64>,
    t_ref: f64,
) -> Result<Box<dyn ControlClass<f64>>, Failure> {
    let build = |c: &[ControlComponent]| -> Result<Box<dyn ControlClass<f64>>, Failure> {
        let components = c
            .iter()
            .map(|c| {
                Ok(CosineComponent {
                    offset: c.offset,
                    amplitude: c.amplitude,
                    freq: c.freq,
                    delta: Interval::new(c.delta[0], c.delta[1]).map_err(|e| Failure::Config(format!("delta: {e}")))?,
                })
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        Ok(Box::new(CosineFamily { t_ref, components }))
    };
    match comps {
        Some(c) if c.len() != u.len() => Err(Failure::Config(format!("reach.controls needs {} components", u.len()))),
        Some(c) => build(c),
        None if system == "unicycle" => build(&[
            ControlComponent {
                offset: 1.0,
                amplitude: 0.0,
                freq: 0.0,
                delta: [-0.1, 0.1],
            },
            ControlComponent {
                offset: 0.0,
                amplitude: 1.0,
                freq: 6.0,
                delta: [-0.01, 0.01],
            },
        ]),
        None => Ok(Box::new(ConstantControl { value: u.clone() })),
    }
}

fn cmd_reach(common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let rs = cfg.reach.clone().unwrap_or_default();
    let system = cfg.system.clone().unwrap_or_else(|| "unicycle".into());
    let seed = seed_of(common, &cfg);
    let dt = rs.dt.unwrap_or(0.02);
    let steps = rs.steps.unwrap_or(200);
    let sample_dt = rs.sample_dt.unwrap_or(0.1);
    let rcfg = ReachConfig {
        mode: rs.enclosure.map_or(EnclosureMode::Tightest, enclosure),
        ..ReachConfig::default()
    };
    if !(dt > 0.0) || !(sample_dt > 0.0) {
        return Err(Failure::Config("reach.dt and reach.sample_dt must be positive".into()));
    }
    let (samples, u, kb) = if system == "custom" {
        let c = cfg.custom.as_ref().ok_or_else(|| Failure::Config("system = \"custom\" needs a [custom] section".into()))?;
        let prior = custom_prior(c)?;
        let path = rs.trajectory.as_ref().ok_or_else(|| Failure::Config("custom systems need reach.trajectory".into()))?;
        let samples = read_samples(path)?;
        let kb = build_knowledge(&samples, prior.lip, prior.side, prior.x, KnowledgeConfig::default())?;
        (samples, prior.u, kb)
    } else {
        let sys = system_spec(&system, rs.side_info)?;
        let samples = match &rs.trajectory {
            Some(p) => read_samples(p)?,
            None => {
                let x0 = rs.x0.clone().unwrap_or_else(|| default_x0(&system));
                check_len(&x0, sys.n, "reach.x0")?;
                let ex_cfg = ExcitationConfig {
                    mode: rs.excitation.map_or(ExcitationMode::Random, excitation_mode),
                    scale: rs.excitation_scale.unwrap_or(1.0),
                    ..ExcitationConfig::default()
                };
                let ex = excite(&sys, &x0, rs.init_len.unwrap_or(15), sample_dt, seed, &ex_cfg);
                let mut s = ex.samples;
                // The end state is carried as a zero-control sample so the tube can start from it.
                s.push(Sample::new(ex.final_time, ex.final_state.clone(), sys.xdot(&ex.final_state, &vec![0.0; sys.m]), vec![0.0; sys.m]));
                s
            }
        };
        let kb = sys.knowledge(&samples, KnowledgeConfig::default())?;
        (samples, sys.u.clone(), kb)
    };
    let last = samples.last().ok_or_else(|| Failure::Config("trajectory is empty".into()))?;
    let t0 = rs.t_ref.unwrap_or(last.t);
    let x_start = rs.x_start.clone().unwrap_or_else(|| last.x.clone());
    check_len(&x_start, kb.n(), "reach.x_start")?;
    let ctrl = control_family(rs.controls.as_deref(), &system, &u, t0)?;
    let horizon = ctrl.eval_range(t0, t0 + dt * steps.max(1) as f64);
    let limit = max_step_size(kb.lip(), &horizon);
    if rcfg.mode != EnclosureMode::Fixpoint && dt >= limit {
        return Err(Failure::StepTooLarge(format!("dt = {dt} exceeds the step-size bound {limit:.4}")));
    }
    let tube = datareach(&kb, &x_start, ctrl.as_ref(), t0, dt, steps, &rcfg);
    write_trajectory(out_file(common, "trajectory.csv")?, &samples).map_err(|e| Failure::Run(e.to_string()))?;
    write_tube(out_file(common, "tube.csv")?, &tube).map_err(|e| Failure::Run(e.to_string()))?;
    if let Some(b) = tube.last_box() {
        let w: Vec<String> = b.widths().iter().map(|w| format!("{w:.6}")).collect();
        println!("rows {} terminal widths [{}]", tube.len(), w.join(", "));
    }
    match tube.failure {
        Some((i, e)) => {
            eprintln!("tube stopped at row {i}");
            Err(e.into())
        }
        None => Ok(()),
    }
}

fn default_x0(system: &str) -> Vec<f64> {
    ExperimentConfig::for_system(system).map_or_else(Vec::new, |c| c.x0)
}

fn system_spec(name: &str, side: Option<SideInfoName>) -> Result<SystemSpec, Failure> {
    if let Some(level) = side {
        if name != "unicycle" {
            return Err(Failure::Config("side_info levels are only defined for the unicycle".into()));
        }
        return Ok(unicycle_with(match level {
            SideInfoName::Lipschitz => UnicycleInfo::Lipschitz,
            SideInfoName::Heading => UnicycleInfo::Heading,
            SideInfoName::Exact => UnicycleInfo::Exact,
        }));
    }
    by_name(name).ok_or_else(|| Failure::Config(format!("unknown system {name:?}")))
}

fn experiment(common: &Common, cfg: &RunConfig, system: &str) -> Result<(SystemSpec, ExperimentConfig), Failure> {
    if system == "custom" {
        return Err(Failure::Config("control needs a named system with a simulator".into()));
    }
    let sys = system_spec(system, None)?;
    let mut ex = ExperimentConfig::for_system(system).expect("named system");
    if let Some(seed) = common.seed.or(cfg.seed) {
        ex.seed = seed;
    }
    ex.control.mode = mode_of(common, cfg);
    if let Some(c) = &cfg.control {
        if let Some(v) = c.dt {
            ex.dt = v;
        }
        if let Some(v) = c.init_len {
            ex.init_len = v;
        }
        if let Some(v) = c.max_steps {
            ex.max_steps = v;
        }
        if let Some(v) = c.stop_level {
            ex.stop_level = v;
            ex.stop_band = None;
        }
        if let Some(v) = &c.x0 {
            check_len(v, sys.n, "control.x0")?;
            ex.x0 = v.clone();
        }
        if let Some(v) = c.eps {
            ex.control.adares.eps = v;
        }
        if let Some(v) = c.mu0 {
            ex.control.adares.mu0 = v;
        }
        if let Some([wp, wm]) = c.weights {
            if !(0.0..=1.0).contains(&wp) || !(0.0..=1.0).contains(&wm) {
                return Err(Failure::Config("control.weights must lie in [0, 1]".into()));
            }
            ex.random_weights = false;
            ex.control.wplus = wp;
            ex.control.wminus = wm;
        }
        if let Some(v) = c.refresh_every {
            ex.refresh_every = v;
        }
        if let Some(v) = c.enclosure {
            ex.control.enclosure.mode = enclosure(v);
        }
        if let Some(v) = c.excitation {
            ex.excitation.mode = excitation_mode(v);
        }
        if let Some(v) = c.excitation_scale {
            ex.excitation.scale = v;
        }
        if let Some(cost) = &c.cost {
            ex.cost = match *cost {
                CostSection::Norm { weight } => QuadraticCost::squared_norm(sys.n, sys.m, weight),
                CostSection::Setpoint {
                    component,
                    target,
                    weight,
                } => {
                    if component == 0 {
                        return Err(Failure::Config("cost.component is 1-based".into()));
                    }
                    QuadraticCost::setpoint(sys.n, sys.m, component - 1, target, weight)?
                }
            };
            ex.stop_band = None;
        }
    }
    if !(ex.dt > 0.0) || ex.init_len == 0 {
        return Err(Failure::Config("control.dt must be positive and init_len at least 1".into()));
    }
    let limit = sys.max_step();
    if ex.control.enclosure.mode != EnclosureMode::Fixpoint && ex.dt >= limit {
        return Err(Failure::StepTooLarge(format!(
            "dt = {} exceeds the step-size bound {limit:.4}",
            ex.dt
        )));
    }
    Ok((sys, ex))
}

fn cmd_control(common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let system = cfg.system.clone().unwrap_or_else(|| "unicycle".into());
    let (sys, ex) = experiment(common, &cfg, &system)?;
    let report = run_closed_loop(&sys, &ex)?;
    write_steps(out_file(common, "steps.csv")?, &report.rows, sys.m).map_err(|e| Failure::Run(e.to_string()))?;
    let summary = serde_json::to_string_pretty(&Summary::from(&report)).expect("serializable summary");
    let path = common.out.join("summary.json");
    fs::write(&path, summary + "\n").map_err(|e| io_err(&path, e))?;
    println!(
        "{}: reached={} steps={} cumulative_cost={:.6} mean_step_us={:.1}",
        report.system,
        report.reached,
        report.steps(),
        report.cumulative_cost,
        report.mean_micros
    );
    match report.error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    system: &'a str,
    mode: &'a str,
    reached: bool,
    steps: usize,
    steps_to_goal: Option<usize>,
    cumulative_cost: f64,
    mean_step_micros: f64,
    max_step_micros: u128,
    bound_mean: f64,
    bound_max: f64,
    wplus: f64,
    wminus: f64,
    init_len: usize,
    fallbacks: usize,
    failure: Option<&'a (usize, String)>,
    final_state: &'a [f64],
}

impl<'a> From<&'a RunReport> for Summary<'a> {
    fn from(r: &'a RunReport) -> Self {
        Self {
            system: &r.system,
            mode: &r.mode,
            reached: r.reached,
            steps: r.steps(),
            steps_to_goal: r.steps_to_goal,
            cumulative_cost: r.cumulative_cost,
            mean_step_micros: r.mean_micros,
            max_step_micros: r.max_micros,
            bound_mean: r.bound_mean,
            bound_max: r.bound_max,
            wplus: r.wplus,
            wminus: r.wminus,
            init_len: r.init_len,
            fallbacks: r.fallbacks,
            failure: r.failure.as_ref(),
            final_state: &r.final_state,
        }
    }
}

#[derive(Serialize)]
struct BenchRow {
    system: String,
    mode: String,
    seed: u64,
    reached: bool,
    steps: usize,
    cumulative_cost: f64,
    mean_step_micros: f64,
    max_step_micros: u128,
    bound_mean: f64,
    bound_max: f64,
    failure: Option<String>,
}

#[derive(Serialize)]
struct Scaling {
    system: String,
    points: Vec<(usize, f64)>,
    slope: f64,
    r2: f64,
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DATAREACH_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::Config(format!("DATAREACH_THREADS={v:?} is not a count")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Failure::Run(e.to_string()))
}

fn cmd_benchmark(common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let bs = cfg.benchmark.clone().unwrap_or_default();
    let systems = bs
        .systems
        .clone()
        .unwrap_or_else(|| vec!["unicycle".into(), "quadrotor".into(), "aircraft".into()]);
    let modes = bs.modes.clone().unwrap_or_else(|| vec![ModeName::Idealistic, ModeName::Optimistic]);
    let seeds = match (&bs.seeds, common.seed.or(cfg.seed)) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => vec![s],
        (None, None) => vec![0],
    };
    let mut tasks = Vec::new();
    for s in &systems {
        for &m in &modes {
            for &seed in &seeds {
                let c = Common {
                    seed: Some(seed),
                    mode: Some(m),
                    ..common.clone()
                };
                let (sys, mut ex) = experiment(&c, &RunConfig { control: None, ..cfg.clone() }, s)?;
                if let Some(k) = bs.max_steps {
                    ex.max_steps = k;
                }
                tasks.push((seed, sys, ex));
            }
        }
    }
    let pool = thread_pool()?;
    let rows: Vec<BenchRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(seed, sys, ex)| match run_closed_loop(sys, ex) {
                Ok(r) => BenchRow {
                    system: r.system.clone(),
                    mode: r.mode.clone(),
                    seed: *seed,
                    reached: r.reached,
                    steps: r.steps(),
                    cumulative_cost: r.cumulative_cost,
                    mean_step_micros: r.mean_micros,
                    max_step_micros: r.max_micros,
                    bound_mean: r.bound_mean,
                    bound_max: r.bound_max,
                    failure: r.failure.map(|(i, m)| format!("step {i}: {m}")),
                },
                Err(e) => BenchRow {
                    system: sys.name.clone(),
                    mode: format!("{:?}", ex.control.mode).to_lowercase(),
                    seed: *seed,
                    reached: false,
                    steps: 0,
                    cumulative_cost: 0.0,
                    mean_step_micros: 0.0,
                    max_step_micros: 0,
                    bound_mean: 0.0,
                    bound_max: 0.0,
                    failure: Some(e.to_string()),
                },
            })
            .collect()
    });
    let mut scaling = Vec::new();
    if let Some(sizes) = &bs.scaling {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Failure::Config("benchmark.scaling sizes must be positive".into()));
        }
        let sys = system_spec("unicycle", None)?;
        let ex = ExperimentConfig::unicycle();
        let points = per_step_timing(&sys, &ex, sizes, bs.scaling_reps.unwrap_or(20))?;
        let (slope, r2) = loglog_slope(&points);
        println!("scaling slope {slope:.3} (R^2 {r2:.3})");
        scaling.push(Scaling {
            system: sys.name.clone(),
            points,
            slope,
            r2,
        });
    }
    let mut wr = csv::Writer::from_writer(out_file(common, "benchmark.csv")?);
    wr.write_record([
        "system",
        "mode",
        "seed",
        "reached",
        "steps",
        "cumulative_cost",
        "mean_step_micros",
        "max_step_micros",
        "bound_mean",
        "bound_max",
    ])
    .map_err(|e| Failure::Run(e.to_string()))?;
    for r in &rows {
        wr.write_record([
            r.system.clone(),
            r.mode.clone(),
            r.seed.to_string(),
            r.reached.to_string(),
            r.steps.to_string(),
            r.cumulative_cost.to_string(),
            r.mean_step_micros.to_string(),
            r.max_step_micros.to_string(),
            r.bound_mean.to_string(),
            r.bound_max.to_string(),
        ])
        .map_err(|e| Failure::Run(e.to_string()))?;
        println!(
            "{:10} {:10} seed {:3} reached {:5} steps {:4} mean {:8.1} us",
            r.system, r.mode, r.seed, r.reached, r.steps, r.mean_step_micros
        );
    }
    wr.flush().map_err(|e| Failure::Run(e.to_string()))?;
    let json = serde_json::json!({ "runs": rows, "scaling": scaling });
    let path = common.out.join("benchmark.json");
    fs::write(&path, serde_json::to_string_pretty(&json).expect("serializable") + "\n").map_err(|e| io_err(&path, e))?;
    Ok(())
}

fn cmd_selftest(common: &Common, corrupt: bool) -> Result<(), Failure> {
    load_config(common)?;
    let mut expected = GOLDEN_EXPECTED;
    if corrupt {
        expected[0].1 += 0.5;
    }
    let checks: Vec<CheckOutcome> = vec![
        check_golden(&expected, 1e-12),
        check_step_bound(),
        interval_property_suite(10_000, seed_of(common, &RunConfig::default())),
    ];
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Run("self test failed".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Reach(c) => cmd_reach(c),
        Command::Control(c) => cmd_control(c),
        Command::Benchmark(c) => cmd_benchmark(c),
        Command::Selftest { common, corrupt_golden } => cmd_selftest(common, *corrupt_golden),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
