use datareach::io::{read_steps, read_trajectory, read_tube, write_steps, write_trajectory, write_tube};
use datareach::systems::{by_name, excitation_controls, hold, ExcitationConfig, ExcitationMode};
use datareach::{
    aircraft, datareach, quadrotor, rk4_step, run_closed_loop, simulate, unicycle, ConstantControl, EnclosureMode,
    ExperimentConfig, IVector, Interval, ReachConfig,
};

#[test]
fn quadrotor_hovers_at_half_weight_per_rotor() {
    let sys = quadrotor();
    let u = 1.25 * 9.81 / 2.0;
    let x = [1.0, 0.0, 2.0, 0.0, 0.0, 0.0];
    assert!(sys.xdot(&x, &[u, u]).iter().all(|v| v.abs() < 1e-12));
    // Equal thrusts give no angular acceleration.
    assert_eq!(sys.xdot(&x, &[3.0, 3.0])[5], 0.0);
    assert!(sys.xdot(&x, &[0.0, 5.0])[5] > 0.0);
}

#[test]
fn aircraft_vector_field_by_hand() {
    let sys = aircraft();
    assert!(sys.xdot(&[0.0; 5], &[0.0, 0.0]).iter().all(|v| *v == 0.0));
    let d = sys.xdot(&[0.0, 0.0, 1.0, 0.0, 0.0], &[0.0, 0.0]);
    let want = [-0.322, 2.21, -0.421, 1.0, 0.0];
    for k in 0..5 {
        assert!((d[k] - want[k]).abs() < 1e-12);
    }
    let d = sys.xdot(&[0.0; 5], &[1.0, 0.0]);
    assert!((d[0] - 0.01).abs() < 1e-12 && (d[2] + 0.378).abs() < 1e-12);
}

#[test]
fn rk4_is_exact_for_straight_driving() {
    let sys = unicycle();
    let x = [0.0, 0.0, 0.3];
    let y = rk4_step(&sys, &x, &[2.0, 0.0], 0.5);
    assert!((y[0] - 0.3f64.cos()).abs() < 1e-14);
    assert!((y[1] - 0.3f64.sin()).abs() < 1e-14);
    assert_eq!(y[2], 0.3);
    let z = hold(&sys, &x, &[1.0, 0.5], 1.0, 10);
    assert!((z[2] - 0.8).abs() < 1e-14);
}

#[test]
fn simulate_reports_every_step() {
    let sys = unicycle();
    let traj = simulate(&sys, &[0.0, 0.0, 0.0], &|_| vec![1.0, 0.0], 0.0, 1.0, 0.1);
    assert_eq!(traj.len(), 11);
    let (t, x) = traj.last().unwrap();
    assert!((t - 1.0).abs() < 1e-12 && (x[0] - 1.0).abs() < 1e-12);
}

#[test]
fn excitation_draws() {
    let sys = quadrotor();
    let single = ExcitationConfig::default();
    assert_eq!(excitation_controls(&sys.u, 1, 3, &single), vec![vec![0.0, 0.0]]);
    let c = excitation_controls(&sys.u, 5, 3, &single);
    assert!(c[1][1] == 0.0 && c[2][0] == 0.0);
    let random = ExcitationConfig {
        mode: ExcitationMode::Random,
        scale: 0.2,
        ..ExcitationConfig::default()
    };
    let a = excitation_controls(&sys.u, 20, 9, &random);
    assert_eq!(a, excitation_controls(&sys.u, 20, 9, &random));
    assert_ne!(a, excitation_controls(&sys.u, 20, 10, &random));
    assert!(a.iter().flatten().all(|v| (0.0..=18.4 * 0.2).contains(v)));
    let zero = ExcitationConfig {
        mode: ExcitationMode::Zero,
        ..ExcitationConfig::default()
    };
    assert!(excitation_controls(&unicycle().u, 4, 0, &zero).iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn registry_and_step_bounds() {
    for name in ["unicycle", "quadrotor", "aircraft"] {
        let sys = by_name(name).unwrap();
        assert_eq!(sys.name, name);
        assert!(sys.max_step() > 0.0 && sys.max_step().is_finite());
        let cfg = ExperimentConfig::for_system(name).unwrap();
        if cfg.control.enclosure.mode != EnclosureMode::Fixpoint {
            assert!(cfg.dt <= sys.max_step(), "{name}");
        }
    }
    assert!(by_name("pendulum").is_none());
}

#[test]
fn seeded_runs_are_deterministic() {
    let sys = unicycle();
    let mut cfg = ExperimentConfig::unicycle();
    cfg.max_steps = 10;
    let a = run_closed_loop(&sys, &cfg).unwrap();
    let b = run_closed_loop(&sys, &cfg).unwrap();
    let strip = |r: &datareach::RunReport| r.rows.iter().map(|s| (s.u.clone(), s.x_next.clone(), s.cost)).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.steps(), 10);
}

#[test]
fn aircraft_reaches_the_pitch_band() {
    let sys = aircraft();
    let cfg = ExperimentConfig::aircraft();
    let r = run_closed_loop(&sys, &cfg).unwrap();
    assert!(r.reached, "{:?}", r.failure);
    let x = &r.final_state;
    assert!((4.5..=5.5).contains(&x[3]), "{x:?}");
    assert!(r.rows.iter().all(|s| s.bound >= 0.0));
}

#[test]
fn zero_step_budget_never_reaches() {
    let mut cfg = ExperimentConfig::unicycle();
    cfg.max_steps = 0;
    let r = run_closed_loop(&unicycle(), &cfg).unwrap();
    assert!(!r.reached && r.rows.is_empty());
}

#[test]
fn csv_files_read_back() {
    let sys = unicycle();
    let cfg = ExcitationConfig::default();
    let ex = datareach::excite(&sys, &[0.0, 0.0, 0.0], 4, 0.1, 1, &cfg);
    let mut buf = Vec::new();
    write_trajectory(&mut buf, &ex.samples).unwrap();
    assert_eq!(read_trajectory(buf.as_slice()).unwrap(), ex.samples);

    let kb = sys.knowledge(&ex.samples, Default::default()).unwrap();
    let v = ConstantControl {
        value: IVector::new(vec![Interval::point(1.0), Interval::point(0.0)]),
    };
    let tube = datareach(&kb, &ex.final_state, &v, ex.final_time, 0.02, 4, &ReachConfig::default());
    let mut buf = Vec::new();
    write_tube(&mut buf, &tube).unwrap();
    let rows = read_tube(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), tube.steps.len());
    assert_eq!(rows[3].r, tube.steps[3].r);

    let mut run_cfg = ExperimentConfig::unicycle();
    run_cfg.max_steps = 3;
    let report = run_closed_loop(&sys, &run_cfg).unwrap();
    let mut buf = Vec::new();
    write_steps(&mut buf, &report.rows, 2).unwrap();
    let back = read_steps(buf.as_slice()).unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back[2].u, report.rows[2].u);
    assert!(read_steps("a,b\n1,2\n".as_bytes()).is_err());
}
