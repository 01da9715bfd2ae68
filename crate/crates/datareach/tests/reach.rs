use datareach::reach::{datareach_step_c0, is_valid_enclosure, rough_enclosure_explicit, rough_enclosure_fixpoint};
use datareach::systems::{excite, unicycle, ExcitationConfig, ExcitationMode};
use datareach::{
    beta_of, build_knowledge, datareach, datareach_step, max_step_size, ConstantControl, CosineComponent,
    CosineFamily, EnclosureMode, IMatrix, IVector, Interval, KnowledgeBase, KnowledgeConfig, LipschitzBounds, Mat,
    PiecewiseConstant, ReachConfig, ReachError, Sample, SideInfoSet, VectorFieldBounds,
};
use proptest::prelude::*;

fn iv(a: f64, b: f64) -> Interval<f64> {
    Interval::new(a, b).unwrap()
}

fn lip1(lf: f64, lg: f64) -> LipschitzBounds<f64> {
    LipschitzBounds::new(vec![lf], Mat::from_rows(&[vec![lg]])).unwrap()
}

/// 1-D base with `f` and `G` known exactly through range side information.
fn exact_1d(f: f64, g: f64) -> KnowledgeBase<f64> {
    let dom = IVector::new(vec![Interval::symmetric(10.0)]);
    let side = SideInfoSet {
        vf_bounds: Some(VectorFieldBounds {
            region: dom.clone(),
            rf: IVector::from_point(&[f]),
            rg: IMatrix::filled(1, 1, Interval::point(g)),
        }),
        ..SideInfoSet::default()
    };
    KnowledgeBase::empty(lip1(0.0, 0.0), side, dom, KnowledgeConfig::default()).unwrap()
}

fn constant(lo: f64, hi: f64) -> ConstantControl<f64> {
    ConstantControl {
        value: IVector::new(vec![iv(lo, hi)]),
    }
}

#[test]
fn beta_and_step_bound_by_hand() {
    assert_eq!(beta_of(&LipschitzBounds::<f64>::zeros(2, 2), &[1.0, 1.0]), 0.0);
    assert_eq!(beta_of(&lip1(2.0, 3.0), &[1.0]), 5.0);
    assert!((max_step_size(&lip1(2.0, 3.0), &IVector::new(vec![iv(-1.0, 1.0)])) - 0.2).abs() < 1e-15);
    assert!(max_step_size(&LipschitzBounds::<f64>::zeros(1, 1), &IVector::new(vec![iv(-1.0, 1.0)])).is_infinite());
    let sys = unicycle();
    let beta = beta_of(&sys.lip, &sys.u.abs());
    assert!((beta - 4.692).abs() < 1e-3, "{beta}");
    assert!((sys.max_step() - 0.1231).abs() < 1e-3);
}

#[test]
fn explicit_enclosure_of_a_unit_drift() {
    let kb = exact_1d(1.0, 0.0);
    let s = rough_enclosure_explicit(&IVector::zeros(1), &kb, &IVector::new(vec![iv(-1.0, 1.0)]), 0.1).unwrap();
    assert!((s[0].lo() + 0.1).abs() < 1e-12 && (s[0].hi() - 0.1).abs() < 1e-12, "{}", s[0]);
}

#[test]
fn explicit_enclosure_near_the_bound_is_valid() {
    let dom = IVector::new(vec![Interval::symmetric(100.0)]);
    let samples: Vec<Sample<f64>> = (0..5)
        .map(|i| {
            let x = -1.0 + 0.5 * i as f64;
            Sample::new(0.0, vec![x], vec![x.sin() + 0.5], vec![1.0])
        })
        .collect();
    let kb = build_knowledge(&samples, lip1(1.0, 0.5), SideInfoSet::default(), dom, KnowledgeConfig::default()).unwrap();
    let v = IVector::new(vec![iv(0.5, 1.0)]);
    let limit = max_step_size(kb.lip(), &v);
    let dt = 0.99 * limit;
    let r = IVector::from_point(&[0.2]);
    let s = rough_enclosure_explicit(&r, &kb, &v, dt).unwrap();
    assert!(s[0].width().is_finite());
    // A simulated trajectory of the true field stays in the enclosure.
    let mut x: f64 = 0.2;
    let h = dt / 1000.0;
    for _ in 0..1000 {
        x += h * (x.sin() + 0.5);
        assert!(s[0].contains(x));
    }
}

#[test]
fn step_above_the_bound_is_rejected() {
    let kb = KnowledgeBase::empty(lip1(2.0, 3.0), SideInfoSet::default(), IVector::new(vec![Interval::symmetric(5.0)]), KnowledgeConfig::default()).unwrap();
    let err = rough_enclosure_explicit(&IVector::zeros(1), &kb, &IVector::new(vec![iv(-1.0, 1.0)]), 0.25).unwrap_err();
    match err {
        ReachError::StepTooLarge { limit, .. } => assert!((limit - 0.2).abs() < 1e-12),
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn fixpoint_enclosure_contains_the_motion() {
    let kb = exact_1d(0.0, 1.0);
    let cfg = ReachConfig::default();
    let v = IVector::from_point(&[1.0]);
    let s = rough_enclosure_fixpoint(&IVector::zeros(1), &kb, &v, 0.1, &cfg).unwrap();
    assert!(iv(0.0, 0.1).subset_of(&s[0]), "{}", s[0]);
    assert!(is_valid_enclosure(&IVector::zeros(1), &s, &kb, &v, 0.1).unwrap());
}

#[test]
fn exact_integrator_step() {
    let kb = exact_1d(0.0, 1.0);
    for mode in [EnclosureMode::Explicit, EnclosureMode::Fixpoint, EnclosureMode::Tightest] {
        let cfg = ReachConfig { mode, ..ReachConfig::default() };
        let step = datareach_step(&IVector::zeros(1), &kb, &constant(2.0, 2.0), 0.0, 0.1, &cfg).unwrap();
        assert!((step.next[0].lo() - 0.2).abs() < 1e-12 && (step.next[0].hi() - 0.2).abs() < 1e-12, "{}", step.next[0]);
        let c0 = datareach_step_c0(&IVector::zeros(1), &kb, &constant(2.0, 2.0), 0.0, 0.1, &cfg).unwrap();
        assert!((c0.next[0].lo() - 0.2).abs() < 1e-12 && (c0.next[0].hi() - 0.2).abs() < 1e-12);
    }
}

#[test]
fn zero_step_keeps_the_box() {
    let kb = exact_1d(1.0, 1.0);
    let r = IVector::new(vec![iv(0.5, 0.7)]);
    let step = datareach_step(&r, &kb, &constant(-1.0, 1.0), 0.0, 0.0, &ReachConfig::default()).unwrap();
    assert_eq!(step.next, r);
}

#[test]
fn single_row_tube() {
    let kb = exact_1d(0.0, 1.0);
    let tube = datareach(&kb, &[0.3], &constant(1.0, 1.0), 0.0, 0.1, 0, &ReachConfig::default());
    assert_eq!(tube.len(), 1);
    assert_eq!(tube.steps[0].r, IVector::from_point(&[0.3]));
    assert!(tube.failure.is_none());
    let tube = datareach(&kb, &[0.3], &constant(1.0, 1.0), 0.0, 0.1, 25, &ReachConfig::default());
    assert_eq!(tube.len(), 25);
    assert_eq!(tube.grid.len(), 25);
}

#[test]
fn control_classes() {
    let fam = CosineFamily {
        t_ref: 1.0,
        components: vec![CosineComponent {
            offset: 0.5,
            amplitude: 2.0,
            freq: 3.0,
            delta: iv(-0.1, 0.1),
        }],
    };
    use datareach::ControlClass;
    let p = fam.eval_point(1.0)[0];
    assert!((p.lo() - 2.4).abs() < 1e-12 && (p.hi() - 2.6).abs() < 1e-12);
    for i in 0..=50 {
        let t = 1.0 + 0.004 * i as f64;
        let value = fam.sample(t, &[0.05])[0];
        let deriv = -2.0 * 3.0 * (3.0 * (t - 1.0)).sin();
        assert!(fam.eval_range(1.0, 1.2)[0].contains(value));
        assert!(fam.eval_deriv_range(1.0, 1.2)[0].inflate(1e-12).contains(deriv));
    }
    let pc = PiecewiseConstant {
        t0: 0.0,
        dt: 0.5,
        values: vec![IVector::from_point(&[1.0]), IVector::from_point(&[-1.0])],
    };
    assert_eq!(pc.eval_point(0.25), IVector::from_point(&[1.0]));
    assert_eq!(pc.eval_point(0.75), IVector::from_point(&[-1.0]));
    assert_eq!(pc.smoothness(), 0);
}

fn unicycle_setup() -> (KnowledgeBase<f64>, Vec<f64>, f64, CosineFamily<f64>) {
    let sys = unicycle();
    let cfg = ExcitationConfig {
        mode: ExcitationMode::Random,
        ..ExcitationConfig::default()
    };
    let ex = excite(&sys, &[-2.0, -2.5, std::f64::consts::FRAC_PI_2], 15, 0.1, 3, &cfg);
    let kb = sys.knowledge(&ex.samples, KnowledgeConfig::default()).unwrap();
    let fam = CosineFamily {
        t_ref: ex.final_time,
        components: vec![
            CosineComponent::constant(1.0, iv(-0.1, 0.1)),
            CosineComponent {
                offset: 0.0,
                amplitude: 1.0,
                freq: 6.0,
                delta: iv(-0.01, 0.01),
            },
        ],
    };
    (kb, ex.final_state, ex.final_time, fam)
}

#[test]
fn fixpoint_is_usually_tighter_than_explicit() {
    use datareach::ControlClass;
    let (kb, x, t0, fam) = unicycle_setup();
    let tube = datareach(&kb, &x, &fam, t0, 0.02, 100, &ReachConfig::default());
    assert!(tube.failure.is_none());
    let cfg = ReachConfig::default();
    let mut tighter = 0;
    for rec in &tube.steps {
        let v = fam.eval_range(rec.t, rec.t + 0.02);
        let e = rough_enclosure_explicit(&rec.r, &kb, &v, 0.02).unwrap();
        let f = rough_enclosure_fixpoint(&rec.r, &kb, &v, 0.02, &cfg).unwrap();
        if f.subset_of(&e) {
            tighter += 1;
        }
    }
    assert!(tighter * 10 >= tube.len() * 9, "{tighter}/{}", tube.len());
}

#[test]
fn second_order_step_is_never_wider() {
    use datareach::ControlClass;
    let (kb, x, t0, fam) = unicycle_setup();
    let cfg = ReachConfig::default();
    assert!(fam.smoothness() > 0);
    let sys = unicycle();
    let u = |t: f64| fam.sample(t, &[0.0, 0.0]);
    let traj = datareach::simulate(&sys, &x, &u, t0, t0 + 1.0, 0.02);
    for (t, xt) in &traj {
        let r = IVector::from_point(xt);
        let a = datareach_step(&r, &kb, &fam, *t, 0.02, &cfg).unwrap();
        let b = datareach_step_c0(&r, &kb, &fam, *t, 0.02, &cfg).unwrap();
        assert!(a.next.subset_of(&b.next), "t = {t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tube_contains_sampled_trajectories(
        a in -0.8..0.8f64,
        b in 0.3..1.0f64,
        x0 in -1.0..1.0f64,
        us in proptest::collection::vec(-1.0..1.0f64, 8),
    ) {
        let f = |x: f64| a * x.sin();
        let g = |x: f64| b + 0.2 * x.cos();
        let dom = IVector::new(vec![Interval::symmetric(10.0)]);
        let mut samples = Vec::new();
        let mut x = x0 - 0.5;
        for i in 0..10 {
            let u = if i % 2 == 0 { 1.0 } else { -1.0 };
            samples.push(Sample::new(0.1 * i as f64, vec![x], vec![f(x) + g(x) * u], vec![u]));
            x += 0.1;
        }
        let kb = build_knowledge(&samples, lip1(0.8, 0.2), SideInfoSet::default(), dom, KnowledgeConfig::default()).unwrap();
        let ctrl = constant(-1.0, 1.0);
        let dt = 0.05;
        let tube = datareach(&kb, &[x0], &ctrl, 0.0, dt, 40, &ReachConfig::default());
        prop_assert!(tube.failure.is_none());
        for &u in &us {
            let mut x = x0;
            for rec in &tube.steps {
                prop_assert!(rec.r[0].inflate(1e-9).contains(x), "x = {x} outside {}", rec.r[0]);
                let h = dt / 20.0;
                for _ in 0..20 {
                    let k1 = f(x) + g(x) * u;
                    let k2 = f(x + h / 2.0 * k1) + g(x + h / 2.0 * k1) * u;
                    let k3 = f(x + h / 2.0 * k2) + g(x + h / 2.0 * k2) * u;
                    let k4 = f(x + h * k3) + g(x + h * k3) * u;
                    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
        }
    }
}
