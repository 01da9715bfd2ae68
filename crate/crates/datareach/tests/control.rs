use datareach::systems::{excite, hold, unicycle, ExcitationConfig, ExcitationMode};
use datareach::{
    assemble_idealistic, assemble_optimistic, datacontrol_step, idealistic_coeffs, linearize, solve_optimistic,
    subopt_bound, AdmmConfig, AffineOverApprox, ControlConfig, ControlError, ControlMode, IMatrix, IVector, Interval,
    KnowledgeBase, KnowledgeConfig, LipschitzBounds, Mat, QpError, QuadraticCost, ReachConfig, SideInfoSet,
    VectorFieldBounds,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iv(a: f64, b: f64) -> Interval<f64> {
    Interval::new(a, b).unwrap()
}

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
    let lip = LipschitzBounds::new(vec![0.0], Mat::from_rows(&[vec![0.0]])).unwrap();
    KnowledgeBase::empty(lip, side, dom, KnowledgeConfig::default()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn integrator_linearization_is_exact() {
    let kb = exact_1d(0.0, 1.0);
    let u = IVector::new(vec![iv(-1.0, 1.0)]);
    let aff = linearize(&IVector::zeros(1), &kb, &u, 0.1, &ReachConfig::default()).unwrap();
    assert!(close(aff.b[0].lo(), 0.0) && close(aff.b[0].hi(), 0.0), "{}", aff.b[0]);
    for a in [&aff.a_plus, &aff.a_minus] {
        let e = a.get(0, 0);
        assert!(close(e.lo(), 0.1) && close(e.hi(), 0.1), "{e}");
    }
    let next = aff.next_state_box(&[0.5]).unwrap();
    assert!(close(next[0].lo(), 0.05) && close(next[0].hi(), 0.05));
}

fn hand_affine() -> AffineOverApprox<f64> {
    AffineOverApprox {
        b: IVector::new(vec![iv(0.0, 2.0)]),
        a_plus: IMatrix::filled(1, 1, iv(1.0, 3.0)),
        a_minus: IMatrix::filled(1, 1, iv(-1.0, 1.0)),
        s: IVector::zeros(1),
        t: 0.0,
        dt: 0.1,
    }
}

#[test]
fn weighted_representatives() {
    let aff = hand_affine();
    let (a, b) = idealistic_coeffs(&aff, 1.0, 1.0);
    assert_eq!((a.get(0, 0), b[0]), (2.0, 2.0));
    let (a, b) = idealistic_coeffs(&aff, 0.0, 0.0);
    assert_eq!((a.get(0, 0), b[0]), (0.0, 0.0));
    let (a, b) = idealistic_coeffs(&aff, 1.0, 0.0);
    assert_eq!((a.get(0, 0), b[0]), (1.0, 1.0));
    let (a, b) = idealistic_coeffs(&aff, 0.5, 0.5);
    assert_eq!((a.get(0, 0), b[0]), (1.0, 1.0));
}

#[test]
fn cost_validation() {
    let bad = QuadraticCost::new(Mat::identity(1).scale(-1.0), Mat::zeros(1, 1), Mat::zeros(1, 1), vec![0.0], vec![0.0], 0.0);
    assert!(matches!(bad, Err(ControlError::InvalidCost(_))));
    let asym = Mat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]);
    assert!(QuadraticCost::new(asym, Mat::zeros(1, 1), Mat::zeros(2, 1), vec![0.0; 2], vec![0.0], 0.0).is_err());
    assert!(QuadraticCost::<f64>::setpoint(2, 1, 2, 1.0, 1.0).is_err());
    let c = QuadraticCost::setpoint(2, 1, 1, 5.0, 0.5).unwrap();
    assert!(close(c.eval(&[3.0, 5.0], &[1.0]), 0.0));
    assert!(close(c.eval(&[3.0, 7.0], &[1.0]), 2.0));
}

#[test]
fn identity_model_assembly() {
    let cost = QuadraticCost::squared_norm(2, 2, 1.0);
    let qp = assemble_idealistic(&cost, &Mat::identity(2), &[0.0, 0.0]).unwrap();
    assert_eq!(qp.qi, Mat::identity(2).scale(2.0));
    assert_eq!(qp.qv, vec![0.0, 0.0]);
    assert_eq!(qp.pi, 0.0);
    assert!(assemble_idealistic(&cost, &Mat::identity(3), &[0.0, 0.0]).is_err());
}

fn random_cost(rng: &mut ChaCha8Rng, n: usize, m: usize) -> QuadraticCost<f64> {
    let k = n + m;
    let f = Mat::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    let joint = f.matmul(&f.transpose());
    let q = Mat::from_fn(n, n, |i, j| joint.get(i, j));
    let r = Mat::from_fn(m, m, |i, j| joint.get(n + i, n + j));
    let s = Mat::from_fn(n, m, |i, j| joint.get(i, n + j));
    let qv = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rv = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    QuadraticCost::new(q, r, s, qv, rv, rng.gen_range(-1.0..1.0)).unwrap()
}

#[test]
fn assembled_objective_equals_the_cost_along_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, m) = (3, 2);
    let cost = random_cost(&mut rng, n, m);
    let a = Mat::from_fn(n, m, |_, _| rng.gen_range(-2.0..2.0));
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let qp = assemble_idealistic(&cost, &a, &b).unwrap();
    for _ in 0..1000 {
        let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let au = a.matvec(&u);
        let y: Vec<f64> = b.iter().zip(&au).map(|(p, q)| p + q).collect();
        let want = cost.eval(&y, &u);
        assert!((qp.objective(&u) - want).abs() <= 1e-9 * (1.0 + want.abs()));
    }
}

#[test]
fn orthant_endpoints() {
    let aff = AffineOverApprox {
        b: IVector::zeros(1),
        a_plus: IMatrix::from_fn(1, 2, |_, _| iv(1.0, 3.0)),
        a_minus: IMatrix::from_fn(1, 2, |_, _| iv(-2.0, -1.0)),
        s: IVector::zeros(1),
        t: 0.0,
        dt: 0.1,
    };
    let cost = QuadraticCost::squared_norm(1, 2, 1.0);
    let x = IVector::new(vec![Interval::symmetric(10.0)]);
    let one = assemble_optimistic(&cost, &aff, &IVector::new(vec![iv(0.0, 1.0), iv(0.5, 2.0)]), &x);
    assert_eq!(one.orthants.len(), 1);
    let o = &one.orthants[0];
    assert_eq!(o.a_s_plus.get(0, 0), 3.0);
    assert_eq!(o.a_l_plus.get(0, 0), 1.0);
    assert_eq!(o.a_s_minus.get(0, 1), -1.0);
    assert_eq!(o.a_l_minus.get(0, 1), -2.0);

    let neg = assemble_optimistic(&cost, &aff, &IVector::new(vec![iv(-1.0, 0.0), iv(-2.0, -1.0)]), &x);
    assert_eq!(neg.orthants.len(), 1);
    assert_eq!(neg.orthants[0].a_s_plus.get(0, 0), 1.0);
    assert_eq!(neg.orthants[0].a_l_plus.get(0, 0), 3.0);

    let split = assemble_optimistic(&cost, &aff, &IVector::new(vec![iv(-1.0, 1.0), iv(-1.0, 1.0)]), &x);
    assert_eq!(split.orthants.len(), 4);
    for o in &split.orthants {
        assert!(o.ubox.iter().all(|b| b.lo() >= 0.0 || b.hi() <= 0.0));
    }
}

#[test]
fn infeasible_orthants_are_reported() {
    let aff = AffineOverApprox {
        b: IVector::new(vec![iv(5.0, 6.0)]),
        a_plus: IMatrix::filled(1, 1, iv(0.0, 0.0)),
        a_minus: IMatrix::filled(1, 1, iv(0.0, 0.0)),
        s: IVector::zeros(1),
        t: 0.0,
        dt: 0.1,
    };
    let cost = QuadraticCost::squared_norm(1, 1, 1.0);
    let oqp = assemble_optimistic(&cost, &aff, &IVector::new(vec![iv(-1.0, 1.0)]), &IVector::new(vec![iv(-1.0, 1.0)]));
    assert_eq!(solve_optimistic(&oqp, &AdmmConfig::default()), Err(QpError::AllOrthantsInfeasible));
}

#[test]
fn exact_model_has_zero_suboptimality_bound() {
    let kb = exact_1d(0.0, 1.0);
    let u = IVector::new(vec![iv(-1.0, 1.0)]);
    let aff = linearize(&IVector::from_point(&[1.0]), &kb, &u, 0.1, &ReachConfig::default()).unwrap();
    let cost = QuadraticCost::squared_norm(1, 1, 0.5);
    assert!(subopt_bound(&cost, &aff, &u, kb.domain()).abs() < 1e-12);
    let wide = hand_affine();
    let b = subopt_bound(&cost, &wide, &u, kb.domain());
    assert!(b > 0.0 && b.is_finite());
}

#[test]
fn integrator_drives_toward_zero_in_both_modes() {
    let kb = exact_1d(0.0, 1.0);
    let u = IVector::new(vec![iv(-1.0, 1.0)]);
    let cost = QuadraticCost::squared_norm(1, 1, 0.5);
    for mode in [ControlMode::Idealistic, ControlMode::Optimistic] {
        let cfg = ControlConfig { mode, ..ControlConfig::default() };
        let (uhat, diag, _) = datacontrol_step(&kb, &[1.0], &cost, &u, kb.domain(), 0.1, &cfg).unwrap();
        assert!((uhat[0] + 1.0).abs() < 1e-4, "{mode:?}: {uhat:?}");
        assert!((diag.predicted_cost - 0.405).abs() < 1e-4, "{mode:?}: {}", diag.predicted_cost);
        assert_eq!(diag.mode_used, mode);
    }
}

fn unicycle_model() -> (KnowledgeBase<f64>, Vec<f64>) {
    let sys = unicycle();
    let cfg = ExcitationConfig {
        mode: ExcitationMode::Random,
        ..ExcitationConfig::default()
    };
    let ex = excite(&sys, &[-2.0, -2.5, std::f64::consts::FRAC_PI_2], 15, 0.1, 7, &cfg);
    (sys.knowledge(&ex.samples, KnowledgeConfig::default()).unwrap(), ex.final_state)
}

#[test]
fn affine_model_contains_the_true_successor() {
    let sys = unicycle();
    let (kb, x) = unicycle_model();
    let dt = 0.1;
    let aff = linearize(&IVector::from_point(&x), &kb, &sys.u, dt, &ReachConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let u: Vec<f64> = sys.u.iter().map(|b| rng.gen_range(b.lo()..=b.hi())).collect();
        let truth = hold(&sys, &x, &u, dt, 20);
        let next = aff.next_state_box(&u).expect("nonempty model box");
        assert!(next.inflate(1e-9).contains_point(&truth), "u = {u:?}: {truth:?} not in {next:?}");
    }
}

/// Inner minimum over the model box for `0.5 ||x||^2` is the squared distance of the origin.
fn grid_optimum(aff: &AffineOverApprox<f64>, ubox: &IVector<f64>, xdom: &IVector<f64>, k: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..k {
        for j in 0..k {
            let u = [
                ubox[0].lo() + ubox[0].width() * i as f64 / (k - 1) as f64,
                ubox[1].lo() + ubox[1].width() * j as f64 / (k - 1) as f64,
            ];
            let Some(b) = aff.next_state_box(&u).and_then(|b| b.intersect(xdom)) else { continue };
            let d: f64 = b.iter().map(|e| (0.0f64.clamp(e.lo(), e.hi())).powi(2)).sum();
            best = best.min(0.5 * d);
        }
    }
    best
}

#[test]
fn optimistic_solution_matches_a_grid_search() {
    let sys = unicycle();
    let (kb, x) = unicycle_model();
    let aff = linearize(&IVector::from_point(&x), &kb, &sys.u, 0.1, &ReachConfig::default()).unwrap();
    let cost = QuadraticCost::squared_norm(3, 2, 0.5);
    let oqp = assemble_optimistic(&cost, &aff, &sys.u, &sys.x);
    let sol = solve_optimistic(&oqp, &AdmmConfig::default()).unwrap();
    let grid = grid_optimum(&aff, &sys.u, &sys.x, 201);
    assert!(sol.cost <= grid + 1e-3, "solver {} vs grid {grid}", sol.cost);
    assert!(sol.cost >= grid - 0.05 * (1.0 + grid), "solver {} vs grid {grid}", sol.cost);
    let next = aff.next_state_box(&sol.u).unwrap();
    assert!(next.inflate(1e-3).contains_point(&sol.x));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bound_grows_with_model_width(w in 0.0..2.0f64, extra in 0.0..2.0f64) {
        let cost = QuadraticCost::squared_norm(1, 1, 0.5);
        let u = IVector::new(vec![iv(-1.0, 1.0)]);
        let x = IVector::new(vec![Interval::symmetric(10.0)]);
        let make = |w: f64| AffineOverApprox {
            b: IVector::new(vec![Interval::symmetric(w)]),
            a_plus: IMatrix::filled(1, 1, iv(0.1, 0.1 + w)),
            a_minus: IMatrix::filled(1, 1, iv(0.1, 0.1 + w)),
            s: IVector::zeros(1),
            t: 0.0,
            dt: 0.1,
        };
        let a = subopt_bound(&cost, &make(w), &u, &x);
        let b = subopt_bound(&cost, &make(w + extra), &u, &x);
        prop_assert!(a >= 0.0 && b >= a - 1e-12);
    }
}
