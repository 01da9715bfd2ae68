use datareach::qpsolve::{box_project, oracle_boxqp, QpStatus};
use datareach::{admm_qp, solve_idealistic, AdaResConfig, AdmmConfig, BoxQP, IVector, Interval, Mat, QpError};
use proptest::prelude::*;

fn iv(a: f64, b: f64) -> Interval<f64> {
    Interval::new(a, b).unwrap()
}

fn unit_box(m: usize) -> IVector<f64> {
    IVector::filled(m, iv(-1.0, 1.0))
}

#[test]
fn projection_clamps_each_component() {
    let b = IVector::new(vec![iv(-1.0, 1.0), iv(0.0, 2.0)]);
    assert_eq!(box_project(&[5.0, -3.0], &b), vec![1.0, 0.0]);
    assert_eq!(box_project(&[0.5, 1.5], &b), vec![0.5, 1.5]);
}

#[test]
fn scalar_examples() {
    let cfg = AdaResConfig::default();
    let qp = BoxQP::new(Mat::identity(1), vec![0.0], 0.0, unit_box(1)).unwrap();
    let out = solve_idealistic(&qp, &cfg);
    assert!(out.y[0].abs() < 1e-6 && out.converged);
    // 0.5 (u - 2)^2 on [-1, 1]
    let qp = BoxQP::new(Mat::identity(1), vec![-2.0], 2.0, unit_box(1)).unwrap();
    let out = solve_idealistic(&qp, &cfg);
    assert!((out.y[0] - 1.0).abs() < 1e-9);
    assert!((qp.objective(&out.y) - 0.5).abs() < 1e-9);
}

#[test]
fn linear_objective_picks_vertices_by_sign() {
    let qp = BoxQP::new(Mat::zeros(3, 3), vec![1.0, -1.0, 2.0], 0.0, unit_box(3)).unwrap();
    let out = solve_idealistic(&qp, &AdaResConfig::default());
    assert_eq!(out.y, vec![-1.0, 1.0, -1.0]);
    let (u, v) = oracle_boxqp(&qp).unwrap();
    assert_eq!(u, vec![-1.0, 1.0, -1.0]);
    assert_eq!(v, -4.0);
}

#[test]
fn oracle_examples() {
    let qp = BoxQP::new(Mat::identity(2), vec![-2.0, 0.0], 0.0, unit_box(2)).unwrap();
    let (u, v) = oracle_boxqp(&qp).unwrap();
    assert!((u[0] - 1.0).abs() < 1e-12 && u[1].abs() < 1e-12);
    assert!((v + 1.5).abs() < 1e-12);
    let big = BoxQP::new(Mat::identity(7), vec![0.0; 7], 0.0, unit_box(7)).unwrap();
    assert_eq!(oracle_boxqp(&big).unwrap_err(), QpError::TooLarge(7));
}

#[test]
fn box_qp_rejects_bad_shapes() {
    assert!(BoxQP::new(Mat::identity(2), vec![0.0], 0.0, unit_box(2)).is_err());
    assert!(BoxQP::new(Mat::identity(2), vec![0.0; 2], 0.0, unit_box(3)).is_err());
}

#[test]
fn admm_solves_a_constrained_problem() {
    // min 0.5 (x^2 + y^2) s.t. x + y >= 1
    let p = Mat::identity(2);
    let a = Mat::from_rows(&[vec![1.0, 1.0]]);
    let out = admm_qp(&p, &[0.0, 0.0], &a, &[1.0], &[f64::INFINITY], &AdmmConfig::default());
    assert_eq!(out.status, QpStatus::Solved);
    assert!((out.x[0] - 0.5).abs() < 1e-3 && (out.x[1] - 0.5).abs() < 1e-3, "{:?}", out.x);
}

#[test]
fn admm_detects_infeasibility() {
    // x >= 2 and x <= 1
    let a = Mat::from_rows(&[vec![1.0], vec![1.0]]);
    let out = admm_qp(&Mat::identity(1), &[0.0], &a, &[2.0, f64::NEG_INFINITY], &[f64::INFINITY, 1.0], &AdmmConfig::default());
    assert_eq!(out.status, QpStatus::PrimalInfeasible);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adares_matches_the_enumeration_oracle(
        f in proptest::collection::vec(-1.0..1.0f64, 9),
        c in proptest::collection::vec(-3.0..3.0f64, 3),
        lo in proptest::collection::vec(-2.0..0.0f64, 3),
        w in proptest::collection::vec(0.1..2.0f64, 3),
    ) {
        let fm = Mat::from_fn(3, 3, |i, j| f[3 * i + j]);
        let q = fm.matmul(&fm.transpose()).add(&Mat::identity(3).scale(0.1));
        let bounds: IVector<f64> = lo.iter().zip(&w).map(|(&a, &d)| iv(a, a + d)).collect();
        let qp = BoxQP::new(q, c, 0.0, bounds.clone()).unwrap();
        let out = solve_idealistic(&qp, &AdaResConfig::default());
        let (_, best) = oracle_boxqp(&qp).unwrap();
        prop_assert!(bounds.contains_point(&out.y));
        prop_assert!(qp.objective(&out.y) - best <= 1e-6 * (1.0 + best.abs()), "{} vs {best}", qp.objective(&out.y));
    }
}
