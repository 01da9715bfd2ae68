//! Built-in checks shared by the command-line self test and the test suites.

use crate::interval::{IMatrix, IVector, Interval};
use crate::knowledge::{contract_fg, Sample};
use crate::systems::unicycle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Expected `(C_F)_1`, `(C_G)_11`, `(C_G)_12` of the worked contraction example.
pub const GOLDEN_EXPECTED: [(f64, f64); 3] = [(-0.01, 0.06), (-0.05, 0.02), (-0.1, 0.6)];

/// Unicycle sample at heading `pi/2` with loose prior ranges on the first row.
pub fn golden_case() -> [Interval<f64>; 3] {
    let s = Sample::new(0.0, vec![0.0, 0.0, FRAC_PI_2], vec![0.0, 1.0, 0.1], vec![1.0, 0.1]);
    let wide = Interval::symmetric(1e3);
    let mut f = IVector::filled(3, wide);
    f[0] = Interval::hull_of(-0.01, 1.0);
    let mut g = IMatrix::filled(3, 2, wide);
    g.set(0, 0, Interval::hull_of(-0.05, 0.05));
    g.set(0, 1, Interval::hull_of(-0.1, 1.0));
    let (cf, cg) = contract_fg(&s, &f, &g).expect("consistent example");
    [cf[0], cg.get(0, 0), cg.get(0, 1)]
}

pub fn check_golden(expected: &[(f64, f64); 3], tol: f64) -> CheckOutcome {
    let got = golden_case();
    let passed = got
        .iter()
        .zip(expected)
        .all(|(iv, &(lo, hi))| (iv.lo() - lo).abs() <= tol && (iv.hi() - hi).abs() <= tol);
    CheckOutcome {
        name: "contraction golden case",
        passed,
        detail: format!("got {}, {}, {}", got[0], got[1], got[2]),
    }
}

pub fn check_step_bound() -> CheckOutcome {
    let h = unicycle().max_step();
    CheckOutcome {
        name: "unicycle step bound",
        passed: (h - 0.1231).abs() <= 1e-3,
        detail: format!("max step {h:.6}"),
    }
}

fn random_interval(rng: &mut ChaCha8Rng, scale: f64) -> Interval<f64> {
    let a = rng.gen_range(-scale..scale);
    let w = rng.gen_range(0.0..scale) * if rng.gen_bool(0.1) { 0.0 } else { 1.0 };
    Interval::hull_of(a, a + w)
}

fn widen(rng: &mut ChaCha8Rng, a: Interval<f64>) -> Interval<f64> {
    Interval::hull_of(a.lo() - rng.gen_range(0.0..1.0), a.hi() + rng.gen_range(0.0..1.0))
}

fn pick(rng: &mut ChaCha8Rng, a: Interval<f64>) -> f64 {
    if rng.gen_bool(0.1) {
        if rng.gen_bool(0.5) {
            a.lo()
        } else {
            a.hi()
        }
    } else {
        rng.gen_range(a.lo()..=a.hi())
    }
}

fn within(x: f64, a: Interval<f64>, slack: f64) -> bool {
    x >= a.lo() - slack && x <= a.hi() + slack
}

/// Inclusion isotonicity and containment of the interval operations on `cases` random inputs.
/// Returns the number of violations in the outcome detail.
pub fn interval_property_suite(cases: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut first: Option<String> = None;
    let mut fail = |what: String, v: &mut usize| {
        *v += 1;
        first.get_or_insert(what);
    };
    let slack = 1e-12;
    for case in 0..cases {
        let scale = [1e-3, 1.0, 10.0, 1e3][case % 4];
        let a = random_interval(&mut rng, scale);
        let b = random_interval(&mut rng, scale);
        let a2 = widen(&mut rng, a);
        let b2 = widen(&mut rng, b);
        let x = pick(&mut rng, a);
        let y = pick(&mut rng, b);
        let binary: [(&str, Interval<f64>, Interval<f64>, f64); 3] = [
            ("add", a + b, a2 + b2, x + y),
            ("sub", a - b, a2 - b2, x - y),
            ("mul", a * b, a2 * b2, x * y),
        ];
        for (name, small, big, point) in binary {
            if !small.subset_of(&big) {
                fail(format!("{name} isotonicity on {a} {b}"), &mut violations);
            }
            if !within(point, small, 0.0) {
                fail(format!("{name} containment {x} {y} in {a} {b}"), &mut violations);
            }
        }
        let unary: [(&str, Interval<f64>, Interval<f64>, f64); 3] = [
            ("sqr", a.sqr_ext(), a2.sqr_ext(), x * x),
            ("cos", a.cos(), a2.cos(), x.cos()),
            ("sin", a.sin(), a2.sin(), x.sin()),
        ];
        for (name, small, big, point) in unary {
            if !small.subset_of(&big) {
                fail(format!("{name} isotonicity on {a}"), &mut violations);
            }
            if !within(point, small, slack * (1.0 + point.abs())) {
                fail(format!("{name} containment {x} in {a}"), &mut violations);
            }
        }
        let pa = Interval::hull_of(a.lo().abs(), a.hi().abs());
        let pa2 = widen(&mut rng, pa);
        if let (Ok(s1), Ok(s2)) = (pa.sqrt_ext(), Interval::hull_of(pa2.lo().max(0.0), pa2.hi()).sqrt_ext()) {
            let px = pick(&mut rng, pa);
            if !s1.subset_of(&s2) {
                fail(format!("sqrt isotonicity on {pa}"), &mut violations);
            }
            if !within(px.sqrt(), s1, slack * (1.0 + px.sqrt())) {
                fail(format!("sqrt containment {px} in {pa}"), &mut violations);
            }
        }
        let v: IVector<f64> = (0..3).map(|_| random_interval(&mut rng, scale)).collect();
        let p: Vec<f64> = v.iter().map(|iv| pick(&mut rng, *iv)).collect();
        let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !within(norm, v.norm2_ext(), slack * (1.0 + norm)) {
            fail(format!("norm2 containment at {p:?}"), &mut violations);
        }
        let pt = Interval::point(x) * Interval::point(y);
        if (pt.lo() - x * y).abs() > slack * (1.0 + (x * y).abs()) || pt.width() != 0.0 {
            fail(format!("point product {x} {y}"), &mut violations);
        }
    }
    CheckOutcome {
        name: "interval property suite",
        passed: violations == 0,
        detail: match first {
            Some(f) => format!("{violations} violations in {cases} cases; first: {f}"),
            None => format!("0 violations in {cases} cases"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_checks_pass() {
        assert!(check_golden(&GOLDEN_EXPECTED, 1e-12).passed);
        assert!(check_step_bound().passed);
        assert!(interval_property_suite(500, 3).passed);
    }
}
