use kfull_core::dynamics::{frac_mul, Alpha, DynSystem, Point, TestFunction};
use num_complex::Complex64;
use proptest::prelude::*;

/// Distance on the circle.
fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

fn close(p: &Point, q: &Point, tol: f64) -> bool {
    match (p, q) {
        (Point::Circle(a), Point::Circle(b)) => circ(*a, *b) <= tol,
        (Point::Cyclic(a), Point::Cyclic(b)) => a == b,
        (Point::Torus(a), Point::Torus(b)) => a.iter().zip(b).all(|(x, y)| circ(*x, *y) <= tol),
        (Point::Skew(a, b), Point::Skew(c, d)) => circ(*a, *c) <= tol && circ(*b, *d) <= tol,
        _ => false,
    }
}

fn in_unit(p: &Point) -> bool {
    let u = |t: f64| (0.0..1.0).contains(&t);
    match p {
        Point::Circle(a) => u(*a),
        Point::Cyclic(_) => true,
        Point::Torus(v) => v.iter().all(|&t| u(t)),
        Point::Skew(a, b) => u(*a) && u(*b),
    }
}

fn systems() -> Vec<(DynSystem, Point)> {
    vec![
        (DynSystem::circle(Alpha::Golden), Point::Circle(0.3)),
        (DynSystem::circle(Alpha::rational(3, 7).unwrap()), Point::Circle(0.0)),
        (DynSystem::cyclic(5).unwrap(), Point::Cyclic(2)),
        (
            DynSystem::torus(vec![Alpha::Golden, Alpha::Sqrt2Minus1]).unwrap(),
            Point::Torus(vec![0.1, 0.9]),
        ),
        (DynSystem::skew(Alpha::Golden), Point::Skew(0.25, 0.5)),
    ]
}

proptest! {
    #[test]
    fn iterates_compose(i in 0u64..=1_000_000, j in 0u64..=1_000_000) {
        for (sys, x) in systems() {
            let a = sys.iterate(i + j, &x).unwrap();
            let b = sys.iterate(i, &sys.iterate(j, &x).unwrap()).unwrap();
            prop_assert!(in_unit(&a) && in_unit(&b));
            // the tolerance covers the j² α term of the skew coordinate
            prop_assert!(close(&a, &b, 1e-9), "{:?}: {:?} vs {:?}", sys, a, b);
        }
    }

    #[test]
    fn frac_mul_matches_exact_integer_product(x in 0.5f64..1.0, m in 0u64..(1u64 << 50)) {
        // x = mant / 2^53 exactly on [0.5, 1)
        let mant = (x * (1u64 << 53) as f64) as u128;
        let want = ((mant * m as u128) % (1u128 << 53)) as f64 / (1u128 << 53) as f64;
        prop_assert_eq!(frac_mul(x, m as u128), want);
    }

    #[test]
    fn rational_multiples_are_exact(p in -50i64..50, q in 1u64..200, m in any::<u64>()) {
        let a = Alpha::rational(p, q).unwrap();
        let r = (p as i128 * m as i128).rem_euclid(q as i128) as u64;
        let Alpha::Rational { p: pp, q: qq } = a else { unreachable!() };
        prop_assert_eq!(a.frac_mul(m as u128), (r / (q / qq)) as f64 / qq as f64);
        prop_assert!(pp < qq || (pp == 0 && qq == 1));
    }
}

#[test]
fn closed_form_matches_stepping() {
    for (sys, x) in systems() {
        let mut y = x.clone();
        for j in 1..=5000u64 {
            y = sys.step(&y).unwrap();
            if j % 97 == 0 || j == 5000 {
                assert!(close(&sys.iterate(j, &x).unwrap(), &y, 1e-9), "{sys:?} at j = {j}");
            }
        }
    }
}

#[test]
fn rational_birkhoff_averages_over_full_periods() {
    // e(h j p/q) summed over whole periods vanishes unless q | h p
    let sys = DynSystem::circle(Alpha::rational(2, 9).unwrap());
    let x = Point::Circle(0.0);
    for h in 1..=9i64 {
        let avg = sys.birkhoff_average(&TestFunction::Trig(h), &x, 9 * 40).unwrap();
        let want = if (2 * h) % 9 == 0 { 1.0 } else { 0.0 };
        assert!((avg - Complex64::new(want, 0.0)).norm() < 1e-12, "h = {h}: {avg}");
    }
}

#[test]
fn cyclic_average_is_the_mean_of_values() {
    let sys = DynSystem::cyclic(4).unwrap();
    let vals: Vec<Complex64> = [1.0, 2.0, -3.0, 4.0].iter().map(|&v| Complex64::new(v, 0.5)).collect();
    let f = TestFunction::PointValues(vals);
    let integral = sys.invariant_integral(&f).unwrap();
    assert_eq!(integral, Complex64::new(1.0, 0.5));
    let avg = sys.birkhoff_average(&f, &Point::Cyclic(3), 400).unwrap();
    assert!((avg - integral).norm() < 1e-14);
}

#[test]
fn irrational_averages_approach_the_integral() {
    let sys = DynSystem::circle(Alpha::Golden);
    let f = TestFunction::Trig(1);
    let x = Point::Circle(0.0);
    let a = sys.birkhoff_average(&f, &x, 1000).unwrap().norm();
    let b = sys.birkhoff_average(&f, &x, 100_000).unwrap().norm();
    // |Σ e(jα)| <= 1/|sin πα|, so the average is O(1/J)
    let bound = 1.0 / (std::f64::consts::PI * Alpha::Golden.value()).sin();
    assert!(a <= bound / 1000.0 + 1e-12 && b <= bound / 100_000.0 + 1e-12);
}

#[test]
fn ergodicity_flags_and_domains() {
    assert!(DynSystem::circle(Alpha::Golden).is_totally_uniquely_ergodic());
    assert!(!DynSystem::circle(Alpha::rational(1, 3).unwrap()).is_totally_uniquely_ergodic());
    assert!(!DynSystem::circle(Alpha::decimal(0.618).unwrap()).is_totally_uniquely_ergodic());
    assert!(!DynSystem::cyclic(2).unwrap().is_totally_uniquely_ergodic());
    assert!(!DynSystem::torus(vec![Alpha::Golden, Alpha::Golden])
        .unwrap()
        .is_totally_uniquely_ergodic());
    assert!(DynSystem::skew(Alpha::Sqrt2Minus1).is_totally_uniquely_ergodic());
    assert!(DynSystem::cyclic(1).is_err());
    let sys = DynSystem::circle(Alpha::Golden);
    assert!(sys.iterate(1, &Point::Circle(1.0)).is_err());
    assert!(sys.iterate(1, &Point::Cyclic(0)).is_err());
    assert!(sys
        .birkhoff_average(&TestFunction::Trig(1), &Point::Circle(0.0), 0)
        .is_err());
    assert!(sys.invariant_integral(&TestFunction::TrigVec(vec![1, 2])).is_err());
}
