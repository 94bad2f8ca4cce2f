mod common;

use common::{check_counting_laws, fixture, ints, problem_from};
use dimdoe::rational::{rat, Rational};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = Rational> {
    prop_oneof![
        3 => Just(rat(0, 1)),
        3 => (-2i64..=2).prop_map(|n| rat(n, 1)),
        1 => (-3i64..=3, 2i64..=3).prop_map(|(n, d)| rat(n, d)),
    ]
}

fn instance() -> impl Strategy<Value = (Vec<Vec<Rational>>, Vec<Vec<Rational>>)> {
    (1usize..=4, 1usize..=3, 1usize..=4).prop_flat_map(|(k, r, p)| {
        (
            prop::collection::vec(prop::collection::vec(entry(), k), r),
            prop::collection::vec(prop::collection::vec(entry(), k), p),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn counting_laws_hold((a, b) in instance()) {
        let problem = problem_from(&a, &b);
        if let Err(e) = check_counting_laws(&problem) {
            prop_assert!(false, "{e}\nA = {a:?}\nB = {b:?}");
        }
    }
}

#[test]
fn worked_examples_obey_counting_laws() {
    for cols in [
        (ints(&[&[1, 1, 0], &[1, 0, 1]]), ints(&[&[1, 1, 0], &[1, 0, 2], &[1, 0, 2]])),
        (ints(&[&[1, 0, 0], &[1, 1, -1]]), ints(&[&[1, 0, 0], &[0, 1, -1], &[0, 1, -1]])),
        (
            ints(&[&[1, 1, 0], &[1, 1, 0], &[1, 0, 0]]),
            ints(&[&[0, 1, 0], &[0, 0, 1], &[0, 1, 1]]),
        ),
    ] {
        check_counting_laws(&problem_from(&cols.0, &cols.1)).unwrap();
    }
    for name in ["mars", "pump", "heat-exchanger", "counterexample"] {
        check_counting_laws(&fixture(name).problem).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
