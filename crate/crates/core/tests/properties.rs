use armadillo_core::cylinder::{build_cylinder, leaf_closes};
use armadillo_core::decomposition::{decompose, DecompositionRecord};
use armadillo_core::flow::{replay_segments, section_first_return, special_slope, trace, Status};
use armadillo_core::iet::{section_map, CircleRotation};
use armadillo_core::surface::{BoundaryEvent, EventKind};
use armadillo_core::{mod_one, rat, Point, Rational, Slope, Tail};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-500i64..500, 1i64..200).prop_map(|(n, d)| rat(n, d))
}

fn unit_open() -> impl Strategy<Value = Rational> {
    (1i64..9_999).prop_map(|n| rat(n, 10_007))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mod_one_is_additive(a in small_rational(), b in small_rational()) {
        let lhs = mod_one(&(&a + &b));
        prop_assert_eq!(lhs.clone(), mod_one(&(&mod_one(&a) + &mod_one(&b))));
        prop_assert!(!lhs.is_negative() && lhs < Rational::one());
    }

    #[test]
    fn rational_text_round_trips(a in small_rational()) {
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), a);
    }

    #[test]
    fn identification_keeps_the_free_coordinate(q in 2u32..7, k in 1usize..6, t in unit_open()) {
        let tail = Tail::new(q).unwrap();
        let x = tail.offset(k - 1) + &t * &tail.side(k);
        let roof = BoundaryEvent { kind: EventKind::Roof(k), at: Point::new(x.clone(), tail.side(k)) };
        prop_assert_eq!(tail.identify(&roof).unwrap(), Point::new(x, Rational::zero()));
        let y = tail.side(k + 1) + &t * &(tail.side(k) - tail.side(k + 1));
        let portal = BoundaryEvent { kind: EventKind::Portal(k), at: Point::new(tail.offset(k), y.clone()) };
        prop_assert_eq!(tail.identify(&portal).unwrap(), Point::new(Rational::zero(), y));
    }

    #[test]
    fn event_log_replays(q in 2u32..6, y in unit_open(), rise in 1i64..9, run in 1i64..9) {
        let tail = Tail::new(q).unwrap();
        let slope = Slope::new(rat(rise, 1), rat(run, 1)).unwrap();
        let t = trace(&Point::new(Rational::zero(), y), &slope, &tail, 300).unwrap();
        prop_assert_eq!(replay_segments(&t.start, &t.events, &tail).unwrap(), t.segments);
    }

    #[test]
    fn larger_budgets_extend_the_path(q in 2u32..6, y in unit_open(), extra in 1usize..40) {
        let tail = Tail::new(q).unwrap();
        let slope = special_slope(&tail);
        let start = Point::new(Rational::zero(), y);
        let short = trace(&start, &slope, &tail, 20).unwrap();
        let long = trace(&start, &slope, &tail, 20 + extra).unwrap();
        prop_assert!(long.events.starts_with(&short.events));
        if short.status != Status::BudgetExhausted {
            prop_assert_eq!(short, long);
        }
    }

    #[test]
    fn section_map_is_injective_off_the_endpoints(q in 2u32..6, k in 3u32..7, a in unit_open(), b in unit_open()) {
        let map = section_map(q, k).unwrap();
        let interior = |x: &Rational| map.branches.iter().any(|br| x > &br.domain.lo && x < &br.domain.hi);
        prop_assume!(a != b && interior(&a) && interior(&b));
        prop_assert_ne!(map.apply(&a).unwrap(), map.apply(&b).unwrap());
    }

    #[test]
    fn section_map_is_the_flow_return(q in 2u32..5, k in 3u32..6, a in 1i64..999_982) {
        let map = section_map(q, k).unwrap();
        let x = rat(a, 999_983);
        prop_assume!(!map.domain_gap.contains(&x));
        let tail = Tail::new(q).unwrap();
        let image = map.apply(&x).unwrap();
        prop_assert_eq!(section_first_return(&x, &special_slope(&tail), &tail).unwrap(), Some(image));
    }

    #[test]
    fn rotation_orbits_have_full_period(q in 2u32..12, i in 0i64..40) {
        let rot = CircleRotation::new(q).unwrap();
        let d = 2 * q as i64 - 1;
        let x = rat(i % d, d);
        prop_assert_eq!(rot.period(&x), d as usize);
    }

    #[test]
    fn leaves_inside_a_cylinder_close(q in 2u32..4, k in 1u32..4, t in unit_open()) {
        let c = build_cylinder(q, k).unwrap();
        let offset = &c.skew_width * &t;
        prop_assert!(leaf_closes(&c, &offset));
    }
}

#[test]
fn decomposition_json_round_trips() {
    let record = decompose(3, 4).unwrap().to_record();
    let text = serde_json::to_string(&record).unwrap();
    assert_eq!(serde_json::from_str::<DecompositionRecord>(&text).unwrap(), record);
}
