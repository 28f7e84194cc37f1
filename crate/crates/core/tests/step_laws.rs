use hmfree::step::{in_neighborhood, rat, zip_many, Rational, StepFn};
use proptest::prelude::*;

const ALPHABET: [&str; 4] = ["p", "q", "r", "s"];

/// Raw (possibly unnormalized) step functions with denominators up to 12.
fn raw_strategy() -> impl Strategy<Value = (Vec<Rational>, Vec<&'static str>)> {
    (2i64..=12, prop::collection::btree_set(1i64..12, 0..6), prop::collection::vec(0usize..4, 12))
        .prop_map(|(den, cuts, picks)| {
            let mut breaks = vec![rat(0, 1)];
            breaks.extend(cuts.into_iter().filter(|&c| c < den).map(|c| rat(c, den)));
            breaks.push(rat(1, 1));
            let values = (0..breaks.len() - 1).map(|i| ALPHABET[picks[i]]).collect();
            (breaks, values)
        })
}

fn stepfn_strategy() -> impl Strategy<Value = StepFn<&'static str>> {
    raw_strategy().prop_map(|(b, v)| StepFn::new(b, v).unwrap())
}

fn point_strategy() -> impl Strategy<Value = Rational> {
    (0i64..997).prop_map(|k| rat(k, 997))
}

/// Three sorted points a < b < c in [0,1].
fn triple_strategy() -> impl Strategy<Value = (Rational, Rational, Rational)> {
    prop::collection::btree_set(0i64..=60, 3).prop_map(|s| {
        let v: Vec<i64> = s.into_iter().collect();
        (rat(v[0], 60), rat(v[1], 60), rat(v[2], 60))
    })
}

fn raw_value_at(breaks: &[Rational], values: &[&'static str], t: &Rational) -> &'static str {
    let i = breaks.iter().rposition(|b| b <= t).unwrap();
    values[i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalization_preserves_values((breaks, values) in raw_strategy(), ts in prop::collection::vec(point_strategy(), 100)) {
        let f = StepFn::new(breaks.clone(), values.clone()).unwrap();
        let again = StepFn::new(f.breakpoints().to_vec(), f.values().to_vec()).unwrap();
        prop_assert_eq!(&again, &f);
        prop_assert!(f.values().windows(2).all(|w| w[0] != w[1]));
        for t in &ts {
            prop_assert_eq!(*f.value_at(t).unwrap(), raw_value_at(&breaks, &values, t));
        }
    }

    #[test]
    fn measure_is_additive(f in stepfn_strategy(), (a, b, c) in triple_strategy(), mask in 0u8..16) {
        let in_v = |v: &&str| mask >> ALPHABET.iter().position(|x| x == v).unwrap() & 1 == 1;
        let whole = f.measure_outside(&a, &c, in_v).unwrap();
        let left = f.measure_outside(&a, &b, in_v).unwrap();
        let right = f.measure_outside(&b, &c, in_v).unwrap();
        prop_assert_eq!(whole, left + right);
    }

    #[test]
    fn measure_of_complement(f in stepfn_strategy(), (a, _, c) in triple_strategy(), mask in 0u8..16) {
        let in_v = |v: &&str| mask >> ALPHABET.iter().position(|x| x == v).unwrap() & 1 == 1;
        let outside = f.measure_outside(&a, &c, in_v).unwrap();
        let inside = f.measure_outside(&a, &c, |v| !in_v(v)).unwrap();
        prop_assert!(outside >= rat(0, 1) && outside <= &c - &a);
        prop_assert_eq!(outside + inside, &c - &a);
    }

    #[test]
    fn zip_then_project(fs in prop::collection::vec(stepfn_strategy(), 1..4), ts in prop::collection::vec(point_strategy(), 20)) {
        let refs: Vec<&StepFn<&str>> = fs.iter().collect();
        let z = zip_many(&refs);
        for (i, f) in fs.iter().enumerate() {
            prop_assert_eq!(&z.map(|tuple| tuple[i]), f);
            for t in &ts {
                prop_assert_eq!(z.value_at(t).unwrap()[i], *f.value_at(t).unwrap());
            }
        }
    }

    #[test]
    fn map_is_functorial(f in stepfn_strategy(), p in prop::collection::vec(0usize..4, 4), q in prop::collection::vec(0usize..4, 4)) {
        let idx = |v: &str| ALPHABET.iter().position(|x| *x == v).unwrap();
        let pm = |v: &&str| ALPHABET[p[idx(v)]];
        let qm = |v: &&str| ALPHABET[q[idx(v)]];
        prop_assert_eq!(f.map(|v| qm(&pm(v))), f.map(pm).map(qm));
        prop_assert_eq!(f.map(|v| *v), f);
    }

    #[test]
    fn neighborhood_is_strict(g in stepfn_strategy(), (a, _, b) in triple_strategy(), mask in 1u8..16) {
        let in_v = |v: &&str| mask >> ALPHABET.iter().position(|x| x == v).unwrap() & 1 == 1;
        let center = *ALPHABET.iter().find(|v| in_v(v)).unwrap();
        let base = StepFn::constant(center);
        let m = g.measure_outside(&a, &b, in_v).unwrap();
        if m > rat(0, 1) {
            prop_assert!(!in_neighborhood(&g, &a, &b, in_v, &m, &base).unwrap());
        }
        let above = &m + rat(1, 1_000_000);
        prop_assert!(in_neighborhood(&g, &a, &b, in_v, &above, &base).unwrap());
        prop_assert!(in_neighborhood(&base, &a, &b, in_v, &rat(1, 1_000_000), &base).unwrap());
    }

    #[test]
    fn json_round_trip(f in stepfn_strategy()) {
        let owned = f.map(|v| v.to_string());
        let text = serde_json::to_string(&owned).unwrap();
        prop_assert_eq!(serde_json::from_str::<StepFn<String>>(&text).unwrap(), owned.clone());
        let parsed = hmfree::step::parse_stepfn(&owned.to_string(), |s| Ok(s.to_string())).unwrap();
        prop_assert_eq!(parsed, owned);
    }
}

#[test]
fn measure_matches_grid_sampling() {
    // breakpoints with denominators dividing 840 are sampled exactly on the 1/840 grid
    let f = StepFn::new(
        vec![rat(0, 1), rat(1, 7), rat(2, 5), rat(3, 4), rat(5, 6), rat(1, 1)],
        vec!["p", "q", "p", "r", "q"],
    )
    .unwrap();
    let exact = f.measure_outside(&rat(1, 8), &rat(7, 8), |v| *v == "p").unwrap();
    let hits = (105..735)
        .filter(|&k| *f.value_at(&rat(k, 840)).unwrap() != "p")
        .count();
    assert_eq!(exact, rat(hits as i64, 840));
}
