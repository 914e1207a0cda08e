use num::BigRational;
use proptest::prelude::*;

use nakajima::closed_forms::PowerSeries1;
use nakajima::combinatorics::{partitions_of, Partition};
use nakajima::fock::{Atom, Gen, NormalizeCtx, NormalizerRegistry, OperatorExpr};
use nakajima::recursions::{Engine, RecursionConfig};
use nakajima::series::{series_exp, series_log, CoefficientTable, SeriesKind};
use nakajima::surface::{ClassMono, IdSource, Mono, SurfaceClass, SurfaceProfile};

fn class() -> impl Strategy<Value = ClassMono> {
    prop_oneof![Just(Mono::I), Just(Mono::K), Just(Mono::C), Just(Mono::E), Just(Mono::K2)].prop_map(ClassMono::plain)
}

fn word() -> impl Strategy<Value = Vec<Atom>> {
    let atom = prop_oneof![
        Just(Atom::Boundary),
        (class(), 1u32..=3).prop_map(|(c, n)| Atom::Create(Gen::new(c, Partition::single(n)))),
        (class(), 1u32..=2).prop_map(|(c, n)| Atom::Virasoro(c, n)),
        (0u32..=3, class(), 1u32..=2).prop_map(|(i, c, n)| Atom::Derived(i, c, n)),
    ];
    prop::collection::vec(atom, 1..=4).prop_filter("weight at most 4", |w| {
        (1..=4).contains(&w.iter().map(Atom::weight).sum::<u64>())
    })
}

fn profile() -> impl Strategy<Value = SurfaceProfile> {
    prop_oneof![
        Just(SurfaceProfile::Generic),
        Just(SurfaceProfile::K3Abelian),
        Just(SurfaceProfile::Plane)
    ]
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strategies_agree(w in word(), p in profile()) {
        let mut w = w;
        w.push(Atom::Vacuum);
        let expr = OperatorExpr::word(w);
        let reg = NormalizerRegistry::with_defaults();
        let mut results = Vec::new();
        for n in reg.iter() {
            let ids = IdSource::new();
            let ctx = NormalizeCtx { profile: p, ids: &ids };
            results.push(n.normalize(&expr, &ctx).unwrap());
        }
        for r in &results[1..] {
            prop_assert_eq!(r, &results[0]);
        }
    }

    #[test]
    fn normal_forms_are_homogeneous(w in word()) {
        let weight: u64 = w.iter().map(Atom::weight).sum();
        let mut w = w;
        w.push(Atom::Vacuum);
        let s = nakajima::fock::normalize(&OperatorExpr::word(w), SurfaceProfile::Generic).unwrap();
        prop_assert!(s.weights().iter().all(|&x| x == weight));
        prop_assert!(s.degrees().windows(2).all(|d| d[0] == d[1]));
    }

    #[test]
    fn reverse_is_a_compositional_inverse(cs in prop::collection::vec(rational(), 1..6)) {
        prop_assume!(cs[0] != BigRational::from_integer(0.into()));
        let mut c = vec![BigRational::from_integer(0.into())];
        c.extend(cs);
        let n = c.len();
        let f = PowerSeries1::new(c, n);
        let g = f.reverse().unwrap();
        prop_assert_eq!(f.compose(&g).unwrap(), PowerSeries1::var(n));
        prop_assert_eq!(g.compose(&f).unwrap(), PowerSeries1::var(n));
    }

    #[test]
    fn exp_inverts_log(cs in prop::collection::vec(rational(), 1..7)) {
        let mut c = vec![BigRational::from_integer(1.into())];
        c.extend(cs);
        let n = c.len();
        let f = PowerSeries1::new(c, n);
        prop_assert_eq!(f.log().unwrap().exp().unwrap(), f);
    }
}

#[test]
fn chern_series_log_round_trips() {
    let config = RecursionConfig {
        surface_profile: SurfaceProfile::Generic,
        max_weight: 3,
    };
    let mut e = Engine::new(config);
    let s = e
        .chern_taut_series(2, &SurfaceClass::mono(Mono::C), &SurfaceClass::mono(Mono::D))
        .unwrap();
    assert_eq!(series_exp(&series_log(&s).unwrap()).unwrap(), s);
}

#[test]
fn tables_round_trip_through_json() {
    let mut t = CoefficientTable::new("ch_taut", SeriesKind::Linear, SurfaceProfile::Generic, Some(2), 3);
    for (i, p) in (1..=3).flat_map(partitions_of).enumerate() {
        t.insert(p, Mono::ALL[i % Mono::ALL.len()], BigRational::new((i as i64 - 3).into(), 7.into()));
    }
    let back = CoefficientTable::from_json(&t.to_json(), SeriesKind::Linear).unwrap();
    assert_eq!(back.diff(&t), vec![]);
    assert_eq!(back.to_json(), t.to_json());
}
