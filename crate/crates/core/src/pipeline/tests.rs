use std::sync::OnceLock;

use super::*;
use crate::frontend::{load_spec, parse_formula, parse_formula_in, validate_ground};

fn ot() -> SystemSpec {
    load_spec(include_str!("../../../../benchmarks/ot/spec.cf")).unwrap()
}

fn ot_system() -> &'static CounterSystem {
    static CS: OnceLock<CounterSystem> = OnceLock::new();
    CS.get_or_init(|| build_counter_system(&ot(), &Options::default()).unwrap())
}

const TOGGLE: &str = "
params: N;
sorts: S = {off, on};
arrays: L : S;
counters: u = #{k | L(k) = on};
init: forall x . L(x) = off;
trans: case forall x . L'(x) = on | L'(x) = L(x);
unsafe: u > N;
";

fn atoms(c: &Conj) -> Vec<String> {
    c.constraints.iter().map(|k| k.to_string()).collect()
}

#[test]
fn ot_shape() {
    let cs = ot_system();
    assert!(cs.exact);
    assert_eq!(cs.invariant.len(), 1);
    assert!(cs.invariant[0].conj.constraints.is_empty());
    assert_eq!(cs.init.len(), 1);
    let init = atoms(&cs.init[0].conj);
    for z in ["z00", "z01", "z10", "z11"] {
        assert!(init.contains(&format!("{z} = 0")), "{init:?}");
    }
    assert_eq!(cs.trans.len(), 7);
    assert_eq!(cs.locals.len(), 1);
    assert_eq!(cs.stats.init_cells, 6);
    assert_eq!(cs.stats.trans_cells, 36);
}

#[test]
fn json_round_trip() {
    let cs = ot_system();
    let text = cs.to_json_string();
    for key in [
        "\"phi0\"",
        "\"iota0\"",
        "\"tau0\"",
        "\"provenance\"",
        "\"exact\"",
    ] {
        assert!(text.contains(key), "{key}");
    }
    let back = CounterSystem::from_json(&text).unwrap();
    assert_eq!(back.to_json_string(), text);
}

#[test]
fn toggle_system() {
    let spec = load_spec(TOGGLE).unwrap();
    let cs = build_counter_system(&spec, &Options::default()).unwrap();
    assert!(cs.exact);
    // init: every process off
    assert_eq!(cs.init.len(), 1);
    assert!(atoms(&cs.init[0].conj).contains(&"u = 0".to_string()));
    // the on-count never decreases
    let layout: Vec<(i64, i64, i64, bool)> = vec![
        (3, 1, 2, true),
        (3, 2, 1, false),
        (3, 0, 3, true),
        (3, 3, 3, true),
    ];
    for (n, u, u2, expect) in layout {
        let holds = cs.trans.iter().any(|d| {
            d.conj.eval_i64(&|v: &str| match v {
                "N" => Some(n),
                "u" => Some(u),
                "u'" => Some(u2),
                _ => None,
            }) == Some(true)
        });
        assert_eq!(holds, expect, "N={n} u={u} u'={u2}");
    }
}

#[test]
fn builds_are_deterministic() {
    let spec = load_spec(TOGGLE).unwrap();
    let a = build_counter_system(&spec, &Options::default()).unwrap();
    let b = build_counter_system(
        &spec,
        &Options {
            exec: Exec::Sequential,
            ..Options::default()
        },
    )
    .unwrap();
    assert_eq!(a.to_json_string(), b.to_json_string());
}

#[test]
fn ground_properties_use_declared_counters() {
    let spec = load_spec(TOGGLE).unwrap();
    let f = validate_ground(&spec, &parse_formula("u > 1 | N < 2").unwrap()).unwrap();
    let d = abstract_ground(&spec, &f, &Options::default()).unwrap();
    assert_eq!(d.len(), 2);
    let f = parse_formula_in(&spec, "#{y | L(y) = on} > 1").unwrap();
    let d = abstract_ground(&spec, &f, &Options::default()).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(atoms(&d[0]), vec!["2 <= u".to_string()]);
    let f = parse_formula_in(&spec, "#{y | L(y) = off} > 1").unwrap();
    assert!(matches!(
        abstract_ground(&spec, &f, &Options::default()),
        Err(PipelineError::Unsupported(_))
    ));
}

#[test]
fn init_is_restricted_to_the_invariant() {
    let src = "
params: N, t;
sorts: S = {off, on};
arrays: L : S;
counters: u = #{k | L(k) = on};
invariant: forall x . 3*t < N;
init: forall x . L(x) = off;
trans: case forall x . L'(x) = on | L'(x) = L(x);
unsafe: u > N;
";
    let cs = build_counter_system(&load_spec(src).unwrap(), &Options::default()).unwrap();
    let holds = |d: &[Disjunct], n: i64, t: i64| {
        d.iter().any(|d| {
            d.conj.eval_i64(&|v| match v {
                "N" => Some(n),
                "t" => Some(t),
                "u" => Some(0),
                _ => None,
            }) == Some(true)
        })
    };
    assert!(holds(&cs.invariant, 4, 1));
    assert!(!holds(&cs.invariant, 3, 1));
    assert!(holds(&cs.init, 4, 1));
    assert!(!holds(&cs.init, 3, 1));
}
