use super::*;
use crate::logic::{Formula, SymKind, Term};
use crate::spec::ArrayKind;

const OT: &str = include_str!("../../../../benchmarks/ot/spec.cf");

fn minimal(extra_arrays: &str, counters: &str, init: &str, trans: &str, bad: &str) -> String {
    format!(
        "params: N;\nsorts: Val = {{v0, v1}}; Acc = {{bot, a0, a1}};\narrays: V : Val; A : Acc;{extra_arrays}\n\
         counters: {counters}\ninit: {init};\ntrans: case {trans};\nunsafe: {bad};\n"
    )
}

#[test]
fn parses_the_one_third_spec() {
    let p = parse_spec(OT).unwrap();
    assert_eq!(p.params.len(), 1);
    assert_eq!(p.counters.len(), 6);
    let s = validate(&p).unwrap();
    let enumerated = s
        .arrays
        .iter()
        .filter(|a| matches!(a.kind, ArrayKind::Enumerated(_)))
        .count();
    assert_eq!(enumerated, 2);
    assert_eq!(s.arithmetic_arrays().count(), 2);
    assert_eq!(s.sort_of("A").unwrap().values.len(), 3);
    assert_eq!(s.trans.len(), 1);
    assert_eq!(s.trans[0].var, "i");
}

#[test]
fn empty_input_needs_params() {
    let e = parse_spec("").unwrap_err();
    assert!(e.to_string().contains("expected section 'params'"), "{e}");
}

#[test]
fn syntax_errors_carry_position_and_expectations() {
    let e = parse_spec("params: N;\ninit: N > ;\ntrans: true;").unwrap_err();
    match e {
        SpecError::Syntax { pos, expected, .. } => {
            assert_eq!(pos.line, 2);
            assert!(expected.contains(&"numeral".to_string()));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn duplicate_declarations() {
    let e = parse_spec("params: N, N;\ninit: true;\ntrans: true;").unwrap_err();
    assert!(matches!(e, SpecError::DuplicateDeclaration { .. }));
}

#[test]
fn arithmetic_array_in_counter_is_parsed_then_rejected() {
    let src = "params: N;\narrays: R0 : int;\ncounters: z = #{k | R0(k) = 0};\ninit: true;\ntrans: true;\n";
    let p = parse_spec(src).unwrap();
    assert!(matches!(
        validate(&p),
        Err(SpecError::FragmentViolation { .. })
    ));
}

#[test]
fn two_process_variables_are_rejected() {
    let src = minimal("", "", "true", "A(x) = A(y)", "false");
    let e = validate(&parse_spec(&src).unwrap()).unwrap_err();
    assert!(matches!(e, SpecError::FragmentViolation { .. }), "{e}");
}

#[test]
fn reads_at_two_variables_in_one_case_are_rejected() {
    let src = minimal("", "", "true", "A(x) = a0 & V(y) = v0", "false");
    assert!(matches!(
        validate(&parse_spec(&src).unwrap()),
        Err(SpecError::FragmentViolation { .. })
    ));
}

#[test]
fn safety_formula_may_not_mention_arrays() {
    let src = minimal("", "", "true", "true", "V(x) = v0");
    assert!(matches!(
        validate(&parse_spec(&src).unwrap()),
        Err(SpecError::FragmentViolation { .. })
    ));
}

#[test]
fn unknown_symbols_and_sort_mismatches() {
    let src = minimal("", "", "M > 2", "true", "false");
    assert!(matches!(
        validate(&parse_spec(&src).unwrap()),
        Err(SpecError::UnknownSymbol { .. })
    ));
    let src = minimal("", "", "A(x) = v0", "true", "false");
    assert!(matches!(
        validate(&parse_spec(&src).unwrap()),
        Err(SpecError::SortMismatch { .. })
    ));
    let src = minimal("", "", "A(x) = V(x)", "true", "false");
    assert!(matches!(
        validate(&parse_spec(&src).unwrap()),
        Err(SpecError::SortMismatch { .. })
    ));
}

#[test]
fn init_may_not_be_primed_and_must_be_unique() {
    let src = minimal("", "", "A'(x) = bot", "true", "false");
    assert!(matches!(
        validate(&parse_spec(&src).unwrap()),
        Err(SpecError::FragmentViolation { .. })
    ));
    let src = "params: N;\ninit: true; true;\ntrans: true;\n";
    assert!(matches!(
        validate(&parse_spec(src).unwrap()),
        Err(SpecError::MultipleInitCases { count: 2, .. })
    ));
}

#[test]
fn greater_than_is_normalized() {
    let src = "params: N;\ninit: N > 2;\ntrans: true;\n";
    let s = validate(&parse_spec(src).unwrap()).unwrap();
    assert_eq!(s.init.body.to_string(), "2 < N");
}

#[test]
fn boolean_variables_get_a_range_invariant() {
    let src = "params: N;\nintvars: S : bool;\ninit: S = 0;\ntrans: S' = 1;\n";
    let s = validate(&parse_spec(src).unwrap()).unwrap();
    assert_eq!(s.invariant.len(), 1);
    assert_eq!(s.invariant[0].body.to_string(), "0 <= S & S <= 1");
}

#[test]
fn floor_division_becomes_a_local() {
    let src = minimal(
        " R0 : int; R1 : int;",
        "",
        "true",
        "R0'(x) + R1'(x) > (2*N) div 3",
        "false",
    );
    let s = load_spec(&src).unwrap();
    assert_eq!(s.locals.len(), 1);
    assert_eq!(s.locals[0].name, "t0");
    assert_eq!(
        s.trans[0].body.to_string(),
        "t0 < R0'(x) + R1'(x) & 3*t0 <= 2*N & 2*N < 3*t0 + 3"
    );
}

#[test]
fn shared_divisions_reuse_one_local() {
    let s = load_spec(OT).unwrap();
    assert_eq!(s.locals.len(), 1);
    assert_eq!(s.locals[0].divisor, 3.into());
}

#[test]
fn division_free_specs_are_unchanged() {
    let src = minimal("", "", "true", "A'(x) = A(x)", "false");
    let s = validate(&parse_spec(&src).unwrap()).unwrap();
    assert_eq!(desugar_floor_div(&s).unwrap(), s);
}

#[test]
fn zero_and_symbolic_divisors() {
    let src = "params: N;\ninit: N div 0 = 1;\ntrans: true;\n";
    assert!(matches!(
        validate(&parse_spec(src).unwrap()),
        Err(SpecError::ZeroDivisor { .. })
    ));
    let src = "params: N, M;\ninit: N div M = 1;\ntrans: true;\n";
    assert!(matches!(
        validate(&parse_spec(src).unwrap()),
        Err(SpecError::NonConstantDivisor { .. })
    ));
}

#[test]
fn print_parse_round_trip_on_the_corpus_spec() {
    let p = parse_spec(OT).unwrap();
    let printed = print_spec(&p);
    let again = parse_spec(&printed).unwrap();
    assert_eq!(p, again);
    assert_eq!(print_spec(&again), printed);
}

#[test]
fn counters_resolve_as_counter_symbols() {
    let s = load_spec(OT).unwrap();
    let bad = &s.unsafe_;
    let mut kinds = Vec::new();
    bad.map_terms(&mut |t| {
        if let Term::Sym(sym) = t {
            kinds.push(sym.kind);
        }
        None
    });
    assert!(kinds.iter().all(|k| *k == SymKind::Counter));
    assert_ne!(*bad, Formula::False);
}
