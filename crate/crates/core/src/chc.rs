//! Constrained Horn clauses for the safety of a counter system, in the
//! HORN logic of SMT-LIB, and a bounded unrolling for debugging.
//!
//! Identifier mangling: every `_` of a name is doubled, so mangled names
//! only contain even runs of underscores. Names that would then not start
//! with a letter, and names that collide with SMT-LIB words or with the
//! predicate, get the prefix `q_`. A primed name gets the suffix `_p`, and
//! auxiliary variables (multipliers for divisibility constraints, step
//! copies in the unrolling) end in `_` followed by a letter and digits.
//! Those endings are odd underscore runs, which keeps the scheme
//! injective; the emitter still checks every rule's names for clashes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::frontend::{parse_formula, validate_ground, SpecError};
use crate::pipeline::{
    abstract_ground, local_side, CounterSystem, LocalInfo, Options, PipelineError,
};
use crate::qe::{Conj, Constraint, LinExpr, Rel};
use crate::spec::SystemSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChcError {
    #[error("identifiers `{first}` and `{second}` both mangle to `{mangled}`")]
    SymbolClash {
        first: String,
        second: String,
        mangled: String,
    },
    #[error("`{0}` is not a variable of the counter system")]
    UnknownVariable(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// A safety goal: the bad states, and optionally a strengthening of the
/// initial states.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Goal {
    pub bad: Vec<Conj>,
    pub init: Option<Vec<Conj>>,
}

impl Goal {
    /// The unsafe section the system was built with.
    pub fn from_system(cs: &CounterSystem) -> Goal {
        Goal {
            bad: cs.bad.clone(),
            init: None,
        }
    }

    /// Parses a bad-state formula and an optional init strengthening, both
    /// ground formulas over parameters, integer variables and counters.
    pub fn parse(
        spec: &SystemSpec,
        bad: &str,
        init: Option<&str>,
        opts: &Options,
    ) -> Result<Goal, ChcError> {
        Ok(Goal {
            bad: parse_ground(spec, bad, opts)?,
            init: init.map(|i| parse_ground(spec, i, opts)).transpose()?,
        })
    }
}

/// A ground formula over parameters, integer variables and counters, as a
/// disjunction of constraint sets.
pub fn parse_ground(spec: &SystemSpec, text: &str, opts: &Options) -> Result<Vec<Conj>, ChcError> {
    let f = validate_ground(spec, &parse_formula(text)?)?;
    Ok(abstract_ground(spec, &f, opts)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Init,
    Step,
    Query,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub kind: RuleKind,
    /// Index of the init or step disjunct the rule comes from.
    pub disjunct: Option<usize>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornProblem {
    pub predicate: String,
    /// Unmangled argument names, in order.
    pub arguments: Vec<String>,
    pub rules: Vec<Rule>,
    pub text: String,
}

impl HornProblem {
    pub fn count(&self, kind: RuleKind) -> usize {
        self.rules.iter().filter(|r| r.kind == kind).count()
    }
}

/// Where a system came from, for the header comment.
#[derive(Clone, Debug, Default)]
pub struct Provenance<'a> {
    pub source: Option<&'a str>,
    pub label: Option<&'a str>,
}

const RESERVED: [&str; 26] = [
    "and", "or", "not", "xor", "ite", "let", "forall", "exists", "match", "par", "as", "distinct",
    "true", "false", "div", "mod", "abs", "assert", "check", "to_real", "to_int", "is_int", "Int",
    "Bool", "Real", "NUMERAL",
];

pub const PREDICATE: &str = "inv";

/// The mangled form of a name (see the module documentation).
pub fn mangle(name: &str) -> String {
    let doubled = name.replace('_', "__");
    let starts_ok = doubled
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic());
    if starts_ok && !RESERVED.contains(&doubled.as_str()) && doubled != PREDICATE {
        doubled
    } else {
        format!("q_{doubled}")
    }
}

/// Mangled name of the post-state copy of `name`.
pub fn mangle_primed(name: &str) -> String {
    format!("{}_p", mangle(name))
}

/// Maps the names a formula may mention to their mangled forms, rejecting
/// collisions.
#[derive(Clone, Debug, Default)]
struct Names {
    map: BTreeMap<String, String>,
    back: BTreeMap<String, String>,
}

impl Names {
    fn add(&mut self, name: &str, mangled: String) -> Result<(), ChcError> {
        if let Some(other) = self.back.get(&mangled) {
            if other != name {
                return Err(ChcError::SymbolClash {
                    first: other.clone(),
                    second: name.to_string(),
                    mangled,
                });
            }
        }
        self.back.insert(mangled.clone(), name.to_string());
        self.map.insert(name.to_string(), mangled);
        Ok(())
    }

    fn get(&self, name: &str) -> Result<&str, ChcError> {
        self.map
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| ChcError::UnknownVariable(name.to_string()))
    }
}

fn numeral(k: &BigInt) -> String {
    if k.is_negative() {
        format!("(- {})", k.abs())
    } else {
        k.to_string()
    }
}

fn sum(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "0".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

fn and(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "true".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

fn or(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "false".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(or {})", parts.join(" ")),
    }
}

/// Both sides of `e <op> 0` with nonnegative coefficients.
fn sides(e: &LinExpr, names: &Names) -> Result<(String, String), ChcError> {
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for (v, c) in &e.coeffs {
        let m = names.get(v)?.to_string();
        let mag = c.abs();
        let t = if mag.is_one() {
            m
        } else {
            format!("(* {mag} {m})")
        };
        if c.is_positive() {
            lhs.push(t);
        } else {
            rhs.push(t);
        }
    }
    if e.constant.is_positive() {
        lhs.push(e.constant.to_string());
    } else if e.constant.is_negative() {
        rhs.push((-&e.constant).to_string());
    }
    Ok((sum(lhs), sum(rhs)))
}

/// Renders constraints; a divisibility `m | e` becomes `e = m*k` for a
/// fresh `k`, returned in `aux` so the caller can quantify or declare it.
struct Printer<'a> {
    names: &'a Names,
    aux_suffix: String,
    aux: Vec<String>,
}

impl Printer<'_> {
    fn constraint(&mut self, k: &Constraint) -> Result<String, ChcError> {
        let (l, r) = sides(&k.expr, self.names)?;
        Ok(match &k.rel {
            Rel::Eq => format!("(= {l} {r})"),
            Rel::Le => format!("(<= {l} {r})"),
            Rel::Dvd(m) => {
                let name = format!("m_k{}{}", self.aux.len(), self.aux_suffix);
                self.aux.push(name.clone());
                // l - r = m * name
                format!("(= (- {l} {r}) (* {} {name}))", numeral(m))
            }
        })
    }

    fn conj(&mut self, c: &Conj) -> Result<String, ChcError> {
        let parts = c
            .constraints
            .iter()
            .map(|k| self.constraint(k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(and(parts))
    }

    fn dnf(&mut self, d: &[&Conj]) -> Result<String, ChcError> {
        let parts = d
            .iter()
            .map(|c| self.conj(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(or(parts))
    }
}

fn sorted_vars<'a>(parts: impl IntoIterator<Item = &'a Conj>) -> BTreeSet<String> {
    parts.into_iter().flat_map(|c| c.vars()).collect()
}

/// Side constraints of the locals among `used`, as extra constraints.
fn locals_for(locals: &[LocalInfo], used: &BTreeSet<String>) -> Conj {
    let mut c = Conj::default();
    for l in locals.iter().filter(|l| used.contains(&l.name)) {
        c.extend(local_side(l));
    }
    c
}

fn quantified(vars: &[String], body: String) -> String {
    if vars.is_empty() {
        return body;
    }
    let decls: Vec<String> = vars.iter().map(|v| format!("({v} Int)")).collect();
    format!("(forall ({}) {body})", decls.join(" "))
}

fn header(cs: &CounterSystem, prov: &Provenance, what: &str) -> String {
    let mut h = String::new();
    let _ = writeln!(
        h,
        "; {what}, generated by cntabs {}",
        env!("CARGO_PKG_VERSION")
    );
    if let Some(label) = prov.label {
        let _ = writeln!(h, "; input: {label}");
    }
    if let Some(src) = prov.source {
        let _ = writeln!(
            h,
            "; source sha256: {}",
            hex::encode(Sha256::digest(src.as_bytes()))
        );
    }
    let s = &cs.stats;
    let _ = writeln!(h, "; exact abstraction: {}", cs.exact);
    let _ = writeln!(
        h,
        "; cells: {} init, {} trans; atoms: {}; cubes: {}; data constraints: {}",
        s.init_cells, s.trans_cells, s.atoms, s.cubes, s.distinct_thetas
    );
    let _ = writeln!(
        h,
        "; disjuncts: {} invariant, {} init, {} trans",
        cs.invariant.len(),
        cs.init.len(),
        cs.trans.len()
    );
    h
}

struct Context {
    names: Names,
    state: Vec<String>,
    mutable: BTreeSet<String>,
}

impl Context {
    fn new(cs: &CounterSystem) -> Result<Self, ChcError> {
        let mut names = Names::default();
        let state = cs.state_vars();
        let mutable: BTreeSet<String> = cs.mutable_vars().into_iter().collect();
        for v in &state {
            names.add(v, mangle(v))?;
        }
        for v in &mutable {
            names.add(&format!("{v}'"), mangle_primed(v))?;
        }
        for l in &cs.locals {
            names.add(&l.name, mangle(&l.name))?;
        }
        Ok(Context {
            names,
            state,
            mutable,
        })
    }

    fn args(&self, post: bool) -> Vec<String> {
        self.state
            .iter()
            .map(|v| {
                if post && self.mutable.contains(v) {
                    mangle_primed(v)
                } else {
                    mangle(v)
                }
            })
            .collect()
    }

    fn atom(&self, post: bool) -> String {
        format!("({PREDICATE} {})", self.args(post).join(" "))
    }

    /// The mangled names of `used`, in a fixed order: state, primed, locals.
    fn bound(&self, used: &BTreeSet<String>, aux: &[String]) -> Result<Vec<String>, ChcError> {
        let mut out: Vec<String> = Vec::new();
        for v in used {
            let m = self.names.get(v)?.to_string();
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out.sort();
        out.extend(aux.iter().cloned());
        Ok(out)
    }
}

/// The Horn problem of `cs` with the given goal.
///
/// `sat` means an inductive invariant exists (the system is safe); `unsat`
/// means the abstraction reaches a bad state (possibly unsafe).
pub fn emit_horn(
    cs: &CounterSystem,
    goal: &Goal,
    prov: &Provenance,
) -> Result<HornProblem, ChcError> {
    let cx = Context::new(cs)?;
    let invariant: Vec<&Conj> = cs.invariant.iter().map(|d| &d.conj).collect();
    let mut rules = Vec::new();

    let rule =
        |kind, disjunct, parts: Vec<&[&Conj]>, head: String, pre: bool| -> Result<Rule, ChcError> {
            let mut used = sorted_vars(parts.iter().flat_map(|p| p.iter().copied()));
            let sides = locals_for(&cs.locals, &used);
            used.extend(sides.vars());
            let mut pr = Printer {
                names: &cx.names,
                aux_suffix: String::new(),
                aux: Vec::new(),
            };
            let mut body = Vec::new();
            if pre {
                body.push(cx.atom(false));
            }
            for p in &parts {
                let s = pr.dnf(p)?;
                if s != "true" {
                    body.push(s);
                }
            }
            if !sides.is_empty() {
                body.push(pr.conj(&sides)?);
            }
            // the predicate's own arguments are always bound
            used.extend(cx.state.iter().cloned());
            if kind == RuleKind::Step {
                used.extend(cx.mutable.iter().map(|v| format!("{v}'")));
            }
            let vars = cx.bound(&used, &pr.aux)?;
            let text = format!(
                "(assert {})",
                quantified(&vars, format!("(=> {} {head})", and(body)))
            );
            Ok(Rule {
                kind,
                disjunct,
                text,
            })
        };

    let extra: Option<Vec<&Conj>> = goal.init.as_ref().map(|d| d.iter().collect());
    for (i, d) in cs.init.iter().enumerate() {
        let this = [&d.conj];
        let mut parts: Vec<&[&Conj]> = vec![&invariant, &this];
        if let Some(e) = &extra {
            parts.push(e);
        }
        rules.push(rule(RuleKind::Init, Some(i), parts, cx.atom(false), false)?);
    }
    for (i, d) in cs.trans.iter().enumerate() {
        let this = [&d.conj];
        rules.push(rule(
            RuleKind::Step,
            Some(i),
            vec![&invariant, &this],
            cx.atom(true),
            true,
        )?);
    }
    let bad: Vec<&Conj> = goal.bad.iter().collect();
    rules.push(rule(
        RuleKind::Query,
        None,
        vec![&bad],
        "false".into(),
        true,
    )?);

    let mut text = header(
        cs,
        prov,
        "safety of a counter system as constrained Horn clauses",
    );
    let _ = writeln!(text, "; {PREDICATE} arguments: {}", cx.state.join(" "));
    let _ = writeln!(
        text,
        "; sat: an inductive invariant exists (safe); unsat: the abstraction reaches a bad state"
    );
    text.push_str("(set-logic HORN)\n");
    let _ = writeln!(
        text,
        "(declare-fun {PREDICATE} ({}) Bool)",
        vec!["Int"; cx.state.len()].join(" ")
    );
    for r in &rules {
        text.push_str(&r.text);
        text.push('\n');
    }
    text.push_str("(check-sat)\n");
    Ok(HornProblem {
        predicate: PREDICATE.into(),
        arguments: cx.state.clone(),
        rules,
        text,
    })
}

/// A single satisfiability query for "some path of at most `depth` abstract
/// steps from an initial state ends in a bad state". A model is a
/// counterexample; `unsat` proves there is none of that length.
pub fn emit_bounded_smt(
    cs: &CounterSystem,
    goal: &Goal,
    depth: usize,
    prov: &Provenance,
) -> Result<String, ChcError> {
    let state = cs.state_vars();
    let mutable: BTreeSet<String> = cs.mutable_vars().into_iter().collect();
    // names at step i: state variables, and locals of the step from i
    let at = |i: usize| -> Result<Names, ChcError> {
        let mut n = Names::default();
        let copy = |v: &str, j: usize| {
            if mutable.contains(v) {
                format!("{}_s{j}", mangle(v))
            } else {
                mangle(v)
            }
        };
        for v in &state {
            n.add(v, copy(v, i))?;
            if mutable.contains(v) {
                n.add(&format!("{v}'"), copy(v, i + 1))?;
            }
        }
        for l in &cs.locals {
            n.add(&l.name, format!("{}_s{i}", mangle(&l.name)))?;
        }
        Ok(n)
    };
    let mut decls: BTreeSet<String> = BTreeSet::new();
    let mut declared = Vec::new();
    let mut declare = |v: String, decls: &mut BTreeSet<String>| {
        if decls.insert(v.clone()) {
            declared.push(v);
        }
    };
    for i in 0..=depth {
        let n = at(i)?;
        for v in &state {
            declare(n.get(v)?.to_string(), &mut decls);
        }
    }

    let invariant: Vec<&Conj> = cs.invariant.iter().map(|d| &d.conj).collect();
    let trans: Vec<&Conj> = cs.trans.iter().map(|d| &d.conj).collect();
    let bad: Vec<&Conj> = goal.bad.iter().collect();
    let mut asserts = Vec::new();
    let mut aux_all = Vec::new();
    let render = |names: &Names,
                  suffix: String,
                  d: &[&Conj],
                  aux_all: &mut Vec<String>|
     -> Result<String, ChcError> {
        let used = sorted_vars(d.iter().copied());
        let sides = locals_for(&cs.locals, &used);
        let mut pr = Printer {
            names,
            aux_suffix: suffix,
            aux: Vec::new(),
        };
        let mut s = pr.dnf(d)?;
        if !sides.is_empty() {
            s = and(vec![s, pr.conj(&sides)?]);
        }
        aux_all.extend(pr.aux);
        Ok(s)
    };
    let n0 = at(0)?;
    let mut init = vec![
        render(&n0, "_i".into(), &invariant, &mut aux_all)?,
        render(
            &n0,
            "_j".into(),
            &cs.init.iter().map(|d| &d.conj).collect::<Vec<_>>(),
            &mut aux_all,
        )?,
    ];
    if let Some(e) = &goal.init {
        init.push(render(
            &n0,
            "_e".into(),
            &e.iter().collect::<Vec<_>>(),
            &mut aux_all,
        )?);
    }
    asserts.push(and(init.into_iter().filter(|s| s != "true").collect()));

    // bad(0) | (step(0) & (bad(1) | (step(1) & ...)))
    let mut nested = String::new();
    for i in (0..=depth).rev() {
        let n = at(i)?;
        let here = render(&n, format!("_b{i}"), &bad, &mut aux_all)?;
        if i == depth {
            nested = here;
            continue;
        }
        let step = and(vec![
            render(&n, format!("_v{i}"), &invariant, &mut aux_all)?,
            render(&n, format!("_t{i}"), &trans, &mut aux_all)?,
        ]);
        nested = or(vec![here, and(vec![step, nested])]);
    }
    asserts.push(nested);
    for i in 0..=depth {
        for l in &cs.locals {
            declare(at(i)?.get(&l.name)?.to_string(), &mut decls);
        }
    }
    for a in aux_all {
        declare(a, &mut decls);
    }

    let mut text = header(
        cs,
        prov,
        &format!("bounded reachability of a bad state in at most {depth} steps"),
    );
    text.push_str("; sat: the model is an abstract counterexample; unsat: none of that length\n");
    text.push_str("(set-logic QF_LIA)\n");
    for v in declared {
        let _ = writeln!(text, "(declare-const {v} Int)");
    }
    for a in asserts {
        let _ = writeln!(text, "(assert {a})");
    }
    text.push_str("(check-sat)\n");
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load_spec;
    use crate::pipeline::{build_counter_system, parse_conj};

    const TOGGLE: &str = "
params: N;
sorts: S = {off, on};
arrays: L : S;
counters: u = #{k | L(k) = on};
init: forall x . L(x) = off;
trans: case forall x . L'(x) = on | L'(x) = L(x);
unsafe: u > N;
";

    fn toggle() -> (SystemSpec, CounterSystem) {
        let spec = load_spec(TOGGLE).unwrap();
        let cs = build_counter_system(&spec, &Options::default()).unwrap();
        (spec, cs)
    }

    fn is_symbol(s: &str) -> bool {
        let mut cs = s.chars();
        cs.next().is_some_and(|c| c.is_ascii_alphabetic())
            && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    #[test]
    fn mangling() {
        assert_eq!(mangle("z00"), "z00");
        assert_eq!(mangle("zb_0"), "zb__0");
        assert_eq!(mangle("_w0"), "q___w0");
        assert_eq!(mangle("and"), "q_and");
        assert_eq!(mangle("inv"), "q_inv");
        assert_eq!(mangle_primed("z00"), "z00_p");
        // a name ending in `_p` is not confused with a primed name
        assert_ne!(mangle("z_p"), mangle_primed("z"));
        for n in ["a", "a_", "_a", "a__b", "and", "q_and", "z_p", "Int"] {
            assert!(is_symbol(&mangle(n)), "{n}");
        }
    }

    #[test]
    fn clashes_are_reported() {
        let mut n = Names::default();
        n.add("a", "x".into()).unwrap();
        assert!(matches!(
            n.add("b", "x".into()),
            Err(ChcError::SymbolClash { .. })
        ));
    }

    #[test]
    fn toggle_problem_shape() {
        let (_, cs) = toggle();
        let h = emit_horn(&cs, &Goal::from_system(&cs), &Provenance::default()).unwrap();
        assert_eq!(h.arguments, ["N", "u"]);
        assert_eq!(h.count(RuleKind::Init), cs.init.len());
        assert_eq!(h.count(RuleKind::Step), cs.trans.len());
        assert_eq!(h.count(RuleKind::Query), 1);
        assert!(h
            .text
            .contains("(set-logic HORN)\n(declare-fun inv (Int Int) Bool)\n"));
        assert!(h.text.contains("(inv N u_p)"));
        assert!(h.text.ends_with("(check-sat)\n"));
        let q = &h.rules.last().unwrap().text;
        assert_eq!(
            q,
            "(assert (forall ((N Int) (u Int)) (=> (and (inv N u) (<= (+ N 1) u)) false)))"
        );
    }

    #[test]
    fn empty_transition_relation_and_false_bad() {
        let (_, mut cs) = toggle();
        cs.trans.clear();
        let h = emit_horn(&cs, &Goal::from_system(&cs), &Provenance::default()).unwrap();
        assert_eq!(h.count(RuleKind::Step), 0);
        let h = emit_horn(&cs, &Goal::default(), &Provenance::default()).unwrap();
        assert!(h
            .rules
            .last()
            .unwrap()
            .text
            .contains("(=> (and (inv N u) false) false)"));
    }

    #[test]
    fn divisibility_gets_a_multiplier() {
        let (_, cs) = toggle();
        let goal = Goal {
            bad: vec![parse_conj(&["u = 0 mod 2".to_string()]).unwrap()],
            init: None,
        };
        let h = emit_horn(&cs, &goal, &Provenance::default()).unwrap();
        let q = &h.rules.last().unwrap().text;
        assert!(q.contains("(m_k0 Int)"), "{q}");
        assert!(q.contains("(= (- u 0) (* 2 m_k0))"), "{q}");
    }

    #[test]
    fn unknown_variables_are_rejected() {
        let (_, cs) = toggle();
        let goal = Goal {
            bad: vec![parse_conj(&["w = 0".to_string()]).unwrap()],
            init: None,
        };
        assert_eq!(
            emit_horn(&cs, &goal, &Provenance::default()).unwrap_err(),
            ChcError::UnknownVariable("w".into())
        );
    }

    #[test]
    fn goals_parse_with_declared_counters() {
        let (spec, _) = toggle();
        let g = Goal::parse(&spec, "u > 1", Some("u = 0"), &Options::default()).unwrap();
        assert_eq!(g.bad.len(), 1);
        assert!(g.init.is_some());
        assert!(Goal::parse(&spec, "w > 1", None, &Options::default()).is_err());
    }

    #[test]
    fn header_records_source_hash() {
        let (_, cs) = toggle();
        let p = Provenance {
            source: Some(TOGGLE),
            label: Some("toggle.cf"),
        };
        let h = emit_horn(&cs, &Goal::from_system(&cs), &p).unwrap();
        let digest = hex::encode(Sha256::digest(TOGGLE.as_bytes()));
        assert!(h.text.contains(&format!("; source sha256: {digest}\n")));
        assert!(h.text.contains("; exact abstraction: true\n"));
        assert!(h.text.lines().take_while(|l| l.starts_with(';')).count() >= 5);
    }

    #[test]
    fn bounded_unrolling_declares_every_step() {
        let (_, cs) = toggle();
        let t = emit_bounded_smt(&cs, &Goal::from_system(&cs), 2, &Provenance::default()).unwrap();
        for v in ["N", "u_s0", "u_s1", "u_s2"] {
            assert!(t.contains(&format!("(declare-const {v} Int)")), "{v}\n{t}");
        }
        assert!(!t.contains("u_s3"));
        let t0 = emit_bounded_smt(&cs, &Goal::from_system(&cs), 0, &Provenance::default()).unwrap();
        assert!(!t0.contains("u_s1"));
    }
}
