//! The restricted formula language: terms, atoms and formulas over one
//! process variable, with cardinality terms and array reads.

mod eval;
mod print;
mod simplify;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub use eval::{eval, eval_term, floor_div_i64, ConcreteState, Env, EvalError, Model, StatePair};
pub use simplify::simplify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymKind {
    Param,
    IntVar,
    Counter,
    /// Fresh integer introduced by desugaring or elimination; never written by users.
    Local,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sym {
    pub name: String,
    pub kind: SymKind,
    pub primed: bool,
}

impl Sym {
    pub fn new(name: impl Into<String>, kind: SymKind) -> Self {
        Sym {
            name: name.into(),
            kind,
            primed: false,
        }
    }

    pub fn param(name: impl Into<String>) -> Self {
        Sym::new(name, SymKind::Param)
    }

    pub fn primed(mut self) -> Self {
        self.primed = true;
        self
    }

    /// Name used when the symbol is flattened into a single variable of the
    /// arithmetic layer (`z00'` for a primed counter).
    pub fn var_name(&self) -> String {
        if self.primed {
            format!("{}'", self.name)
        } else {
            self.name.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Sym(Sym),
    Num(BigInt),
    /// `a(x)` or `a'(x)`.
    Read {
        array: String,
        primed: bool,
        var: String,
    },
    /// `#{k | body}`.
    Card {
        var: String,
        body: Box<Formula>,
    },
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(BigInt, Box<Term>),
    /// Floor division by a positive numeral.
    Div(Box<Term>, BigInt),
}

impl Term {
    pub fn num(n: i64) -> Term {
        Term::Num(BigInt::from(n))
    }
    pub fn sym(s: Sym) -> Term {
        Term::Sym(s)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }
    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }
    pub fn mul(k: impl Into<BigInt>, t: Term) -> Term {
        Term::Mul(k.into(), Box::new(t))
    }
    pub fn sum(ts: impl IntoIterator<Item = Term>) -> Term {
        let mut it = ts.into_iter();
        match it.next() {
            None => Term::num(0),
            Some(first) => it.fold(first, Term::add),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Cmp(CmpOp, Term, Term),
    /// `l = r mod m`, m >= 2.
    Cong(Term, Term, BigInt),
    /// `a(x) = value`; `label` is the value's name, kept for printing.
    DataConst {
        array: String,
        primed: bool,
        var: String,
        value: usize,
        label: String,
    },
    /// `a(x) = b(x)` for two arrays over the same sort.
    DataArr {
        left: String,
        lprimed: bool,
        right: String,
        rprimed: bool,
        var: String,
    },
}

impl Atom {
    pub fn is_data(&self) -> bool {
        matches!(self, Atom::DataConst { .. } | Atom::DataArr { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// Universal quantification over processes.
    Forall(String, Box<Formula>),
    /// Integer existential; only produced internally.
    ExistsInt(Sym, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }
    pub fn cmp(op: CmpOp, l: Term, r: Term) -> Formula {
        Formula::Atom(Atom::Cmp(op, l, r))
    }
    pub fn eq(l: Term, r: Term) -> Formula {
        Formula::cmp(CmpOp::Eq, l, r)
    }
    pub fn le(l: Term, r: Term) -> Formula {
        Formula::cmp(CmpOp::Le, l, r)
    }
    pub fn lt(l: Term, r: Term) -> Formula {
        Formula::cmp(CmpOp::Lt, l, r)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::And(fs.into_iter().collect())
    }
    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Or(fs.into_iter().collect())
    }
    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(var.into(), Box::new(body))
    }

    /// True if no arithmetic atom occurs (only data atoms and constants).
    pub fn is_pure_data(&self) -> bool {
        let mut pure = true;
        self.visit_atoms(&mut |a| pure &= a.is_data());
        pure
    }

    pub fn visit_atoms(&self, f: &mut dyn FnMut(&Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) | Formula::Forall(_, g) | Formula::ExistsInt(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
        }
    }

    /// Applies `f` bottom-up to every term in every arithmetic atom
    /// (cardinality bodies are rewritten as formulas, not terms).
    pub fn map_terms(&self, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Formula {
        self.map_atoms(&mut |a| match a {
            Atom::Cmp(op, l, r) => Formula::Atom(Atom::Cmp(*op, map_term(l, f), map_term(r, f))),
            Atom::Cong(l, r, m) => {
                Formula::Atom(Atom::Cong(map_term(l, f), map_term(r, f), m.clone()))
            }
            other => Formula::Atom(other.clone()),
        })
    }

    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => f(a),
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Forall(v, g) => Formula::forall(v.clone(), g.map_atoms(f)),
            Formula::ExistsInt(s, g) => Formula::ExistsInt(s.clone(), Box::new(g.map_atoms(f))),
        }
    }

    /// Top-level conjuncts (flattening nested `And`).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(gs) => gs.iter().flat_map(|g| g.conjuncts()).collect(),
            Formula::True => Vec::new(),
            f => vec![f],
        }
    }
}

fn map_term(t: &Term, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
    let inner = match t {
        Term::Add(a, b) => Term::add(map_term(a, f), map_term(b, f)),
        Term::Sub(a, b) => Term::sub(map_term(a, f), map_term(b, f)),
        Term::Mul(k, a) => Term::Mul(k.clone(), Box::new(map_term(a, f))),
        Term::Div(a, d) => Term::Div(Box::new(map_term(a, f)), d.clone()),
        other => other.clone(),
    };
    f(&inner).unwrap_or(inner)
}

/// Linear form of a term whose leaves are symbols and numerals; `None` if a
/// read, cardinality or division occurs. Symbols become arithmetic variables
/// via [`Sym::var_name`].
pub fn linearize(t: &Term) -> Option<crate::qe::LinExpr> {
    use crate::qe::LinExpr;
    Some(match t {
        Term::Sym(s) => LinExpr::var(s.var_name()),
        Term::Num(n) => LinExpr::constant(n.clone()),
        Term::Add(a, b) => linearize(a)?.plus(&linearize(b)?),
        Term::Sub(a, b) => linearize(a)?.minus(&linearize(b)?),
        Term::Mul(k, a) => linearize(a)?.scaled(k),
        Term::Read { .. } | Term::Card { .. } | Term::Div(..) => return None,
    })
}

/// A free symbol of a formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FreeSym {
    Int(Sym),
    Array { name: String, primed: bool },
}

/// Free integer symbols and arrays (array reads inside cardinality terms
/// count, since the array itself is free).
pub fn free_symbols(f: &Formula) -> BTreeSet<FreeSym> {
    let mut out = BTreeSet::new();
    collect_formula(f, &mut BTreeSet::new(), &mut out);
    out
}

fn collect_formula(f: &Formula, bound: &mut BTreeSet<Sym>, out: &mut BTreeSet<FreeSym>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => match a {
            Atom::Cmp(_, l, r) | Atom::Cong(l, r, _) => {
                collect_term(l, bound, out);
                collect_term(r, bound, out);
            }
            Atom::DataConst { array, primed, .. } => {
                out.insert(FreeSym::Array {
                    name: array.clone(),
                    primed: *primed,
                });
            }
            Atom::DataArr {
                left,
                lprimed,
                right,
                rprimed,
                ..
            } => {
                out.insert(FreeSym::Array {
                    name: left.clone(),
                    primed: *lprimed,
                });
                out.insert(FreeSym::Array {
                    name: right.clone(),
                    primed: *rprimed,
                });
            }
        },
        Formula::Not(g) | Formula::Forall(_, g) => collect_formula(g, bound, out),
        Formula::And(gs) | Formula::Or(gs) => {
            gs.iter().for_each(|g| collect_formula(g, bound, out))
        }
        Formula::ExistsInt(s, g) => {
            let fresh = bound.insert(s.clone());
            collect_formula(g, bound, out);
            if fresh {
                bound.remove(s);
            }
        }
    }
}

fn collect_term(t: &Term, bound: &mut BTreeSet<Sym>, out: &mut BTreeSet<FreeSym>) {
    match t {
        Term::Sym(s) => {
            if !bound.contains(s) {
                out.insert(FreeSym::Int(s.clone()));
            }
        }
        Term::Num(_) => {}
        Term::Read { array, primed, .. } => {
            out.insert(FreeSym::Array {
                name: array.clone(),
                primed: *primed,
            });
        }
        Term::Card { body, .. } => collect_formula(body, bound, out),
        Term::Add(a, b) | Term::Sub(a, b) => {
            collect_term(a, bound, out);
            collect_term(b, bound, out);
        }
        Term::Mul(_, a) | Term::Div(a, _) => collect_term(a, bound, out),
    }
}

/// Replaces free integer symbols according to `map` (bound `ExistsInt`
/// symbols are never touched; callers keep bound names fresh).
pub fn substitute(f: &Formula, map: &dyn Fn(&Sym) -> Option<Term>) -> Formula {
    f.map_terms(&mut |t| match t {
        Term::Sym(s) => map(s),
        _ => None,
    })
}

/// Replaces array reads; `map` receives (array, primed, index variable).
pub fn substitute_reads(f: &Formula, map: &dyn Fn(&str, bool, &str) -> Option<Term>) -> Formula {
    f.map_terms(&mut |t| match t {
        Term::Read { array, primed, var } => map(array, *primed, var),
        _ => None,
    })
}

/// Primes every state symbol: integer variables, counters and arrays.
/// Parameters and locals are left alone.
pub fn prime_state(f: &Formula) -> Formula {
    fn prime_term(t: &Term) -> Term {
        match t {
            Term::Sym(s) if matches!(s.kind, SymKind::IntVar | SymKind::Counter) => {
                Term::Sym(s.clone().primed())
            }
            Term::Read { array, var, .. } => Term::Read {
                array: array.clone(),
                primed: true,
                var: var.clone(),
            },
            Term::Card { var, body } => Term::Card {
                var: var.clone(),
                body: Box::new(prime_state(body)),
            },
            Term::Add(a, b) => Term::add(prime_term(a), prime_term(b)),
            Term::Sub(a, b) => Term::sub(prime_term(a), prime_term(b)),
            Term::Mul(k, a) => Term::Mul(k.clone(), Box::new(prime_term(a))),
            Term::Div(a, d) => Term::Div(Box::new(prime_term(a)), d.clone()),
            other => other.clone(),
        }
    }
    f.map_atoms(&mut |a| {
        Formula::Atom(match a {
            Atom::Cmp(op, l, r) => Atom::Cmp(*op, prime_term(l), prime_term(r)),
            Atom::Cong(l, r, m) => Atom::Cong(prime_term(l), prime_term(r), m.clone()),
            Atom::DataConst {
                array,
                var,
                value,
                label,
                ..
            } => Atom::DataConst {
                array: array.clone(),
                primed: true,
                var: var.clone(),
                value: *value,
                label: label.clone(),
            },
            Atom::DataArr {
                left, right, var, ..
            } => Atom::DataArr {
                left: left.clone(),
                lprimed: true,
                right: right.clone(),
                rprimed: true,
                var: var.clone(),
            },
        })
    })
}

/// Deterministic, duplicate-free atom listing in first-occurrence order,
/// split into (arithmetic, data).
pub fn atoms_of(f: &Formula) -> (Vec<Atom>, Vec<Atom>) {
    let mut seen = BTreeSet::new();
    let mut arith = Vec::new();
    let mut data = Vec::new();
    f.visit_atoms(&mut |a| {
        if seen.insert(a.clone()) {
            if a.is_data() {
                data.push(a.clone());
            } else {
                arith.push(a.clone());
            }
        }
    });
    (arith, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a_eq(array: &str, primed: bool, value: usize, label: &str) -> Formula {
        Formula::Atom(Atom::DataConst {
            array: array.into(),
            primed,
            var: "i".into(),
            value,
            label: label.into(),
        })
    }

    #[test]
    fn free_symbols_of_counter_definition() {
        let z00 = Sym::new("z00", SymKind::Counter);
        let body = Formula::and([a_eq("A", false, 1, "a0"), a_eq("V", false, 0, "v0")]);
        let def = Formula::eq(
            Term::Sym(z00.clone()),
            Term::Card {
                var: "i".into(),
                body: Box::new(body),
            },
        );
        let fs = free_symbols(&def);
        let expect: BTreeSet<FreeSym> = [
            FreeSym::Int(z00),
            FreeSym::Array {
                name: "A".into(),
                primed: false,
            },
            FreeSym::Array {
                name: "V".into(),
                primed: false,
            },
        ]
        .into_iter()
        .collect();
        assert_eq!(fs, expect);
        assert!(free_symbols(&Formula::True).is_empty());
    }

    #[test]
    fn priming_counter_definition() {
        let z = Sym::new("z", SymKind::Counter);
        let def = Formula::eq(
            Term::Sym(z.clone()),
            Term::Card {
                var: "i".into(),
                body: Box::new(a_eq("A", false, 1, "a0")),
            },
        );
        let primed = prime_state(&def);
        let expect = Formula::eq(
            Term::Sym(z.primed()),
            Term::Card {
                var: "i".into(),
                body: Box::new(a_eq("A", true, 1, "a0")),
            },
        );
        assert_eq!(primed, expect);
    }

    #[test]
    fn substitution_of_reads() {
        let read = Term::Read {
            array: "a".into(),
            primed: false,
            var: "i".into(),
        };
        let n = Term::Sym(Sym::param("N"));
        let f = Formula::and([
            Formula::le(Term::num(0), read.clone()),
            Formula::le(read, n.clone()),
        ]);
        let x = Term::Sym(Sym::new("x", SymKind::Local));
        let g = substitute_reads(&f, &|_, _, _| Some(x.clone()));
        assert_eq!(
            g,
            Formula::and([Formula::le(Term::num(0), x.clone()), Formula::le(x, n)])
        );
        assert_eq!(substitute(&f, &|_| None), f);
    }

    #[test]
    fn atoms_are_deduplicated_in_order() {
        let p = Formula::lt(Term::num(1), Term::Sym(Sym::param("N")));
        let f = Formula::and([p.clone(), p.clone()]);
        let (arith, data) = atoms_of(&f);
        assert_eq!(arith.len(), 1);
        assert!(data.is_empty());
        assert_eq!(atoms_of(&Formula::True), (vec![], vec![]));
    }
}
