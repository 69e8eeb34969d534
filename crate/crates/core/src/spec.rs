//! Validated system specifications.

use num_bigint::BigInt;

use crate::logic::{Formula, Sym, SymKind, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataSort {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrayKind {
    /// Index into [`SystemSpec::sorts`].
    Enumerated(usize),
    Arithmetic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: String,
    pub kind: ArrayKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntVar {
    pub name: String,
    /// Restricted to {0, 1} through an added invariant conjunct.
    pub boolean: bool,
}

/// `name = #{var | body}` with `body` a data formula over unprimed arrays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterDef {
    pub name: String,
    pub var: String,
    pub body: Formula,
}

/// `forall var . body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub var: String,
    pub body: Formula,
}

impl Case {
    pub fn formula(&self) -> Formula {
        Formula::forall(self.var.clone(), self.body.clone())
    }
}

/// A fresh integer standing for `numerator div divisor`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDef {
    pub name: String,
    pub numerator: Term,
    pub divisor: BigInt,
}

impl LocalDef {
    pub fn sym(&self) -> Sym {
        Sym::new(self.name.clone(), SymKind::Local)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    /// Parameters; always contains `N`.
    pub params: Vec<String>,
    pub sorts: Vec<DataSort>,
    pub int_vars: Vec<IntVar>,
    pub arrays: Vec<ArrayDecl>,
    pub counters: Vec<CounterDef>,
    /// Disjuncts of the invariant; empty means true.
    pub invariant: Vec<Case>,
    pub init: Case,
    /// Read as `forall x . case_1(x) | ... | case_n(x)`.
    pub trans: Vec<Case>,
    /// The negated safety property.
    pub unsafe_: Formula,
    /// Floor-division witnesses introduced by desugaring.
    pub locals: Vec<LocalDef>,
}

impl SystemSpec {
    pub fn array(&self, name: &str) -> Option<&ArrayDecl> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn sort_of(&self, array: &str) -> Option<&DataSort> {
        match self.array(array)?.kind {
            ArrayKind::Enumerated(s) => Some(&self.sorts[s]),
            ArrayKind::Arithmetic => None,
        }
    }

    pub fn enumerated_arrays(&self) -> impl Iterator<Item = (&ArrayDecl, &DataSort)> {
        self.arrays.iter().filter_map(|a| match a.kind {
            ArrayKind::Enumerated(s) => Some((a, &self.sorts[s])),
            ArrayKind::Arithmetic => None,
        })
    }

    pub fn arithmetic_arrays(&self) -> impl Iterator<Item = &ArrayDecl> {
        self.arrays
            .iter()
            .filter(|a| a.kind == ArrayKind::Arithmetic)
    }

    /// Every user-visible name (parameters, variables, arrays, counters, sorts
    /// and sort values), for choosing fresh names.
    pub fn used_names(&self) -> std::collections::BTreeSet<String> {
        let mut out: std::collections::BTreeSet<String> = self.params.iter().cloned().collect();
        out.extend(self.int_vars.iter().map(|v| v.name.clone()));
        out.extend(self.arrays.iter().map(|a| a.name.clone()));
        out.extend(self.counters.iter().map(|c| c.name.clone()));
        out.extend(self.locals.iter().map(|l| l.name.clone()));
        for s in &self.sorts {
            out.insert(s.name.clone());
            out.extend(s.values.iter().cloned());
        }
        out
    }

    /// The invariant as a formula (disjunction of its cases; true if none).
    pub fn invariant_formula(&self) -> Formula {
        if self.invariant.is_empty() {
            Formula::True
        } else {
            Formula::or(self.invariant.iter().map(Case::formula))
        }
    }

    /// The transition relation `forall x . case_1 | ... | case_n`, with all
    /// cases renamed to one process variable.
    pub fn trans_formula(&self) -> Formula {
        let var = self
            .trans
            .first()
            .map(|c| c.var.clone())
            .unwrap_or_else(|| "x".into());
        let cases = self
            .trans
            .iter()
            .map(|c| rename_proc(&c.body, &c.var, &var));
        Formula::forall(var.clone(), Formula::or(cases))
    }

    pub fn counter_sym(&self, name: &str) -> Sym {
        Sym::new(name, SymKind::Counter)
    }
}

/// Renames the free process variable `from` to `to` (cardinality binders are
/// left alone; they never coincide with a case variable).
pub fn rename_proc(f: &Formula, from: &str, to: &str) -> Formula {
    use crate::logic::Atom;
    if from == to {
        return f.clone();
    }
    let rn = |v: &String| if v == from { to.to_string() } else { v.clone() };
    let mut term_map = |t: &Term| match t {
        Term::Read { array, primed, var } => Some(Term::Read {
            array: array.clone(),
            primed: *primed,
            var: rn(var),
        }),
        _ => None,
    };
    f.map_terms(&mut term_map).map_atoms(&mut |a| {
        Formula::Atom(match a {
            Atom::DataConst {
                array,
                primed,
                var,
                value,
                label,
            } => Atom::DataConst {
                array: array.clone(),
                primed: *primed,
                var: rn(var),
                value: *value,
                label: label.clone(),
            },
            Atom::DataArr {
                left,
                lprimed,
                right,
                rprimed,
                var,
            } => Atom::DataArr {
                left: left.clone(),
                lprimed: *lprimed,
                right: right.clone(),
                rprimed: *rprimed,
                var: rn(var),
            },
            other => other.clone(),
        })
    })
}
