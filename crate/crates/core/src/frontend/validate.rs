//! Name resolution and the fragment checks: one process variable per case,
//! flat array reads, data-only cardinality bodies, array-free safety goal.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::ast::*;
use super::printer;
use super::SpecError;
use crate::logic::{Atom, Formula, Sym, SymKind, Term};
use crate::spec::{ArrayDecl, ArrayKind, Case, CounterDef, DataSort, IntVar, SystemSpec};

pub fn validate(p: &ParsedSpec) -> Result<SystemSpec, SpecError> {
    let scope = Scope::new(p)?;
    let mut counters = Vec::new();
    for c in &p.counters {
        let ctx = Ctx::single_state("counter definition");
        let mut proc = ProcVar::card(&c.var.name);
        let body = scope.data_formula(&c.body, &ctx, &mut proc, &c.var.name)?;
        counters.push(CounterDef {
            name: c.name.name.clone(),
            var: c.var.name.clone(),
            body,
        });
    }

    let mut invariant = Vec::new();
    for c in &p.invariant {
        invariant.push(scope.case(c, &Ctx::single_state("invariant"))?);
    }
    let bool_vars: Vec<&IntVarDecl> = p.intvars.iter().filter(|v| v.boolean).collect();
    if !bool_vars.is_empty() {
        let range = Formula::and(bool_vars.iter().flat_map(|v| {
            let s = Term::Sym(Sym::new(v.name.name.clone(), SymKind::IntVar));
            [
                Formula::le(Term::num(0), s.clone()),
                Formula::le(s, Term::num(1)),
            ]
        }));
        if invariant.is_empty() {
            invariant.push(Case {
                var: "x".into(),
                body: range,
            });
        } else {
            for c in &mut invariant {
                c.body = Formula::and([c.body.clone(), range.clone()]);
            }
        }
    }

    if p.init.len() != 1 {
        return Err(SpecError::MultipleInitCases {
            pos: p.init.get(1).map(|c| c.pos).unwrap_or_default(),
            count: p.init.len(),
        });
    }
    let init = scope.case(&p.init[0], &Ctx::single_state("init"))?;
    if p.trans.is_empty() {
        return Err(SpecError::EmptySection {
            section: "trans".into(),
        });
    }
    let mut trans = Vec::new();
    for c in &p.trans {
        trans.push(scope.case(c, &Ctx::transition())?);
    }
    let unsafe_ = match &p.unsafe_ {
        Some(f) => scope.ground_formula(f)?,
        None => Formula::False,
    };

    Ok(SystemSpec {
        params: p.params.iter().map(|i| i.name.clone()).collect(),
        sorts: scope.sorts.clone(),
        int_vars: p
            .intvars
            .iter()
            .map(|v| IntVar {
                name: v.name.name.clone(),
                boolean: v.boolean,
            })
            .collect(),
        arrays: scope.arrays.clone(),
        counters,
        invariant,
        init,
        trans,
        unsafe_,
        locals: Vec::new(),
    })
}

/// Validates a standalone formula (e.g. a property's bad condition) against
/// an already validated spec: only counters, integer variables and
/// parameters, unprimed.
pub fn validate_ground(spec: &SystemSpec, f: &PFormula) -> Result<Formula, SpecError> {
    Scope::from_spec(spec).ground_formula(f)
}

/// Validates a case body that may read arrays (primed or not) at one
/// process variable.
pub fn validate_body(spec: &SystemSpec, f: &PFormula) -> Result<Formula, SpecError> {
    Scope::from_spec(spec).formula(f, &Ctx::transition(), &mut ProcVar { name: None })
}

#[derive(Clone)]
struct Ctx {
    allow_primed: bool,
    allow_arrays: bool,
    what: &'static str,
}

impl Ctx {
    fn single_state(what: &'static str) -> Self {
        Ctx {
            allow_primed: false,
            allow_arrays: true,
            what,
        }
    }
    fn transition() -> Self {
        Ctx {
            allow_primed: true,
            allow_arrays: true,
            what: "trans",
        }
    }
}

/// The process variable a case reads arrays at; fixed by an explicit binder
/// or by the first read.
struct ProcVar {
    name: Option<String>,
}

impl ProcVar {
    fn card(v: &str) -> Self {
        ProcVar {
            name: Some(v.to_string()),
        }
    }

    fn use_var(&mut self, v: &Ident, atom: &str) -> Result<(), SpecError> {
        match &self.name {
            Some(n) if *n == v.name => Ok(()),
            Some(n) => Err(SpecError::FragmentViolation {
                pos: v.pos,
                atom: atom.to_string(),
                restriction: format!(
                    "every array read must be at the single process variable `{n}`, found `{}`",
                    v.name
                ),
            }),
            None => {
                self.name = Some(v.name.clone());
                Ok(())
            }
        }
    }
}

enum Side {
    Read {
        array: String,
        primed: bool,
        var: Ident,
        sort: usize,
    },
    Value(String),
    Arith,
}

struct Scope {
    params: BTreeSet<String>,
    int_vars: BTreeSet<String>,
    counters: BTreeSet<String>,
    arrays: Vec<ArrayDecl>,
    array_index: BTreeMap<String, usize>,
    sorts: Vec<DataSort>,
    values: BTreeSet<String>,
}

impl Scope {
    fn new(p: &ParsedSpec) -> Result<Self, SpecError> {
        let ns = p.params.iter().filter(|i| i.name == "N").count();
        if ns != 1 {
            return Err(SpecError::UnknownSymbol {
                name: "N".into(),
                pos: p.params.first().map(|i| i.pos).unwrap_or_default(),
                context: "the parameters must include the process count `N`".into(),
            });
        }
        let all_names = p
            .params
            .iter()
            .chain(p.intvars.iter().map(|v| &v.name))
            .chain(p.arrays.iter().map(|a| &a.name))
            .chain(p.counters.iter().map(|c| &c.name))
            .chain(
                p.sorts
                    .iter()
                    .flat_map(|s| std::iter::once(&s.name).chain(s.values.iter())),
            );
        for id in all_names {
            if id.name.starts_with('_') {
                return Err(SpecError::FragmentViolation {
                    pos: id.pos,
                    atom: id.name.clone(),
                    restriction: "names starting with `_` are reserved".into(),
                });
            }
        }
        let sorts: Vec<DataSort> = p
            .sorts
            .iter()
            .map(|s| DataSort {
                name: s.name.name.clone(),
                values: s.values.iter().map(|v| v.name.clone()).collect(),
            })
            .collect();
        let mut arrays = Vec::new();
        for a in &p.arrays {
            let kind = if a.ty.name == "int" {
                ArrayKind::Arithmetic
            } else {
                match sorts.iter().position(|s| s.name == a.ty.name) {
                    Some(i) => ArrayKind::Enumerated(i),
                    None => {
                        return Err(SpecError::UnknownSymbol {
                            name: a.ty.name.clone(),
                            pos: a.ty.pos,
                            context: format!("type of array `{}`", a.name.name),
                        })
                    }
                }
            };
            arrays.push(ArrayDecl {
                name: a.name.name.clone(),
                kind,
            });
        }
        let set = |ids: Vec<&Ident>| {
            ids.into_iter()
                .map(|i| i.name.clone())
                .collect::<BTreeSet<_>>()
        };
        Ok(Scope {
            params: set(p.params.iter().collect()),
            int_vars: set(p.intvars.iter().map(|v| &v.name).collect()),
            counters: set(p.counters.iter().map(|c| &c.name).collect()),
            array_index: arrays
                .iter()
                .enumerate()
                .map(|(i, a)| (a.name.clone(), i))
                .collect(),
            arrays,
            values: sorts
                .iter()
                .flat_map(|s| s.values.iter().cloned())
                .collect(),
            sorts,
        })
    }

    fn from_spec(s: &SystemSpec) -> Self {
        Scope {
            params: s.params.iter().cloned().collect(),
            int_vars: s.int_vars.iter().map(|v| v.name.clone()).collect(),
            counters: s.counters.iter().map(|c| c.name.clone()).collect(),
            array_index: s
                .arrays
                .iter()
                .enumerate()
                .map(|(i, a)| (a.name.clone(), i))
                .collect(),
            arrays: s.arrays.clone(),
            values: s
                .sorts
                .iter()
                .flat_map(|x| x.values.iter().cloned())
                .collect(),
            sorts: s.sorts.clone(),
        }
    }

    fn case(&self, c: &PCase, ctx: &Ctx) -> Result<Case, SpecError> {
        let mut proc = ProcVar {
            name: c.var.as_ref().map(|v| v.name.clone()),
        };
        let body = self.formula(&c.body, ctx, &mut proc)?;
        Ok(Case {
            var: proc.name.unwrap_or_else(|| "x".into()),
            body,
        })
    }

    fn ground_formula(&self, f: &PFormula) -> Result<Formula, SpecError> {
        let ctx = Ctx {
            allow_primed: false,
            allow_arrays: false,
            what: "safety formula",
        };
        let mut proc = ProcVar { name: None };
        self.formula(f, &ctx, &mut proc)
    }

    fn formula(&self, f: &PFormula, ctx: &Ctx, proc: &mut ProcVar) -> Result<Formula, SpecError> {
        Ok(match f {
            PFormula::True => Formula::True,
            PFormula::False => Formula::False,
            PFormula::Not(g) => Formula::not(self.formula(g, ctx, proc)?),
            PFormula::And(gs) => Formula::And(
                gs.iter()
                    .map(|g| self.formula(g, ctx, proc))
                    .collect::<Result<_, _>>()?,
            ),
            PFormula::Or(gs) => Formula::Or(
                gs.iter()
                    .map(|g| self.formula(g, ctx, proc))
                    .collect::<Result<_, _>>()?,
            ),
            PFormula::Forall(v, _) => {
                return Err(SpecError::FragmentViolation {
                    pos: v.pos,
                    atom: printer::formula(f),
                    restriction: "quantifiers may only appear as the binder of a whole case".into(),
                })
            }
            PFormula::Atom(a) => self.atom(a, ctx, proc)?,
        })
    }

    /// A cardinality or counter body: data atoms only, over `var`.
    fn data_formula(
        &self,
        f: &PFormula,
        ctx: &Ctx,
        proc: &mut ProcVar,
        var: &str,
    ) -> Result<Formula, SpecError> {
        let g = self.formula(f, ctx, proc)?;
        let mut bad: Option<String> = None;
        g.visit_atoms(&mut |a| {
            if !a.is_data() && bad.is_none() {
                bad = Some(a.to_string());
            }
        });
        if let Some(atom) = bad {
            return Err(SpecError::FragmentViolation {
                pos: pos_of(f),
                atom,
                restriction: format!(
                    "the body of a cardinality over `{var}` must be a data formula (no arithmetic atoms or arithmetic arrays)"
                ),
            });
        }
        Ok(g)
    }

    fn side(&self, t: &PTerm) -> Side {
        match t {
            PTerm::Read { array, primed, var } => match self
                .array_index
                .get(&array.name)
                .map(|&i| self.arrays[i].kind)
            {
                Some(ArrayKind::Enumerated(sort)) => Side::Read {
                    array: array.name.clone(),
                    primed: *primed,
                    var: var.clone(),
                    sort,
                },
                _ => Side::Arith,
            },
            PTerm::Name {
                name,
                primed: false,
            } if self.values.contains(&name.name)
                && !self.params.contains(&name.name)
                && !self.int_vars.contains(&name.name)
                && !self.counters.contains(&name.name) =>
            {
                Side::Value(name.name.clone())
            }
            _ => Side::Arith,
        }
    }

    fn check_read(
        &self,
        array: &Ident,
        primed: bool,
        var: &Ident,
        ctx: &Ctx,
        proc: &mut ProcVar,
        text: &str,
    ) -> Result<(), SpecError> {
        if !ctx.allow_arrays {
            return Err(SpecError::FragmentViolation {
                pos: array.pos,
                atom: text.to_string(),
                restriction: format!("the {} may not mention array `{}`", ctx.what, array.name),
            });
        }
        if primed && !ctx.allow_primed {
            return Err(SpecError::FragmentViolation {
                pos: array.pos,
                atom: text.to_string(),
                restriction: format!("primed symbols are not allowed in the {}", ctx.what),
            });
        }
        proc.use_var(var, text)
    }

    fn atom(&self, a: &PAtom, ctx: &Ctx, proc: &mut ProcVar) -> Result<Formula, SpecError> {
        let text = {
            let mut s = printer::term(&a.lhs);
            s.push(' ');
            s.push_str(a.op.symbol());
            s.push(' ');
            s.push_str(&printer::term(&a.rhs));
            if let Some(m) = &a.modulus {
                s.push_str(&format!(" mod {m}"));
            }
            s
        };
        let (ls, rs) = (self.side(&a.lhs), self.side(&a.rhs));
        let data = !matches!((&ls, &rs), (Side::Arith, Side::Arith));
        if data {
            if !matches!(a.op, RelOp::Eq | RelOp::Ne) || a.modulus.is_some() {
                return Err(SpecError::SortMismatch {
                    pos: a.pos,
                    message: format!("`{text}`: data values can only be compared with `=` or `!=`"),
                });
            }
            let atom = match (ls, rs) {
                (
                    Side::Read {
                        array,
                        primed,
                        var,
                        sort,
                    },
                    Side::Value(v),
                )
                | (
                    Side::Value(v),
                    Side::Read {
                        array,
                        primed,
                        var,
                        sort,
                    },
                ) => {
                    let arr_id = Ident {
                        name: array.clone(),
                        pos: a.pos,
                    };
                    self.check_read(&arr_id, primed, &var, ctx, proc, &text)?;
                    let value = self.sorts[sort]
                        .values
                        .iter()
                        .position(|x| *x == v)
                        .ok_or_else(|| SpecError::SortMismatch {
                            pos: a.pos,
                            message: format!(
                                "`{v}` is not a value of sort `{}` (array `{array}`)",
                                self.sorts[sort].name
                            ),
                        })?;
                    Atom::DataConst {
                        array,
                        primed,
                        var: var.name,
                        value,
                        label: v,
                    }
                }
                (
                    Side::Read {
                        array: l,
                        primed: lp,
                        var: lv,
                        sort: ls,
                    },
                    Side::Read {
                        array: r,
                        primed: rp,
                        var: rv,
                        sort: rs,
                    },
                ) => {
                    if lv.name != rv.name {
                        return Err(SpecError::FragmentViolation {
                            pos: a.pos,
                            atom: text,
                            restriction:
                                "a data atom may not relate two distinct process variables".into(),
                        });
                    }
                    if ls != rs {
                        return Err(SpecError::SortMismatch {
                            pos: a.pos,
                            message: format!(
                                "`{text}`: arrays `{l}` and `{r}` range over different sorts"
                            ),
                        });
                    }
                    let lid = Ident {
                        name: l.clone(),
                        pos: a.pos,
                    };
                    let rid = Ident {
                        name: r.clone(),
                        pos: a.pos,
                    };
                    self.check_read(&lid, lp, &lv, ctx, proc, &text)?;
                    self.check_read(&rid, rp, &rv, ctx, proc, &text)?;
                    Atom::DataArr {
                        left: l,
                        lprimed: lp,
                        right: r,
                        rprimed: rp,
                        var: lv.name,
                    }
                }
                _ => {
                    return Err(SpecError::SortMismatch {
                        pos: a.pos,
                        message: format!(
                            "`{text}` compares a data value with an integer or another constant"
                        ),
                    })
                }
            };
            let f = Formula::Atom(atom);
            return Ok(if a.op == RelOp::Ne {
                Formula::not(f)
            } else {
                f
            });
        }

        let l = self.term(&a.lhs, ctx, proc, &text)?;
        let r = self.term(&a.rhs, ctx, proc, &text)?;
        if let Some(m) = &a.modulus {
            if m < &BigInt::from(2) {
                return Err(SpecError::FragmentViolation {
                    pos: a.pos,
                    atom: text,
                    restriction: "congruence moduli must be at least 2".into(),
                });
            }
            let f = Formula::Atom(Atom::Cong(l, r, m.clone()));
            return match a.op {
                RelOp::Eq => Ok(f),
                RelOp::Ne => Ok(Formula::not(f)),
                _ => Err(SpecError::Syntax {
                    pos: a.pos,
                    message: format!("`{text}`: `mod` only applies to `=` and `!=`"),
                    expected: vec![],
                }),
            };
        }
        Ok(match a.op {
            RelOp::Eq => Formula::eq(l, r),
            RelOp::Ne => Formula::not(Formula::eq(l, r)),
            RelOp::Lt => Formula::lt(l, r),
            RelOp::Le => Formula::le(l, r),
            RelOp::Gt => Formula::lt(r, l),
            RelOp::Ge => Formula::le(r, l),
        })
    }

    fn term(
        &self,
        t: &PTerm,
        ctx: &Ctx,
        proc: &mut ProcVar,
        text: &str,
    ) -> Result<Term, SpecError> {
        Ok(match t {
            PTerm::Num(n) => Term::Num(n.clone()),
            PTerm::Name { name, primed } => {
                let kind = if self.params.contains(&name.name) {
                    if *primed {
                        return Err(SpecError::FragmentViolation {
                            pos: name.pos,
                            atom: text.to_string(),
                            restriction: format!("parameter `{}` cannot be primed", name.name),
                        });
                    }
                    SymKind::Param
                } else if self.int_vars.contains(&name.name) {
                    SymKind::IntVar
                } else if self.counters.contains(&name.name) {
                    SymKind::Counter
                } else if self.values.contains(&name.name) {
                    return Err(SpecError::SortMismatch {
                        pos: name.pos,
                        message: format!("`{text}`: data value `{}` used as an integer", name.name),
                    });
                } else if self.array_index.contains_key(&name.name) {
                    return Err(SpecError::FragmentViolation {
                        pos: name.pos,
                        atom: text.to_string(),
                        restriction: format!(
                            "array `{}` must be applied to a process variable",
                            name.name
                        ),
                    });
                } else {
                    return Err(SpecError::UnknownSymbol {
                        name: name.name.clone(),
                        pos: name.pos,
                        context: format!("in `{text}`"),
                    });
                };
                if *primed && !ctx.allow_primed {
                    return Err(SpecError::FragmentViolation {
                        pos: name.pos,
                        atom: text.to_string(),
                        restriction: format!("primed symbols are not allowed in the {}", ctx.what),
                    });
                }
                let mut s = Sym::new(name.name.clone(), kind);
                s.primed = *primed;
                Term::Sym(s)
            }
            PTerm::Read { array, primed, var } => {
                match self
                    .array_index
                    .get(&array.name)
                    .map(|&i| self.arrays[i].kind)
                {
                    None => {
                        return Err(SpecError::UnknownSymbol {
                            name: array.name.clone(),
                            pos: array.pos,
                            context: format!("in `{text}`"),
                        })
                    }
                    Some(ArrayKind::Enumerated(_)) => {
                        return Err(SpecError::SortMismatch {
                            pos: array.pos,
                            message: format!(
                                "`{text}`: enumerated array `{}` used as an integer",
                                array.name
                            ),
                        })
                    }
                    Some(ArrayKind::Arithmetic) => {}
                }
                self.check_read(array, *primed, var, ctx, proc, text)?;
                Term::Read {
                    array: array.name.clone(),
                    primed: *primed,
                    var: var.name.clone(),
                }
            }
            PTerm::Card { var, body } => {
                if !ctx.allow_arrays {
                    return Err(SpecError::FragmentViolation {
                        pos: var.pos,
                        atom: text.to_string(),
                        restriction: format!("the {} may not contain cardinality terms", ctx.what),
                    });
                }
                if proc.name.as_deref() == Some(var.name.as_str()) {
                    return Err(SpecError::FragmentViolation {
                        pos: var.pos,
                        atom: text.to_string(),
                        restriction:
                            "a cardinality must bind a variable distinct from the case variable"
                                .into(),
                    });
                }
                let mut inner = ProcVar::card(&var.name);
                let body = self.data_formula(body, ctx, &mut inner, &var.name)?;
                Term::Card {
                    var: var.name.clone(),
                    body: Box::new(body),
                }
            }
            PTerm::Add(a, b) => Term::add(
                self.term(a, ctx, proc, text)?,
                self.term(b, ctx, proc, text)?,
            ),
            PTerm::Sub(a, b) => Term::sub(
                self.term(a, ctx, proc, text)?,
                self.term(b, ctx, proc, text)?,
            ),
            PTerm::Neg(a) => match numeral(a) {
                Some(n) => Term::Num(-n),
                None => Term::mul(-BigInt::one(), self.term(a, ctx, proc, text)?),
            },
            PTerm::Mul(a, b) => match (numeral(a), numeral(b)) {
                (Some(k), _) => Term::mul(k, self.term(b, ctx, proc, text)?),
                (None, Some(k)) => Term::mul(k, self.term(a, ctx, proc, text)?),
                (None, None) => {
                    return Err(SpecError::FragmentViolation {
                        pos: pos_of_term(a),
                        atom: text.to_string(),
                        restriction:
                            "multiplication needs a numeral factor (linear arithmetic only)".into(),
                    })
                }
            },
            PTerm::Div(a, b) => {
                let d = numeral(b).ok_or_else(|| SpecError::NonConstantDivisor {
                    pos: pos_of_term(b),
                    term: printer::term(b),
                })?;
                if d.is_zero() {
                    return Err(SpecError::ZeroDivisor {
                        pos: pos_of_term(b),
                    });
                }
                if d.is_negative() {
                    return Err(SpecError::NonConstantDivisor {
                        pos: pos_of_term(b),
                        term: printer::term(b),
                    });
                }
                Term::Div(Box::new(self.term(a, ctx, proc, text)?), d)
            }
        })
    }
}

fn numeral(t: &PTerm) -> Option<BigInt> {
    match t {
        PTerm::Num(n) => Some(n.clone()),
        PTerm::Neg(a) => numeral(a).map(|n| -n),
        _ => None,
    }
}

fn pos_of_term(t: &PTerm) -> Pos {
    match t {
        PTerm::Name { name, .. } => name.pos,
        PTerm::Read { array, .. } => array.pos,
        PTerm::Card { var, .. } => var.pos,
        PTerm::Add(a, _)
        | PTerm::Sub(a, _)
        | PTerm::Mul(a, _)
        | PTerm::Div(a, _)
        | PTerm::Neg(a) => pos_of_term(a),
        PTerm::Num(_) => Pos::default(),
    }
}

fn pos_of(f: &PFormula) -> Pos {
    match f {
        PFormula::Atom(a) => a.pos,
        PFormula::Not(g) => pos_of(g),
        PFormula::And(gs) | PFormula::Or(gs) => gs.first().map(pos_of).unwrap_or_default(),
        PFormula::Forall(v, _) => v.pos,
        PFormula::True | PFormula::False => Pos::default(),
    }
}
