//! Turns the body of a `forall x` formula into pairs `(g, D)`: `g` is a
//! conjunction of linear constraints over global symbols only, `D` a data
//! formula over `x`, and the body is equivalent to the disjunction of the
//! `g & D` once array reads have been quantified away.
//!
//! Reads of arithmetic arrays at `x` become fresh integers; every read is a
//! function of `x`, so for a fixed process the existential over the fresh
//! integer is exact, and the integer quantifier is then eliminated by QE.

use std::collections::BTreeSet;

use crate::logic::{self, simplify, Atom, CmpOp, Formula, Sym, SymKind, Term};
use crate::qe::{Conj, Constraint, Eliminator, LinExpr};
use crate::spec::SystemSpec;

use super::cells::{CellScope, CellSpace, Slot};
use super::PipelineError;

/// Counters introduced for cardinality terms that match no declared counter.
#[derive(Clone, Debug, Default)]
pub struct AutoCounters {
    pub defs: Vec<(String, Formula)>,
}

impl AutoCounters {
    fn name_for(&mut self, spec: &SystemSpec, body: &Formula) -> String {
        if let Some((n, _)) = self.defs.iter().find(|(_, b)| equivalent(spec, b, body)) {
            return n.clone();
        }
        let name = format!("_w{}", self.defs.len());
        self.defs.push((name.clone(), body.clone()));
        name
    }
}

/// Replaces every cardinality term by a counter symbol: a declared counter
/// (primed if the body reads only primed arrays) when the bodies agree on
/// every valuation, otherwise an automatically declared one. With
/// `match_declared` unset every cardinality gets an automatic counter.
pub fn replace_counters(
    spec: &SystemSpec,
    f: &Formula,
    auto: &mut AutoCounters,
    match_declared: bool,
) -> Formula {
    f.map_terms(&mut |t| match t {
        Term::Card { body, .. } if match_declared => Some(Term::Sym(counter_for(spec, body, auto))),
        Term::Card { body, .. } => Some(Term::Sym(Sym::new(
            auto.name_for(spec, body),
            SymKind::Local,
        ))),
        _ => None,
    })
}

fn counter_for(spec: &SystemSpec, body: &Formula, auto: &mut AutoCounters) -> Sym {
    let arrays = data_arrays(body);
    let unprimed = arrays.iter().all(|(_, p)| !p);
    let primed = !arrays.is_empty() && arrays.iter().all(|(_, p)| *p);
    for c in &spec.counters {
        if unprimed && equivalent(spec, &c.body, body) {
            return Sym::new(c.name.clone(), SymKind::Counter);
        }
        if primed && equivalent(spec, &logic::prime_state(&c.body), body) {
            return Sym::new(c.name.clone(), SymKind::Counter).primed();
        }
    }
    Sym::new(auto.name_for(spec, body), SymKind::Local)
}

fn data_arrays(f: &Formula) -> BTreeSet<(String, bool)> {
    let mut out = BTreeSet::new();
    f.visit_atoms(&mut |a| match a {
        Atom::DataConst { array, primed, .. } => {
            out.insert((array.clone(), *primed));
        }
        Atom::DataArr {
            left,
            lprimed,
            right,
            rprimed,
            ..
        } => {
            out.insert((left.clone(), *lprimed));
            out.insert((right.clone(), *rprimed));
        }
        _ => {}
    });
    out
}

/// Truth-table equivalence of two data formulas over one process.
pub fn equivalent(spec: &SystemSpec, f: &Formula, g: &Formula) -> bool {
    let mut arrays = data_arrays(f);
    arrays.extend(data_arrays(g));
    let slots: Vec<Slot> = arrays
        .into_iter()
        .map(|(array, primed)| {
            let size = spec.sort_of(&array).map_or(1, |s| s.values.len());
            Slot {
                array,
                primed,
                size,
            }
        })
        .collect();
    let mut cs = CellSpace {
        scope: CellScope::Trans,
        slots,
        cells: Vec::new(),
    };
    let total: usize = cs.slots.iter().map(|s| s.size).product();
    let mut valuation = vec![0usize; cs.slots.len()];
    for index in 0..total {
        cs.cells.push(super::cells::Cell {
            valuation: valuation.clone(),
            name: String::new(),
            index,
        });
        for k in (0..valuation.len()).rev() {
            valuation[k] += 1;
            if valuation[k] < cs.slots[k].size {
                break;
            }
            valuation[k] = 0;
        }
    }
    cs.cells
        .iter()
        .all(|c| cs.satisfies(c, f) == cs.satisfies(c, g))
}

/// Arithmetic variable standing for the read `array(x)` (or `array'(x)`).
pub fn read_var(array: &str, primed: bool) -> String {
    if primed {
        format!("_r{array}'")
    } else {
        format!("_r{array}")
    }
}

pub fn is_read_var(v: &str) -> bool {
    v.starts_with("_r")
}

/// Linear form of a counter-free, division-free term; reads become
/// [`read_var`]s.
pub fn lin(t: &Term) -> Result<LinExpr, PipelineError> {
    Ok(match t {
        Term::Sym(s) => LinExpr::var(s.var_name()),
        Term::Num(n) => LinExpr::constant(n.clone()),
        Term::Read { array, primed, .. } => LinExpr::var(read_var(array, *primed)),
        Term::Add(a, b) => lin(a)?.plus(&lin(b)?),
        Term::Sub(a, b) => lin(a)?.minus(&lin(b)?),
        Term::Mul(k, a) => lin(a)?.scaled(k),
        Term::Card { .. } | Term::Div(..) => {
            return Err(PipelineError::Unsupported(format!(
                "term `{t}` reached the linear layer"
            )))
        }
    })
}

/// The atom (or its negation) as a disjunction of constraints.
pub fn atom_constraints(a: &Atom, positive: bool) -> Result<Vec<Constraint>, PipelineError> {
    Ok(match a {
        Atom::Cmp(op, l, r) => {
            let (l, r) = (lin(l)?, lin(r)?);
            match (op, positive) {
                (CmpOp::Eq, true) => vec![Constraint::eq(l, r)],
                (CmpOp::Eq, false) => {
                    vec![Constraint::lt(l.clone(), r.clone()), Constraint::lt(r, l)]
                }
                (CmpOp::Lt, true) => vec![Constraint::lt(l, r)],
                (CmpOp::Lt, false) => vec![Constraint::le(r, l)],
                (CmpOp::Le, true) => vec![Constraint::le(l, r)],
                (CmpOp::Le, false) => vec![Constraint::lt(r, l)],
            }
        }
        Atom::Cong(l, r, m) => {
            let c = Constraint::congruent(lin(l)?, lin(r)?, m.clone());
            if positive {
                vec![c]
            } else {
                c.negate()
            }
        }
        _ => {
            return Err(PipelineError::Unsupported(format!(
                "data atom `{a}` in arithmetic position"
            )))
        }
    })
}

/// One disjunct of the arithmetic DNF: constraints plus a data formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Branch {
    pub arith: Conj,
    pub data: Formula,
}

impl Branch {
    fn truth() -> Self {
        Branch {
            arith: Conj::default(),
            data: Formula::True,
        }
    }

    /// `None` when trivially unsatisfiable.
    fn normalized(self) -> Option<Branch> {
        let arith = self.arith.simplify()?;
        let data = simplify(&self.data);
        if data == Formula::False {
            return None;
        }
        Some(Branch { arith, data })
    }

    fn and(&self, other: &Branch) -> Option<Branch> {
        let mut arith = self.arith.clone();
        arith.extend(other.arith.constraints.iter().cloned());
        Branch {
            arith,
            data: Formula::and([self.data.clone(), other.data.clone()]),
        }
        .normalized()
    }
}

/// DNF over the arithmetic structure of `f` (pure-data subformulas are kept
/// whole), with at most `limit` disjuncts at any point.
pub fn arith_dnf(f: &Formula, positive: bool, limit: usize) -> Result<Vec<Branch>, PipelineError> {
    if f.is_pure_data() {
        let data = if positive {
            f.clone()
        } else {
            Formula::not(f.clone())
        };
        return Ok(Branch {
            arith: Conj::default(),
            data,
        }
        .normalized()
        .into_iter()
        .collect());
    }
    match f {
        Formula::Atom(a) => Ok(atom_constraints(a, positive)?
            .into_iter()
            .filter_map(|c| {
                Branch {
                    arith: Conj::new(vec![c]),
                    data: Formula::True,
                }
                .normalized()
            })
            .collect()),
        Formula::Not(g) => arith_dnf(g, !positive, limit),
        Formula::And(gs) | Formula::Or(gs) => {
            let product = matches!(f, Formula::And(_)) == positive;
            if product {
                let mut acc = vec![Branch::truth()];
                for g in gs {
                    let part = arith_dnf(g, positive, limit)?;
                    let mut next = BTreeSet::new();
                    for a in &acc {
                        for b in &part {
                            if let Some(c) = a.and(b) {
                                next.insert(c);
                            }
                        }
                    }
                    if next.len() > limit {
                        return Err(PipelineError::DnfTooLarge {
                            size: next.len(),
                            limit,
                        });
                    }
                    acc = next.into_iter().collect();
                }
                Ok(acc)
            } else {
                let mut out = BTreeSet::new();
                for g in gs {
                    out.extend(arith_dnf(g, positive, limit)?);
                    if out.len() > limit {
                        return Err(PipelineError::DnfTooLarge {
                            size: out.len(),
                            limit,
                        });
                    }
                }
                Ok(out.into_iter().collect())
            }
        }
        Formula::True | Formula::False => unreachable!("constants are pure data"),
        Formula::Forall(..) | Formula::ExistsInt(..) => Err(PipelineError::Unsupported(format!(
            "nested quantifier in `{f}`"
        ))),
    }
}

/// A ground constraint set paired with a data formula over the process.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Guarded {
    pub ground: Conj,
    pub data: Formula,
}

/// Eliminates the read variables of every branch.
pub fn eliminate_reads(
    branches: &[Branch],
    elim: &mut Eliminator,
) -> Result<Vec<Guarded>, PipelineError> {
    let mut out = BTreeSet::new();
    for b in branches {
        let reads: BTreeSet<String> = b
            .arith
            .vars()
            .into_iter()
            .filter(|v| is_read_var(v))
            .collect();
        for g in elim.eliminate_block(&reads, &b.arith)? {
            out.insert(Guarded {
                ground: g,
                data: b.data.clone(),
            });
        }
    }
    Ok(out.into_iter().collect())
}

/// True when a top-level conjunct does not depend on the process variable.
pub fn is_ground(f: &Formula) -> bool {
    let mut ground = true;
    f.visit_atoms(&mut |a| match a {
        Atom::Cmp(_, l, r) | Atom::Cong(l, r, _) => ground &= !has_read(l) && !has_read(r),
        _ => ground = false,
    });
    ground
}

fn has_read(t: &Term) -> bool {
    match t {
        Term::Read { .. } => true,
        Term::Add(a, b) | Term::Sub(a, b) => has_read(a) || has_read(b),
        Term::Mul(_, a) | Term::Div(a, _) => has_read(a),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_spec, parse_formula_in};
    use crate::qe::Policy;

    fn ot() -> SystemSpec {
        load_spec(include_str!("../../../../benchmarks/ot/spec.cf")).unwrap()
    }

    #[test]
    fn declared_counters_are_recognized_up_to_equivalence() {
        let s = ot();
        let f = parse_formula_in(&s, "#{k | V(k) = v0 & !(A(k) = a0) & !(A(k) = a1)} = 0").unwrap();
        let g = replace_counters(&s, &f, &mut AutoCounters::default(), true);
        assert_eq!(g.to_string(), "zb0 = 0");
        let f = parse_formula_in(&s, "#{k | A'(k) = a1 & V'(k) = v1} = 0").unwrap();
        assert_eq!(
            replace_counters(&s, &f, &mut AutoCounters::default(), true).to_string(),
            "z11' = 0"
        );
    }

    #[test]
    fn unmatched_cardinalities_share_auto_counters() {
        let s = ot();
        let f =
            parse_formula_in(&s, "#{k | V(k) = v0} < #{j | V(j) = v0} + #{k | V(k) = v1}").unwrap();
        let mut auto = AutoCounters::default();
        let g = replace_counters(&s, &f, &mut auto, true);
        assert_eq!(g.to_string(), "_w0 < _w0 + _w1");
        assert_eq!(auto.defs.len(), 2);
    }

    #[test]
    fn negated_equality_splits() {
        let s = ot();
        let f = parse_formula_in(&s, "!(N = 3) & (N < 9 | A(x) = a0)").unwrap();
        let d = arith_dnf(&f, true, 100).unwrap();
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn reads_are_eliminated() {
        let s = ot();
        let f = parse_formula_in(&s, "N < R0'(x) & R0'(x) <= z00 & A'(x) = a0").unwrap();
        let d = arith_dnf(&f, true, 100).unwrap();
        let mut e = Eliminator::new(Policy::Exact);
        let g = eliminate_reads(&d, &mut e).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].ground.to_string(), "N < z00");
        assert_eq!(g[0].data.to_string(), "A'(x) = a0");
    }

    #[test]
    fn groundness() {
        let s = ot();
        assert!(is_ground(&parse_formula_in(&s, "2 < N").unwrap()));
        assert!(!is_ground(&parse_formula_in(&s, "R0(x) < N").unwrap()));
        assert!(!is_ground(&parse_formula_in(&s, "A(x) = a0").unwrap()));
    }
}
