//! Equivalence-preserving cleanup: constant folding, flattening, unit laws,
//! duplicate and complementary literals, ground arithmetic, and data-atom
//! clashes inside conjunctions.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{linearize, Atom, CmpOp, Formula};

pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => simplify_atom(a),
        Formula::Not(g) => match simplify(g) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(h) => *h,
            h => Formula::not(h),
        },
        Formula::And(gs) => {
            let mut items = Vec::new();
            for g in gs {
                match simplify(g) {
                    Formula::True => {}
                    Formula::False => return Formula::False,
                    Formula::And(hs) => items.extend(hs),
                    h => items.push(h),
                }
            }
            finish(items, true)
        }
        Formula::Or(gs) => {
            let mut items = Vec::new();
            for g in gs {
                match simplify(g) {
                    Formula::False => {}
                    Formula::True => return Formula::True,
                    Formula::Or(hs) => items.extend(hs),
                    h => items.push(h),
                }
            }
            finish(items, false)
        }
        Formula::Forall(v, g) => match simplify(g) {
            Formula::True => Formula::True,
            h => Formula::forall(v.clone(), h),
        },
        Formula::ExistsInt(s, g) => match simplify(g) {
            Formula::False => Formula::False,
            h => Formula::ExistsInt(s.clone(), Box::new(h)),
        },
    }
}

fn finish(items: Vec<Formula>, conj: bool) -> Formula {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for h in items {
        if seen.insert(h.clone()) {
            out.push(h);
        }
    }
    // p and !p together
    for h in &out {
        if let Formula::Not(inner) = h {
            if seen.contains(inner.as_ref()) {
                return if conj { Formula::False } else { Formula::True };
            }
        }
    }
    if conj && data_clash(&out) {
        return Formula::False;
    }
    match out.len() {
        0 => {
            if conj {
                Formula::True
            } else {
                Formula::False
            }
        }
        1 => out.pop().unwrap(),
        _ => {
            if conj {
                Formula::And(out)
            } else {
                Formula::Or(out)
            }
        }
    }
}

/// Two different constants asserted for the same read, or a constant both
/// asserted and denied.
fn data_clash(items: &[Formula]) -> bool {
    let mut pos: BTreeMap<(&str, bool, &str), usize> = BTreeMap::new();
    let mut neg: BTreeSet<(&str, bool, &str, usize)> = BTreeSet::new();
    for h in items {
        match h {
            Formula::Atom(Atom::DataConst {
                array,
                primed,
                var,
                value,
                ..
            }) => {
                if let Some(prev) = pos.insert((array, *primed, var), *value) {
                    if prev != *value {
                        return true;
                    }
                }
            }
            Formula::Not(inner) => {
                if let Formula::Atom(Atom::DataConst {
                    array,
                    primed,
                    var,
                    value,
                    ..
                }) = inner.as_ref()
                {
                    neg.insert((array, *primed, var, *value));
                }
            }
            _ => {}
        }
    }
    pos.iter()
        .any(|(&(a, p, v), &value)| neg.contains(&(a, p, v, value)))
}

fn simplify_atom(a: &Atom) -> Formula {
    match a {
        Atom::Cmp(op, l, r) => {
            if l == r {
                return if *op == CmpOp::Lt {
                    Formula::False
                } else {
                    Formula::True
                };
            }
            if let (Some(l), Some(r)) = (linearize(l), linearize(r)) {
                let d = l.minus(&r);
                if d.is_constant() {
                    let c = &d.constant;
                    let holds = match op {
                        CmpOp::Eq => c.is_zero(),
                        CmpOp::Lt => c.is_negative(),
                        CmpOp::Le => !c.is_positive(),
                    };
                    return if holds { Formula::True } else { Formula::False };
                }
            }
            Formula::Atom(a.clone())
        }
        Atom::Cong(l, r, m) => {
            if l == r {
                return Formula::True;
            }
            if let (Some(l), Some(r)) = (linearize(l), linearize(r)) {
                let d = l.minus(&r);
                if d.is_constant() {
                    return if d.constant.mod_floor(m).is_zero() {
                        Formula::True
                    } else {
                        Formula::False
                    };
                }
            }
            Formula::Atom(a.clone())
        }
        Atom::DataArr {
            left,
            lprimed,
            right,
            rprimed,
            ..
        } if left == right && lprimed == rprimed => Formula::True,
        _ => Formula::Atom(a.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Sym, SymKind, Term};
    use super::*;

    fn is_ground_true(l: &Term, op: CmpOp, r: &Term) -> Option<bool> {
        match simplify_atom(&Atom::Cmp(op, l.clone(), r.clone())) {
            Formula::True => Some(true),
            Formula::False => Some(false),
            _ => None,
        }
    }

    fn x() -> Term {
        Term::Sym(Sym::new("x", SymKind::IntVar))
    }
    fn a_is(value: usize) -> Formula {
        Formula::Atom(Atom::DataConst {
            array: "A".into(),
            primed: false,
            var: "x".into(),
            value,
            label: format!("a{value}"),
        })
    }

    #[test]
    fn strict_self_comparison_is_false() {
        assert_eq!(simplify(&Formula::lt(x(), x())), Formula::False);
        assert_eq!(
            is_ground_true(&Term::num(2), CmpOp::Lt, &Term::num(3)),
            Some(true)
        );
    }

    #[test]
    fn unit_laws() {
        let p = Formula::le(Term::num(0), x());
        assert_eq!(simplify(&Formula::and([Formula::True, p.clone()])), p);
        assert_eq!(
            simplify(&Formula::or([Formula::False, p.clone(), p.clone()])),
            p
        );
        assert_eq!(
            simplify(&Formula::or([p.clone(), Formula::not(p.clone())])),
            Formula::True
        );
    }

    #[test]
    fn distinct_values_clash() {
        assert_eq!(simplify(&Formula::and([a_is(1), a_is(2)])), Formula::False);
        assert_eq!(
            simplify(&Formula::and([a_is(1), Formula::not(a_is(1))])),
            Formula::False
        );
        assert_ne!(
            simplify(&Formula::and([a_is(1), Formula::not(a_is(2))])),
            Formula::False
        );
    }

    #[test]
    fn ground_arithmetic_folds() {
        let f = Formula::Atom(Atom::Cong(Term::num(7), Term::num(1), 3.into()));
        assert_eq!(simplify(&f), Formula::True);
        let g = Formula::eq(Term::add(x(), Term::num(1)), Term::add(Term::num(1), x()));
        assert_eq!(simplify(&g), Formula::True);
    }
}
