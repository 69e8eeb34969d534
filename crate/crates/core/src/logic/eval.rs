//! Finite-model evaluation of formulas at a fixed process count.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Atom, CmpOp, Formula, Sym, SymKind, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("integer existential over `{0}` needs a search bound")]
    UnboundedExistential(String),
}

/// An interpretation of integer symbols and arrays over processes `0..n`.
pub trait Model {
    fn n(&self) -> usize;
    fn int(&self, s: &Sym) -> Option<BigInt>;
    fn read(&self, array: &str, primed: bool, idx: usize) -> Option<i64>;
}

/// An explicit configuration: enumerated arrays hold value indices,
/// arithmetic arrays hold integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConcreteState {
    pub n: usize,
    pub params: BTreeMap<String, i64>,
    pub ints: BTreeMap<String, i64>,
    pub arrays: BTreeMap<String, Vec<i64>>,
}

impl ConcreteState {
    pub fn new(n: usize) -> Self {
        let mut params = BTreeMap::new();
        params.insert("N".to_string(), n as i64);
        ConcreteState {
            n,
            params,
            ..Default::default()
        }
    }
}

impl Model for ConcreteState {
    fn n(&self) -> usize {
        self.n
    }
    fn int(&self, s: &Sym) -> Option<BigInt> {
        if s.primed {
            return None;
        }
        let v = match s.kind {
            SymKind::Param => self.params.get(&s.name),
            _ => self.ints.get(&s.name),
        };
        v.map(|&v| BigInt::from(v))
    }
    fn read(&self, array: &str, primed: bool, idx: usize) -> Option<i64> {
        if primed {
            return None;
        }
        self.arrays.get(array).and_then(|a| a.get(idx).copied())
    }
}

/// A transition: unprimed symbols come from `pre`, primed ones from `post`.
pub struct StatePair<'a> {
    pub pre: &'a ConcreteState,
    pub post: &'a ConcreteState,
}

impl Model for StatePair<'_> {
    fn n(&self) -> usize {
        self.pre.n
    }
    fn int(&self, s: &Sym) -> Option<BigInt> {
        if s.primed {
            let mut u = s.clone();
            u.primed = false;
            self.post.int(&u)
        } else {
            self.pre.int(s)
        }
    }
    fn read(&self, array: &str, primed: bool, idx: usize) -> Option<i64> {
        if primed {
            self.post.read(array, false, idx)
        } else {
            self.pre.read(array, false, idx)
        }
    }
}

/// Bindings for process variables and integer symbols, consulted before the model.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub procs: BTreeMap<String, usize>,
    pub ints: BTreeMap<Sym, BigInt>,
    /// Inclusive search range for `ExistsInt`.
    pub exists_bound: Option<(i64, i64)>,
}

pub fn eval_term(t: &Term, m: &dyn Model, env: &Env) -> Result<BigInt, EvalError> {
    Ok(match t {
        Term::Sym(s) => match env.ints.get(s) {
            Some(v) => v.clone(),
            None => m
                .int(s)
                .ok_or_else(|| EvalError::UnboundSymbol(s.var_name()))?,
        },
        Term::Num(n) => n.clone(),
        Term::Read { array, primed, var } => {
            let idx = *env
                .procs
                .get(var)
                .ok_or_else(|| EvalError::UnboundSymbol(var.clone()))?;
            let v = m.read(array, *primed, idx).ok_or_else(|| {
                EvalError::UnboundSymbol(format!("{}{}", array, if *primed { "'" } else { "" }))
            })?;
            BigInt::from(v)
        }
        Term::Card { var, body } => {
            let mut env = env.clone();
            let mut count = 0u64;
            for i in 0..m.n() {
                env.procs.insert(var.clone(), i);
                if eval(body, m, &env)? {
                    count += 1;
                }
            }
            BigInt::from(count)
        }
        Term::Add(a, b) => eval_term(a, m, env)? + eval_term(b, m, env)?,
        Term::Sub(a, b) => eval_term(a, m, env)? - eval_term(b, m, env)?,
        Term::Mul(k, a) => k * eval_term(a, m, env)?,
        Term::Div(a, d) => eval_term(a, m, env)?.div_floor(d),
    })
}

/// Standard semantics; `Forall` and cardinalities range over `0..n`.
pub fn eval(f: &Formula, m: &dyn Model, env: &Env) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => eval_atom(a, m, env)?,
        Formula::Not(g) => !eval(g, m, env)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval(g, m, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval(g, m, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Forall(v, g) => {
            let mut env = env.clone();
            for i in 0..m.n() {
                env.procs.insert(v.clone(), i);
                if !eval(g, m, &env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::ExistsInt(s, g) => {
            let (lo, hi) = env
                .exists_bound
                .ok_or_else(|| EvalError::UnboundedExistential(s.var_name()))?;
            let mut env = env.clone();
            for v in lo..=hi {
                env.ints.insert(s.clone(), BigInt::from(v));
                if eval(g, m, &env)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

fn eval_atom(a: &Atom, m: &dyn Model, env: &Env) -> Result<bool, EvalError> {
    let proc_of = |var: &String| {
        env.procs
            .get(var)
            .copied()
            .ok_or_else(|| EvalError::UnboundSymbol(var.clone()))
    };
    let read = |array: &str, primed: bool, idx: usize| {
        m.read(array, primed, idx).ok_or_else(|| {
            EvalError::UnboundSymbol(format!("{}{}", array, if primed { "'" } else { "" }))
        })
    };
    Ok(match a {
        Atom::Cmp(op, l, r) => {
            let (l, r) = (eval_term(l, m, env)?, eval_term(r, m, env)?);
            match op {
                CmpOp::Eq => l == r,
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
            }
        }
        Atom::Cong(l, r, md) => {
            let d = eval_term(l, m, env)? - eval_term(r, m, env)?;
            d.mod_floor(md).is_zero()
        }
        Atom::DataConst {
            array,
            primed,
            var,
            value,
            ..
        } => read(array, *primed, proc_of(var)?)? == *value as i64,
        Atom::DataArr {
            left,
            lprimed,
            right,
            rprimed,
            var,
        } => {
            let i = proc_of(var)?;
            read(left, *lprimed, i)? == read(right, *rprimed, i)?
        }
    })
}

/// Floor of `a / b` on machine integers (b > 0).
pub fn floor_div_i64(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ot_state(n: usize, a: Vec<i64>, v: Vec<i64>) -> ConcreteState {
        let mut s = ConcreteState::new(n);
        s.arrays.insert("A".into(), a);
        s.arrays.insert("V".into(), v);
        s
    }

    fn a_is(value: usize, var: &str) -> Formula {
        Formula::Atom(Atom::DataConst {
            array: "A".into(),
            primed: false,
            var: var.into(),
            value,
            label: String::new(),
        })
    }

    fn ot_init() -> Formula {
        Formula::forall(
            "x",
            Formula::and([
                Formula::lt(Term::num(2), Term::Sym(Sym::param("N"))),
                a_is(0, "x"),
            ]),
        )
    }

    #[test]
    fn init_holds_at_three() {
        let s = ot_state(3, vec![0, 0, 0], vec![0, 1, 0]);
        assert!(eval(&ot_init(), &s, &Env::default()).unwrap());
    }

    #[test]
    fn init_fails_at_two() {
        let s = ot_state(2, vec![0, 0], vec![0, 0]);
        assert!(!eval(&ot_init(), &s, &Env::default()).unwrap());
    }

    #[test]
    fn counting_definition() {
        // A = [a0, bot, a0] (indices 1, 0, 1), V = [0, 1, 0]: two processes with A=a0, V=v0.
        let s = ot_state(3, vec![1, 0, 1], vec![0, 1, 0]);
        let body = Formula::and([
            a_is(1, "i"),
            Formula::Atom(Atom::DataConst {
                array: "V".into(),
                primed: false,
                var: "i".into(),
                value: 0,
                label: String::new(),
            }),
        ]);
        let z00 = Sym::new("z00", SymKind::Counter);
        let def = Formula::eq(
            Term::Sym(z00.clone()),
            Term::Card {
                var: "i".into(),
                body: Box::new(body),
            },
        );
        let mut env = Env::default();
        env.ints.insert(z00.clone(), BigInt::from(2));
        assert!(eval(&def, &s, &env).unwrap());
        env.ints.insert(z00, BigInt::from(1));
        assert!(!eval(&def, &s, &env).unwrap());
    }

    #[test]
    fn unbound_symbols_are_reported() {
        let s = ConcreteState::new(1);
        let f = Formula::lt(Term::num(0), Term::Sym(Sym::new("S", SymKind::IntVar)));
        assert_eq!(
            eval(&f, &s, &Env::default()),
            Err(EvalError::UnboundSymbol("S".into()))
        );
        let e = Formula::ExistsInt(Sym::new("t", SymKind::Local), Box::new(Formula::True));
        assert!(matches!(
            eval(&e, &s, &Env::default()),
            Err(EvalError::UnboundedExistential(_))
        ));
    }

    #[test]
    fn floor_division_rounds_down() {
        let s = ConcreteState::new(4);
        let t = Term::Div(
            Box::new(Term::mul(2, Term::Sym(Sym::param("N")))),
            BigInt::from(3),
        );
        assert_eq!(eval_term(&t, &s, &Env::default()).unwrap(), BigInt::from(2));
        let t = Term::Div(Box::new(Term::num(-1)), BigInt::from(3));
        assert_eq!(
            eval_term(&t, &s, &Env::default()).unwrap(),
            BigInt::from(-1)
        );
        assert_eq!(floor_div_i64(-1, 3), -1);
    }
}
