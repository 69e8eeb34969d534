//! Printing in the DSL expression syntax.

use std::fmt;

use super::{Atom, CmpOp, Formula, Term};

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Add(..) | Term::Sub(..) => 1,
        Term::Mul(..) | Term::Div(..) => 2,
        Term::Num(n) if n.sign() == num_bigint::Sign::Minus => 1,
        _ => 3,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    let paren = term_prec(t) < min;
    if paren {
        write!(f, "(")?;
    }
    match t {
        Term::Sym(s) => write!(f, "{}", s.var_name())?,
        Term::Num(n) => write!(f, "{n}")?,
        Term::Read { array, primed, var } => {
            write!(f, "{}{}({})", array, if *primed { "'" } else { "" }, var)?
        }
        Term::Card { var, body } => write!(f, "#{{{var} | {body}}}")?,
        Term::Add(a, b) => {
            write_term(f, a, 1)?;
            write!(f, " + ")?;
            write_term(f, b, 2)?;
        }
        Term::Sub(a, b) => {
            write_term(f, a, 1)?;
            write!(f, " - ")?;
            write_term(f, b, 2)?;
        }
        Term::Mul(k, a) => {
            if k.sign() == num_bigint::Sign::Minus {
                write!(f, "({k})*")?;
            } else {
                write!(f, "{k}*")?;
            }
            write_term(f, a, 3)?;
        }
        Term::Div(a, d) => {
            write_term(f, a, 3)?;
            write!(f, " div {d}")?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |b: bool| if b { "'" } else { "" };
        match self {
            Atom::Cmp(op, l, r) => {
                let op = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                };
                write!(f, "{l} {op} {r}")
            }
            Atom::Cong(l, r, m) => write!(f, "{l} = {r} mod {m}"),
            Atom::DataConst {
                array,
                primed,
                var,
                label,
                ..
            } => write!(f, "{}{}({}) = {}", array, p(*primed), var, label),
            Atom::DataArr {
                left,
                lprimed,
                right,
                rprimed,
                var,
            } => write!(
                f,
                "{}{}({var}) = {}{}({var})",
                left,
                p(*lprimed),
                right,
                p(*rprimed)
            ),
        }
    }
}

fn formula_prec(g: &Formula) -> u8 {
    match g {
        Formula::Forall(..) | Formula::ExistsInt(..) => 0,
        Formula::Or(gs) if gs.len() > 1 => 1,
        Formula::And(gs) if gs.len() > 1 => 2,
        _ => 3,
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
    if let Formula::And(gs) | Formula::Or(gs) = g {
        if gs.len() == 1 {
            return write_formula(f, &gs[0], min);
        }
    }
    let paren = formula_prec(g) < min;
    if paren {
        write!(f, "(")?;
    }
    match g {
        Formula::True => write!(f, "true")?,
        Formula::False => write!(f, "false")?,
        Formula::Atom(a) => write!(f, "{a}")?,
        Formula::Not(h) => {
            write!(f, "!(")?;
            write_formula(f, h, 0)?;
            write!(f, ")")?;
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let (sep, empty, level) = if matches!(g, Formula::And(_)) {
                (" & ", "true", 2)
            } else {
                (" | ", "false", 1)
            };
            if gs.is_empty() {
                write!(f, "{empty}")?;
            } else {
                for (i, h) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write_formula(f, h, level + 1)?;
                }
            }
        }
        Formula::Forall(v, h) => {
            write!(f, "forall {v} . ")?;
            write_formula(f, h, 0)?;
        }
        Formula::ExistsInt(s, h) => {
            write!(f, "exists {} . ", s.var_name())?;
            write_formula(f, h, 0)?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Sym, SymKind};
    use super::*;

    #[test]
    fn prints_dsl_syntax() {
        let n = Term::Sym(Sym::param("N"));
        let r0 = Term::Read {
            array: "R0".into(),
            primed: true,
            var: "x".into(),
        };
        let t = Term::Div(Box::new(Term::mul(2, n.clone())), 3.into());
        let f = Formula::or([
            Formula::and([Formula::lt(t, r0), Formula::le(Term::num(0), n.clone())]),
            Formula::not(Formula::eq(
                Term::Sym(Sym::new("S", SymKind::IntVar).primed()),
                Term::num(1),
            )),
        ]);
        assert_eq!(f.to_string(), "(2*N) div 3 < R0'(x) & 0 <= N | !(S' = 1)");
        let g = Formula::and([
            Formula::or([Formula::True, Formula::False]),
            Formula::forall("x", Formula::True),
        ]);
        assert_eq!(g.to_string(), "(true | false) & (forall x . true)");
    }

    #[test]
    fn prints_nested_subtraction() {
        let a = Term::Sym(Sym::param("a"));
        let b = Term::Sym(Sym::param("b"));
        let t = Term::sub(a.clone(), Term::sub(b.clone(), Term::num(-1)));
        assert_eq!(t.to_string(), "a - (b - (-1))");
    }
}
