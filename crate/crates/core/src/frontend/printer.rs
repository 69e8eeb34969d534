//! Prints a [`ParsedSpec`] back to DSL source. Parenthesization is chosen so
//! that reparsing yields the same tree.

use std::fmt::Write;

use super::ast::*;

pub fn print_spec(s: &ParsedSpec) -> String {
    let mut out = String::new();
    let names = |ids: &[Ident]| {
        ids.iter()
            .map(|i| i.name.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let _ = writeln!(out, "params: {};", names(&s.params));
    if !s.sorts.is_empty() {
        let _ = write!(out, "sorts:");
        for d in &s.sorts {
            let _ = write!(out, " {} = {{{}}};", d.name.name, names(&d.values));
        }
        out.push('\n');
    }
    if !s.intvars.is_empty() {
        let _ = write!(out, "intvars:");
        for d in &s.intvars {
            let _ = write!(
                out,
                " {}{};",
                d.name.name,
                if d.boolean { " : bool" } else { "" }
            );
        }
        out.push('\n');
    }
    if !s.arrays.is_empty() {
        let _ = write!(out, "arrays:");
        for d in &s.arrays {
            let _ = write!(out, " {} : {};", d.name.name, d.ty.name);
        }
        out.push('\n');
    }
    if !s.counters.is_empty() {
        let _ = writeln!(out, "counters:");
        for c in &s.counters {
            let _ = writeln!(
                out,
                "  {} = #{{{} | {}}};",
                c.name.name,
                c.var.name,
                formula(&c.body)
            );
        }
    }
    let cases = |out: &mut String, title: &str, cs: &[PCase], prefix: &str| {
        let _ = writeln!(out, "{title}:");
        for c in cs {
            let _ = writeln!(out, "  {prefix}{};", case(c));
        }
    };
    if !s.invariant.is_empty() {
        cases(&mut out, "invariant", &s.invariant, "");
    }
    cases(&mut out, "init", &s.init, "");
    cases(&mut out, "trans", &s.trans, "case ");
    if let Some(u) = &s.unsafe_ {
        let _ = writeln!(out, "unsafe: {};", formula(u));
    }
    out
}

fn case(c: &PCase) -> String {
    match &c.var {
        Some(v) => format!("forall {} . {}", v.name, formula(&c.body)),
        None => formula(&c.body),
    }
}

pub fn formula(f: &PFormula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f);
    s
}

fn write_formula(s: &mut String, f: &PFormula) {
    match f {
        PFormula::True => s.push_str("true"),
        PFormula::False => s.push_str("false"),
        PFormula::Atom(a) => write_atom(s, a),
        PFormula::Not(g) => {
            s.push_str("!(");
            write_formula(s, g);
            s.push(')');
        }
        PFormula::And(gs) | PFormula::Or(gs) => {
            let and = matches!(f, PFormula::And(_));
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    s.push_str(if and { " & " } else { " | " });
                }
                let paren = match g {
                    PFormula::Forall(..) => true,
                    PFormula::Or(_) => true,
                    PFormula::And(_) => and,
                    _ => false,
                };
                if paren {
                    s.push('(');
                }
                write_formula(s, g);
                if paren {
                    s.push(')');
                }
            }
        }
        PFormula::Forall(v, g) => {
            let _ = write!(s, "forall {} . ", v.name);
            write_formula(s, g);
        }
    }
}

fn write_atom(s: &mut String, a: &PAtom) {
    write_term(s, &a.lhs, 0);
    let _ = write!(s, " {} ", a.op.symbol());
    write_term(s, &a.rhs, 0);
    if let Some(m) = &a.modulus {
        let _ = write!(s, " mod {m}");
    }
}

fn prec(t: &PTerm) -> u8 {
    match t {
        PTerm::Add(..) | PTerm::Sub(..) => 1,
        PTerm::Mul(..) | PTerm::Div(..) => 2,
        _ => 3,
    }
}

pub fn term(t: &PTerm) -> String {
    let mut s = String::new();
    write_term(&mut s, t, 0);
    s
}

fn write_term(s: &mut String, t: &PTerm, min: u8) {
    let paren = prec(t) < min;
    if paren {
        s.push('(');
    }
    match t {
        PTerm::Name { name, primed } => {
            s.push_str(&name.name);
            if *primed {
                s.push('\'');
            }
        }
        PTerm::Num(n) => {
            let _ = write!(s, "{n}");
        }
        PTerm::Read { array, primed, var } => {
            let _ = write!(
                s,
                "{}{}({})",
                array.name,
                if *primed { "'" } else { "" },
                var.name
            );
        }
        PTerm::Card { var, body } => {
            let _ = write!(s, "#{{{} | {}}}", var.name, formula(body));
        }
        PTerm::Add(a, b) | PTerm::Sub(a, b) => {
            write_term(s, a, 1);
            s.push_str(if matches!(t, PTerm::Add(..)) {
                " + "
            } else {
                " - "
            });
            write_term(s, b, 2);
        }
        PTerm::Mul(a, b) | PTerm::Div(a, b) => {
            write_term(s, a, 2);
            s.push_str(if matches!(t, PTerm::Mul(..)) {
                "*"
            } else {
                " div "
            });
            write_term(s, b, 3);
        }
        PTerm::Neg(a) => {
            s.push('-');
            write_term(s, a, 3);
        }
    }
    if paren {
        s.push(')');
    }
}
