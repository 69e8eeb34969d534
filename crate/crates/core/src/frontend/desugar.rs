//! Replaces floor divisions `u div d` by fresh locals `t` constrained by
//! `d*t <= u < d*t + d`.

use num_bigint::BigInt;

use super::SpecError;
use crate::logic::{Formula, Sym, SymKind, Term};
use crate::spec::{Case, LocalDef, SystemSpec};

pub fn desugar_floor_div(spec: &SystemSpec) -> Result<SystemSpec, SpecError> {
    let mut out = spec.clone();
    let mut st = State {
        locals: spec.locals.clone(),
        taken: spec.used_names(),
        next: 0,
    };
    for c in &mut out.invariant {
        *c = st.case(c)?;
    }
    out.init = st.case(&out.init)?;
    for c in &mut out.trans {
        *c = st.case(c)?;
    }
    out.unsafe_ = st.formula(&out.unsafe_)?;
    out.locals = st.locals;
    Ok(out)
}

struct State {
    locals: Vec<LocalDef>,
    taken: std::collections::BTreeSet<String>,
    next: usize,
}

impl State {
    fn case(&mut self, c: &Case) -> Result<Case, SpecError> {
        Ok(Case {
            var: c.var.clone(),
            body: self.formula(&c.body)?,
        })
    }

    /// Rewrites `f` and conjoins the side constraints of the locals it uses.
    fn formula(&mut self, f: &Formula) -> Result<Formula, SpecError> {
        let mut used: Vec<usize> = Vec::new();
        let mut err = None;
        let g = f.map_terms(&mut |t| match t {
            Term::Div(u, d) => {
                if has_read(u) {
                    err.get_or_insert(SpecError::FragmentViolation {
                        pos: Default::default(),
                        atom: t.to_string(),
                        restriction: "division is only supported on terms without array reads"
                            .into(),
                    });
                    return None;
                }
                let idx = self.local_for(u, d);
                if !used.contains(&idx) {
                    used.push(idx);
                }
                Some(Term::Sym(self.locals[idx].sym()))
            }
            _ => None,
        });
        if let Some(e) = err {
            return Err(e);
        }
        if used.is_empty() {
            return Ok(f.clone());
        }
        let mut parts = vec![g];
        for idx in used {
            if let Formula::And(cs) = side_constraints(&self.locals[idx]) {
                parts.extend(cs);
            }
        }
        Ok(Formula::And(parts))
    }

    fn local_for(&mut self, u: &Term, d: &BigInt) -> usize {
        if let Some(i) = self
            .locals
            .iter()
            .position(|l| l.numerator == *u && l.divisor == *d)
        {
            return i;
        }
        let name = loop {
            let cand = format!("t{}", self.next);
            self.next += 1;
            if !self.taken.contains(&cand) {
                break cand;
            }
        };
        self.taken.insert(name.clone());
        self.locals.push(LocalDef {
            name,
            numerator: u.clone(),
            divisor: d.clone(),
        });
        self.locals.len() - 1
    }
}

/// `d*t <= u & u < d*t + d`.
pub fn side_constraints(l: &LocalDef) -> Formula {
    let t = Term::Sym(Sym::new(l.name.clone(), SymKind::Local));
    let dt = Term::mul(l.divisor.clone(), t);
    Formula::and([
        Formula::le(dt.clone(), l.numerator.clone()),
        Formula::lt(
            l.numerator.clone(),
            Term::add(dt, Term::Num(l.divisor.clone())),
        ),
    ])
}

fn has_read(t: &Term) -> bool {
    match t {
        Term::Read { .. } => true,
        Term::Add(a, b) | Term::Sub(a, b) => has_read(a) || has_read(b),
        Term::Mul(_, a) | Term::Div(a, _) => has_read(a),
        _ => false,
    }
}
