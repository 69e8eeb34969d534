//! Machine-integer evaluation of linear constraint sets and of parsed
//! (unvalidated) ground formulas, over a fixed variable layout.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::frontend::ast::{PFormula, PTerm, RelOp};
use crate::qe::{Conj, Rel};

use super::OracleError;

/// Variable names mapped to slots of a value vector.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Layout {
    pub names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Layout {
    pub fn new(names: impl IntoIterator<Item = String>) -> Self {
        let mut l = Layout::default();
        for n in names {
            l.push(n);
        }
        l
    }

    pub fn push(&mut self, name: String) -> usize {
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.names.len() - 1
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Eq,
    Le,
    Dvd(i64),
}

/// `sum(c * x[i]) + k  REL  0`.
#[derive(Clone, Debug)]
pub struct CompiledConstraint {
    terms: Vec<(usize, i64)>,
    constant: i64,
    kind: Kind,
}

impl CompiledConstraint {
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|(i, _)| *i)
    }

    fn value(&self, x: &[i64]) -> i64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(i, c)| acc + c * x[i])
    }

    pub fn holds(&self, x: &[i64]) -> bool {
        let v = self.value(x);
        match self.kind {
            Kind::Eq => v == 0,
            Kind::Le => v <= 0,
            Kind::Dvd(m) => v.rem_euclid(m) == 0,
        }
    }

    /// With every variable except `var` fixed in `x`, the interval of values
    /// for `var` allowed by this constraint (ignoring congruences).
    pub fn bounds_for(&self, var: usize, x: &[i64]) -> (Option<i64>, Option<i64>) {
        let c = self
            .terms
            .iter()
            .find(|(i, _)| *i == var)
            .map(|t| t.1)
            .unwrap_or(0);
        if c == 0 {
            return (None, None);
        }
        let rest = self
            .terms
            .iter()
            .filter(|(i, _)| *i != var)
            .fold(self.constant, |acc, &(i, k)| acc + k * x[i]);
        // c*v + rest REL 0
        match self.kind {
            Kind::Eq => {
                if rest % c != 0 {
                    (Some(1), Some(0))
                } else {
                    let v = -rest / c;
                    (Some(v), Some(v))
                }
            }
            Kind::Le => {
                if c > 0 {
                    (None, Some((-rest).div_euclid(c)))
                } else {
                    // -|c| v <= -rest  =>  v >= rest/|c|
                    let a = -c;
                    (Some(-((-rest).div_euclid(a))), None)
                }
            }
            Kind::Dvd(_) => (None, None),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompiledConj {
    pub constraints: Vec<CompiledConstraint>,
}

impl CompiledConj {
    pub fn new(c: &Conj, layout: &Layout) -> Result<Self, OracleError> {
        let mut constraints = Vec::new();
        for k in &c.constraints {
            let mut terms = Vec::new();
            for (v, coeff) in &k.expr.coeffs {
                let i = layout
                    .get(v)
                    .ok_or_else(|| OracleError::UnknownVariable(v.clone()))?;
                terms.push((i, small(coeff)?));
            }
            constraints.push(CompiledConstraint {
                terms,
                constant: small(&k.expr.constant)?,
                kind: match &k.rel {
                    Rel::Eq => Kind::Eq,
                    Rel::Le => Kind::Le,
                    Rel::Dvd(m) => Kind::Dvd(small(m)?),
                },
            });
        }
        Ok(CompiledConj { constraints })
    }

    pub fn holds(&self, x: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    /// The constraints that only mention slots accepted by `keep`.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> CompiledConj {
        CompiledConj {
            constraints: self
                .constraints
                .iter()
                .filter(|c| c.vars().all(&keep))
                .cloned()
                .collect(),
        }
    }
}

fn small(n: &num_bigint::BigInt) -> Result<i64, OracleError> {
    n.to_i64()
        .ok_or_else(|| OracleError::Overflow(n.to_string()))
}

/// A disjunction of conjunctions.
#[derive(Clone, Debug)]
pub struct CompiledDnf {
    pub disjuncts: Vec<CompiledConj>,
}

impl CompiledDnf {
    pub fn new<'a>(
        d: impl IntoIterator<Item = &'a Conj>,
        layout: &Layout,
    ) -> Result<Self, OracleError> {
        Ok(CompiledDnf {
            disjuncts: d
                .into_iter()
                .map(|c| CompiledConj::new(c, layout))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn holds(&self, x: &[i64]) -> bool {
        self.disjuncts.iter().any(|c| c.holds(x))
    }

    /// Index of the first disjunct that holds.
    pub fn witness(&self, x: &[i64]) -> Option<usize> {
        self.disjuncts.iter().position(|c| c.holds(x))
    }
}

#[derive(Clone, Debug)]
enum Expr {
    Var(usize),
    Num(i64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Scale(i64, Box<Expr>),
    Div(Box<Expr>, i64),
}

impl Expr {
    fn eval(&self, x: &[i64]) -> i64 {
        match self {
            Expr::Var(i) => x[*i],
            Expr::Num(n) => *n,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Scale(k, a) => k * a.eval(x),
            Expr::Div(a, d) => a.eval(x).div_euclid(*d),
        }
    }
}

/// A parsed ground formula over layout variables (primed names are looked
/// up as `name'`). Cardinalities and array reads are rejected.
#[derive(Clone, Debug)]
pub enum CompiledFormula {
    Const(bool),
    Cmp(RelOp, Expr2),
    Cong(Expr2, i64),
    Not(Box<CompiledFormula>),
    And(Vec<CompiledFormula>),
    Or(Vec<CompiledFormula>),
}

/// Pair of sides of a comparison.
#[derive(Clone, Debug)]
pub struct Expr2(Expr, Expr);

impl CompiledFormula {
    pub fn new(f: &PFormula, layout: &Layout) -> Result<Self, OracleError> {
        Ok(match f {
            PFormula::True => CompiledFormula::Const(true),
            PFormula::False => CompiledFormula::Const(false),
            PFormula::Not(g) => CompiledFormula::Not(Box::new(Self::new(g, layout)?)),
            PFormula::And(gs) => CompiledFormula::And(
                gs.iter()
                    .map(|g| Self::new(g, layout))
                    .collect::<Result<_, _>>()?,
            ),
            PFormula::Or(gs) => CompiledFormula::Or(
                gs.iter()
                    .map(|g| Self::new(g, layout))
                    .collect::<Result<_, _>>()?,
            ),
            PFormula::Atom(a) => {
                let sides = Expr2(expr(&a.lhs, layout)?, expr(&a.rhs, layout)?);
                match &a.modulus {
                    Some(m) => CompiledFormula::Cong(sides, small(m)?),
                    None => CompiledFormula::Cmp(a.op, sides),
                }
            }
            PFormula::Forall(..) => {
                return Err(OracleError::Unsupported(
                    "quantifier in a ground formula".into(),
                ))
            }
        })
    }

    pub fn holds(&self, x: &[i64]) -> bool {
        match self {
            CompiledFormula::Const(b) => *b,
            CompiledFormula::Not(g) => !g.holds(x),
            CompiledFormula::And(gs) => gs.iter().all(|g| g.holds(x)),
            CompiledFormula::Or(gs) => gs.iter().any(|g| g.holds(x)),
            CompiledFormula::Cmp(op, Expr2(l, r)) => {
                let (l, r) = (l.eval(x), r.eval(x));
                match op {
                    RelOp::Eq => l == r,
                    RelOp::Ne => l != r,
                    RelOp::Lt => l < r,
                    RelOp::Le => l <= r,
                    RelOp::Gt => l > r,
                    RelOp::Ge => l >= r,
                }
            }
            CompiledFormula::Cong(Expr2(l, r), m) => (l.eval(x) - r.eval(x)).rem_euclid(*m) == 0,
        }
    }
}

fn expr(t: &PTerm, layout: &Layout) -> Result<Expr, OracleError> {
    Ok(match t {
        PTerm::Name { name, primed } => {
            let n = if *primed {
                format!("{}'", name.name)
            } else {
                name.name.clone()
            };
            Expr::Var(layout.get(&n).ok_or(OracleError::UnknownVariable(n))?)
        }
        PTerm::Num(n) => Expr::Num(small(n)?),
        PTerm::Add(a, b) => Expr::Add(Box::new(expr(a, layout)?), Box::new(expr(b, layout)?)),
        PTerm::Sub(a, b) => Expr::Sub(Box::new(expr(a, layout)?), Box::new(expr(b, layout)?)),
        PTerm::Neg(a) => Expr::Scale(-1, Box::new(expr(a, layout)?)),
        PTerm::Mul(a, b) => match (&**a, &**b) {
            (PTerm::Num(k), e) | (e, PTerm::Num(k)) => {
                Expr::Scale(small(k)?, Box::new(expr(e, layout)?))
            }
            _ => return Err(OracleError::Unsupported("nonlinear product".into())),
        },
        PTerm::Div(a, b) => match &**b {
            PTerm::Num(d) if small(d)? > 0 => Expr::Div(Box::new(expr(a, layout)?), small(d)?),
            _ => return Err(OracleError::Unsupported("division by a non-numeral".into())),
        },
        PTerm::Read { .. } | PTerm::Card { .. } => {
            return Err(OracleError::Unsupported(
                "array read in a ground formula".into(),
            ))
        }
    })
}

/// Enumerates every assignment to `free` (slots of `x`, with inclusive
/// domains) satisfying `c`; the other slots of `x` must already be set.
/// Each constraint narrows the domain of a slot once all its other slots
/// are assigned.
pub fn solutions(
    c: &CompiledConj,
    x: &mut Vec<i64>,
    free: &[(usize, i64, i64)],
    on_solution: &mut dyn FnMut(&[i64]),
) {
    let mut set = vec![true; x.len()];
    for &(i, _, _) in free {
        set[i] = false;
    }
    search(c, x, &mut set, free, 0, on_solution);
}

fn search(
    c: &CompiledConj,
    x: &mut Vec<i64>,
    set: &mut Vec<bool>,
    free: &[(usize, i64, i64)],
    depth: usize,
    on_solution: &mut dyn FnMut(&[i64]),
) {
    if depth == free.len() {
        if c.holds(x) {
            on_solution(x);
        }
        return;
    }
    let (var, mut lo, mut hi) = free[depth];
    for k in &c.constraints {
        let mut mentions = false;
        let mut ready = true;
        for v in k.vars() {
            if v == var {
                mentions = true;
            } else if !set[v] {
                ready = false;
            }
        }
        if !(mentions && ready) {
            continue;
        }
        let (l, h) = k.bounds_for(var, x);
        if let Some(l) = l {
            lo = lo.max(l);
        }
        if let Some(h) = h {
            hi = hi.min(h);
        }
    }
    set[var] = true;
    for v in lo..=hi {
        x[var] = v;
        // constraints that just became fully assigned
        let ok = c.constraints.iter().all(|k| {
            let mut touches = false;
            for u in k.vars() {
                if u == var {
                    touches = true;
                } else if !set[u] {
                    return true;
                }
            }
            !touches || k.holds(x)
        });
        if ok {
            search(c, x, set, free, depth + 1, on_solution);
        }
    }
    set[var] = false;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_formula;
    use crate::pipeline::parse_conj;

    fn conj(atoms: &[&str]) -> Conj {
        parse_conj(&atoms.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn conjunctions_evaluate() {
        let l = Layout::new(["x".to_string(), "y".to_string()]);
        let c = CompiledConj::new(&conj(&["x < y", "x = 1 mod 2"]), &l).unwrap();
        assert!(c.holds(&[1, 2]));
        assert!(!c.holds(&[2, 3]));
        assert!(!c.holds(&[1, 1]));
        assert!(CompiledConj::new(&conj(&["z < 0"]), &l).is_err());
    }

    #[test]
    fn parsed_formulas_evaluate() {
        let l = Layout::new(["N".to_string(), "z".to_string(), "z'".to_string()]);
        let f = CompiledFormula::new(&parse_formula("z' - z >= 0 & (2*N) div 3 < z").unwrap(), &l)
            .unwrap();
        assert!(f.holds(&[3, 3, 3]));
        assert!(!f.holds(&[3, 2, 3]));
        assert!(!f.holds(&[3, 3, 2]));
    }

    #[test]
    fn solution_enumeration_matches_brute_force() {
        let l = Layout::new([
            "N".to_string(),
            "a".to_string(),
            "b".to_string(),
            "c".to_string(),
        ]);
        let c = CompiledConj::new(
            &conj(&[
                "N = a + b + c",
                "a <= b",
                "0 <= a",
                "0 <= b",
                "0 <= c",
                "b = 0 mod 2",
            ]),
            &l,
        )
        .unwrap();
        let mut found = Vec::new();
        let mut x = vec![5, 0, 0, 0];
        solutions(&c, &mut x, &[(1, 0, 5), (2, 0, 5), (3, 0, 5)], &mut |s| {
            found.push(s.to_vec())
        });
        let mut brute = Vec::new();
        for a in 0..=5 {
            for b in 0..=5 {
                for cc in 0..=5 {
                    if c.holds(&[5, a, b, cc]) {
                        brute.push(vec![5, a, b, cc]);
                    }
                }
            }
        }
        assert_eq!(found, brute);
    }
}
