//! Linear integer constraints over named symbols.
//!
//! Every constraint is kept in one of three normal shapes:
//! `e = 0`, `e <= 0` and `m | e` (with `m >= 2`), where `e` is a [`LinExpr`].
//! Strict inequalities never appear: over the integers `e < 0` is `e + 1 <= 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Var = String;

/// `sum(coeffs[v] * v) + constant`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Var, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c.into(),
        }
    }

    pub fn var(v: impl Into<Var>) -> Self {
        Self::term(BigInt::one(), v)
    }

    pub fn term(c: impl Into<BigInt>, v: impl Into<Var>) -> Self {
        let mut e = Self::zero();
        e.add_term(&c.into(), &v.into());
        e
    }

    pub fn add_term(&mut self, c: &BigInt, v: &str) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(v) {
            Some(old) => {
                *old += c;
                if old.is_zero() {
                    self.coeffs.remove(v);
                }
            }
            None => {
                self.coeffs.insert(v.to_string(), c.clone());
            }
        }
    }

    pub fn coeff(&self, v: &str) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(c, v);
        }
        out.constant += &other.constant;
        out
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        self.plus(&other.scaled(&BigInt::from(-1)))
    }

    pub fn scaled(&self, k: &BigInt) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_constant(&self, k: &BigInt) -> LinExpr {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// The expression with the `v` term removed.
    pub fn without(&self, v: &str) -> LinExpr {
        let mut out = self.clone();
        out.coeffs.remove(v);
        out
    }

    /// Replaces `v` by `by`.
    pub fn substitute(&self, v: &str, by: &LinExpr) -> LinExpr {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => self.without(v).plus(&by.scaled(c)),
        }
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> Var) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_term(c, &f(v));
        }
        out
    }

    /// gcd of the variable coefficients (0 for a constant expression).
    pub fn coeff_gcd(&self) -> BigInt {
        self.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn eval(&self, val: &dyn Fn(&str) -> Option<BigInt>) -> Option<BigInt> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * val(v)?;
        }
        Some(acc)
    }

    pub fn eval_i64(&self, val: &dyn Fn(&str) -> Option<i64>) -> Option<i64> {
        let mut acc = self.constant.to_i64()?;
        for (v, c) in &self.coeffs {
            acc = acc.checked_add(c.to_i64()?.checked_mul(val(v)?)?)?;
        }
        Some(acc)
    }

    /// Splits into (positive part, negated negative part): `self = pos - neg + constant`.
    fn sides(&self) -> (LinExpr, LinExpr) {
        let mut pos = LinExpr::zero();
        let mut neg = LinExpr::zero();
        for (v, c) in &self.coeffs {
            if c.is_positive() {
                pos.add_term(c, v);
            } else {
                neg.add_term(&-c, v);
            }
        }
        (pos, neg)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if self.constant.is_positive() {
            write!(f, " + {}", self.constant)?;
        } else if self.constant.is_negative() {
            write!(f, " - {}", -&self.constant)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    /// `e = 0`
    Eq,
    /// `e <= 0`
    Le,
    /// `m | e`
    Dvd(BigInt),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

/// Result of normalizing a single constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Norm {
    True,
    False,
    Keep(Constraint),
}

impl Constraint {
    pub fn eq(lhs: LinExpr, rhs: LinExpr) -> Self {
        Constraint {
            expr: lhs.minus(&rhs),
            rel: Rel::Eq,
        }
    }

    pub fn le(lhs: LinExpr, rhs: LinExpr) -> Self {
        Constraint {
            expr: lhs.minus(&rhs),
            rel: Rel::Le,
        }
    }

    pub fn lt(lhs: LinExpr, rhs: LinExpr) -> Self {
        Constraint {
            expr: lhs.minus(&rhs).add_constant(&BigInt::one()),
            rel: Rel::Le,
        }
    }

    /// `lhs ≡ rhs (mod m)`
    pub fn congruent(lhs: LinExpr, rhs: LinExpr, m: BigInt) -> Self {
        Constraint {
            expr: lhs.minus(&rhs),
            rel: Rel::Dvd(m),
        }
    }

    pub fn nonneg(v: &str) -> Self {
        Constraint {
            expr: LinExpr::term(-1, v),
            rel: Rel::Le,
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.expr.mentions(v)
    }

    pub fn coeff(&self, v: &str) -> BigInt {
        self.expr.coeff(v)
    }

    pub fn substitute(&self, v: &str, by: &LinExpr) -> Constraint {
        Constraint {
            expr: self.expr.substitute(v, by),
            rel: self.rel.clone(),
        }
    }

    /// Number of atoms, used for size budgets.
    pub fn size(&self) -> usize {
        1
    }

    /// Canonical form: gcd-reduced, sign-normalized equalities, residues in `[0, m)`.
    pub fn normalize(&self) -> Norm {
        let e = &self.expr;
        match &self.rel {
            Rel::Le => {
                if e.is_constant() {
                    return if e.constant.is_positive() {
                        Norm::False
                    } else {
                        Norm::True
                    };
                }
                let g = e.coeff_gcd();
                if g.is_one() {
                    return Norm::Keep(self.clone());
                }
                // sum(c/g x) <= floor(-k/g)  <=>  sum(c/g x) + ceil(k/g) <= 0
                let coeffs = e.coeffs.iter().map(|(v, c)| (v.clone(), c / &g)).collect();
                let constant = -((-&e.constant).div_floor(&g));
                Norm::Keep(Constraint {
                    expr: LinExpr { coeffs, constant },
                    rel: Rel::Le,
                })
            }
            Rel::Eq => {
                if e.is_constant() {
                    return if e.constant.is_zero() {
                        Norm::True
                    } else {
                        Norm::False
                    };
                }
                let g = e.coeff_gcd();
                if !e.constant.is_multiple_of(&g) {
                    return Norm::False;
                }
                let lead_negative = e.coeffs.values().next().is_some_and(|c| c.is_negative());
                let g = if lead_negative { -g } else { g };
                Norm::Keep(Constraint {
                    expr: LinExpr {
                        coeffs: e.coeffs.iter().map(|(v, c)| (v.clone(), c / &g)).collect(),
                        constant: &e.constant / &g,
                    },
                    rel: Rel::Eq,
                })
            }
            Rel::Dvd(m) => {
                let m = m.abs();
                if m.is_zero() {
                    return Constraint {
                        expr: e.clone(),
                        rel: Rel::Eq,
                    }
                    .normalize();
                }
                let mut coeffs = BTreeMap::new();
                for (v, c) in &e.coeffs {
                    let r = c.mod_floor(&m);
                    if !r.is_zero() {
                        coeffs.insert(v.clone(), r);
                    }
                }
                let constant = e.constant.mod_floor(&m);
                let h = coeffs.values().fold(m.clone(), |g, c| g.gcd(c));
                if !constant.is_multiple_of(&h) {
                    return Norm::False;
                }
                if coeffs.is_empty() {
                    return Norm::True;
                }
                let g = h.gcd(&constant);
                let m = &m / &g;
                if m.is_one() {
                    return Norm::True;
                }
                Norm::Keep(Constraint {
                    expr: LinExpr {
                        coeffs: coeffs.into_iter().map(|(v, c)| (v, c / &g)).collect(),
                        constant: constant / &g,
                    },
                    rel: Rel::Dvd(m),
                })
            }
        }
    }

    /// The negation as a disjunction of constraints.
    pub fn negate(&self) -> Vec<Constraint> {
        let one = BigInt::one();
        match &self.rel {
            // not(e <= 0)  <=>  -e + 1 <= 0
            Rel::Le => vec![Constraint {
                expr: self.expr.scaled(&BigInt::from(-1)).add_constant(&one),
                rel: Rel::Le,
            }],
            Rel::Eq => vec![
                Constraint {
                    expr: self.expr.add_constant(&one),
                    rel: Rel::Le,
                },
                Constraint {
                    expr: self.expr.scaled(&BigInt::from(-1)).add_constant(&one),
                    rel: Rel::Le,
                },
            ],
            Rel::Dvd(m) => {
                let mut out = Vec::new();
                let mut r = BigInt::one();
                while &r < m {
                    out.push(Constraint {
                        expr: self.expr.add_constant(&-&r),
                        rel: Rel::Dvd(m.clone()),
                    });
                    r += 1;
                }
                out
            }
        }
    }

    pub fn holds(&self, value: &BigInt) -> bool {
        match &self.rel {
            Rel::Eq => value.is_zero(),
            Rel::Le => !value.is_positive(),
            Rel::Dvd(m) => value.is_multiple_of(m),
        }
    }

    pub fn eval(&self, val: &dyn Fn(&str) -> Option<BigInt>) -> Option<bool> {
        Some(self.holds(&self.expr.eval(val)?))
    }

    pub fn eval_i64(&self, val: &dyn Fn(&str) -> Option<i64>) -> Option<bool> {
        let v = self.expr.eval_i64(val)?;
        Some(match &self.rel {
            Rel::Eq => v == 0,
            Rel::Le => v <= 0,
            Rel::Dvd(m) => v.rem_euclid(m.to_i64()?) == 0,
        })
    }

    /// Orientation-independent identity of the underlying atom, so that an
    /// inequality and its negation share a key. Returns the key and whether
    /// `self` is the positive orientation.
    pub fn atom_key(&self) -> (Constraint, bool) {
        match self.rel {
            Rel::Le => {
                let flipped = self.negate().pop().expect("le negation is a single atom");
                let lead_positive = self
                    .expr
                    .coeffs
                    .values()
                    .next()
                    .is_none_or(|c| c.is_positive());
                if lead_positive {
                    (self.clone(), true)
                } else {
                    (flipped, false)
                }
            }
            _ => (self.clone(), true),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (pos, neg) = self.expr.sides();
        let k = &self.expr.constant;
        // pos - neg + k  REL  0
        let (mut lhs, mut rhs) = (pos, neg);
        match &self.rel {
            Rel::Le if k.is_one() && !lhs.is_constant() && !rhs.is_constant() => {
                return write!(f, "{lhs} < {rhs}");
            }
            Rel::Le if k.is_one() && !lhs.is_constant() => {
                return write!(f, "{lhs} < 0");
            }
            Rel::Le if k.is_one() && !rhs.is_constant() => {
                return write!(f, "0 < {rhs}");
            }
            _ => {}
        }
        if k.is_positive() {
            lhs.constant = k.clone();
        } else {
            rhs.constant = -k;
        }
        match &self.rel {
            Rel::Eq => write!(f, "{lhs} = {rhs}"),
            Rel::Le => write!(f, "{lhs} <= {rhs}"),
            Rel::Dvd(m) => write!(f, "{lhs} = {rhs} mod {m}"),
        }
    }
}

/// A conjunction of constraints (a linear constraint set).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conj {
    pub constraints: Vec<Constraint>,
}

impl Conj {
    pub fn new(constraints: Vec<Constraint>) -> Self {
        Conj { constraints }
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Constraint>) {
        self.constraints.extend(cs);
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.constraints.iter().any(|c| c.mentions(v))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.constraints
            .iter()
            .flat_map(|c| c.expr.vars().cloned())
            .collect()
    }

    pub fn occurrences(&self, v: &str) -> usize {
        self.constraints.iter().filter(|c| c.mentions(v)).count()
    }

    pub fn substitute(&self, v: &str, by: &LinExpr) -> Conj {
        Conj::new(
            self.constraints
                .iter()
                .map(|c| c.substitute(v, by))
                .collect(),
        )
    }

    pub fn eval(&self, val: &dyn Fn(&str) -> Option<BigInt>) -> Option<bool> {
        for c in &self.constraints {
            if !c.eval(val)? {
                return Some(false);
            }
        }
        Some(true)
    }

    pub fn eval_i64(&self, val: &dyn Fn(&str) -> Option<i64>) -> Option<bool> {
        for c in &self.constraints {
            if !c.eval_i64(val)? {
                return Some(false);
            }
        }
        Some(true)
    }

    /// Normalizes every constraint, drops tautologies and duplicates, keeps the
    /// tightest of parallel inequalities and turns opposing inequalities into
    /// equalities. `None` means the conjunction is unsatisfiable.
    pub fn simplify(&self) -> Option<Conj> {
        let mut eqs: BTreeMap<BTreeMap<Var, BigInt>, BigInt> = BTreeMap::new();
        // linear part -> max constant (tightest `L + c <= 0`)
        let mut les: BTreeMap<BTreeMap<Var, BigInt>, BigInt> = BTreeMap::new();
        let mut dvds: BTreeSet<Constraint> = BTreeSet::new();
        for c in &self.constraints {
            match c.normalize() {
                Norm::True => {}
                Norm::False => return None,
                Norm::Keep(c) => match c.rel {
                    Rel::Eq => {
                        if let Some(old) = eqs.get(&c.expr.coeffs) {
                            if old != &c.expr.constant {
                                return None;
                            }
                        }
                        eqs.insert(c.expr.coeffs, c.expr.constant);
                    }
                    Rel::Le => {
                        let slot = les
                            .entry(c.expr.coeffs)
                            .or_insert_with(|| c.expr.constant.clone());
                        if *slot < c.expr.constant {
                            *slot = c.expr.constant;
                        }
                    }
                    Rel::Dvd(_) => {
                        dvds.insert(c);
                    }
                },
            }
        }
        // opposing pairs  L + a <= 0  and  -L + b <= 0  ->  -b <= L <= -a
        let keys: Vec<_> = les.keys().cloned().collect();
        for key in keys {
            let Some(a) = les.get(&key).cloned() else {
                continue;
            };
            let neg: BTreeMap<Var, BigInt> = key.iter().map(|(v, c)| (v.clone(), -c)).collect();
            let Some(b) = les.get(&neg).cloned() else {
                continue;
            };
            // L <= -a and L >= b
            if b > -&a {
                return None;
            }
            if b == -&a {
                les.remove(&key);
                les.remove(&neg);
                let c = Constraint {
                    expr: LinExpr {
                        coeffs: key,
                        constant: a,
                    },
                    rel: Rel::Eq,
                };
                match c.normalize() {
                    Norm::Keep(c) => {
                        if let Some(old) = eqs.get(&c.expr.coeffs) {
                            if old != &c.expr.constant {
                                return None;
                            }
                        }
                        eqs.insert(c.expr.coeffs, c.expr.constant);
                    }
                    Norm::False => return None,
                    Norm::True => {}
                }
            }
        }
        // inequalities implied or contradicted by an equality on the same linear part
        let mut out = Vec::new();
        for (coeffs, constant) in &eqs {
            let neg: BTreeMap<Var, BigInt> = coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect();
            // L + k = 0 ; L + a <= 0 holds iff a <= k
            if let Some(a) = les.get(coeffs) {
                if a > constant {
                    return None;
                }
                les.remove(coeffs);
            }
            // -L + b <= 0 holds iff b <= -k
            if let Some(b) = les.get(&neg) {
                if *b > -constant {
                    return None;
                }
                les.remove(&neg);
            }
            out.push(Constraint {
                expr: LinExpr {
                    coeffs: coeffs.clone(),
                    constant: constant.clone(),
                },
                rel: Rel::Eq,
            });
        }
        for (coeffs, constant) in les {
            out.push(Constraint {
                expr: LinExpr { coeffs, constant },
                rel: Rel::Le,
            });
        }
        out.extend(dvds);
        out.sort();
        Some(Conj::new(out))
    }
}

impl fmt::Display for Conj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constraints.is_empty() {
            return write!(f, "true");
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Least common multiple of a set of positive integers (1 for the empty set).
pub fn lcm_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(&x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> LinExpr {
        LinExpr::var(s)
    }

    fn k(c: i64) -> LinExpr {
        LinExpr::constant(c)
    }

    #[test]
    fn le_normalization_rounds_towards_feasible_side() {
        // 2x <= 3  ->  x <= 1
        let c = Constraint::le(v("x").scaled(&2.into()), k(3));
        match c.normalize() {
            Norm::Keep(c) => assert_eq!(c.to_string(), "x <= 1"),
            other => panic!("{other:?}"),
        }
        // -2x <= -3  ->  x >= 2
        let c = Constraint::le(k(3), v("x").scaled(&2.into()));
        match c.normalize() {
            Norm::Keep(c) => assert_eq!(c.to_string(), "2 <= x"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ground_constraints_decide() {
        assert_eq!(Constraint::lt(k(1), k(1)).normalize(), Norm::False);
        assert_eq!(Constraint::le(k(1), k(1)).normalize(), Norm::True);
        assert_eq!(
            Constraint::congruent(k(4), k(0), 2.into()).normalize(),
            Norm::True
        );
        // 2x = 3 has no integer solution
        assert_eq!(
            Constraint::eq(v("x").scaled(&2.into()), k(3)).normalize(),
            Norm::False
        );
    }

    #[test]
    fn congruence_normalization() {
        // 2x + 4 = 0 mod 6  ->  x + 2 = 0 mod 3  ->  printed with x + 2 on the left
        let c = Constraint::congruent(
            v("x").scaled(&2.into()).add_constant(&4.into()),
            k(0),
            6.into(),
        );
        match c.normalize() {
            Norm::Keep(c) => assert_eq!(c.rel, Rel::Dvd(3.into())),
            other => panic!("{other:?}"),
        }
        // 2x + 1 = 0 mod 4 is unsatisfiable
        let c = Constraint::congruent(
            v("x").scaled(&2.into()).add_constant(&1.into()),
            k(0),
            4.into(),
        );
        assert_eq!(c.normalize(), Norm::False);
    }

    #[test]
    fn opposing_inequalities_become_equality() {
        let conj = Conj::new(vec![
            Constraint::le(v("x"), v("y")),
            Constraint::le(v("y"), v("x")),
        ]);
        let s = conj.simplify().unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.constraints[0].rel, Rel::Eq);
    }

    #[test]
    fn contradictory_bounds_are_detected() {
        let conj = Conj::new(vec![
            Constraint::lt(v("x"), k(0)),
            Constraint::le(k(0), v("x")),
        ]);
        assert!(conj.simplify().is_none());
    }

    #[test]
    fn display_prefers_strict_form() {
        // t + 1 <= z  prints as  t < z
        let c = Constraint::lt(v("t"), v("z"));
        assert_eq!(c.to_string(), "t < z");
    }

    #[test]
    fn negation_of_equality_is_two_sided() {
        let c = Constraint::eq(v("x"), k(2));
        let n = c.negate();
        assert_eq!(n.len(), 2);
        let at = |x: i64| move |_: &str| Some(BigInt::from(x));
        for x in -3..6 {
            let direct = c.eval(&at(x)).unwrap();
            let negated = n.iter().any(|d| d.eval(&at(x)).unwrap());
            assert_eq!(direct, !negated);
        }
    }

    #[test]
    fn atom_key_identifies_negations() {
        let c = Constraint::lt(v("t"), v("z"));
        let n = c.negate().pop().unwrap();
        let (k1, p1) = c.atom_key();
        let (k2, p2) = n.atom_key();
        assert_eq!(k1, k2);
        assert_ne!(p1, p2);
    }
}
