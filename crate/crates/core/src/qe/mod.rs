//! Quantifier elimination for linear integer arithmetic with congruences.
//!
//! `∃x. C` for a conjunction `C` is computed exactly by (in order of
//! preference) unit-coefficient substitution, elimination through a
//! non-unit equality, the exact integer shadow (Fourier–Motzkin restricted to
//! bound pairs where one coefficient is 1) and finally Cooper's method.
//! [`fm_real`] is the real relaxation: sound as an over-approximation but it
//! forgets integrality and congruences.

pub mod linear;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub use linear::{lcm_all, Conj, Constraint, LinExpr, Norm, Rel, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Always exact.
    Exact,
    /// Exact, unless a Cooper step produces more than the given number of
    /// atoms; then the real shadow is used and the result is flagged inexact.
    RelaxOnBudget(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QeError {
    #[error("quantifier elimination of `{var}` produced {size} atoms, over the budget of {limit} (rerun with relaxation enabled to fall back to the real shadow)")]
    BudgetExceeded {
        var: String,
        size: usize,
        limit: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QeStats {
    pub substitutions: u64,
    pub zero_forced: u64,
    pub equality_scaled: u64,
    pub exact_shadow: u64,
    pub cooper: u64,
    pub relaxed: u64,
    pub max_intermediate: usize,
}

impl QeStats {
    pub fn merge(&mut self, other: &QeStats) {
        self.substitutions += other.substitutions;
        self.zero_forced += other.zero_forced;
        self.equality_scaled += other.equality_scaled;
        self.exact_shadow += other.exact_shadow;
        self.cooper += other.cooper;
        self.relaxed += other.relaxed;
        self.max_intermediate = self.max_intermediate.max(other.max_intermediate);
    }
}

fn falsity() -> Conj {
    Conj::new(vec![Constraint {
        expr: LinExpr::constant(1),
        rel: Rel::Le,
    }])
}

fn partition(x: &str, c: &Conj) -> (Vec<Constraint>, Vec<Constraint>) {
    c.constraints.iter().cloned().partition(|k| k.mentions(x))
}

/// Eliminates `x` through an equality `±x + t = 0` if one exists.
pub fn try_substitution(x: &str, c: &Conj) -> Option<Conj> {
    let eq = c
        .constraints
        .iter()
        .filter(|k| k.rel == Rel::Eq && k.coeff(x).abs().is_one())
        .min_by_key(|k| k.expr.coeffs.len())?;
    // a*x + rest = 0 with a = ±1  =>  x = -a * rest
    let a = eq.coeff(x);
    let by = eq.expr.without(x).scaled(&-a);
    let mut out = Vec::with_capacity(c.len());
    let mut skipped = false;
    for k in &c.constraints {
        if !skipped && k == eq {
            skipped = true;
            continue;
        }
        out.push(k.substitute(x, &by));
    }
    Some(Conj::new(out))
}

/// Eliminates `x` using an equality `a*x + e = 0` with `|a| > 1`:
/// every other occurrence is scaled by `|a|` and `a | e` is added.
fn eliminate_by_equality(x: &str, c: &Conj, eq: &Constraint) -> Conj {
    let a = eq.coeff(x);
    let abs_a = a.abs();
    let sign = if a.is_negative() {
        BigInt::from(-1)
    } else {
        BigInt::one()
    };
    let e = eq.expr.without(x);
    let mut out = Vec::with_capacity(c.len());
    let mut skipped = false;
    for k in &c.constraints {
        if !skipped && k == eq {
            skipped = true;
            continue;
        }
        let cx = k.coeff(x);
        if cx.is_zero() {
            out.push(k.clone());
            continue;
        }
        // |a| * (cx*x + f) with |a|*x = -sign*e
        let f = k.expr.without(x);
        let expr = e.scaled(&(-&cx * &sign)).plus(&f.scaled(&abs_a));
        let rel = match &k.rel {
            Rel::Dvd(m) => Rel::Dvd(m * &abs_a),
            r => r.clone(),
        };
        out.push(Constraint { expr, rel });
    }
    out.push(Constraint {
        expr: e,
        rel: Rel::Dvd(abs_a),
    });
    Conj::new(out)
}

/// Lower bounds (`a*x >= L`, as `-a*x + L <= 0`) and upper bounds of `x`.
fn bounds(x: &str, with: &[Constraint]) -> (Vec<Constraint>, Vec<Constraint>) {
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for k in with {
        if k.rel == Rel::Le {
            if k.coeff(x).is_negative() {
                lowers.push(k.clone());
            } else {
                uppers.push(k.clone());
            }
        }
    }
    (lowers, uppers)
}

fn shadow_is_exact(x: &str, lowers: &[Constraint], uppers: &[Constraint]) -> bool {
    let lower_unit = lowers.iter().all(|l| l.coeff(x).abs().is_one());
    let upper_unit = uppers.iter().all(|u| u.coeff(x).is_one());
    lower_unit
        || upper_unit
        || lowers
            .iter()
            .all(|l| l.coeff(x).abs().is_one() || uppers.iter().all(|u| u.coeff(x).is_one()))
}

/// Pairwise combination of bounds; `without` are the constraints not mentioning `x`.
fn combine_bounds(
    x: &str,
    lowers: &[Constraint],
    uppers: &[Constraint],
    without: Vec<Constraint>,
) -> Conj {
    let mut out = without;
    for l in lowers {
        let a = -l.coeff(x);
        for u in uppers {
            let b = u.coeff(x);
            let expr = l.expr.scaled(&b).plus(&u.expr.scaled(&a));
            debug_assert!(!expr.mentions(x));
            out.push(Constraint { expr, rel: Rel::Le });
        }
    }
    Conj::new(out)
}

/// Fourier–Motzkin projection of `x` over the reals: implied by `∃x. c` over
/// the integers, but possibly weaker. Congruences on `x` are dropped.
pub fn fm_real(x: &str, c: &Conj) -> Conj {
    let (with, without) = partition(x, c);
    let mut ineqs = Vec::new();
    for k in with {
        match k.rel {
            Rel::Le => ineqs.push(k),
            Rel::Eq => {
                ineqs.push(Constraint {
                    expr: k.expr.clone(),
                    rel: Rel::Le,
                });
                ineqs.push(Constraint {
                    expr: k.expr.scaled(&BigInt::from(-1)),
                    rel: Rel::Le,
                });
            }
            Rel::Dvd(_) => {}
        }
    }
    let (lowers, uppers) = bounds(x, &ineqs);
    match combine_bounds(x, &lowers, &uppers, without).simplify() {
        Some(s) => s,
        None => falsity(),
    }
}

/// Exact elimination of `x` from `c`; the result is a disjunction.
///
/// Uses the cheapest exact route available: substitution, a non-unit
/// equality, the exact shadow, or the full Cooper expansion.
pub fn cooper(x: &str, c: &Conj) -> Vec<Conj> {
    let mut stats = QeStats::default();
    exact_step(x, c, &mut stats)
}

fn exact_step(x: &str, c: &Conj, stats: &mut QeStats) -> Vec<Conj> {
    if !c.mentions(x) {
        return simplified(vec![c.clone()]);
    }
    if let Some(r) = try_substitution(x, c) {
        stats.substitutions += 1;
        return simplified(vec![r]);
    }
    if let Some(eq) = c
        .constraints
        .iter()
        .filter(|k| k.rel == Rel::Eq && k.mentions(x))
        .min_by_key(|k| k.coeff(x).abs())
    {
        stats.equality_scaled += 1;
        return simplified(vec![eliminate_by_equality(x, c, eq)]);
    }
    let (with, without) = partition(x, c);
    let has_dvd = with.iter().any(|k| matches!(k.rel, Rel::Dvd(_)));
    let (lowers, uppers) = bounds(x, &with);
    if !has_dvd && shadow_is_exact(x, &lowers, &uppers) {
        stats.exact_shadow += 1;
        return simplified(vec![combine_bounds(x, &lowers, &uppers, without)]);
    }
    stats.cooper += 1;
    cooper_full(x, c)
}

/// Cooper's method proper, with no shortcuts other than the unit-equality
/// substitution that follows from coefficient normalization.
pub fn cooper_full(x: &str, c: &Conj) -> Vec<Conj> {
    let (with, without) = partition(x, c);
    if with.is_empty() {
        return simplified(vec![c.clone()]);
    }
    let l = lcm_all(
        with.iter()
            .map(|k| k.expr.coeffs.get(x).expect("mentions x")),
    );
    // Scale so that every coefficient of x is ±l, then read l*x as a fresh x.
    let mut scaled = Vec::with_capacity(with.len() + 1);
    for k in &with {
        let cx = k.coeff(x);
        let factor = &l / cx.abs();
        let mut expr = k.expr.scaled(&factor);
        expr.coeffs.insert(
            x.to_string(),
            if cx.is_negative() {
                -BigInt::one()
            } else {
                BigInt::one()
            },
        );
        let rel = match &k.rel {
            Rel::Dvd(m) => Rel::Dvd(m * &factor),
            r => r.clone(),
        };
        scaled.push(Constraint { expr, rel });
    }
    if !l.is_one() {
        scaled.push(Constraint {
            expr: LinExpr::var(x),
            rel: Rel::Dvd(l.clone()),
        });
    }
    let unit = Conj::new(
        scaled
            .iter()
            .cloned()
            .chain(without.iter().cloned())
            .collect(),
    );
    if let Some(r) = try_substitution(x, &unit) {
        return simplified(vec![r]);
    }
    let (lowers, uppers) = bounds(x, &scaled);
    let dvds: Vec<&Constraint> = scaled
        .iter()
        .filter(|k| matches!(k.rel, Rel::Dvd(_)))
        .collect();
    let period = lcm_all(dvds.iter().map(|k| match &k.rel {
        Rel::Dvd(m) => m,
        _ => unreachable!(),
    }));
    let period = period.to_u64().expect("congruence period fits in u64");

    let mut out = Vec::new();
    if lowers.is_empty() || uppers.is_empty() {
        // x at -inf (or +inf): every bound on that side is satisfied, only the
        // congruences constrain x, and they are periodic.
        for j in 0..period {
            let at = LinExpr::constant(j);
            let mut conj = without.clone();
            conj.extend(dvds.iter().map(|k| k.substitute(x, &at)));
            out.push(Conj::new(conj));
        }
        return simplified(out);
    }
    // Witnesses from the smaller side.
    let from_lower = lowers.len() <= uppers.len();
    let witnesses: Vec<LinExpr> = if from_lower {
        // -x + L <= 0  =>  x >= L
        lowers.iter().map(|k| k.expr.without(x)).collect()
    } else {
        // x + U <= 0  =>  x <= -U
        uppers
            .iter()
            .map(|k| k.expr.without(x).scaled(&BigInt::from(-1)))
            .collect()
    };
    for j in 0..period {
        let shift = if from_lower {
            BigInt::from(j)
        } else {
            -BigInt::from(j)
        };
        for w in &witnesses {
            let at = w.add_constant(&shift);
            out.push(unit.substitute(x, &at));
        }
    }
    simplified(out)
}

fn simplified(cs: Vec<Conj>) -> Vec<Conj> {
    let set: BTreeSet<Conj> = cs.into_iter().filter_map(|c| c.simplify()).collect();
    set.into_iter().collect()
}

fn dnf_size(d: &[Conj]) -> usize {
    d.iter().map(|c| c.len()).sum()
}

/// Eliminates a single variable under `policy`; the flag is `false` when the
/// result is a relaxation.
pub fn eliminate_int_var(x: &str, c: &Conj, policy: Policy) -> (Vec<Conj>, bool) {
    if let Some(r) = try_substitution(x, c) {
        return (simplified(vec![r]), true);
    }
    let exact = cooper(x, c);
    match policy {
        Policy::Exact => (exact, true),
        Policy::RelaxOnBudget(limit) => {
            if dnf_size(&exact) > limit {
                (simplified(vec![fm_real(x, c)]), false)
            } else {
                (exact, true)
            }
        }
    }
}

/// Multi-variable elimination with the documented ordering heuristic.
#[derive(Clone, Debug)]
pub struct Eliminator {
    pub policy: Policy,
    /// Hard cap on the atom count of any intermediate disjunction under the
    /// exact policy (`None` = unbounded).
    pub budget: Option<usize>,
    pub stats: QeStats,
    pub exact: bool,
}

enum Step {
    ZeroForce(Vec<Var>),
    Substitute(Var),
    Equality(Var),
    Shadow(Var),
    Cooper(Var),
}

impl Eliminator {
    pub fn new(policy: Policy) -> Self {
        Eliminator {
            policy,
            budget: None,
            stats: QeStats::default(),
            exact: true,
        }
    }

    pub fn with_budget(mut self, budget: Option<usize>) -> Self {
        self.budget = budget;
        self
    }

    /// `∃ vars. c` as a disjunction of conjunctions over the remaining symbols.
    pub fn eliminate_block(
        &mut self,
        vars: &BTreeSet<Var>,
        c: &Conj,
    ) -> Result<Vec<Conj>, QeError> {
        let mut done: BTreeSet<Conj> = BTreeSet::new();
        let mut work: Vec<Conj> = c.simplify().into_iter().collect();
        while let Some(conj) = work.pop() {
            match self.step(vars, &conj)? {
                None => {
                    done.insert(conj);
                }
                Some(results) => work.extend(results),
            }
        }
        Ok(done.into_iter().collect())
    }

    /// One elimination step on `conj`, or `None` if no block variable is left.
    fn step(&mut self, vars: &BTreeSet<Var>, conj: &Conj) -> Result<Option<Vec<Conj>>, QeError> {
        let present: BTreeSet<&Var> = conj
            .vars()
            .into_iter()
            .filter_map(|v| vars.get(&v))
            .collect();
        if present.is_empty() {
            return Ok(None);
        }
        let results = match choose_step(conj, &present) {
            Step::ZeroForce(zs) => {
                self.stats.zero_forced += zs.len() as u64;
                let zero = LinExpr::zero();
                let mut r = conj.clone();
                for z in &zs {
                    r = r.substitute(z, &zero);
                }
                simplified(vec![r])
            }
            Step::Substitute(x) => {
                self.stats.substitutions += 1;
                simplified(vec![try_substitution(&x, conj).expect("unit equality")])
            }
            Step::Equality(x) | Step::Shadow(x) | Step::Cooper(x) => {
                let r = exact_step(&x, conj, &mut self.stats);
                let size = dnf_size(&r);
                match self.policy {
                    Policy::RelaxOnBudget(limit) if size > limit => {
                        self.stats.relaxed += 1;
                        self.exact = false;
                        simplified(vec![fm_real(&x, conj)])
                    }
                    _ => {
                        if let Some(limit) = self.budget {
                            if size > limit {
                                return Err(QeError::BudgetExceeded {
                                    var: x,
                                    size,
                                    limit,
                                });
                            }
                        }
                        r
                    }
                }
            }
        };
        for r in &results {
            self.stats.max_intermediate = self.stats.max_intermediate.max(r.len());
        }
        Ok(Some(results))
    }
}

/// Variables that some single-variable constraint bounds below by 0 or more.
fn known_nonneg(conj: &Conj) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for k in &conj.constraints {
        if k.rel == Rel::Le && k.expr.coeffs.len() == 1 {
            let (v, c) = k.expr.coeffs.iter().next().unwrap();
            // c*v + k <= 0 with c < 0  =>  v >= k/|c|
            if c.is_negative() && !k.expr.constant.is_negative() {
                out.insert(v.clone());
            }
        }
    }
    out
}

fn choose_step(conj: &Conj, present: &BTreeSet<&Var>) -> Step {
    // 1. zero-forced: sum of same-signed nonnegative block variables equal to 0
    let nonneg = known_nonneg(conj);
    for k in &conj.constraints {
        if k.rel == Rel::Eq
            && k.expr.constant.is_zero()
            && !k.expr.coeffs.is_empty()
            && k.expr
                .coeffs
                .keys()
                .all(|v| present.contains(v) && nonneg.contains(v))
        {
            let signs: BTreeSet<bool> = k.expr.coeffs.values().map(|c| c.is_positive()).collect();
            if signs.len() == 1 {
                return Step::ZeroForce(k.expr.coeffs.keys().cloned().collect());
            }
        }
    }
    // 2. unit-coefficient equality, shortest first
    let mut best: Option<(usize, &Var)> = None;
    for k in &conj.constraints {
        if k.rel != Rel::Eq {
            continue;
        }
        for (v, c) in &k.expr.coeffs {
            if c.abs().is_one() && present.contains(v) {
                let cand = (k.expr.coeffs.len(), v);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
    }
    if let Some((_, v)) = best {
        return Step::Substitute(v.clone());
    }
    // 3. any equality on a block variable
    for k in &conj.constraints {
        if k.rel == Rel::Eq {
            if let Some(v) = k.expr.coeffs.keys().find(|v| present.contains(v)) {
                return Step::Equality(v.clone());
            }
        }
    }
    // 4. exact shadow, smallest growth first; 5. Cooper, fewest occurrences first
    let mut shadow: Option<(i64, &Var)> = None;
    let mut coop: Option<(usize, &Var)> = None;
    for v in present {
        let with: Vec<Constraint> = conj
            .constraints
            .iter()
            .filter(|k| k.mentions(v))
            .cloned()
            .collect();
        let has_dvd = with.iter().any(|k| matches!(k.rel, Rel::Dvd(_)));
        let (lo, up) = bounds(v, &with);
        if !has_dvd && shadow_is_exact(v, &lo, &up) {
            let growth = (lo.len() * up.len()) as i64 - (lo.len() + up.len()) as i64;
            if shadow.is_none_or(|s| (growth, *v) < (s.0, s.1)) {
                shadow = Some((growth, v));
            }
        }
        let occ = with.len();
        if coop.is_none_or(|c| (occ, *v) < (c.0, c.1)) {
            coop = Some((occ, v));
        }
    }
    if let Some((_, v)) = shadow {
        return Step::Shadow(v.clone());
    }
    Step::Cooper(coop.expect("present is nonempty").1.clone())
}

/// Exact satisfiability by eliminating every variable, depth first,
/// stopping at the first satisfiable branch. `None` if the budget (on
/// intermediate size, and on the number of steps) runs out first.
pub fn is_satisfiable(c: &Conj, budget: Option<usize>) -> Option<bool> {
    let vars = c.vars();
    let mut elim = Eliminator::new(Policy::Exact).with_budget(budget);
    let mut work: Vec<Conj> = c.simplify().into_iter().collect();
    let mut steps = 0usize;
    while let Some(conj) = work.pop() {
        steps += 1;
        if budget.is_some_and(|b| steps > b) {
            return None;
        }
        match elim.step(&vars, &conj).ok()? {
            None => {
                if conj.eval(&|_| None) == Some(true) {
                    return Some(true);
                }
            }
            Some(results) => work.extend(results),
        }
    }
    Some(false)
}

/// Integer bound (exclusive of period slack) on every constant in a ground
/// comparison, for use by brute-force checks.
pub fn max_abs_constant(c: &Conj) -> BigInt {
    c.constraints
        .iter()
        .map(|k| k.expr.constant.abs())
        .max()
        .unwrap_or_default()
}

/// Evaluates a disjunction of conjunctions.
pub fn eval_dnf(d: &[Conj], val: &dyn Fn(&str) -> Option<BigInt>) -> Option<bool> {
    for c in d {
        if c.eval(val)? {
            return Some(true);
        }
    }
    Some(false)
}

/// floor(a / b) for b > 0.
pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
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
    fn show(d: &[Conj]) -> Vec<String> {
        d.iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn substitution_removes_unit_equality() {
        // {x = z00 + z10, x >= 0} -> {0 <= z00 + z10}
        let c = Conj::new(vec![
            Constraint::eq(v("x"), v("z00").plus(&v("z10"))),
            Constraint::le(k(0), v("x")),
        ]);
        let r = try_substitution("x", &c).unwrap().simplify().unwrap();
        assert_eq!(r.to_string(), "0 <= z00 + z10");
    }

    #[test]
    fn substitution_needs_unit_coefficient() {
        let c = Conj::new(vec![Constraint::eq(v("x").scaled(&2.into()), v("y"))]);
        assert!(try_substitution("x", &c).is_none());
    }

    #[test]
    fn substitution_on_counter_partition() {
        // {z01 = 0, N = z00 + z01 + zb0}  eliminate z01  ->  {N = z00 + zb0}
        let c = Conj::new(vec![
            Constraint::eq(v("z01"), k(0)),
            Constraint::eq(v("N"), v("z00").plus(&v("z01")).plus(&v("zb0"))),
        ]);
        let r = try_substitution("z01", &c).unwrap().simplify().unwrap();
        let expect = Conj::new(vec![Constraint::eq(v("N"), v("z00").plus(&v("zb0")))])
            .simplify()
            .unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn cooper_integer_gap() {
        // ∃x (y < x ∧ x < z)  ->  y + 2 <= z
        let c = Conj::new(vec![
            Constraint::lt(v("y"), v("x")),
            Constraint::lt(v("x"), v("z")),
        ]);
        let r = cooper("x", &c);
        assert_eq!(show(&r), vec!["y + 2 <= z"]);
        let r = cooper_full("x", &c);
        assert_eq!(show(&r), vec!["y + 2 <= z"]);
    }

    #[test]
    fn cooper_parity() {
        // ∃x (2x = y)  ->  y ≡ 0 (mod 2)
        let c = Conj::new(vec![Constraint::eq(v("x").scaled(&2.into()), v("y"))]);
        let r = cooper("x", &c);
        assert_eq!(r.len(), 1);
        assert_eq!(
            r[0].constraints,
            vec![Constraint {
                expr: v("y"),
                rel: Rel::Dvd(2.into())
            }]
        );
        let r = cooper_full("x", &c);
        assert_eq!(
            r[0].constraints,
            vec![Constraint {
                expr: v("y"),
                rel: Rel::Dvd(2.into())
            }]
        );
    }

    #[test]
    fn fm_real_interval_shadow() {
        let c = Conj::new(vec![
            Constraint::le(v("x").scaled(&2.into()), v("z")),
            Constraint::le(v("y"), v("x").scaled(&2.into())),
        ]);
        assert_eq!(fm_real("x", &c).to_string(), "y <= z");
    }

    #[test]
    fn fm_real_loses_parity() {
        let c = Conj::new(vec![Constraint::eq(v("x").scaled(&2.into()), v("y"))]);
        assert!(fm_real("x", &c).is_empty());
    }

    #[test]
    fn dispatch_policies() {
        let sub = Conj::new(vec![
            Constraint::eq(v("x"), v("y")),
            Constraint::le(k(0), v("x")),
        ]);
        let (r, exact) = eliminate_int_var("x", &sub, Policy::RelaxOnBudget(0));
        assert!(exact);
        assert_eq!(r, simplified(vec![try_substitution("x", &sub).unwrap()]));

        let parity = Conj::new(vec![Constraint::eq(v("x").scaled(&2.into()), v("y"))]);
        let (r, exact) = eliminate_int_var("x", &parity, Policy::Exact);
        assert!(exact);
        assert!(matches!(r[0].constraints[0].rel, Rel::Dvd(_)));

        let (r, exact) = eliminate_int_var("x", &parity, Policy::RelaxOnBudget(0));
        assert!(!exact);
        assert_eq!(r.len(), 1);
        assert!(r[0].is_empty());
    }

    #[test]
    fn block_elimination_interval_projection() {
        // ∃u,v,w (z = u+v ∧ u,v,w >= 0 ∧ u+v+w = N)  ->  0 <= z <= N
        let c = Conj::new(vec![
            Constraint::eq(v("z"), v("u").plus(&v("v"))),
            Constraint::nonneg("u"),
            Constraint::nonneg("v"),
            Constraint::nonneg("w"),
            Constraint::eq(v("u").plus(&v("v")).plus(&v("w")), v("N")),
        ]);
        let vars: BTreeSet<Var> = ["u", "v", "w"].iter().map(|s| s.to_string()).collect();
        let mut e = Eliminator::new(Policy::Exact);
        let r = e.eliminate_block(&vars, &c).unwrap();
        assert_eq!(r.len(), 1);
        let mut atoms: Vec<String> = r[0].constraints.iter().map(|c| c.to_string()).collect();
        atoms.sort();
        assert_eq!(atoms, vec!["0 <= z", "z <= N"]);
    }

    #[test]
    fn zero_forcing() {
        // a + b = 0, a,b >= 0  ->  a = b = 0
        let c = Conj::new(vec![
            Constraint::eq(v("a").plus(&v("b")), k(0)),
            Constraint::nonneg("a"),
            Constraint::nonneg("b"),
            Constraint::le(v("a").plus(&v("y")), k(3)),
        ]);
        let vars: BTreeSet<Var> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let mut e = Eliminator::new(Policy::Exact);
        let r = e.eliminate_block(&vars, &c).unwrap();
        assert_eq!(show(&r), vec!["y <= 3"]);
        assert_eq!(e.stats.zero_forced, 2);
    }

    #[test]
    fn satisfiability() {
        let c = Conj::new(vec![
            Constraint::eq(v("x").scaled(&2.into()), v("y")),
            Constraint::eq(v("y"), k(3)),
        ]);
        assert_eq!(is_satisfiable(&c, None), Some(false));
        let c = Conj::new(vec![Constraint::lt(v("x"), v("y"))]);
        assert_eq!(is_satisfiable(&c, None), Some(true));
    }
}
