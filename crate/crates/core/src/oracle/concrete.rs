//! Explicit configurations of a specification at a fixed process count, and
//! their successors.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::logic::{
    eval, eval_term, free_symbols, ConcreteState, Env, Formula, FreeSym, Model, StatePair, Sym,
    SymKind, Term,
};
use crate::spec::{ArrayKind, SystemSpec};

use super::OracleError;

/// Value ranges for the infinite parts of a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Inclusive range of arithmetic array entries.
    pub arith: (i64, i64),
    /// Values tried for (non-boolean) integer variables.
    pub intvars: Vec<i64>,
    /// Inclusive range of parameters other than `N`.
    pub params: (i64, i64),
    /// Cap on enumerated configurations (and on successors of one state).
    pub state_budget: usize,
}

impl Bounds {
    /// Arithmetic entries and extra parameters in `[0, N]`; integer
    /// variables over the numerals of the specification plus 0 and 1.
    pub fn for_spec(spec: &SystemSpec, n: usize) -> Bounds {
        let mut nums: BTreeSet<i64> = [0, 1].into_iter().collect();
        let mut collect = |f: &Formula| {
            f.map_terms(&mut |t| {
                if let Term::Num(k) = t {
                    if let Some(k) = k.to_i64() {
                        nums.insert(k);
                    }
                }
                None
            });
        };
        for c in &spec.invariant {
            collect(&c.body);
        }
        collect(&spec.init.body);
        for c in &spec.trans {
            collect(&c.body);
        }
        collect(&spec.unsafe_);
        Bounds {
            arith: (0, n as i64),
            intvars: nums.into_iter().collect(),
            params: (0, n as i64),
            state_budget: 10_000_000,
        }
    }
}

#[derive(Clone, Debug)]
struct Slot {
    array: String,
    domain: Vec<i64>,
}

/// Enumerates configurations and transitions of one specification at one
/// process count.
///
/// Arithmetic arrays that are never read unprimed are not part of the
/// state: their post values only serve as per-process witnesses of a step.
pub struct Explorer<'a> {
    spec: &'a SystemSpec,
    n: usize,
    bounds: Bounds,
    state_arrays: Vec<Slot>,
    witness_arrays: Vec<Slot>,
    phi: Formula,
    init: Formula,
    proc_var: String,
    step: Formula,
    /// Cardinalities over primed arrays occurring in a step, with the
    /// symbol that stands for their guessed value.
    primed_cards: Vec<(Term, Sym)>,
    /// Primed integer variables and counters, guessed before the
    /// per-process choices are made.
    guessed: Vec<(Sym, Vec<i64>)>,
}

impl<'a> Explorer<'a> {
    pub fn new(spec: &'a SystemSpec, n: usize, bounds: Bounds) -> Result<Self, OracleError> {
        if n == 0 {
            return Err(OracleError::InvalidProcessCount);
        }
        let mut read_unprimed = BTreeSet::new();
        let mut formulas: Vec<&Formula> = vec![&spec.init.body, &spec.unsafe_];
        formulas.extend(spec.invariant.iter().map(|c| &c.body));
        formulas.extend(spec.trans.iter().map(|c| &c.body));
        formulas.extend(spec.counters.iter().map(|c| &c.body));
        for f in formulas {
            for s in free_symbols(f) {
                if let FreeSym::Array {
                    name,
                    primed: false,
                } = s
                {
                    read_unprimed.insert(name);
                }
            }
        }
        let mut state_arrays = Vec::new();
        let mut witness_arrays = Vec::new();
        for a in &spec.arrays {
            match a.kind {
                ArrayKind::Enumerated(s) => state_arrays.push(Slot {
                    array: a.name.clone(),
                    domain: (0..spec.sorts[s].values.len() as i64).collect(),
                }),
                ArrayKind::Arithmetic => {
                    let slot = Slot {
                        array: a.name.clone(),
                        domain: (bounds.arith.0..=bounds.arith.1).collect(),
                    };
                    if read_unprimed.contains(&a.name) {
                        state_arrays.push(slot);
                    } else {
                        witness_arrays.push(slot);
                    }
                }
            }
        }

        let (proc_var, step) = match spec.trans_formula() {
            Formula::Forall(v, body) => (v, *body),
            other => ("x".to_string(), other),
        };
        let mut primed_cards: Vec<(Term, Sym)> = Vec::new();
        step.map_terms(&mut |t| {
            if let Term::Card { body, .. } = t {
                let primed = free_symbols(body)
                    .iter()
                    .any(|s| matches!(s, FreeSym::Array { primed: true, .. }));
                if primed && !primed_cards.iter().any(|(c, _)| c == t) {
                    let sym = Sym::new(format!("_card{}", primed_cards.len()), SymKind::Local);
                    primed_cards.push((t.clone(), sym));
                }
            }
            None
        });
        let n_range: Vec<i64> = (0..=n as i64).collect();
        let mut guessed: Vec<(Sym, Vec<i64>)> = spec
            .int_vars
            .iter()
            .map(|v| {
                let dom = if v.boolean {
                    vec![0, 1]
                } else {
                    bounds.intvars.clone()
                };
                (Sym::new(v.name.clone(), SymKind::IntVar).primed(), dom)
            })
            .collect();
        for s in free_symbols(&step) {
            if let FreeSym::Int(s) = s {
                if s.primed && s.kind == SymKind::Counter {
                    guessed.push((s, n_range.clone()));
                }
            }
        }
        for (_, s) in &primed_cards {
            guessed.push((s.clone(), n_range.clone()));
        }
        Ok(Explorer {
            spec,
            n,
            bounds,
            state_arrays,
            witness_arrays,
            phi: spec.invariant_formula(),
            init: spec.init.formula(),
            proc_var,
            step,
            primed_cards,
            guessed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// How the infinite parts of the state were bounded.
    pub fn notes(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.witness_arrays.is_empty() {
            let names: Vec<&str> = self
                .witness_arrays
                .iter()
                .map(|s| s.array.as_str())
                .collect();
            out.push(format!(
                "{} only occur primed: not part of the state, post values range over [{}, {}] per process",
                names.join(", "),
                self.bounds.arith.0,
                self.bounds.arith.1
            ));
        }
        for s in &self.state_arrays {
            if self.spec.sort_of(&s.array).is_none() {
                out.push(format!(
                    "warning: arithmetic array {} is part of the state and bounded to [{}, {}]; results only cover that range",
                    s.array, self.bounds.arith.0, self.bounds.arith.1
                ));
            }
        }
        if self.spec.int_vars.iter().any(|v| !v.boolean) {
            out.push(format!(
                "integer variables range over {:?}",
                self.bounds.intvars
            ));
        }
        out
    }

    /// Every configuration within bounds, in a fixed order; with
    /// `only_invariant` just those satisfying the invariant.
    pub fn states(&self, only_invariant: bool) -> Result<Vec<ConcreteState>, OracleError> {
        let mut radices: Vec<usize> = Vec::new();
        let extra_params: Vec<&String> = self
            .spec
            .params
            .iter()
            .filter(|p| p.as_str() != "N")
            .collect();
        let prange: Vec<i64> = (self.bounds.params.0..=self.bounds.params.1).collect();
        radices.extend(extra_params.iter().map(|_| prange.len()));
        let ivars: Vec<Vec<i64>> = self
            .spec
            .int_vars
            .iter()
            .map(|v| {
                if v.boolean {
                    vec![0, 1]
                } else {
                    self.bounds.intvars.clone()
                }
            })
            .collect();
        radices.extend(ivars.iter().map(|d| d.len()));
        for s in &self.state_arrays {
            radices.extend(std::iter::repeat_n(s.domain.len(), self.n));
        }
        let total = radices
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r));
        match total {
            Some(t) if t <= self.bounds.state_budget => {}
            _ => {
                return Err(OracleError::StateBudgetExceeded {
                    limit: self.bounds.state_budget,
                })
            }
        }
        let mut out = Vec::new();
        for digits in Odometer::new(radices) {
            let mut s = ConcreteState::new(self.n);
            let mut d = digits.iter();
            for p in &extra_params {
                s.params.insert((*p).clone(), prange[*d.next().unwrap()]);
            }
            for (v, dom) in self.spec.int_vars.iter().zip(&ivars) {
                s.ints.insert(v.name.clone(), dom[*d.next().unwrap()]);
            }
            for slot in &self.state_arrays {
                let vals = (0..self.n)
                    .map(|_| slot.domain[*d.next().unwrap()])
                    .collect();
                s.arrays.insert(slot.array.clone(), vals);
            }
            self.fill_counters(&mut s)?;
            if !only_invariant || self.holds(&self.phi, &s)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    pub fn is_initial(&self, s: &ConcreteState) -> Result<bool, OracleError> {
        self.holds(&self.init, s)
    }

    pub fn satisfies_invariant(&self, s: &ConcreteState) -> Result<bool, OracleError> {
        self.holds(&self.phi, s)
    }

    fn holds(&self, f: &Formula, s: &ConcreteState) -> Result<bool, OracleError> {
        let env = self.local_env(s, Env::default());
        Ok(eval(f, s, &env)?)
    }

    /// Binds the floor-division locals whose definitions can be evaluated.
    fn local_env(&self, m: &dyn Model, mut env: Env) -> Env {
        for l in &self.spec.locals {
            if let Ok(v) = eval_term(&l.numerator, m, &env) {
                env.ints.insert(l.sym(), v.div_floor(&l.divisor));
            }
        }
        env
    }

    fn fill_counters(&self, s: &mut ConcreteState) -> Result<(), OracleError> {
        for c in &self.spec.counters {
            let mut env = Env::default();
            let mut count = 0;
            for i in 0..self.n {
                env.procs.insert(c.var.clone(), i);
                if eval(&c.body, &*s, &env)? {
                    count += 1;
                }
            }
            s.ints.insert(c.name.clone(), count);
        }
        Ok(())
    }

    /// All successors of `s` that satisfy the invariant.
    pub fn successors(&self, s: &ConcreteState) -> Result<Vec<ConcreteState>, OracleError> {
        // cardinalities over the pre-state are constants of this step
        let mut err = None;
        let step = self.step.map_terms(&mut |t| match t {
            Term::Card { .. } => {
                if let Some((_, sym)) = self.primed_cards.iter().find(|(c, _)| c == t) {
                    return Some(Term::Sym(sym.clone()));
                }
                match eval_term(t, s, &Env::default()) {
                    Ok(v) => Some(Term::Num(v)),
                    Err(e) => {
                        err.get_or_insert(e);
                        None
                    }
                }
            }
            _ => None,
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        let slots: Vec<&Slot> = self
            .state_arrays
            .iter()
            .chain(&self.witness_arrays)
            .collect();
        let kept = self.state_arrays.len();
        let mut out = Vec::new();
        let radices = self.guessed.iter().map(|(_, d)| d.len()).collect();
        for g in Odometer::new(radices) {
            let mut env = Env::default();
            for ((sym, dom), &i) in self.guessed.iter().zip(&g) {
                env.ints.insert(sym.clone(), BigInt::from(dom[i]));
            }
            let env = self.local_env(
                &StepModel {
                    pre: s,
                    proc: usize::MAX,
                    post: &[],
                },
                env,
            );

            let mut options: Vec<Vec<Vec<i64>>> = Vec::with_capacity(self.n);
            for p in 0..self.n {
                let mut env = env.clone();
                env.procs.insert(self.proc_var.clone(), p);
                let mut opts: Vec<Vec<i64>> = Vec::new();
                for digits in Odometer::new(slots.iter().map(|s| s.domain.len()).collect()) {
                    let post: Vec<(&str, i64)> = slots
                        .iter()
                        .zip(&digits)
                        .map(|(s, &d)| (s.array.as_str(), s.domain[d]))
                        .collect();
                    let m = StepModel {
                        pre: s,
                        proc: p,
                        post: &post,
                    };
                    if eval(&step, &m, &env)? {
                        let v: Vec<i64> = post[..kept].iter().map(|x| x.1).collect();
                        if !opts.contains(&v) {
                            opts.push(v);
                        }
                    }
                }
                if opts.is_empty() {
                    break;
                }
                options.push(opts);
            }
            if options.len() < self.n {
                continue;
            }
            let combos = options
                .iter()
                .try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
            if combos.is_none_or(|c| c > self.bounds.state_budget) {
                return Err(OracleError::StateBudgetExceeded {
                    limit: self.bounds.state_budget,
                });
            }
            for pick in Odometer::new(options.iter().map(|o| o.len()).collect()) {
                let mut post = ConcreteState {
                    n: self.n,
                    params: s.params.clone(),
                    ints: BTreeMap::new(),
                    arrays: BTreeMap::new(),
                };
                for (k, slot) in self.state_arrays.iter().enumerate() {
                    let vals = (0..self.n).map(|p| options[p][pick[p]][k]).collect();
                    post.arrays.insert(slot.array.clone(), vals);
                }
                for v in &self.spec.int_vars {
                    let sym = Sym::new(v.name.clone(), SymKind::IntVar).primed();
                    post.ints.insert(v.name.clone(), small(&env.ints[&sym]));
                }
                self.fill_counters(&mut post)?;
                if self.consistent_guess(s, &post, &env)? && self.holds(&self.phi, &post)? {
                    out.push(post);
                }
            }
        }
        Ok(out)
    }

    /// Whether the guessed primed counters and cardinalities are the actual
    /// values in `post`.
    fn consistent_guess(
        &self,
        pre: &ConcreteState,
        post: &ConcreteState,
        env: &Env,
    ) -> Result<bool, OracleError> {
        for (sym, _) in &self.guessed {
            if sym.kind == SymKind::Counter
                && post.ints.get(&sym.name).copied() != Some(small(&env.ints[sym]))
            {
                return Ok(false);
            }
        }
        let pair = StatePair { pre, post };
        for (card, sym) in &self.primed_cards {
            if eval_term(card, &pair, &Env::default())? != env.ints[sym] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A compact rendering such as `A=[bot,a0,a0] V=[v0,v1,v0]`.
    pub fn render(&self, s: &ConcreteState) -> String {
        let mut parts = Vec::new();
        for (k, v) in &s.params {
            parts.push(format!("{k}={v}"));
        }
        for v in &self.spec.int_vars {
            if let Some(x) = s.ints.get(&v.name) {
                parts.push(format!("{}={x}", v.name));
            }
        }
        for (name, vals) in &s.arrays {
            let shown: Vec<String> = match self.spec.sort_of(name) {
                Some(sort) => vals
                    .iter()
                    .map(|&i| sort.values[i as usize].clone())
                    .collect(),
                None => vals.iter().map(|v| v.to_string()).collect(),
            };
            parts.push(format!("{name}=[{}]", shown.join(",")));
        }
        parts.join(" ")
    }
}

fn small(v: &BigInt) -> i64 {
    v.to_i64().expect("guessed values are small")
}

/// Pre-state plus the post values of one process.
struct StepModel<'a> {
    pre: &'a ConcreteState,
    proc: usize,
    post: &'a [(&'a str, i64)],
}

impl Model for StepModel<'_> {
    fn n(&self) -> usize {
        self.pre.n
    }
    fn int(&self, s: &Sym) -> Option<BigInt> {
        self.pre.int(s)
    }
    fn read(&self, array: &str, primed: bool, idx: usize) -> Option<i64> {
        if !primed {
            self.pre.read(array, false, idx)
        } else if idx == self.proc {
            self.post.iter().find(|(a, _)| *a == array).map(|x| x.1)
        } else {
            None
        }
    }
}

/// Mixed-radix counter over `0..r_0 x 0..r_1 x ...`, last digit fastest.
/// Yields one empty tuple when there are no digits and nothing if some
/// radix is zero.
struct Odometer {
    radices: Vec<usize>,
    cur: Option<Vec<usize>>,
}

impl Odometer {
    fn new(radices: Vec<usize>) -> Self {
        let cur = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Odometer { radices, cur }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let cur = self.cur.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.radices[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_spec, parse_spec, validate};

    fn ot() -> SystemSpec {
        validate(&parse_spec(include_str!("../../../../benchmarks/ot/spec.cf")).unwrap()).unwrap()
    }

    #[test]
    fn odometer_counts() {
        assert_eq!(Odometer::new(vec![2, 3]).count(), 6);
        assert_eq!(Odometer::new(vec![]).count(), 1);
        assert_eq!(Odometer::new(vec![2, 0]).count(), 0);
        let v: Vec<_> = Odometer::new(vec![2, 2]).collect();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn ot_state_space_trims_receive_arrays() {
        let spec = ot();
        let ex = Explorer::new(&spec, 3, Bounds::for_spec(&spec, 3)).unwrap();
        assert_eq!(ex.states(true).unwrap().len(), 216);
        assert!(ex.notes()[0].starts_with("R0, R1 only occur primed"));
    }

    #[test]
    fn single_binary_array() {
        let spec = load_spec(
            "params: N; sorts: S = {a, b}; arrays: L : S; counters: u = #{k | L(k) = a};
             init: forall x . L(x) = a; trans: case forall x . L'(x) = L(x); unsafe: u > N;",
        )
        .unwrap();
        let ex = Explorer::new(&spec, 1, Bounds::for_spec(&spec, 1)).unwrap();
        let states = ex.states(true).unwrap();
        assert_eq!(states.len(), 2);
        // the identity frame only has diagonal pairs
        for s in &states {
            assert_eq!(ex.successors(s).unwrap(), vec![s.clone()]);
        }
        assert!(Explorer::new(&spec, 0, Bounds::for_spec(&spec, 0)).is_err());
    }

    #[test]
    fn false_invariant_has_no_states() {
        let spec = load_spec(
            "params: N; sorts: S = {a, b}; arrays: L : S; counters: u = #{k | L(k) = a};
             invariant: forall x . N < 0; init: forall x . L(x) = a;
             trans: case forall x . L'(x) = L(x); unsafe: u > N;",
        )
        .unwrap();
        let ex = Explorer::new(&spec, 2, Bounds::for_spec(&spec, 2)).unwrap();
        assert!(ex.states(true).unwrap().is_empty());
        assert_eq!(ex.states(false).unwrap().len(), 4);
    }

    #[test]
    fn ot_successors_respect_receive_bounds() {
        let spec = ot();
        let ex = Explorer::new(&spec, 3, Bounds::for_spec(&spec, 3)).unwrap();
        let mut s = ConcreteState::new(3);
        s.arrays.insert("V".into(), vec![0, 0, 0]);
        s.arrays.insert("A".into(), vec![0, 0, 0]);
        ex.fill_counters(&mut s).unwrap();
        assert_eq!(s.ints["zb0"], 3);
        let succ = ex.successors(&s).unwrap();
        // every process may hear 0..3 zeros and no ones: it keeps value 0
        // and either keeps bot or accepts 0 (only when it heard 3 > 2)
        assert_eq!(succ.len(), 8);
        for t in &succ {
            assert_eq!(t.arrays["V"], vec![0, 0, 0]);
        }
    }

    #[test]
    fn rendering_uses_value_names() {
        let spec = ot();
        let ex = Explorer::new(&spec, 3, Bounds::for_spec(&spec, 3)).unwrap();
        let s = &ex.states(true).unwrap()[0];
        assert_eq!(ex.render(s), "N=3 A=[bot,bot,bot] V=[v0,v0,v0]");
    }
}
