//! Explicit-state ground truth at a fixed process count: enumeration of the
//! concrete semantics, simulation and strongest checks of a counter system
//! against it, bounded reachability over counter tuples, and bounded
//! equivalence of formulas.
//!
//! Everything here is a falsifier: it checks one `N` at a time, within the
//! value bounds it reports.

pub mod compiled;
mod concrete;
mod reach;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::logic::{ConcreteState, EvalError};
use crate::par::Exec;
use crate::pipeline::CounterSystem;
use crate::qe::Conj;
use crate::spec::SystemSpec;

use compiled::{CompiledDnf, Layout};
pub use concrete::{Bounds, Explorer};
pub use reach::{
    bounded_reach, box_points, check_equiv_bounded, compositions, AbstractSpace, Equivalence,
    Reach, ReachOptions,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("the process count must be at least 1")]
    InvalidProcessCount,
    #[error("more than {limit} states; raise the state budget or lower N")]
    StateBudgetExceeded { limit: usize },
    #[error("`{0}` is not a variable of the counter system")]
    UnknownVariable(String),
    #[error("constant {0} does not fit a machine integer")]
    Overflow(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("counter `{0}` of the counter system is not declared by the specification")]
    CounterMismatch(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
struct CompiledLocal {
    slot: usize,
    terms: Vec<(usize, i64)>,
    constant: i64,
    divisor: i64,
    uses_post: bool,
}

/// A counter system compiled to machine-integer evaluators.
///
/// Value vectors are laid out as: state variables (parameters, integer
/// variables, counters), then the primed mutable variables, then the
/// locals. Locals are always computed from their definitions.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    pub layout: Layout,
    pub state: Vec<String>,
    /// State slots that may change in a step.
    pub mutable: Vec<usize>,
    /// Slot of the primed copy of each entry of `mutable`.
    pub primed: Vec<usize>,
    /// Slots of the counters.
    pub counters: Vec<usize>,
    locals: Vec<CompiledLocal>,
    pub invariant: CompiledDnf,
    pub init: CompiledDnf,
    pub trans: CompiledDnf,
    pub bad: CompiledDnf,
}

impl CompiledSystem {
    pub fn new(cs: &CounterSystem) -> Result<Self, OracleError> {
        let state = cs.state_vars();
        let mut layout = Layout::new(state.iter().cloned());
        let mutable: Vec<usize> = cs
            .mutable_vars()
            .iter()
            .map(|v| layout.get(v).unwrap())
            .collect();
        let primed: Vec<usize> = cs
            .mutable_vars()
            .iter()
            .map(|v| layout.push(format!("{v}'")))
            .collect();
        for l in &cs.locals {
            layout.push(l.name.clone());
        }
        let small = |n: &num_bigint::BigInt| {
            n.to_i64()
                .ok_or_else(|| OracleError::Overflow(n.to_string()))
        };
        let mut locals = Vec::new();
        for l in &cs.locals {
            let mut terms = Vec::new();
            let mut uses_post = false;
            for (v, c) in &l.numerator.coeffs {
                let i = layout
                    .get(v)
                    .ok_or_else(|| OracleError::UnknownVariable(v.clone()))?;
                uses_post |= primed.contains(&i);
                terms.push((i, small(c)?));
            }
            locals.push(CompiledLocal {
                slot: layout.get(&l.name).unwrap(),
                terms,
                constant: small(&l.numerator.constant)?,
                divisor: small(&l.divisor)?,
                uses_post,
            });
        }
        let counters = cs
            .counters
            .iter()
            .map(|c| layout.get(&c.name).unwrap())
            .collect();
        let dnf = |d: Vec<&Conj>| CompiledDnf::new(d, &layout);
        Ok(CompiledSystem {
            invariant: dnf(cs.invariant.iter().map(|d| &d.conj).collect())?,
            init: dnf(cs.init.iter().map(|d| &d.conj).collect())?,
            trans: dnf(cs.trans.iter().map(|d| &d.conj).collect())?,
            bad: dnf(cs.bad.iter().collect())?,
            layout,
            counters,
            state,
            mutable,
            primed,
            locals,
        })
    }

    /// Compiles another formula (such as a property) over this layout.
    pub fn compile(&self, d: &[Conj]) -> Result<CompiledDnf, OracleError> {
        CompiledDnf::new(d, &self.layout)
    }

    pub fn state_len(&self) -> usize {
        self.state.len()
    }

    /// Whether some local is defined in terms of post-state values.
    pub fn locals_use_post(&self) -> bool {
        self.locals.iter().any(|l| l.uses_post)
    }

    /// The full value vector of a state tuple (primed copies equal to the
    /// current values) or of a pair of state tuples.
    pub fn vector(&self, pre: &[i64], post: Option<&[i64]>) -> Vec<i64> {
        let mut x = vec![0; self.layout.len()];
        x[..pre.len()].copy_from_slice(pre);
        let post = post.unwrap_or(pre);
        for (&m, &p) in self.mutable.iter().zip(&self.primed) {
            x[p] = post[m];
        }
        self.fill_locals(&mut x);
        x
    }

    pub fn local_slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.locals.iter().map(|l| l.slot)
    }

    pub fn fill_locals(&self, x: &mut [i64]) {
        for l in &self.locals {
            let num = l
                .terms
                .iter()
                .fold(l.constant, |acc, &(i, c)| acc + c * x[i]);
            x[l.slot] = num.div_euclid(l.divisor);
        }
    }

    /// The post-state tuple of a pair vector.
    pub fn post_of(&self, x: &[i64]) -> Vec<i64> {
        let mut out = x[..self.state.len()].to_vec();
        for (&m, &p) in self.mutable.iter().zip(&self.primed) {
            out[m] = x[p];
        }
        out
    }

    pub fn named(&self, tuple: &[i64]) -> BTreeMap<String, i64> {
        self.state
            .iter()
            .cloned()
            .zip(tuple.iter().copied())
            .collect()
    }
}

/// Counter tuple of a configuration, in the order of `state` (parameters,
/// integer variables and counters, all stored in the configuration).
pub fn project_state(s: &ConcreteState, state: &[String]) -> Result<Vec<i64>, OracleError> {
    state
        .iter()
        .map(|v| {
            s.params
                .get(v)
                .or_else(|| s.ints.get(v))
                .copied()
                .ok_or_else(|| OracleError::CounterMismatch(v.clone()))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CexKind {
    /// A concrete initial state whose projection violates the abstract init.
    InitNotCovered,
    /// A concrete state whose projection violates the abstract invariant.
    InvariantNotCovered,
    /// A concrete step whose projection satisfies no abstract disjunct.
    TransitionNotCovered,
    /// A realizable tuple satisfying the abstract init with no concrete initial state.
    InitWithoutWitness,
    /// A realizable tuple satisfying the abstract invariant with no concrete state.
    InvariantWithoutWitness,
    /// A realizable abstract step with no concrete step.
    TransitionWithoutWitness,
}

impl CexKind {
    fn breaks_simulation(self) -> bool {
        matches!(
            self,
            CexKind::InitNotCovered | CexKind::InvariantNotCovered | CexKind::TransitionNotCovered
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub kind: CexKind,
    pub pre: BTreeMap<String, i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post: Option<BTreeMap<String, i64>>,
    /// The concrete state or step, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concrete: Option<String>,
}

/// Outcome of checking a counter system against the explicit semantics at
/// one process count. A flag is `None` when that direction was not checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationReport {
    #[serde(rename = "checkedN")]
    pub checked_n: usize,
    pub concrete_state_count: usize,
    pub concrete_transition_count: usize,
    pub simulation_holds: Option<bool>,
    pub strongest_holds: Option<bool>,
    /// Abstract steps from a realizable tuple to one that is not realizable
    /// at this process count.
    pub skipped_tuples: usize,
    pub counterexample_count: usize,
    /// The first few counterexamples.
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

impl SimulationReport {
    /// Every checked direction holds.
    pub fn holds(&self) -> bool {
        self.simulation_holds != Some(false) && self.strongest_holds != Some(false)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }
}

impl fmt::Display for SimulationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: Option<bool>| match b {
            Some(true) => "holds",
            Some(false) => "FAILS",
            None => "not checked",
        };
        writeln!(
            f,
            "N={}: {} states, {} transitions",
            self.checked_n, self.concrete_state_count, self.concrete_transition_count
        )?;
        writeln!(f, "  simulation: {}", flag(self.simulation_holds))?;
        writeln!(
            f,
            "  strongest:  {} ({} abstract steps leave the tuples realizable at N={})",
            flag(self.strongest_holds),
            self.skipped_tuples,
            self.checked_n
        )?;
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        let show = |m: &BTreeMap<String, i64>| {
            m.iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for c in &self.counterexamples {
            write!(f, "  {:?}: {}", c.kind, show(&c.pre))?;
            if let Some(p) = &c.post {
                write!(f, " -> {}", show(p))?;
            }
            if let Some(s) = &c.concrete {
                write!(f, "  [{s}]")?;
            }
            writeln!(f)?;
        }
        if self.counterexample_count > self.counterexamples.len() {
            writeln!(
                f,
                "  ... {} more",
                self.counterexample_count - self.counterexamples.len()
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Bounds for the concrete semantics; derived from the spec when `None`.
    pub bounds: Option<Bounds>,
    pub exec: Exec,
    /// How many counterexamples to keep in the report.
    pub keep: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            bounds: None,
            exec: Exec::default(),
            keep: 5,
        }
    }
}

/// Checks that projecting concrete states onto counter tuples maps initial
/// states into the abstract init, states into the abstract invariant and
/// steps into the abstract transition relation.
pub fn check_simulation(
    spec: &SystemSpec,
    cs: &CounterSystem,
    n: usize,
    opts: &CheckOptions,
) -> Result<SimulationReport, OracleError> {
    run(spec, cs, n, opts, true, false)
}

/// Checks the converse at this `N`: every abstract initial tuple, invariant
/// tuple and step between tuples realizable at `N` has a concrete witness.
pub fn check_strongest(
    spec: &SystemSpec,
    cs: &CounterSystem,
    n: usize,
    opts: &CheckOptions,
) -> Result<SimulationReport, OracleError> {
    run(spec, cs, n, opts, false, true)
}

/// Both checks over one enumeration.
pub fn check(
    spec: &SystemSpec,
    cs: &CounterSystem,
    n: usize,
    opts: &CheckOptions,
) -> Result<SimulationReport, OracleError> {
    run(spec, cs, n, opts, true, true)
}

struct StepSummary {
    count: usize,
    pairs: BTreeSet<(Vec<i64>, Vec<i64>)>,
    uncovered: Vec<(Vec<i64>, Vec<i64>, String)>,
    uncovered_count: usize,
}

fn run(
    spec: &SystemSpec,
    cs: &CounterSystem,
    n: usize,
    opts: &CheckOptions,
    simulation: bool,
    strongest: bool,
) -> Result<SimulationReport, OracleError> {
    let bounds = opts
        .bounds
        .clone()
        .unwrap_or_else(|| Bounds::for_spec(spec, n));
    let intvar_range = (
        bounds.intvars.iter().copied().min().unwrap_or(0).min(0),
        bounds.intvars.iter().copied().max().unwrap_or(1).max(1),
    );
    let budget = bounds.state_budget;
    let ex = Explorer::new(spec, n, bounds)?;
    let sys = CompiledSystem::new(cs)?;
    for c in &cs.counters {
        if !spec.counters.iter().any(|d| d.name == c.name) {
            return Err(OracleError::CounterMismatch(c.name.clone()));
        }
    }

    let all = ex.states(false)?;
    let mut states = Vec::new();
    for s in all.iter() {
        if ex.satisfies_invariant(s)? {
            states.push(s.clone());
        }
    }
    let proj = |s: &ConcreteState| project_state(s, &sys.state);

    let mut cex: Vec<Counterexample> = Vec::new();
    // failures that break simulation, and failures that break strongest
    let mut failures = [0usize; 2];
    let keep = opts.keep;
    let record = |c: Counterexample, cex: &mut Vec<Counterexample>, failures: &mut [usize; 2]| {
        failures[usize::from(!c.kind.breaks_simulation())] += 1;
        if cex.len() < keep {
            cex.push(c);
        }
    };

    let mut initial = Vec::new();
    for s in &states {
        if ex.is_initial(s)? {
            initial.push(s);
        }
    }

    // steps, one pre-state at a time
    let summaries = opts
        .exec
        .map(&states, |s| -> Result<StepSummary, OracleError> {
            let pre = proj(s)?;
            let mut sum = StepSummary {
                count: 0,
                pairs: BTreeSet::new(),
                uncovered: Vec::new(),
                uncovered_count: 0,
            };
            for t in ex.successors(s)? {
                sum.count += 1;
                let post = proj(&t)?;
                if simulation && !sys.trans.holds(&sys.vector(&pre, Some(&post))) {
                    sum.uncovered_count += 1;
                    if sum.uncovered.len() < opts.keep {
                        sum.uncovered.push((
                            pre.clone(),
                            post.clone(),
                            format!("{} -> {}", ex.render(s), ex.render(&t)),
                        ));
                    }
                }
                if strongest {
                    sum.pairs.insert((pre.clone(), post));
                }
            }
            Ok(sum)
        });
    let mut transitions = 0;
    let mut pairs: BTreeSet<(Vec<i64>, Vec<i64>)> = BTreeSet::new();
    let mut uncovered = Vec::new();
    let mut uncovered_count = 0;
    for s in summaries {
        let s = s?;
        transitions += s.count;
        pairs.extend(s.pairs);
        uncovered.extend(s.uncovered);
        uncovered_count += s.uncovered_count;
    }

    if simulation {
        for s in &states {
            let t = proj(s)?;
            if !sys.invariant.holds(&sys.vector(&t, None)) {
                record(
                    Counterexample {
                        kind: CexKind::InvariantNotCovered,
                        pre: sys.named(&t),
                        post: None,
                        concrete: Some(ex.render(s)),
                    },
                    &mut cex,
                    &mut failures,
                );
            }
        }
        for s in &initial {
            let t = proj(s)?;
            if !sys.init.holds(&sys.vector(&t, None)) {
                record(
                    Counterexample {
                        kind: CexKind::InitNotCovered,
                        pre: sys.named(&t),
                        post: None,
                        concrete: Some(ex.render(s)),
                    },
                    &mut cex,
                    &mut failures,
                );
            }
        }
        let hidden = uncovered_count - uncovered.len();
        for (pre, post, text) in uncovered {
            record(
                Counterexample {
                    kind: CexKind::TransitionNotCovered,
                    pre: sys.named(&pre),
                    post: Some(sys.named(&post)),
                    concrete: Some(text),
                },
                &mut cex,
                &mut failures,
            );
        }
        // steps past the per-state cap are counted but not shown
        failures[0] += hidden;
    }

    let mut skipped = 0;
    if strongest {
        let realizable: BTreeSet<Vec<i64>> = all.iter().map(&proj).collect::<Result<_, _>>()?;
        let in_invariant: BTreeSet<Vec<i64>> =
            states.iter().map(&proj).collect::<Result<_, _>>()?;
        let in_init: BTreeSet<Vec<i64>> =
            initial.iter().map(|s| proj(s)).collect::<Result<_, _>>()?;
        for t in &realizable {
            let x = sys.vector(t, None);
            if sys.invariant.holds(&x) && !in_invariant.contains(t) {
                record(
                    Counterexample {
                        kind: CexKind::InvariantWithoutWitness,
                        pre: sys.named(t),
                        post: None,
                        concrete: None,
                    },
                    &mut cex,
                    &mut failures,
                );
            }
            if sys.init.holds(&x) && !in_init.contains(t) {
                record(
                    Counterexample {
                        kind: CexKind::InitWithoutWitness,
                        pre: sys.named(t),
                        post: None,
                        concrete: None,
                    },
                    &mut cex,
                    &mut failures,
                );
            }
        }
        let space = AbstractSpace::new(&sys, n as i64, intvar_range, budget)?;
        let pres: Vec<Vec<i64>> = realizable.iter().cloned().collect();
        let found = opts.exec.map(&pres, |a| space.successors(a));
        for (a, succ) in pres.iter().zip(found) {
            for b in succ? {
                if !realizable.contains(&b) {
                    skipped += 1;
                } else if !pairs.contains(&(a.clone(), b.clone())) {
                    record(
                        Counterexample {
                            kind: CexKind::TransitionWithoutWitness,
                            pre: sys.named(a),
                            post: Some(sys.named(&b)),
                            concrete: None,
                        },
                        &mut cex,
                        &mut failures,
                    );
                }
            }
        }
    }

    let simulation_holds = simulation.then_some(failures[0] == 0);
    let strongest_holds = strongest.then_some(failures[1] == 0);
    Ok(SimulationReport {
        checked_n: n,
        concrete_state_count: states.len(),
        concrete_transition_count: transitions,
        simulation_holds,
        strongest_holds,
        skipped_tuples: skipped,
        counterexample_count: failures[0] + failures[1],
        counterexamples: cex,
        notes: ex.notes(),
    })
}
