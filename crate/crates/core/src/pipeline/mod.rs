//! From a validated specification to its counter system.
//!
//! Every `forall x . body` formula goes through the same steps:
//! cardinality terms become counters, array reads become fresh integers that
//! are eliminated per arithmetic disjunct, the resulting ground guards are
//! split into consistent cubes, and for each cube the data part is encoded
//! over cell counters (one per joint array valuation), which are then
//! projected away.

pub mod allsat;
pub mod cells;
pub mod skolem;
mod system;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::logic::{prime_state, simplify, Formula};
use crate::par::Exec;
use crate::qe::{is_satisfiable, Conj, Constraint, Eliminator, LinExpr, Policy, QeError, QeStats};
use crate::spec::{rename_proc, SystemSpec};

use allsat::{real_infeasible, split_assignments};
use cells::{build_cells, counters_as_cell_sums, encode_forall_data, CellScope, CellSpace};
use skolem::{arith_dnf, eliminate_reads, is_ground, lin, replace_counters, AutoCounters};

pub use system::{
    parse_conj, parse_constraint, BuildStats, CounterInfo, CounterSystem, Disjunct, LocalInfo,
    QeStatsJson,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("the cell encoding needs {cells} cells, over the budget of {limit}")]
    CellBudgetExceeded { cells: usize, limit: usize },
    #[error("case splitting would branch on {atoms} distinct atoms, over the budget of {limit}")]
    AtomBudgetExceeded { atoms: usize, limit: usize },
    #[error("disjunctive normal form grew to {size} disjuncts, over the limit of {limit}")]
    DnfTooLarge { size: usize, limit: usize },
    #[error(transparent)]
    Qe(#[from] QeError),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug)]
pub struct Options {
    pub policy: Policy,
    /// Budget for exact QE steps under [`Policy::Exact`].
    pub qe_budget: Option<usize>,
    pub cell_budget: usize,
    pub atom_budget: usize,
    pub dnf_limit: usize,
    /// Size cap for the rational pruning test during case splitting.
    pub prune_cap: usize,
    /// Budget for the exact emptiness check of output disjuncts; disjuncts
    /// whose check runs out of budget are kept.
    pub sat_budget: Option<usize>,
    pub exec: Exec,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            policy: Policy::Exact,
            qe_budget: Some(20_000),
            cell_budget: 4096,
            atom_budget: 24,
            dnf_limit: 10_000,
            prune_cap: 400,
            sat_budget: Some(5_000),
            exec: Exec::default(),
        }
    }
}

/// Result of abstracting one `forall` formula.
#[derive(Clone, Debug, Default)]
pub struct Abstracted {
    pub disjuncts: Vec<Disjunct>,
    pub exact: bool,
    pub qe: QeStats,
    pub atoms: usize,
    pub cubes: usize,
    pub thetas: usize,
    pub auto: Vec<(String, Formula)>,
}

/// Abstracts `forall x . body` over the given cell scope. With
/// `with_counters` the declared counter definitions (and their primed
/// copies in the transition scope) are part of the formula.
pub fn abstract_forall(
    spec: &SystemSpec,
    body: &Formula,
    scope: CellScope,
    with_counters: bool,
    opts: &Options,
) -> Result<Abstracted, PipelineError> {
    let mut auto = AutoCounters::default();
    let body = replace_counters(spec, body, &mut auto, with_counters);
    let (ground, rest): (Vec<&Formula>, Vec<&Formula>) =
        body.conjuncts().into_iter().partition(|f| is_ground(f));

    let g0: Vec<Conj> = arith_dnf(
        &Formula::And(ground.into_iter().cloned().collect()),
        true,
        opts.dnf_limit,
    )?
    .into_iter()
    .map(|b| b.arith)
    .collect();
    let mut out = Abstracted {
        exact: true,
        auto: auto.defs.clone(),
        ..Default::default()
    };
    if g0.is_empty() {
        return Ok(out);
    }

    let branches = arith_dnf(
        &Formula::And(rest.into_iter().cloned().collect()),
        true,
        opts.dnf_limit,
    )?;
    let mut elim = Eliminator::new(opts.policy).with_budget(opts.qe_budget);
    let guarded = eliminate_reads(&branches, &mut elim)?;
    out.qe.merge(&elim.stats);
    out.exact &= elim.exact;

    let cs = build_cells(spec, scope, opts.cell_budget)?;
    let mut defs: Vec<(String, Formula)> = Vec::new();
    if with_counters {
        for c in &spec.counters {
            defs.push((c.name.clone(), c.body.clone()));
            if scope == CellScope::Trans {
                defs.push((format!("{}'", c.name), prime_state(&c.body)));
            }
        }
    }
    defs.extend(auto.defs.iter().cloned());

    let n = LinExpr::var("N");
    let mut background = Conj::new(vec![Constraint::le(LinExpr::constant(1), n.clone())]);
    for (name, _) in &defs {
        background.push(Constraint::nonneg(name));
        background.push(Constraint::le(LinExpr::var(name.clone()), n.clone()));
    }
    if let [only] = g0.as_slice() {
        background.extend(only.constraints.iter().cloned());
    }
    let guards: Vec<Conj> = guarded.iter().map(|g| g.ground.clone()).collect();
    let cubes = split_assignments(&guards, &background, opts.atom_budget, opts.prune_cap)?;
    out.atoms = guards
        .iter()
        .flat_map(|g| g.constraints.iter().map(|c| c.atom_key().0))
        .collect::<BTreeSet<_>>()
        .len();
    out.cubes = cubes.len();

    // Cubes whose data part is satisfied by the same cells share a projection.
    let mut eps_index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut work: Vec<(usize, usize)> = Vec::new();
    for (ci, cube) in cubes.iter().enumerate() {
        let theta = simplify(&Formula::or(
            cube.true_guards.iter().map(|&k| guarded[k].data.clone()),
        ));
        let eps = cs.satisfying(&theta);
        if eps.is_empty() {
            // the data part is unsatisfiable, so for N >= 1 the cube contributes nothing
            continue;
        }
        let next = eps_index.len();
        let ei = *eps_index.entry(eps).or_insert(next);
        work.push((ci, ei));
    }
    out.thetas = eps_index.len();
    let mut eps_list: Vec<(Vec<usize>, usize)> = eps_index.into_iter().collect();
    eps_list.sort_by_key(|(_, i)| *i);

    let projections = opts
        .exec
        .map(&eps_list, |(eps, _)| project_cells(&cs, &defs, eps, opts));
    let mut proj = Vec::with_capacity(projections.len());
    for p in projections {
        let (conjs, stats, exact) = p?;
        out.qe.merge(&stats);
        out.exact &= exact;
        proj.push(conjs);
    }

    let auto_vars: BTreeSet<String> = auto.defs.iter().map(|(n, _)| n.clone()).collect();
    let finished = opts.exec.map(&work, |&(ci, ei)| {
        let cube = &cubes[ci];
        let origin = format!("guards {:?}, cube {ci}", cube.true_guards);
        let mut found = Vec::new();
        let mut elim = Eliminator::new(opts.policy).with_budget(opts.qe_budget);
        for lits in cube.expand() {
            for g in &g0 {
                for p in &proj[ei] {
                    let mut c = lits.clone();
                    c.extend(g.constraints.iter().cloned());
                    c.extend(p.constraints.iter().cloned());
                    for r in elim.eliminate_block(&auto_vars, &c)? {
                        if let Some(r) = r.simplify() {
                            if feasible(&r, opts) {
                                found.push(Disjunct {
                                    conj: r,
                                    origin: origin.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok::<_, PipelineError>((found, elim.stats, elim.exact))
    });
    let mut all = Vec::new();
    for f in finished {
        let (found, stats, exact) = f?;
        out.qe.merge(&stats);
        out.exact &= exact;
        all.extend(found);
    }
    out.disjuncts = canonical(all);
    Ok(out)
}

/// `exists cells . defs & forall k. theta(k)` where `eps` lists the cells
/// satisfying `theta`.
fn project_cells(
    cs: &CellSpace,
    defs: &[(String, Formula)],
    eps: &[usize],
    opts: &Options,
) -> Result<(Vec<Conj>, QeStats, bool), PipelineError> {
    let mut c = Conj::new(counters_as_cell_sums(defs, cs));
    // `N = sum(eps cells)` minus `N = sum(all cells)`: the cells outside
    // `eps` sum to zero, which lets the eliminator zero them directly.
    let mut forall = encode_forall_data(&Formula::False, cs);
    let outside: Vec<usize> = (0..cs.len()).filter(|i| !eps.contains(i)).collect();
    forall[0] = Constraint::eq(cs.sum(&outside), LinExpr::zero());
    c.extend(forall);
    let cells: BTreeSet<String> = cs.cells.iter().map(|k| k.name.clone()).collect();
    let mut elim = Eliminator::new(opts.policy).with_budget(opts.qe_budget);
    let r = elim.eliminate_block(&cells, &c)?;
    Ok((r, elim.stats, elim.exact))
}

/// Drops a disjunct unless it may have a solution with `N >= 1`.
fn feasible(c: &Conj, opts: &Options) -> bool {
    let mut with_n = c.clone();
    with_n.push(Constraint::le(LinExpr::constant(1), LinExpr::var("N")));
    if real_infeasible(&with_n, opts.prune_cap) {
        return false;
    }
    is_satisfiable(&with_n, opts.sat_budget) != Some(false)
}

/// Sorted, duplicate-free disjuncts, without any disjunct whose constraints
/// include all those of another (it is implied by the other).
fn canonical(ds: Vec<Disjunct>) -> Vec<Disjunct> {
    let mut by_conj: BTreeMap<Conj, String> = BTreeMap::new();
    for d in ds {
        by_conj.entry(d.conj).or_insert(d.origin);
    }
    let sets: Vec<(BTreeSet<Constraint>, Conj, String)> = by_conj
        .into_iter()
        .map(|(c, o)| (c.constraints.iter().cloned().collect(), c, o))
        .collect();
    let mut out = Vec::new();
    for (i, (s, c, o)) in sets.iter().enumerate() {
        let subsumed = sets
            .iter()
            .enumerate()
            .any(|(j, (t, _, _))| j != i && t.len() < s.len() && t.is_subset(s));
        if !subsumed {
            out.push(Disjunct {
                conj: c.clone(),
                origin: o.clone(),
            });
        }
    }
    out
}

/// Builds the counter system of `spec`.
pub fn build_counter_system(
    spec: &SystemSpec,
    opts: &Options,
) -> Result<CounterSystem, PipelineError> {
    let mut exact = true;
    let mut stats = BuildStats::default();
    let mut qe = QeStats::default();
    let mut auto_counters: Vec<CounterInfo> = Vec::new();
    let mut absorb = |a: &Abstracted, exact: &mut bool, stats: &mut BuildStats| {
        *exact &= a.exact;
        qe.merge(&a.qe);
        stats.atoms = stats.atoms.max(a.atoms);
        stats.cubes += a.cubes;
        stats.distinct_thetas += a.thetas;
        for (name, body) in &a.auto {
            let info = CounterInfo {
                name: name.clone(),
                definition: format!(
                    "#{{{} | {body}}}",
                    proc_var(body).unwrap_or_else(|| "k".into())
                ),
            };
            if !auto_counters.contains(&info) {
                auto_counters.push(info);
            }
        }
    };

    let invariant = if spec.invariant.is_empty() {
        vec![Disjunct {
            conj: Conj::default(),
            origin: "no invariant".into(),
        }]
    } else {
        let mut ds = Vec::new();
        for (i, case) in spec.invariant.iter().enumerate() {
            let a = abstract_forall(spec, &case.body, CellScope::Init, false, opts)?;
            absorb(&a, &mut exact, &mut stats);
            ds.extend(a.disjuncts.into_iter().map(|d| Disjunct {
                origin: format!("invariant case {i}: {}", d.origin),
                ..d
            }));
        }
        canonical(ds)
    };

    let phi_cases: Vec<Formula> = if spec.invariant.is_empty() {
        vec![Formula::True]
    } else {
        spec.invariant
            .iter()
            .map(|c| rename_proc(&c.body, &c.var, &spec.init.var))
            .collect()
    };

    // initial states are the invariant states satisfying init, so that the
    // abstract init implies the abstract invariant
    let mut init = Vec::new();
    for (i, phi) in phi_cases.iter().enumerate() {
        let body = Formula::and([phi.clone(), spec.init.body.clone()]);
        let a = abstract_forall(spec, &body, CellScope::Init, true, opts)?;
        absorb(&a, &mut exact, &mut stats);
        init.extend(a.disjuncts.into_iter().map(|d| Disjunct {
            origin: if spec.invariant.is_empty() {
                d.origin
            } else {
                format!("invariant case {i}: {}", d.origin)
            },
            ..d
        }));
    }
    let init = if spec.invariant.len() > 1 {
        canonical(init)
    } else {
        init
    };

    let trans_body = Formula::or(spec.trans.iter().map(|c| c.body.clone()));
    let mut trans = Vec::new();
    for (i, phi) in phi_cases.iter().enumerate() {
        let body = Formula::and([phi.clone(), trans_body.clone()]);
        let a = abstract_forall(spec, &body, CellScope::Trans, true, opts)?;
        absorb(&a, &mut exact, &mut stats);
        trans.extend(a.disjuncts.into_iter().map(|d| Disjunct {
            origin: format!("invariant case {i}: {}", d.origin),
            ..d
        }));
    }
    let trans = canonical(trans);

    let bad = abstract_ground(spec, &spec.unsafe_, opts)?;

    let mut locals = Vec::new();
    for l in &spec.locals {
        let num = replace_counters(
            spec,
            &Formula::eq(l.numerator.clone(), l.numerator.clone()),
            &mut AutoCounters::default(),
            true,
        );
        let crate::logic::Formula::Atom(crate::logic::Atom::Cmp(_, t, _)) = num else {
            unreachable!("an equation stays an atom")
        };
        let numerator = lin(&t)?;
        if numerator.vars().any(|v| v.starts_with('_')) {
            return Err(PipelineError::Unsupported(format!(
                "division `{}` ranges over a cardinality that matches no declared counter",
                l.numerator
            )));
        }
        locals.push(LocalInfo {
            name: l.name.clone(),
            numerator,
            divisor: l.divisor.clone(),
        });
    }

    stats.init_cells = build_cells(spec, CellScope::Init, opts.cell_budget)?.len();
    stats.trans_cells = build_cells(spec, CellScope::Trans, opts.cell_budget)?.len();
    stats.qe = (&qe).into();
    Ok(CounterSystem {
        params: spec.params.clone(),
        int_vars: spec.int_vars.iter().map(|v| v.name.clone()).collect(),
        counters: spec
            .counters
            .iter()
            .map(|c| CounterInfo {
                name: c.name.clone(),
                definition: format!("#{{{} | {}}}", c.var, c.body),
            })
            .collect(),
        locals,
        invariant,
        init,
        trans,
        bad,
        exact,
        auto_counters,
        stats,
    })
}

/// A ground formula (such as a safety property) over the counter system's
/// variables, as a disjunction of constraint sets. Cardinalities must match
/// declared counters.
pub fn abstract_ground(
    spec: &SystemSpec,
    f: &Formula,
    opts: &Options,
) -> Result<Vec<Conj>, PipelineError> {
    let mut auto = AutoCounters::default();
    let g = replace_counters(spec, f, &mut auto, true);
    if let Some((name, body)) = auto.defs.first() {
        return Err(PipelineError::Unsupported(format!(
            "cardinality `#{{{} | {body}}}` ({name}) matches no declared counter",
            proc_var(body).unwrap_or_else(|| "k".into())
        )));
    }
    Ok(arith_dnf(&g, true, opts.dnf_limit)?
        .into_iter()
        .map(|b| b.arith)
        .collect())
}

/// The process variable a one-variable formula is written over.
fn proc_var(f: &Formula) -> Option<String> {
    use crate::logic::{Atom, Term};
    fn in_term(t: &Term) -> Option<String> {
        match t {
            Term::Read { var, .. } => Some(var.clone()),
            Term::Add(a, b) | Term::Sub(a, b) => in_term(a).or_else(|| in_term(b)),
            Term::Mul(_, a) | Term::Div(a, _) => in_term(a),
            _ => None,
        }
    }
    let mut found = None;
    f.visit_atoms(&mut |a| {
        if found.is_none() {
            found = match a {
                Atom::DataConst { var, .. } | Atom::DataArr { var, .. } => Some(var.clone()),
                Atom::Cmp(_, l, r) | Atom::Cong(l, r, _) => in_term(l).or_else(|| in_term(r)),
            };
        }
    });
    found
}

/// `d*t <= u & u < d*t + d` for the local `t = u div d`.
pub fn local_side(l: &LocalInfo) -> [Constraint; 2] {
    let t = LinExpr::term(l.divisor.clone(), l.name.clone());
    [
        Constraint::le(t.clone(), l.numerator.clone()),
        Constraint::lt(l.numerator.clone(), t.add_constant(&l.divisor)),
    ]
}

#[cfg(test)]
mod tests;
