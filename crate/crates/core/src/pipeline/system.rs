//! The counter system produced by the pipeline, and its JSON form.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::frontend::ast::{PAtom, PFormula, PTerm, RelOp};
use crate::frontend::parse_formula;
use crate::qe::{Conj, Constraint, LinExpr, QeStats};

/// One disjunct of a generated formula, with a note on where it came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Disjunct {
    pub conj: Conj,
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterInfo {
    pub name: String,
    pub definition: String,
}

/// `name = numerator div divisor`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalInfo {
    pub name: String,
    pub numerator: LinExpr,
    pub divisor: BigInt,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub init_cells: usize,
    pub trans_cells: usize,
    pub atoms: usize,
    pub cubes: usize,
    pub distinct_thetas: usize,
    pub qe: QeStatsJson,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QeStatsJson {
    pub substitutions: u64,
    pub zero_forced: u64,
    pub equality_scaled: u64,
    pub exact_shadow: u64,
    pub cooper: u64,
    pub relaxed: u64,
    pub max_intermediate: usize,
}

impl From<&QeStats> for QeStatsJson {
    fn from(s: &QeStats) -> Self {
        QeStatsJson {
            substitutions: s.substitutions,
            zero_forced: s.zero_forced,
            equality_scaled: s.equality_scaled,
            exact_shadow: s.exact_shadow,
            cooper: s.cooper,
            relaxed: s.relaxed,
            max_intermediate: s.max_intermediate,
        }
    }
}

/// A counter system: state is the parameters, integer variables and
/// counters; every formula is a disjunction of linear constraint sets.
/// Primed variables (`z'`) denote post-state values in `trans`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterSystem {
    pub params: Vec<String>,
    pub int_vars: Vec<String>,
    pub counters: Vec<CounterInfo>,
    pub locals: Vec<LocalInfo>,
    pub invariant: Vec<Disjunct>,
    pub init: Vec<Disjunct>,
    pub trans: Vec<Disjunct>,
    pub bad: Vec<Conj>,
    /// False if any elimination fell back to the real relaxation.
    pub exact: bool,
    /// Counters introduced for cardinality terms in the input.
    pub auto_counters: Vec<CounterInfo>,
    pub stats: BuildStats,
}

impl CounterSystem {
    /// State variables in canonical order (parameters first).
    pub fn state_vars(&self) -> Vec<String> {
        let mut out = self.params.clone();
        out.extend(self.int_vars.iter().cloned());
        out.extend(self.counters.iter().map(|c| c.name.clone()));
        out
    }

    /// The variables whose value may change in a step.
    pub fn mutable_vars(&self) -> Vec<String> {
        let mut out = self.int_vars.clone();
        out.extend(self.counters.iter().map(|c| c.name.clone()));
        out
    }

    pub fn local_names(&self) -> BTreeSet<String> {
        self.locals.iter().map(|l| l.name.clone()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = SystemJson {
            params: self.params.clone(),
            intvars: self.int_vars.clone(),
            counters: self.counters.clone(),
            locals: self
                .locals
                .iter()
                .map(|l| LocalJson {
                    name: l.name.clone(),
                    numerator: l.numerator.to_string(),
                    divisor: l.divisor.to_string(),
                })
                .collect(),
            phi0: dnf_json(self.invariant.iter().map(|d| &d.conj)),
            iota0: dnf_json(self.init.iter().map(|d| &d.conj)),
            tau0: dnf_json(self.trans.iter().map(|d| &d.conj)),
            bad: dnf_json(self.bad.iter()),
            exact: self.exact,
            auto_counters: self.auto_counters.clone(),
            provenance: ProvenanceJson {
                phi0: self.invariant.iter().map(|d| d.origin.clone()).collect(),
                iota0: self.init.iter().map(|d| d.origin.clone()).collect(),
                tau0: self.trans.iter().map(|d| d.origin.clone()).collect(),
            },
            stats: self.stats.clone(),
        };
        serde_json::to_value(j).expect("plain data serializes")
    }

    /// Pretty-printed JSON with a trailing newline; byte-stable for equal systems.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<CounterSystem, String> {
        let j: SystemJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let dis =
            |d: &[Vec<String>], origins: &[String], what: &str| -> Result<Vec<Disjunct>, String> {
                d.iter()
                    .enumerate()
                    .map(|(i, atoms)| {
                        Ok(Disjunct {
                            conj: parse_conj(atoms).map_err(|e| format!("{what}[{i}]: {e}"))?,
                            origin: origins.get(i).cloned().unwrap_or_default(),
                        })
                    })
                    .collect()
            };
        let mut locals = Vec::new();
        for l in &j.locals {
            locals.push(LocalInfo {
                name: l.name.clone(),
                numerator: parse_lin(&l.numerator)?,
                divisor: l
                    .divisor
                    .parse()
                    .map_err(|_| format!("bad divisor `{}`", l.divisor))?,
            });
        }
        Ok(CounterSystem {
            params: j.params,
            int_vars: j.intvars,
            counters: j.counters,
            locals,
            invariant: dis(&j.phi0, &j.provenance.phi0, "phi0")?,
            init: dis(&j.iota0, &j.provenance.iota0, "iota0")?,
            trans: dis(&j.tau0, &j.provenance.tau0, "tau0")?,
            bad: j
                .bad
                .iter()
                .map(|a| parse_conj(a))
                .collect::<Result<_, _>>()?,
            exact: j.exact,
            auto_counters: j.auto_counters,
            stats: j.stats,
        })
    }
}

fn dnf_json<'a>(d: impl Iterator<Item = &'a Conj>) -> Vec<Vec<String>> {
    d.map(|c| c.constraints.iter().map(|k| k.to_string()).collect())
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    params: Vec<String>,
    intvars: Vec<String>,
    counters: Vec<CounterInfo>,
    #[serde(default)]
    locals: Vec<LocalJson>,
    phi0: Vec<Vec<String>>,
    iota0: Vec<Vec<String>>,
    tau0: Vec<Vec<String>>,
    #[serde(default)]
    bad: Vec<Vec<String>>,
    exact: bool,
    #[serde(default)]
    auto_counters: Vec<CounterInfo>,
    #[serde(default)]
    provenance: ProvenanceJson,
    #[serde(default)]
    stats: BuildStats,
}

#[derive(Serialize, Deserialize)]
struct LocalJson {
    name: String,
    numerator: String,
    divisor: String,
}

#[derive(Serialize, Deserialize, Default)]
struct ProvenanceJson {
    phi0: Vec<String>,
    iota0: Vec<String>,
    tau0: Vec<String>,
}

/// Parses a conjunction written as a list of atoms in the printed syntax.
pub fn parse_conj(atoms: &[String]) -> Result<Conj, String> {
    atoms
        .iter()
        .map(|a| parse_constraint(a))
        .collect::<Result<Vec<_>, _>>()
        .map(Conj::new)
}

/// Parses one printed constraint such as `z00' + 1 <= N` or `x = 1 mod 3`.
pub fn parse_constraint(text: &str) -> Result<Constraint, String> {
    match parse_formula(text).map_err(|e| e.to_string())? {
        PFormula::Atom(a) => atom(&a),
        other => Err(format!(
            "expected a single linear atom, found `{}`",
            crate::frontend::printer::formula(&other)
        )),
    }
}

fn atom(a: &PAtom) -> Result<Constraint, String> {
    let (l, r) = (lin(&a.lhs)?, lin(&a.rhs)?);
    if let Some(m) = &a.modulus {
        return Ok(Constraint::congruent(l, r, m.clone()));
    }
    Ok(match a.op {
        RelOp::Eq => Constraint::eq(l, r),
        RelOp::Le => Constraint::le(l, r),
        RelOp::Lt => Constraint::lt(l, r),
        RelOp::Ge => Constraint::le(r, l),
        RelOp::Gt => Constraint::lt(r, l),
        RelOp::Ne => return Err("`!=` is not a single linear constraint".into()),
    })
}

fn parse_lin(text: &str) -> Result<LinExpr, String> {
    match parse_formula(&format!("{text} = 0")).map_err(|e| e.to_string())? {
        PFormula::Atom(a) => lin(&a.lhs),
        _ => Err(format!("bad linear expression `{text}`")),
    }
}

fn lin(t: &PTerm) -> Result<LinExpr, String> {
    Ok(match t {
        PTerm::Name { name, primed } => LinExpr::var(if *primed {
            format!("{}'", name.name)
        } else {
            name.name.clone()
        }),
        PTerm::Num(n) => LinExpr::constant(n.clone()),
        PTerm::Add(a, b) => lin(a)?.plus(&lin(b)?),
        PTerm::Sub(a, b) => lin(a)?.minus(&lin(b)?),
        PTerm::Neg(a) => lin(a)?.scaled(&-BigInt::one()),
        PTerm::Mul(a, b) => {
            let (a, b) = (lin(a)?, lin(b)?);
            if a.is_constant() {
                b.scaled(&a.constant)
            } else if b.is_constant() {
                a.scaled(&b.constant)
            } else {
                return Err("nonlinear product".into());
            }
        }
        PTerm::Read { .. } | PTerm::Card { .. } | PTerm::Div(..) => {
            return Err(format!(
                "`{}` is not allowed in a counter system",
                crate::frontend::printer::term(t)
            ))
        }
    })
}
