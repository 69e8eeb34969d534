//! Enumeration of the consistent truth assignments to the ground atoms of a
//! family of guards, as partial cubes: each cube fixes just enough atoms to
//! decide every guard.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::qe::{fm_real, try_substitution, Conj, Constraint, Rel};

use super::PipelineError;

/// A partial assignment and the guards it makes true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    /// (atom, value) in the orientation returned by [`Constraint::atom_key`].
    pub literals: Vec<(Constraint, bool)>,
    pub true_guards: Vec<usize>,
}

impl Cube {
    /// The cube as a disjunction of conjunctions: negated equalities and
    /// congruences split into several constraints.
    pub fn expand(&self) -> Vec<Conj> {
        let mut acc = vec![Conj::default()];
        for (atom, value) in &self.literals {
            let options = if *value {
                vec![atom.clone()]
            } else {
                atom.negate()
            };
            let mut next = Vec::with_capacity(acc.len() * options.len());
            for c in &acc {
                for o in &options {
                    let mut d = c.clone();
                    d.push(o.clone());
                    next.push(d);
                }
            }
            acc = next;
        }
        acc
    }
}

/// Literal usable in a conjunction check (negated equalities and
/// congruences are disjunctive and are skipped).
fn as_constraint(atom: &Constraint, value: bool) -> Option<Constraint> {
    if value {
        Some(atom.clone())
    } else if atom.rel == Rel::Le {
        atom.negate().pop()
    } else {
        None
    }
}

/// Sound infeasibility test over the rationals: `true` only if `c` has no
/// real solution. Gives up (returns `false`) once an intermediate system
/// exceeds `cap` constraints.
pub fn real_infeasible(c: &Conj, cap: usize) -> bool {
    let mut cur = match c.simplify() {
        Some(s) => s,
        None => return true,
    };
    loop {
        let vars = cur.vars();
        if vars.is_empty() {
            return false;
        }
        let sub = vars.iter().find_map(|v| try_substitution(v, &cur));
        let next = match sub {
            Some(n) => n,
            None => {
                let v = vars
                    .iter()
                    .min_by_key(|v| {
                        let (mut lo, mut up) = (0usize, 0usize);
                        for k in cur.constraints.iter().filter(|k| k.mentions(v)) {
                            match k.rel {
                                Rel::Eq => {
                                    lo += 1;
                                    up += 1;
                                }
                                Rel::Le if k.coeff(v).is_positive() => up += 1,
                                Rel::Le => lo += 1,
                                Rel::Dvd(_) => {}
                            }
                        }
                        lo * up
                    })
                    .expect("nonempty");
                fm_real(v, &cur)
            }
        };
        cur = match next.simplify() {
            Some(s) => s,
            None => return true,
        };
        if cur.len() > cap {
            return false;
        }
    }
}

/// Enumerates the cubes over the atoms of `guards`. Branching only happens
/// on atoms of guards that are still undecided, and a branch is cut as soon
/// as its literals are inconsistent with `background` over the rationals.
pub fn split_assignments(
    guards: &[Conj],
    background: &Conj,
    atom_budget: usize,
    prune_cap: usize,
) -> Result<Vec<Cube>, PipelineError> {
    let mut index: BTreeMap<Constraint, usize> = BTreeMap::new();
    let mut atoms: Vec<Constraint> = Vec::new();
    let mut lits: Vec<Vec<(usize, bool)>> = Vec::new();
    for g in guards {
        let mut gl = Vec::new();
        for c in &g.constraints {
            let (key, pos) = c.atom_key();
            let id = *index.entry(key.clone()).or_insert_with(|| {
                atoms.push(key);
                atoms.len() - 1
            });
            gl.push((id, pos));
        }
        lits.push(gl);
    }
    if atoms.len() > atom_budget {
        return Err(PipelineError::AtomBudgetExceeded {
            atoms: atoms.len(),
            limit: atom_budget,
        });
    }
    let mut search = Search {
        atoms: &atoms,
        lits: &lits,
        background,
        prune_cap,
        assign: vec![None; atoms.len()],
        order: Vec::new(),
        out: Vec::new(),
    };
    search.run();
    Ok(search.out)
}

struct Search<'a> {
    atoms: &'a [Constraint],
    lits: &'a [Vec<(usize, bool)>],
    background: &'a Conj,
    prune_cap: usize,
    assign: Vec<Option<bool>>,
    /// Assigned atoms in assignment order.
    order: Vec<usize>,
    out: Vec<Cube>,
}

impl Search<'_> {
    fn run(&mut self) {
        let mut branch_atom = None;
        let mut true_guards = Vec::new();
        for (g, gl) in self.lits.iter().enumerate() {
            let mut falsified = false;
            let mut open = None;
            for &(a, pos) in gl {
                match self.assign[a] {
                    Some(v) if v != pos => falsified = true,
                    Some(_) => {}
                    None => open = open.or(Some(a)),
                }
            }
            if falsified {
                continue;
            }
            match open {
                None => true_guards.push(g),
                Some(a) => {
                    branch_atom.get_or_insert(a);
                }
            }
        }
        let Some(a) = branch_atom else {
            let mut literals: Vec<(Constraint, bool)> = self
                .order
                .iter()
                .map(|&i| (self.atoms[i].clone(), self.assign[i].unwrap()))
                .collect();
            literals.sort();
            self.out.push(Cube {
                literals,
                true_guards,
            });
            return;
        };
        for value in [true, false] {
            self.assign[a] = Some(value);
            self.order.push(a);
            if self.consistent() {
                self.run();
            }
            self.order.pop();
            self.assign[a] = None;
        }
    }

    fn consistent(&self) -> bool {
        let mut c = self.background.clone();
        c.extend(
            self.order
                .iter()
                .filter_map(|&i| as_constraint(&self.atoms[i], self.assign[i].unwrap())),
        );
        !real_infeasible(&c, self.prune_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qe::LinExpr;

    fn v(x: &str) -> LinExpr {
        LinExpr::var(x)
    }
    fn k(n: i64) -> LinExpr {
        LinExpr::constant(n)
    }

    #[test]
    fn disjoint_guards_give_exclusive_cubes() {
        // g0: x < 3, g1: 3 <= x
        let g0 = Conj::new(vec![Constraint::lt(v("x"), k(3))]);
        let g1 = Conj::new(vec![Constraint::le(k(3), v("x"))]);
        let cubes = split_assignments(&[g0, g1], &Conj::default(), 24, 64).unwrap();
        assert_eq!(cubes.len(), 2);
        for c in &cubes {
            assert_eq!(c.true_guards.len(), 1);
        }
    }

    #[test]
    fn background_prunes() {
        let g0 = Conj::new(vec![Constraint::lt(v("x"), k(0))]);
        let bg = Conj::new(vec![Constraint::nonneg("x")]);
        let cubes = split_assignments(&[g0], &bg, 24, 64).unwrap();
        assert_eq!(cubes.len(), 1);
        assert!(cubes[0].true_guards.is_empty());
    }

    #[test]
    fn empty_guard_is_always_true() {
        let cubes = split_assignments(&[Conj::default()], &Conj::default(), 24, 64).unwrap();
        assert_eq!(
            cubes,
            vec![Cube {
                literals: vec![],
                true_guards: vec![0]
            }]
        );
    }

    #[test]
    fn atom_budget() {
        let g: Vec<Conj> = (0..5)
            .map(|i| Conj::new(vec![Constraint::le(v("x"), k(i))]))
            .collect();
        assert!(matches!(
            split_assignments(&g, &Conj::default(), 3, 64),
            Err(PipelineError::AtomBudgetExceeded { atoms: 5, limit: 3 })
        ));
    }

    #[test]
    fn negated_equality_expands() {
        let c = Cube {
            literals: vec![(Constraint::eq(v("x"), k(1)), false)],
            true_guards: vec![],
        };
        assert_eq!(c.expand().len(), 2);
    }

    #[test]
    fn real_infeasibility() {
        let c = Conj::new(vec![
            Constraint::lt(v("x"), v("y")),
            Constraint::lt(v("y"), v("z")),
            Constraint::le(v("z"), v("x")),
        ]);
        assert!(real_infeasible(&c, 64));
        let c = Conj::new(vec![Constraint::lt(v("x"), v("y"))]);
        assert!(!real_infeasible(&c, 64));
    }
}
