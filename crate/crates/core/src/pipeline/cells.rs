//! Venn-region counters: one cell per joint valuation of the enumerated
//! arrays in scope.

use num_bigint::BigInt;
use num_traits::One;

use crate::logic::{Atom, Formula};
use crate::qe::{Constraint, LinExpr};
use crate::spec::SystemSpec;

use super::PipelineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellScope {
    /// Unprimed arrays only.
    Init,
    /// Unprimed and primed arrays.
    Trans,
}

/// One coordinate of a cell valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub array: String,
    pub primed: bool,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    /// Value index per slot.
    pub valuation: Vec<usize>,
    pub name: String,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSpace {
    pub scope: CellScope,
    pub slots: Vec<Slot>,
    pub cells: Vec<Cell>,
}

impl CellSpace {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn slot(&self, array: &str, primed: bool) -> Option<usize> {
        self.slots
            .iter()
            .position(|s| s.array == array && s.primed == primed)
    }

    /// Whether the cell's complete valuation satisfies the data formula `f`
    /// (all reads are taken to be at the one process the cell describes).
    pub fn satisfies(&self, cell: &Cell, f: &Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Not(g) => !self.satisfies(cell, g),
            Formula::And(gs) => gs.iter().all(|g| self.satisfies(cell, g)),
            Formula::Or(gs) => gs.iter().any(|g| self.satisfies(cell, g)),
            Formula::Atom(Atom::DataConst {
                array,
                primed,
                value,
                ..
            }) => {
                let s = self.slot(array, *primed).expect("array in cell scope");
                cell.valuation[s] == *value
            }
            Formula::Atom(Atom::DataArr {
                left,
                lprimed,
                right,
                rprimed,
                ..
            }) => {
                let l = self.slot(left, *lprimed).expect("array in cell scope");
                let r = self.slot(right, *rprimed).expect("array in cell scope");
                cell.valuation[l] == cell.valuation[r]
            }
            Formula::Atom(a) => panic!("arithmetic atom `{a}` in a data formula"),
            Formula::Forall(_, g) | Formula::ExistsInt(_, g) => self.satisfies(cell, g),
        }
    }

    /// Indices of the cells satisfying `f`.
    pub fn satisfying(&self, f: &Formula) -> Vec<usize> {
        self.cells
            .iter()
            .filter(|c| self.satisfies(c, f))
            .map(|c| c.index)
            .collect()
    }

    pub fn sum(&self, indices: &[usize]) -> LinExpr {
        let mut e = LinExpr::zero();
        for &i in indices {
            e.add_term(&BigInt::one(), &self.cells[i].name);
        }
        e
    }
}

pub fn build_cells(
    spec: &SystemSpec,
    scope: CellScope,
    budget: usize,
) -> Result<CellSpace, PipelineError> {
    let mut slots = Vec::new();
    for (a, sort) in spec.enumerated_arrays() {
        slots.push(Slot {
            array: a.name.clone(),
            primed: false,
            size: sort.values.len(),
        });
        if scope == CellScope::Trans {
            slots.push(Slot {
                array: a.name.clone(),
                primed: true,
                size: sort.values.len(),
            });
        }
    }
    slots.sort_by(|a, b| (&a.array, a.primed).cmp(&(&b.array, b.primed)));
    let mut total: usize = 1;
    for s in &slots {
        total = total.saturating_mul(s.size);
        if total > budget {
            return Err(PipelineError::CellBudgetExceeded {
                cells: total,
                limit: budget,
            });
        }
    }
    let mut cells = Vec::with_capacity(total);
    let mut valuation = vec![0usize; slots.len()];
    for index in 0..total {
        cells.push(Cell {
            valuation: valuation.clone(),
            name: format!("_c{index}"),
            index,
        });
        for k in (0..slots.len()).rev() {
            valuation[k] += 1;
            if valuation[k] < slots[k].size {
                break;
            }
            valuation[k] = 0;
        }
    }
    Ok(CellSpace {
        scope,
        slots,
        cells,
    })
}

/// `z = sum of the cells satisfying the body`, one equation per counter.
pub fn counters_as_cell_sums(defs: &[(String, Formula)], cs: &CellSpace) -> Vec<Constraint> {
    defs.iter()
        .map(|(name, body)| {
            Constraint::eq(LinExpr::var(name.clone()), cs.sum(&cs.satisfying(body)))
        })
        .collect()
}

/// `forall k. theta(k)` as cell constraints: the cells satisfying `theta`
/// account for all `N` processes, the cells partition the processes, and
/// every cell is nonnegative.
pub fn encode_forall_data(theta: &Formula, cs: &CellSpace) -> Vec<Constraint> {
    let n = LinExpr::var("N");
    let sat = cs.satisfying(theta);
    let all: Vec<usize> = (0..cs.len()).collect();
    let mut out = vec![
        Constraint::eq(n.clone(), cs.sum(&sat)),
        Constraint::eq(n, cs.sum(&all)),
    ];
    out.extend(cs.cells.iter().map(|c| Constraint::nonneg(&c.name)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load_spec;

    fn ot() -> SystemSpec {
        load_spec(include_str!("../../../../benchmarks/ot/spec.cf")).unwrap()
    }

    #[test]
    fn cell_counts_are_products_of_sort_sizes() {
        let s = ot();
        assert_eq!(build_cells(&s, CellScope::Init, 4096).unwrap().len(), 3 * 2);
        assert_eq!(
            build_cells(&s, CellScope::Trans, 4096).unwrap().len(),
            3 * 2 * 3 * 2
        );
        assert!(matches!(
            build_cells(&s, CellScope::Trans, 10),
            Err(PipelineError::CellBudgetExceeded { .. })
        ));
    }

    #[test]
    fn canonical_slot_order() {
        let cs = build_cells(&ot(), CellScope::Trans, 4096).unwrap();
        let order: Vec<(String, bool)> = cs
            .slots
            .iter()
            .map(|s| (s.array.clone(), s.primed))
            .collect();
        assert_eq!(
            order,
            vec![
                ("A".into(), false),
                ("A".into(), true),
                ("V".into(), false),
                ("V".into(), true)
            ]
        );
        assert_eq!(cs.cells[1].valuation, vec![0, 0, 0, 1]);
    }

    #[test]
    fn no_enumerated_arrays_gives_one_cell() {
        let s = load_spec("params: N;\ninit: true;\ntrans: true;\n").unwrap();
        let cs = build_cells(&s, CellScope::Trans, 4096).unwrap();
        assert_eq!(cs.len(), 1);
        assert!(cs.cells[0].valuation.is_empty());
    }

    #[test]
    fn primed_counter_covers_six_transition_cells() {
        let s = ot();
        let cs = build_cells(&s, CellScope::Trans, 4096).unwrap();
        let z11 = s.counters.iter().find(|c| c.name == "z11").unwrap();
        let primed = crate::logic::prime_state(&z11.body);
        assert_eq!(cs.satisfying(&primed).len(), 6);
        let init = build_cells(&s, CellScope::Init, 4096).unwrap();
        let z00 = s.counters.iter().find(|c| c.name == "z00").unwrap();
        assert_eq!(init.satisfying(&z00.body).len(), 1);
        assert!(init.satisfying(&Formula::False).is_empty());
    }
}
