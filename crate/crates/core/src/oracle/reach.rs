//! Explicit search over counter tuples, and bounded formula comparison.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::compiled::{solutions, CompiledDnf};
use super::{CompiledSystem, OracleError};

/// The tuples of a counter system at one `N`: counters in `[0, N]`,
/// integer variables in a given range, parameters other than `N` in
/// `[0, N]`.
pub struct AbstractSpace<'a> {
    sys: &'a CompiledSystem,
    n: i64,
    /// Inclusive range of each state slot.
    ranges: Vec<(i64, i64)>,
    budget: usize,
}

impl<'a> AbstractSpace<'a> {
    pub fn new(
        sys: &'a CompiledSystem,
        n: i64,
        intvar_range: (i64, i64),
        budget: usize,
    ) -> Result<Self, OracleError> {
        if n < 1 {
            return Err(OracleError::InvalidProcessCount);
        }
        if sys.locals_use_post() {
            return Err(OracleError::Unsupported(
                "a floor division over post-state values cannot be enumerated".into(),
            ));
        }
        let ranges = sys
            .state
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v == "N" {
                    (n, n)
                } else if sys.counters.contains(&i) || !sys.mutable.contains(&i) {
                    (0, n)
                } else {
                    intvar_range
                }
            })
            .collect();
        Ok(AbstractSpace {
            sys,
            n,
            ranges,
            budget,
        })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// Tuples satisfying the abstract init (and `extra`, when given).
    pub fn initial(&self, extra: Option<&CompiledDnf>) -> Vec<Vec<i64>> {
        let k = self.sys.state_len();
        let fixed: Vec<usize> = (0..k).filter(|i| !self.sys.mutable.contains(i)).collect();
        let mut out = BTreeSet::new();
        for params in product(&fixed.iter().map(|&i| self.ranges[i]).collect::<Vec<_>>()) {
            let mut pre = vec![0; k];
            for (&i, &v) in fixed.iter().zip(&params) {
                pre[i] = v;
            }
            let mut x = self.sys.vector(&pre, None);
            let free: Vec<(usize, i64, i64)> = self
                .sys
                .mutable
                .iter()
                .map(|&i| (i, self.ranges[i].0, self.ranges[i].1))
                .collect();
            let locals: BTreeSet<usize> = self.sys.local_slots().collect();
            for d in &self.sys.init.disjuncts {
                // locals may depend on the values being searched: search
                // without them, then check the whole disjunct
                let relaxed = d.restricted(|i| !locals.contains(&i));
                solutions(&relaxed, &mut x, &free, &mut |s| {
                    let y = self.sys.vector(&s[..k], None);
                    if d.holds(&y) && extra.is_none_or(|e| e.holds(&y)) {
                        out.insert(s[..k].to_vec());
                    }
                });
            }
        }
        out.into_iter().collect()
    }

    /// Post tuples of all abstract steps from `pre`, in order.
    pub fn successors(&self, pre: &[i64]) -> Result<Vec<Vec<i64>>, OracleError> {
        let mut x = self.sys.vector(pre, None);
        let free: Vec<(usize, i64, i64)> = self
            .sys
            .mutable
            .iter()
            .zip(&self.sys.primed)
            .map(|(&m, &p)| (p, self.ranges[m].0, self.ranges[m].1))
            .collect();
        let mut out = BTreeSet::new();
        let mut overflow = false;
        for d in &self.sys.trans.disjuncts {
            solutions(d, &mut x, &free, &mut |s| {
                if out.len() < self.budget {
                    out.insert(self.sys.post_of(s));
                } else {
                    overflow = true;
                }
            });
        }
        if overflow {
            return Err(OracleError::StateBudgetExceeded { limit: self.budget });
        }
        Ok(out.into_iter().collect())
    }
}

fn product(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut acc = vec![Vec::new()];
    for &(lo, hi) in ranges {
        let mut next = Vec::new();
        for a in &acc {
            for v in lo..=hi {
                let mut b = a.clone();
                b.push(v);
                next.push(b);
            }
        }
        acc = next;
    }
    acc
}

#[derive(Clone, Debug)]
pub struct ReachOptions {
    /// Inclusive range of integer variables.
    pub intvar_range: (i64, i64),
    /// Cap on visited tuples.
    pub budget: usize,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            intvar_range: (0, 1),
            budget: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reach {
    /// A shortest path from an initial tuple to a bad one (both included).
    Reachable {
        trace: Vec<BTreeMap<String, i64>>,
    },
    Unreachable {
        explored: usize,
    },
}

impl Reach {
    pub fn is_reachable(&self) -> bool {
        matches!(self, Reach::Reachable { .. })
    }
}

/// Breadth-first search over the tuples at `N = n`, from the abstract init
/// (restricted by `extra_init` when given) through the abstract steps.
pub fn bounded_reach(
    sys: &CompiledSystem,
    n: i64,
    bad: &CompiledDnf,
    extra_init: Option<&CompiledDnf>,
    opts: &ReachOptions,
) -> Result<Reach, OracleError> {
    let space = AbstractSpace::new(sys, n, opts.intvar_range, opts.budget)?;
    let mut parent: HashMap<Vec<i64>, Option<Vec<i64>>> = HashMap::new();
    let mut queue = VecDeque::new();
    let is_bad = |t: &[i64]| bad.holds(&sys.vector(t, None));
    let trace = |end: Vec<i64>, parent: &HashMap<Vec<i64>, Option<Vec<i64>>>| {
        let mut path = vec![end];
        while let Some(Some(p)) = parent.get(path.last().unwrap()) {
            path.push(p.clone());
        }
        path.reverse();
        Reach::Reachable {
            trace: path.iter().map(|t| sys.named(t)).collect(),
        }
    };
    for t in space.initial(extra_init) {
        if is_bad(&t) {
            parent.insert(t.clone(), None);
            return Ok(trace(t, &parent));
        }
        parent.insert(t.clone(), None);
        queue.push_back(t);
    }
    while let Some(t) = queue.pop_front() {
        for u in space.successors(&t)? {
            if parent.contains_key(&u) {
                continue;
            }
            parent.insert(u.clone(), Some(t.clone()));
            if is_bad(&u) {
                return Ok(trace(u, &parent));
            }
            if parent.len() > opts.budget {
                return Err(OracleError::StateBudgetExceeded { limit: opts.budget });
            }
            queue.push_back(u);
        }
    }
    Ok(Reach::Unreachable {
        explored: parent.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent {
        checked: usize,
    },
    /// An assignment on which the formulas differ, and the value of the first.
    Counterexample {
        assignment: BTreeMap<String, i64>,
        left: bool,
    },
}

/// Compares two predicates on every point; `names` label the coordinates.
pub fn check_equiv_bounded<I>(
    names: &[String],
    points: I,
    a: impl Fn(&[i64]) -> bool,
    b: impl Fn(&[i64]) -> bool,
    budget: usize,
) -> Result<Equivalence, OracleError>
where
    I: IntoIterator<Item = Vec<i64>>,
{
    let mut checked = 0;
    for p in points {
        checked += 1;
        if checked > budget {
            return Err(OracleError::StateBudgetExceeded { limit: budget });
        }
        let (l, r) = (a(&p), b(&p));
        if l != r {
            return Ok(Equivalence::Counterexample {
                assignment: names.iter().cloned().zip(p).collect(),
                left: l,
            });
        }
    }
    Ok(Equivalence::Equivalent { checked })
}

/// Every point of the box given by inclusive ranges, last coordinate fastest.
pub fn box_points(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    product(ranges)
}

/// Every tuple of `parts` nonnegative integers summing to `total`.
pub fn compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    fn go(total: i64, parts: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=total {
            cur.push(v);
            go(total - v, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(total, parts, &mut Vec::new(), &mut out);
    out
}
