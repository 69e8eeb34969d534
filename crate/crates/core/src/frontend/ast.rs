//! Syntax tree produced by the parser. Names are unresolved and no semantic
//! checks have run; positions are kept for diagnostics.

use std::fmt;

use num_bigint::BigInt;

/// 1-based line and column. Positions are diagnostics only: they never take
/// part in equality, so reparsed trees compare equal to the original.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortDecl {
    pub name: Ident,
    pub values: Vec<Ident>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntVarDecl {
    pub name: Ident,
    /// Declared `: bool`, i.e. restricted to {0, 1}.
    pub boolean: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: Ident,
    /// A sort name, or `int`.
    pub ty: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterDecl {
    pub name: Ident,
    pub var: Ident,
    pub body: PFormula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PCase {
    /// Explicit `forall x .` binder, if written.
    pub var: Option<Ident>,
    pub body: PFormula,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAtom {
    pub lhs: PTerm,
    pub op: RelOp,
    pub rhs: PTerm,
    /// `lhs = rhs mod m`.
    pub modulus: Option<BigInt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PFormula {
    True,
    False,
    Atom(PAtom),
    Not(Box<PFormula>),
    And(Vec<PFormula>),
    Or(Vec<PFormula>),
    Forall(Ident, Box<PFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PTerm {
    Name {
        name: Ident,
        primed: bool,
    },
    Num(BigInt),
    Read {
        array: Ident,
        primed: bool,
        var: Ident,
    },
    Card {
        var: Ident,
        body: Box<PFormula>,
    },
    Add(Box<PTerm>, Box<PTerm>),
    Sub(Box<PTerm>, Box<PTerm>),
    Neg(Box<PTerm>),
    Mul(Box<PTerm>, Box<PTerm>),
    Div(Box<PTerm>, Box<PTerm>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedSpec {
    pub params: Vec<Ident>,
    pub sorts: Vec<SortDecl>,
    pub intvars: Vec<IntVarDecl>,
    pub arrays: Vec<ArrayDecl>,
    pub counters: Vec<CounterDecl>,
    pub invariant: Vec<PCase>,
    pub init: Vec<PCase>,
    pub trans: Vec<PCase>,
    pub unsafe_: Option<PFormula>,
}
