use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{lex, Tok};
use super::SpecError;

const SECTIONS: [&str; 9] = [
    "params",
    "sorts",
    "intvars",
    "arrays",
    "counters",
    "invariant",
    "init",
    "trans",
    "unsafe",
];

const KEYWORDS: [&str; 6] = ["forall", "case", "true", "false", "mod", "div"];

pub fn parse_spec(text: &str) -> Result<ParsedSpec, SpecError> {
    let mut p = Parser::new(text)?;
    let spec = p.spec()?;
    check_duplicates(&spec)?;
    Ok(spec)
}

/// Parses a standalone formula (used for ad-hoc unsafe conditions and
/// property files).
pub fn parse_formula(text: &str) -> Result<PFormula, SpecError> {
    let mut p = Parser::new(text)?;
    let f = p.disj()?;
    p.expect_eof()?;
    Ok(f)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, SpecError> {
        Ok(Parser {
            toks: lex(text)?,
            i: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, SpecError> {
        Err(SpecError::Syntax {
            pos: self.pos(),
            message: format!("unexpected {}", self.peek().describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SpecError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(&[t.text()])
        }
    }

    fn expect_eof(&mut self) -> Result<(), SpecError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<Ident, SpecError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name)
                if !KEYWORDS.contains(&name.as_str()) && !SECTIONS.contains(&name.as_str()) =>
            {
                self.bump();
                Ok(Ident { name, pos })
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn at_section(&self) -> bool {
        match self.peek() {
            Tok::Eof => true,
            Tok::Ident(s) => SECTIONS.contains(&s.as_str()) && *self.peek_at(1) == Tok::Colon,
            _ => false,
        }
    }

    fn section(&mut self, name: &str) -> Result<bool, SpecError> {
        if self.is_kw(name) && *self.peek_at(1) == Tok::Colon {
            self.bump();
            self.bump();
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn require_section(&mut self, name: &'static str) -> Result<(), SpecError> {
        if self.section(name)? {
            Ok(())
        } else {
            Err(SpecError::Syntax {
                pos: self.pos(),
                message: format!("expected section '{name}'"),
                expected: vec![format!("{name}:")],
            })
        }
    }

    /// `a, b; c;` style lists, ending at the next section.
    fn name_list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, SpecError>,
    ) -> Result<Vec<T>, SpecError> {
        let mut out = Vec::new();
        while !self.at_section() {
            out.push(item(self)?);
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::Semi)?;
            }
        }
        Ok(out)
    }

    fn items<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, SpecError>,
    ) -> Result<Vec<T>, SpecError> {
        let mut out = Vec::new();
        while !self.at_section() {
            out.push(item(self)?);
            self.expect(Tok::Semi)?;
        }
        Ok(out)
    }

    fn spec(&mut self) -> Result<ParsedSpec, SpecError> {
        let mut s = ParsedSpec::default();
        self.require_section("params")?;
        s.params = self.name_list(|p| p.ident())?;
        if self.section("sorts")? {
            s.sorts = self.items(|p| {
                let name = p.ident()?;
                p.expect(Tok::Eq)?;
                p.expect(Tok::LBrace)?;
                let mut values = vec![p.ident()?];
                while p.eat(&Tok::Comma) {
                    values.push(p.ident()?);
                }
                p.expect(Tok::RBrace)?;
                Ok(SortDecl { name, values })
            })?;
        }
        if self.section("intvars")? {
            s.intvars = self.name_list(|p| {
                let name = p.ident()?;
                let mut boolean = false;
                if p.eat(&Tok::Colon) {
                    if p.is_kw("bool") {
                        boolean = true;
                    } else if !p.is_kw("int") {
                        return p.error(&["bool", "int"]);
                    }
                    p.bump();
                }
                Ok(IntVarDecl { name, boolean })
            })?;
        }
        if self.section("arrays")? {
            s.arrays = self.name_list(|p| {
                let name = p.ident()?;
                p.expect(Tok::Colon)?;
                let ty = p.ident()?;
                Ok(ArrayDecl { name, ty })
            })?;
        }
        if self.section("counters")? {
            s.counters = self.items(|p| {
                let name = p.ident()?;
                p.expect(Tok::Eq)?;
                p.expect(Tok::CardOpen)?;
                let var = p.ident()?;
                p.expect(Tok::Pipe)?;
                let body = p.disj()?;
                p.expect(Tok::RBrace)?;
                Ok(CounterDecl { name, var, body })
            })?;
        }
        if self.section("invariant")? {
            s.invariant = self.items(|p| p.case())?;
        }
        self.require_section("init")?;
        s.init = self.items(|p| p.case())?;
        self.require_section("trans")?;
        s.trans = self.items(|p| {
            if p.is_kw("case") {
                p.bump();
            }
            p.case()
        })?;
        if self.section("unsafe")? {
            let f = self.disj()?;
            self.expect(Tok::Semi)?;
            s.unsafe_ = Some(f);
        }
        if *self.peek() != Tok::Eof {
            let expected: Vec<&str> = SECTIONS.to_vec();
            return self.error(&expected);
        }
        Ok(s)
    }

    fn case(&mut self) -> Result<PCase, SpecError> {
        let pos = self.pos();
        if self.is_kw("forall") {
            self.bump();
            let var = self.ident()?;
            self.expect(Tok::Dot)?;
            let body = self.disj()?;
            return Ok(PCase {
                var: Some(var),
                body,
                pos,
            });
        }
        let body = self.disj()?;
        Ok(PCase {
            var: None,
            body,
            pos,
        })
    }

    fn disj(&mut self) -> Result<PFormula, SpecError> {
        let mut parts = vec![self.conj()?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            PFormula::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<PFormula, SpecError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            PFormula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<PFormula, SpecError> {
        if self.eat(&Tok::Bang) {
            return Ok(PFormula::Not(Box::new(self.unary()?)));
        }
        if self.is_kw("forall") {
            self.bump();
            let var = self.ident()?;
            self.expect(Tok::Dot)?;
            return Ok(PFormula::Forall(var, Box::new(self.disj()?)));
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(PFormula::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(PFormula::False);
        }
        if *self.peek() == Tok::LParen {
            let save = self.i;
            self.bump();
            if let Ok(f) = self.disj() {
                if self.eat(&Tok::RParen) && !self.continues_term() {
                    return Ok(f);
                }
            }
            self.i = save;
        }
        self.atom().map(PFormula::Atom)
    }

    /// After a parenthesized group: would the group be part of a term?
    fn continues_term(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Eq
                | Tok::Ne
                | Tok::Lt
                | Tok::Le
                | Tok::Gt
                | Tok::Ge
                | Tok::Plus
                | Tok::Minus
                | Tok::Star
        ) || self.is_kw("div")
            || self.is_kw("mod")
    }

    fn atom(&mut self) -> Result<PAtom, SpecError> {
        let pos = self.pos();
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Eq => RelOp::Eq,
            Tok::Ne => RelOp::Ne,
            Tok::Lt => RelOp::Lt,
            Tok::Le => RelOp::Le,
            Tok::Gt => RelOp::Gt,
            Tok::Ge => RelOp::Ge,
            _ => return self.error(&["=", "!=", "<", "<=", ">", ">="]),
        };
        self.bump();
        let rhs = self.term()?;
        let mut modulus = None;
        if self.is_kw("mod") {
            self.bump();
            match self.bump() {
                Tok::Num(n) => modulus = Some(n),
                _ => {
                    self.i -= 1;
                    return self.error(&["numeral"]);
                }
            }
        }
        Ok(PAtom {
            lhs,
            op,
            rhs,
            modulus,
            pos,
        })
    }

    fn term(&mut self) -> Result<PTerm, SpecError> {
        let mut t = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                t = PTerm::Add(Box::new(t), Box::new(self.product()?));
            } else if self.eat(&Tok::Minus) {
                t = PTerm::Sub(Box::new(t), Box::new(self.product()?));
            } else {
                return Ok(t);
            }
        }
    }

    fn product(&mut self) -> Result<PTerm, SpecError> {
        let mut t = self.unary_term()?;
        loop {
            if self.eat(&Tok::Star) {
                t = PTerm::Mul(Box::new(t), Box::new(self.unary_term()?));
            } else if self.is_kw("div") {
                self.bump();
                t = PTerm::Div(Box::new(t), Box::new(self.unary_term()?));
            } else {
                return Ok(t);
            }
        }
    }

    fn unary_term(&mut self) -> Result<PTerm, SpecError> {
        if self.eat(&Tok::Minus) {
            return Ok(PTerm::Neg(Box::new(self.unary_term()?)));
        }
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(PTerm::Num(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::CardOpen => {
                self.bump();
                let var = self.ident()?;
                self.expect(Tok::Pipe)?;
                let body = self.disj()?;
                self.expect(Tok::RBrace)?;
                Ok(PTerm::Card {
                    var,
                    body: Box::new(body),
                })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                let primed = self.eat(&Tok::Prime);
                if self.eat(&Tok::LParen) {
                    let var = self.ident()?;
                    self.expect(Tok::RParen)?;
                    Ok(PTerm::Read {
                        array: name,
                        primed,
                        var,
                    })
                } else {
                    Ok(PTerm::Name { name, primed })
                }
            }
            _ => self.error(&["numeral", "identifier", "(", "#{", "-"]),
        }
    }
}

fn check_duplicates(s: &ParsedSpec) -> Result<(), SpecError> {
    let mut seen: BTreeMap<&str, Pos> = BTreeMap::new();
    let names = s
        .params
        .iter()
        .chain(s.sorts.iter().map(|d| &d.name))
        .chain(s.intvars.iter().map(|d| &d.name))
        .chain(s.arrays.iter().map(|d| &d.name))
        .chain(s.counters.iter().map(|d| &d.name));
    for id in names {
        if let Some(prev) = seen.insert(&id.name, id.pos) {
            return Err(SpecError::DuplicateDeclaration {
                name: id.name.clone(),
                pos: id.pos,
                previous: prev,
            });
        }
    }
    for sort in &s.sorts {
        let mut vals: BTreeMap<&str, Pos> = BTreeMap::new();
        for v in &sort.values {
            if let Some(prev) = vals.insert(&v.name, v.pos) {
                return Err(SpecError::DuplicateDeclaration {
                    name: v.name.clone(),
                    pos: v.pos,
                    previous: prev,
                });
            }
        }
    }
    Ok(())
}
