use num_bigint::BigInt;

use super::ast::Pos;
use super::SpecError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(BigInt),
    Prime,
    Colon,
    Semi,
    Comma,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    /// `#{`
    CardOpen,
    Pipe,
    Amp,
    Bang,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::Prime => "'",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::CardOpen => "#{",
            Tok::Pipe => "|",
            Tok::Amp => "&",
            Tok::Bang => "!",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SpecError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let next = chars.get(i + 1).copied();
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' if next == Some('{') => {
                adv = 2;
                Some(Tok::CardOpen)
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                adv = j - start;
                Some(Tok::Ident(chars[start..j].iter().collect()))
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                adv = j - start;
                let s: String = chars[start..j].iter().collect();
                Some(Tok::Num(s.parse().expect("digits")))
            }
            '\'' => Some(Tok::Prime),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '|' => Some(Tok::Pipe),
            '&' => Some(Tok::Amp),
            '!' if next == Some('=') => {
                adv = 2;
                Some(Tok::Ne)
            }
            '!' => Some(Tok::Bang),
            '=' => Some(Tok::Eq),
            '<' if next == Some('=') => {
                adv = 2;
                Some(Tok::Le)
            }
            '<' => Some(Tok::Lt),
            '>' if next == Some('=') => {
                adv = 2;
                Some(Tok::Ge)
            }
            '>' => Some(Tok::Gt),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            other => {
                return Err(SpecError::Syntax {
                    pos,
                    message: format!("unexpected character `{other}`"),
                    expected: Vec::new(),
                })
            }
        };
        if let Some(t) = tok {
            out.push((t, pos));
        }
        i += adv;
        col += adv;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn comments_and_cardinality() {
        assert_eq!(
            toks("z = #{k | V(k) = v0} # note\n"),
            vec![
                Tok::Ident("z".into()),
                Tok::Eq,
                Tok::CardOpen,
                Tok::Ident("k".into()),
                Tok::Pipe,
                Tok::Ident("V".into()),
                Tok::LParen,
                Tok::Ident("k".into()),
                Tok::RParen,
                Tok::Eq,
                Tok::Ident("v0".into()),
                Tok::RBrace,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn two_character_operators_and_positions() {
        let l = lex("a<=b\n  c' != 2").unwrap();
        assert_eq!(l[1].0, Tok::Le);
        assert_eq!(l[3].1, Pos { line: 2, col: 3 });
        assert_eq!(l[3].1.line, 2);
        assert_eq!(l[4].0, Tok::Prime);
        assert_eq!(l[5].0, Tok::Ne);
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(matches!(lex("a @ b"), Err(SpecError::Syntax { .. })));
    }
}
