use std::str::FromStr;

use super::ast::{CmpOp, Comparison, OAtom, PAtom, Query, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    Underscore,
    LParen,
    RParen,
    Comma,
    Semi,
    Arrow,
    Dot,
    Cmp(CmpOp),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| Error::Parse { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' | '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '.' if !chars.get(i + 1).is_some_and(char::is_ascii_digit) => {
                push(Tok::Dot, 1, &mut i, &mut col)
            }
            '=' => push(Tok::Cmp(CmpOp::Eq), 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'-') => push(Tok::Arrow, 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Cmp(CmpOp::Le), 2, &mut i, &mut col),
            '<' => push(Tok::Cmp(CmpOp::Lt), 1, &mut i, &mut col),
            '>' if chars.get(i + 1) == Some(&'=') => push(Tok::Cmp(CmpOp::Ge), 2, &mut i, &mut col),
            '>' => push(Tok::Cmp(CmpOp::Gt), 1, &mut i, &mut col),
            '\'' | '"' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|&d| d == c || d == '\n')
                    .filter(|&k| chars[i + 1 + k] == c)
                    .ok_or_else(|| err(line, col, "unterminated string literal".into()))?;
                let s: String = chars[i + 1..i + 1 + close].iter().collect();
                push(Tok::Str(s), close + 2, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                if s.parse::<f64>().is_err() {
                    return Err(err(line, col, format!("bad number `{s}`")));
                }
                push(Tok::Num(s), j - i, &mut i, &mut col);
            }
            '_' if !chars.get(i + 1).is_some_and(|d| d.is_alphanumeric() || *d == '_') => {
                push(Tok::Underscore, 1, &mut i, &mut col)
            }
            c if c.is_alphabetic() => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Ident(s), j - i, &mut i, &mut col);
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    wildcards: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self
            .toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.end);
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let t = match self.peek() {
            Some(Tok::Underscore) => {
                self.wildcards += 1;
                Term::Var(format!("_{}", self.wildcards))
            }
            Some(Tok::Ident(s)) => Term::Var(s.clone()),
            Some(Tok::Str(s)) | Some(Tok::Num(s)) => Term::Const(s.clone()),
            _ => return Err(self.error("expected a term")),
        };
        self.pos += 1;
        Ok(t)
    }

    fn constant(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Str(s)) | Some(Tok::Num(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a constant")),
        }
    }

    fn query(&mut self) -> Result<Query> {
        let head = self.ident("query head")?;
        self.expect(Tok::LParen, "`(`")?;
        self.expect(Tok::RParen, "`)` (only Boolean queries are supported)")?;
        self.expect(Tok::Arrow, "`<-`")?;
        let mut q = Query {
            head,
            p_atoms: Vec::new(),
            o_atoms: Vec::new(),
            comparisons: Vec::new(),
        };
        loop {
            self.atom(&mut q)?;
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::Semi) | Some(Tok::Dot) if self.pos + 1 == self.toks.len() => {
                    self.pos += 1;
                    break;
                }
                None => break,
                _ => return Err(self.error("expected `,` or end of query")),
            }
        }
        if self.pos < self.toks.len() {
            return Err(self.error("trailing input after query"));
        }
        Ok(q)
    }

    fn atom(&mut self, q: &mut Query) -> Result<()> {
        if matches!(self.peek(), Some(Tok::Ident(_))) && self.peek_at(1) == Some(&Tok::LParen) {
            let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
            let relation = self.ident("relation name")?;
            self.pos += 1;
            let mut groups: Vec<Vec<Term>> = vec![Vec::new()];
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    if self.peek() != Some(&Tok::Semi) {
                        groups.last_mut().unwrap().push(self.term()?);
                    }
                    match self.peek() {
                        Some(Tok::Comma) => self.pos += 1,
                        Some(Tok::Semi) => {
                            self.pos += 1;
                            groups.push(Vec::new());
                        }
                        Some(Tok::RParen) => break,
                        _ => return Err(self.error("expected `,`, `;` or `)`")),
                    }
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            match groups.len() {
                1 => q.o_atoms.push(OAtom {
                    relation,
                    terms: groups.pop().unwrap(),
                }),
                3 if groups[1].len() == 1 && groups[2].len() == 1 => {
                    let right = groups.pop().unwrap().pop().unwrap();
                    let left = groups.pop().unwrap().pop().unwrap();
                    q.p_atoms.push(PAtom {
                        relation,
                        session: groups.pop().unwrap(),
                        left,
                        right,
                    });
                }
                _ => {
                    return Err(Error::Arity(format!(
                        "{relation} at {line}:{column}: preference atoms take `session; left; right`"
                    )))
                }
            }
            return Ok(());
        }
        let term = self.term()?;
        let op = match self.peek() {
            Some(Tok::Cmp(op)) => *op,
            _ => return Err(self.error("expected a comparison operator")),
        };
        self.pos += 1;
        let value = self.constant()?;
        q.comparisons.push(Comparison { term, op, value });
        Ok(())
    }
}

/// Parses `Q() <- atom, ...`. Whitespace-insensitive; `_` is a fresh
/// variable; constants are quoted or numeric.
pub fn parse_query(text: &str) -> Result<Query> {
    let toks = lex(text)?;
    let last_line = text.lines().count().max(1);
    let last_col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Parser {
        toks,
        pos: 0,
        wildcards: 0,
        end: (last_line, last_col),
    }
    .query()
}

impl FromStr for Query {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_query(s)
    }
}
