use num_bigint::BigUint;
use thiserror::Error;

use super::{Arg, AtomKind, Formula, MacroKind, Quantifier, Var};

const MAX_DEPTH: usize = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unbound variable {name}")]
    Unbound { line: usize, col: usize, name: String },
}

pub(crate) fn is_keyword(s: &str) -> bool {
    matches!(s, "in" | "forall" | "exists")
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Num(BigUint),
    In,
    Forall,
    Exists,
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Arrow,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => format!("'{s}'"),
            Tok::Num(n) => format!("'#{n}'"),
            Tok::In => "'in'".into(),
            Tok::Forall => "'forall'".into(),
            Tok::Exists => "'exists'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Not => "'~'".into(),
            Tok::And => "'&'".into(),
            Tok::Or => "'|'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Eq => "'='".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let err = |message: String| ParseError::Syntax { line: l0, col: c0, message };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "in" => Tok::In,
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                _ if c.is_ascii_lowercase() => Tok::Lower(word),
                _ => Tok::Upper(word),
            }
        } else if c == '#' {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i == start + 1 {
                return Err(err("expected digits after '#'".into()));
            }
            let digits: String = chars[start + 1..i].iter().collect();
            Tok::Num(digits.parse().expect("decimal digits"))
        } else if c == '-' {
            if chars.get(i + 1) != Some(&'>') {
                return Err(err("expected '->'".into()));
            }
            i += 2;
            Tok::Arrow
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '~' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '=' => Tok::Eq,
                _ => return Err(err(format!("unexpected character '{c}'"))),
            }
        };
        col += i - start;
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
    declared: Option<&'a [Var]>,
    scope: Vec<Var>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::Syntax { line: t.line, col: t.col, message }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("formula nested too deeply".into()));
        }
        Ok(())
    }

    /// A variable use; checked against the declared set when one is given.
    fn use_var(&mut self) -> Result<Var, ParseError> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let x = self.binder_var()?;
        if let Some(decl) = self.declared {
            if !self.scope.contains(&x) && !decl.contains(&x) {
                return Err(ParseError::Unbound { line, col, name: x.to_string() });
            }
        }
        Ok(x)
    }

    fn binder_var(&mut self) -> Result<Var, ParseError> {
        match self.peek().clone() {
            Tok::Lower(s) => {
                self.bump();
                Ok(Var::new(&s))
            }
            t => Err(self.error(format!("expected variable, found {}", t.describe()))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let lhs = self.disjunction()?;
        let out = if *self.peek() == Tok::Arrow {
            self.bump();
            Formula::implies(lhs, self.formula()?)
        } else {
            lhs
        };
        self.depth -= 1;
        Ok(out)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let out = match self.peek() {
            Tok::Not => {
                self.bump();
                Formula::not(self.unary()?)
            }
            Tok::Forall | Tok::Exists => self.quantified()?,
            _ => self.primary()?,
        };
        self.depth -= 1;
        Ok(out)
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let q = if self.bump() == Tok::Forall {
            Quantifier::Forall
        } else {
            Quantifier::Exists
        };
        let x = self.binder_var()?;
        let bound = if *self.peek() == Tok::In {
            self.bump();
            Some(self.use_var()?)
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        self.scope.push(x.clone());
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        Ok(match bound {
            Some(w) => Formula::bquant(q, x, w, body),
            None => Formula::quant(q, x, body),
        })
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Upper(name) => {
                let at = self.pos;
                self.bump();
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.arg()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                let built = if let Some(m) = MacroKind::from_name(&name) {
                    Formula::macro_app(m, args)
                } else if let Some(a) = AtomKind::from_name(&name) {
                    Formula::atom(a, args)
                } else {
                    self.pos = at;
                    return Err(self.error(format!("unknown macro '{name}'")));
                };
                built.map_err(|e| {
                    self.pos = at;
                    self.error(e.to_string())
                })
            }
            Tok::Lower(_) => {
                let a = self.use_var()?;
                match self.bump() {
                    Tok::In => Ok(Formula::Mem(a, self.use_var()?)),
                    Tok::Eq => Ok(Formula::Eq(a, self.use_var()?)),
                    _ => {
                        self.pos -= 1;
                        Err(self.error(format!("expected 'in' or '=', found {}", self.peek().describe())))
                    }
                }
            }
            t => Err(self.error(format!("expected formula, found {}", t.describe()))),
        }
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        if let Tok::Num(n) = self.peek().clone() {
            self.bump();
            return Ok(Arg::Num(n));
        }
        Ok(Arg::Var(self.use_var()?))
    }
}

fn run(text: &str, declared: Option<&[Var]>) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0, declared, scope: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

/// Parses one formula; free variables are allowed.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    run(text, None)
}

/// Parses one formula whose free variables must all appear in `declared`.
pub fn parse_declared(text: &str, declared: &[Var]) -> Result<Formula, ParseError> {
    run(text, Some(declared))
}

/// A list file: one formula per non-blank line, `#` starts a comment line.
/// Reported line numbers refer to the file.
pub fn parse_list(text: &str) -> Result<Vec<Formula>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(parse(line).map_err(|e| match e {
            ParseError::Syntax { col, message, .. } => ParseError::Syntax { line: i + 1, col, message },
            ParseError::Unbound { col, name, .. } => ParseError::Unbound { line: i + 1, col, name },
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let f = parse("a in b & c in d | e in f -> g in h -> i in j").unwrap();
        let want = Formula::implies(
            Formula::or(Formula::and(Formula::mem("a", "b"), Formula::mem("c", "d")), Formula::mem("e", "f")),
            Formula::implies(Formula::mem("g", "h"), Formula::mem("i", "j")),
        );
        assert_eq!(f, want);
        let f = parse("~a in b & c = d").unwrap();
        assert_eq!(f, Formula::and(Formula::not(Formula::mem("a", "b")), Formula::eq("c", "d")));
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let f = parse("a = a & exists x. x in a | x = a").unwrap();
        let want = Formula::and(
            Formula::eq("a", "a"),
            Formula::exists("x", Formula::or(Formula::mem("x", "a"), Formula::eq("x", "a"))),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn error_positions() {
        match parse("exists x.\n  x in") {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 7)),
            other => panic!("{other:?}"),
        }
        match parse("x @ y") {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse("Frob(x)").is_err());
        assert!(parse("Pair(x)").is_err());
        assert!(parse("x in y)").is_err());
    }

    #[test]
    fn declared_variables() {
        let decl = [Var::new("a")];
        assert!(parse_declared("exists x. x in a", &decl).is_ok());
        match parse_declared("exists x. x in b", &decl) {
            Err(ParseError::Unbound { name, col, .. }) => assert_eq!((name.as_str(), col), ("b", 16)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn list_files() {
        let fs = parse_list("# header\nx in y\n\nexists z. z = z\n").unwrap();
        assert_eq!(fs.len(), 2);
        match parse_list("x in y\nx in\n") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = "~".repeat(5000) + "x in y";
        assert!(parse(&text).is_err());
        let text = "(".repeat(5000) + "x in y" + &")".repeat(5000);
        assert!(parse(&text).is_err());
    }

    #[test]
    fn numerals() {
        let f = parse("Nat(x, #12)").unwrap();
        assert_eq!(f, Formula::Macro(MacroKind::Nat, vec![Arg::Var(Var::new("x")), Arg::Num(12u32.into())]));
        assert!(parse("Nat(x, #)").is_err());
    }
}
