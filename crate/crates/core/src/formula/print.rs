use std::fmt::{self, Write};

use super::{Arg, Formula};

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(x) => write!(f, "{x}"),
            Arg::Num(n) => write!(f, "#{n}"),
        }
    }
}

fn is_atomic(f: &Formula) -> bool {
    matches!(f, Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) | Formula::Atom(..) | Formula::Not(_))
}

fn operand(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    if is_atomic(f) {
        write!(out, "{f}")
    } else {
        write!(out, "({f})")
    }
}

fn args(out: &mut fmt::Formatter<'_>, name: &str, args: &[Arg]) -> fmt::Result {
    out.write_str(name)?;
    out.write_char('(')?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.write_str(", ")?;
        }
        write!(out, "{a}")?;
    }
    out.write_char(')')
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Mem(a, b) => write!(f, "{a} in {b}"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(a) => {
                f.write_char('~')?;
                match **a {
                    Formula::Mem(..) | Formula::Eq(..) => write!(f, "({a})"),
                    _ => operand(f, a),
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let op = match self {
                    Formula::And(..) => " & ",
                    Formula::Or(..) => " | ",
                    _ => " -> ",
                };
                operand(f, a)?;
                f.write_str(op)?;
                operand(f, b)
            }
            Formula::Forall(x, body) => write!(f, "forall {x}. {body}"),
            Formula::Exists(x, body) => write!(f, "exists {x}. {body}"),
            Formula::BForall(x, w, body) => write!(f, "forall {x} in {w}. {body}"),
            Formula::BExists(x, w, body) => write!(f, "exists {x} in {w}. {body}"),
            Formula::Macro(k, a) => args(f, k.name(), a),
            Formula::Atom(k, a) => args(f, k.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::formula::parse;

    #[test]
    fn prints_round_trip() {
        for src in [
            "x in y",
            "~(x = y)",
            "(a in b & c in d) | ~(e = f)",
            "forall y in x. forall z in y. z in x",
            "(exists x. x in a) & (forall y. y = y)",
            "a in b -> (b in c -> c in d)",
            "(a in b -> b in c) -> c in d",
            "~~(x in y)",
            "~(exists x. x in y)",
            "Pair(z, x, y) & Nat(n, #3)",
            "IsLevel(a, #2)",
        ] {
            let f = parse(src).unwrap();
            assert_eq!(f.to_string(), src, "print of {src}");
            assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }
}
