//! The ∈-language: formulas, variables, macros and the syntactic operations on them.

mod godel;
mod macros;
mod parse;
mod print;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

pub use godel::{decode, diag, diagonalize, encode, Diagonal, DiagonalizeError, GodelCode};
pub use macros::{AtomKind, Complexity, MacroKind, ATOMS, MACROS, MAX_NUMERAL_EXPANSION};
pub use parse::{parse, parse_declared, parse_list, ParseError};

/// A variable name, `[a-z][a-zA-Z0-9_]*`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether `name` is a syntactically valid variable.
    pub fn is_valid_name(name: &str) -> bool {
        let mut chars = name.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !parse::is_keyword(name)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Argument of a macro or interpreted atom.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Arg {
    Var(Var),
    /// A von Neumann numeral literal `#k`.
    Num(BigUint),
}

impl Arg {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Arg::Var(v) => Some(v),
            Arg::Num(_) => None,
        }
    }
}

impl From<Var> for Arg {
    fn from(v: Var) -> Arg {
        Arg::Var(v)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Mem(Var, Var),
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    /// `∀v ∈ bound. body`; `bound` is resolved outside the binder.
    BForall(Var, Var, Box<Formula>),
    BExists(Var, Var, Box<Formula>),
    Macro(MacroKind, Vec<Arg>),
    Atom(AtomKind, Vec<Arg>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable {0} would be captured by relativization")]
    Capture(Var),
    #[error("{name} expects {expected} arguments, got {found}")]
    Arity {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of {name} must be a {expected}")]
    ArgKind {
        name: &'static str,
        index: usize,
        expected: &'static str,
    },
    #[error("numeral #{0} is too large to expand")]
    NumeralTooLarge(BigUint),
}

pub fn v(name: &str) -> Var {
    Var::new(name)
}

impl Formula {
    pub fn mem(a: impl Into<Var>, b: impl Into<Var>) -> Formula {
        Formula::Mem(a.into(), b.into())
    }

    pub fn eq(a: impl Into<Var>, b: impl Into<Var>) -> Formula {
        Formula::Eq(a.into(), b.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(x: impl Into<Var>, body: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: impl Into<Var>, body: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(body))
    }

    pub fn bforall(x: impl Into<Var>, bound: impl Into<Var>, body: Formula) -> Formula {
        Formula::BForall(x.into(), bound.into(), Box::new(body))
    }

    pub fn bexists(x: impl Into<Var>, bound: impl Into<Var>, body: Formula) -> Formula {
        Formula::BExists(x.into(), bound.into(), Box::new(body))
    }

    pub fn quant(q: Quantifier, x: Var, body: Formula) -> Formula {
        match q {
            Quantifier::Forall => Formula::forall(x, body),
            Quantifier::Exists => Formula::exists(x, body),
        }
    }

    pub fn bquant(q: Quantifier, x: Var, bound: Var, body: Formula) -> Formula {
        match q {
            Quantifier::Forall => Formula::bforall(x, bound, body),
            Quantifier::Exists => Formula::bexists(x, bound, body),
        }
    }

    /// Conjunction of a non-empty list, associated to the left.
    pub fn and_all(mut parts: Vec<Formula>) -> Formula {
        let first = parts.remove(0);
        parts.into_iter().fold(first, Formula::and)
    }

    pub fn or_all(mut parts: Vec<Formula>) -> Formula {
        let first = parts.remove(0);
        parts.into_iter().fold(first, Formula::or)
    }

    /// Macro application; arity and argument kinds are checked.
    pub fn macro_app(kind: MacroKind, args: Vec<Arg>) -> Result<Formula, FormulaError> {
        kind.check_args(&args)?;
        Ok(Formula::Macro(kind, args))
    }

    pub fn atom(kind: AtomKind, args: Vec<Arg>) -> Result<Formula, FormulaError> {
        kind.check_args(&args)?;
        Ok(Formula::Atom(kind, args))
    }

    /// Shorthand for a macro over variable arguments.
    pub fn mac(kind: MacroKind, args: &[&Var]) -> Formula {
        Formula::macro_app(kind, args.iter().map(|v| Arg::Var((*v).clone())).collect())
            .expect("macro arity")
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut seen, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, seen: &mut HashSet<Var>, out: &mut Vec<Var>) {
        let mut note = |x: &Var, bound: &Vec<Var>| {
            if !bound.contains(x) && seen.insert(x.clone()) {
                out.push(x.clone());
            }
        };
        match self {
            Formula::Mem(a, b) | Formula::Eq(a, b) => {
                note(a, bound);
                note(b, bound);
            }
            Formula::Not(a) => a.collect_free(bound, seen, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, seen, out);
                b.collect_free(bound, seen, out);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, seen, out);
                bound.pop();
            }
            Formula::BForall(x, w, body) | Formula::BExists(x, w, body) => {
                note(w, bound);
                bound.push(x.clone());
                body.collect_free(bound, seen, out);
                bound.pop();
            }
            Formula::Macro(_, args) | Formula::Atom(_, args) => {
                for a in args {
                    if let Arg::Var(x) = a {
                        note(x, bound);
                    }
                }
            }
        }
    }

    pub fn has_free(&self, x: &Var) -> bool {
        self.free_vars().contains(x)
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring anywhere, free or bound.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |x| {
            out.insert(x.clone());
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Formula::Mem(a, b) | Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(a) => a.visit_vars(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                f(x);
                body.visit_vars(f);
            }
            Formula::BForall(x, w, body) | Formula::BExists(x, w, body) => {
                f(x);
                f(w);
                body.visit_vars(f);
            }
            Formula::Macro(_, args) | Formula::Atom(_, args) => {
                for a in args {
                    if let Arg::Var(x) = a {
                        f(x);
                    }
                }
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) | Formula::Atom(..) => 1,
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.size() + b.size(),
            Formula::Forall(_, b)
            | Formula::Exists(_, b)
            | Formula::BForall(_, _, b)
            | Formula::BExists(_, _, b) => 1 + b.size(),
        }
    }

    /// Nesting depth of quantifiers (bounded and unbounded).
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) | Formula::Atom(..) => 0,
            Formula::Not(a) => a.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Forall(_, b)
            | Formula::Exists(_, b)
            | Formula::BForall(_, _, b)
            | Formula::BExists(_, _, b) => 1 + b.quantifier_depth(),
        }
    }

    pub fn has_unbounded_quantifier(&self) -> bool {
        match self {
            Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) | Formula::Atom(..) => false,
            Formula::Not(a) => a.has_unbounded_quantifier(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_unbounded_quantifier() || b.has_unbounded_quantifier()
            }
            Formula::Forall(..) | Formula::Exists(..) => true,
            Formula::BForall(_, _, b) | Formula::BExists(_, _, b) => b.has_unbounded_quantifier(),
        }
    }

    pub fn has_interpreted_atom(&self) -> bool {
        match self {
            Formula::Atom(..) => true,
            Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) => false,
            Formula::Not(a) => a.has_interpreted_atom(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_interpreted_atom() || b.has_interpreted_atom()
            }
            Formula::Forall(_, b)
            | Formula::Exists(_, b)
            | Formula::BForall(_, _, b)
            | Formula::BExists(_, _, b) => b.has_interpreted_atom(),
        }
    }

    /// Whether only `∈`, `=`, connectives and quantifiers occur.
    pub fn is_macro_free(&self) -> bool {
        match self {
            Formula::Macro(..) | Formula::Atom(..) => false,
            Formula::Mem(..) | Formula::Eq(..) => true,
            Formula::Not(a) => a.is_macro_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_macro_free() && b.is_macro_free()
            }
            Formula::Forall(_, b)
            | Formula::Exists(_, b)
            | Formula::BForall(_, _, b)
            | Formula::BExists(_, _, b) => b.is_macro_free(),
        }
    }

    /// Alpha-normal form: bound variables renamed by binder depth to the
    /// lowest canonical names (`v0`, `v1`, ...) that are not free in the formula.
    pub fn canonical(&self) -> Formula {
        let free: HashSet<Var> = self.free_vars().into_iter().collect();
        let mut names = Vec::new();
        let mut scope: Vec<(Var, Var)> = Vec::new();
        self.canon_rec(&free, &mut names, &mut scope)
    }

    fn canon_rec(&self, free: &HashSet<Var>, names: &mut Vec<Var>, scope: &mut Vec<(Var, Var)>) -> Formula {
        let look = |x: &Var, scope: &Vec<(Var, Var)>| {
            scope
                .iter()
                .rev()
                .find(|(from, _)| from == x)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| x.clone())
        };
        let depth = scope.len();
        while names.len() <= depth {
            let mut i = names.last().map_or(0, |last: &Var| {
                last.as_str()[1..].parse::<usize>().expect("canonical name") + 1
            });
            loop {
                let cand = Var::new(&format!("v{i}"));
                if !free.contains(&cand) {
                    names.push(cand);
                    break;
                }
                i += 1;
            }
        }
        match self {
            Formula::Mem(a, b) => Formula::Mem(look(a, scope), look(b, scope)),
            Formula::Eq(a, b) => Formula::Eq(look(a, scope), look(b, scope)),
            Formula::Not(a) => Formula::not(a.canon_rec(free, names, scope)),
            Formula::And(a, b) => Formula::and(a.canon_rec(free, names, scope), b.canon_rec(free, names, scope)),
            Formula::Or(a, b) => Formula::or(a.canon_rec(free, names, scope), b.canon_rec(free, names, scope)),
            Formula::Implies(a, b) => {
                Formula::implies(a.canon_rec(free, names, scope), b.canon_rec(free, names, scope))
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let name = names[depth].clone();
                scope.push((x.clone(), name.clone()));
                let inner = body.canon_rec(free, names, scope);
                scope.pop();
                if matches!(self, Formula::Forall(..)) {
                    Formula::forall(name, inner)
                } else {
                    Formula::exists(name, inner)
                }
            }
            Formula::BForall(x, w, body) | Formula::BExists(x, w, body) => {
                let bound = look(w, scope);
                let name = names[depth].clone();
                scope.push((x.clone(), name.clone()));
                let inner = body.canon_rec(free, names, scope);
                scope.pop();
                if matches!(self, Formula::BForall(..)) {
                    Formula::bforall(name, bound, inner)
                } else {
                    Formula::bexists(name, bound, inner)
                }
            }
            Formula::Macro(k, args) => Formula::Macro(*k, rename_args(args, |x| look(x, scope))),
            Formula::Atom(k, args) => Formula::Atom(*k, rename_args(args, |x| look(x, scope))),
        }
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.canonical() == other.canonical()
    }

    /// Canonical print form; equal for alpha-equal formulas.
    pub fn canonical_text(&self) -> String {
        self.canonical().to_string()
    }

    /// Capture-avoiding replacement of the free occurrences of `x` by `y`.
    pub fn substitute(&self, x: &Var, y: &Var) -> Formula {
        if x == y {
            return self.clone();
        }
        let sub = |a: &Var| if a == x { y.clone() } else { a.clone() };
        match self {
            Formula::Mem(a, b) => Formula::Mem(sub(a), sub(b)),
            Formula::Eq(a, b) => Formula::Eq(sub(a), sub(b)),
            Formula::Not(a) => Formula::not(a.substitute(x, y)),
            Formula::And(a, b) => Formula::and(a.substitute(x, y), b.substitute(x, y)),
            Formula::Or(a, b) => Formula::or(a.substitute(x, y), b.substitute(x, y)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(x, y), b.substitute(x, y)),
            Formula::Forall(z, body) | Formula::Exists(z, body) => {
                let q = if matches!(self, Formula::Forall(..)) {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let (z, body) = subst_binder(z, body, x, y);
                Formula::quant(q, z, body)
            }
            Formula::BForall(z, w, body) | Formula::BExists(z, w, body) => {
                let q = if matches!(self, Formula::BForall(..)) {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let w = sub(w);
                let (z, body) = subst_binder(z, body, x, y);
                Formula::bquant(q, z, w, body)
            }
            Formula::Macro(k, args) => Formula::Macro(*k, rename_args(args, sub)),
            Formula::Atom(k, args) => Formula::Atom(*k, rename_args(args, sub)),
        }
    }

    /// Simultaneous capture-avoiding renaming of free variables.
    pub fn substitute_many(&self, map: &[(Var, Var)]) -> Formula {
        // Route through fresh intermediates so that swaps like [x:=y, y:=x] work.
        let mut avoid: BTreeSet<Var> = self.all_vars();
        for (a, b) in map {
            avoid.insert(a.clone());
            avoid.insert(b.clone());
        }
        let mut tmp = Vec::new();
        let mut out = self.clone();
        for (a, _) in map {
            let t = fresh_var("t", &avoid);
            avoid.insert(t.clone());
            out = out.substitute(a, &t);
            tmp.push(t);
        }
        for (t, (_, b)) in tmp.iter().zip(map) {
            out = out.substitute(t, b);
        }
        out
    }

    /// Renames every binder named `x` (free occurrences are untouched).
    pub fn rename_bound(&self, x: &Var, avoid: &BTreeSet<Var>) -> Formula {
        let mut all = self.all_vars();
        all.extend(avoid.iter().cloned());
        let fresh = fresh_var(x.as_str(), &all);
        self.rename_bound_rec(x, &fresh)
    }

    fn rename_bound_rec(&self, x: &Var, fresh: &Var) -> Formula {
        match self {
            Formula::Not(a) => Formula::not(a.rename_bound_rec(x, fresh)),
            Formula::And(a, b) => Formula::and(a.rename_bound_rec(x, fresh), b.rename_bound_rec(x, fresh)),
            Formula::Or(a, b) => Formula::or(a.rename_bound_rec(x, fresh), b.rename_bound_rec(x, fresh)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_bound_rec(x, fresh), b.rename_bound_rec(x, fresh))
            }
            Formula::Forall(z, body) | Formula::Exists(z, body) => {
                let q = if matches!(self, Formula::Forall(..)) {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let inner = body.rename_bound_rec(x, fresh);
                if z == x {
                    Formula::quant(q, fresh.clone(), inner.substitute(x, fresh))
                } else {
                    Formula::quant(q, z.clone(), inner)
                }
            }
            Formula::BForall(z, w, body) | Formula::BExists(z, w, body) => {
                let q = if matches!(self, Formula::BForall(..)) {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let inner = body.rename_bound_rec(x, fresh);
                if z == x {
                    Formula::bquant(q, fresh.clone(), w.clone(), inner.substitute(x, fresh))
                } else {
                    Formula::bquant(q, z.clone(), w.clone(), inner)
                }
            }
            other => other.clone(),
        }
    }

    /// `F^z`: every unbounded quantifier is restricted to `bound`.
    ///
    /// With `rename` set, binders that reuse the name `bound` are renamed
    /// first; otherwise any occurrence of `bound` is a capture error.
    pub fn relativize(&self, bound: &Var, rename: bool) -> Result<Formula, FormulaError> {
        let binds_it = self.binds(bound);
        if !rename && (binds_it || self.has_free(bound)) {
            return Err(FormulaError::Capture(bound.clone()));
        }
        let base = if binds_it {
            self.rename_bound(bound, &BTreeSet::from([bound.clone()]))
        } else {
            self.clone()
        };
        Ok(base.relativize_rec(bound))
    }

    fn binds(&self, x: &Var) -> bool {
        match self {
            Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) | Formula::Atom(..) => false,
            Formula::Not(a) => a.binds(x),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.binds(x) || b.binds(x),
            Formula::Forall(z, b) | Formula::Exists(z, b) | Formula::BForall(z, _, b) | Formula::BExists(z, _, b) => {
                z == x || b.binds(x)
            }
        }
    }

    fn relativize_rec(&self, bound: &Var) -> Formula {
        match self {
            Formula::Not(a) => Formula::not(a.relativize_rec(bound)),
            Formula::And(a, b) => Formula::and(a.relativize_rec(bound), b.relativize_rec(bound)),
            Formula::Or(a, b) => Formula::or(a.relativize_rec(bound), b.relativize_rec(bound)),
            Formula::Implies(a, b) => Formula::implies(a.relativize_rec(bound), b.relativize_rec(bound)),
            Formula::Forall(x, body) => Formula::bforall(x.clone(), bound.clone(), body.relativize_rec(bound)),
            Formula::Exists(x, body) => Formula::bexists(x.clone(), bound.clone(), body.relativize_rec(bound)),
            Formula::BForall(x, w, body) => Formula::bforall(x.clone(), w.clone(), body.relativize_rec(bound)),
            Formula::BExists(x, w, body) => Formula::bexists(x.clone(), w.clone(), body.relativize_rec(bound)),
            other => other.clone(),
        }
    }

    /// Replaces every macro by its Δ_0 definition. Interpreted atoms stay.
    pub fn expand_macros(&self) -> Result<Formula, FormulaError> {
        let mut avoid = self.all_vars();
        self.expand_rec(&mut avoid)
    }

    fn expand_rec(&self, avoid: &mut BTreeSet<Var>) -> Result<Formula, FormulaError> {
        Ok(match self {
            Formula::Not(a) => Formula::not(a.expand_rec(avoid)?),
            Formula::And(a, b) => Formula::and(a.expand_rec(avoid)?, b.expand_rec(avoid)?),
            Formula::Or(a, b) => Formula::or(a.expand_rec(avoid)?, b.expand_rec(avoid)?),
            Formula::Implies(a, b) => Formula::implies(a.expand_rec(avoid)?, b.expand_rec(avoid)?),
            Formula::Forall(x, body) => Formula::forall(x.clone(), body.expand_rec(avoid)?),
            Formula::Exists(x, body) => Formula::exists(x.clone(), body.expand_rec(avoid)?),
            Formula::BForall(x, w, body) => Formula::bforall(x.clone(), w.clone(), body.expand_rec(avoid)?),
            Formula::BExists(x, w, body) => Formula::bexists(x.clone(), w.clone(), body.expand_rec(avoid)?),
            Formula::Macro(k, args) => macros::definition(*k, args, avoid)?.expand_rec(avoid)?,
            other => other.clone(),
        })
    }
}

fn rename_args(args: &[Arg], f: impl Fn(&Var) -> Var) -> Vec<Arg> {
    args.iter()
        .map(|a| match a {
            Arg::Var(x) => Arg::Var(f(x)),
            Arg::Num(n) => Arg::Num(n.clone()),
        })
        .collect()
}

fn subst_binder(z: &Var, body: &Formula, x: &Var, y: &Var) -> (Var, Formula) {
    if z == x || !body.has_free(x) {
        return (z.clone(), body.clone());
    }
    if z == y {
        let mut avoid = body.all_vars();
        avoid.insert(x.clone());
        avoid.insert(y.clone());
        let fresh = fresh_var(z.as_str(), &avoid);
        let renamed = body.substitute(z, &fresh);
        return (fresh, renamed.substitute(x, y));
    }
    (z.clone(), body.substitute(x, y))
}

/// Lowest `{base}{k}` (k ≥ 1) that is not in `avoid`; `base` itself is
/// returned when it is free to use and not a keyword.
pub fn fresh_var(base: &str, avoid: &BTreeSet<Var>) -> Var {
    let plain = Var::new(base);
    if Var::is_valid_name(base) && !avoid.contains(&plain) {
        return plain;
    }
    (1..)
        .map(|k| Var::new(&format!("{base}{k}")))
        .find(|c| !avoid.contains(c))
        .expect("unbounded supply")
}

/// Lowest canonical name `v{k}` not in `avoid`.
pub fn fresh_canonical(avoid: &BTreeSet<Var>) -> Var {
    (0..)
        .map(|k| Var::new(&format!("v{k}")))
        .find(|c| !avoid.contains(c))
        .expect("unbounded supply")
}

/// Variable assignment used by evaluators: name to value.
pub type Bindings<T> = HashMap<Var, T>;

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let t = p("forall y in x. forall z in y. z in x");
        assert_eq!(t, Formula::bforall("y", "x", Formula::bforall("z", "y", Formula::mem("z", "x"))));
        assert_eq!(p("x in x"), Formula::mem("x", "x"));
        assert_eq!(p("exists w. ~(w = w)"), Formula::exists("w", Formula::not(Formula::eq("w", "w"))));
    }

    #[test]
    fn relativize_examples() {
        let z = v("z");
        assert_eq!(p("exists x. x = x").relativize(&z, true).unwrap(), p("exists x in z. x = x"));
        let d0 = p("forall y in x. forall z1 in y. z1 in x");
        assert_eq!(d0.relativize(&z, true).unwrap(), d0);
        assert_eq!(
            p("forall x. exists y. x in y").relativize(&z, true).unwrap(),
            p("forall x in z. exists y in z. x in y")
        );
    }

    #[test]
    fn relativize_renames_or_refuses_captured_bound() {
        let f = p("exists z. z in a");
        let z = v("z");
        assert_eq!(f.relativize(&z, false), Err(FormulaError::Capture(z.clone())));
        let r = f.relativize(&z, true).unwrap();
        assert_eq!(r, p("exists z1 in z. z1 in a"));
    }

    #[test]
    fn relativize_is_idempotent() {
        let z = v("z");
        let once = p("forall x. exists y. (x in y & exists q. q = y)").relativize(&z, true).unwrap();
        assert_eq!(once.relativize(&z, true).unwrap(), once);
    }

    #[test]
    fn substitute_examples() {
        assert_eq!(p("x in y").substitute(&v("x"), &v("z")), p("z in y"));
        assert_eq!(p("exists x. x in y").substitute(&v("x"), &v("z")), p("exists x. x in y"));
        let r = p("exists w. w in x").substitute(&v("x"), &v("w"));
        assert_eq!(r, p("exists w1. w1 in w"));
    }

    #[test]
    fn substitute_many_swaps() {
        let f = p("x in y & exists z. z = x");
        let g = f.substitute_many(&[(v("x"), v("y")), (v("y"), v("x"))]);
        assert_eq!(g, p("y in x & exists z. z = y"));
    }

    #[test]
    fn alpha_equality() {
        assert!(p("exists a. a in b").alpha_eq(&p("exists c. c in b")));
        assert!(!p("exists a. a in b").alpha_eq(&p("exists c. c in d")));
        assert_eq!(p("exists v0. forall y in v0. y in v0").canonical_text(), "exists v0. forall v1 in v0. v1 in v0");
    }

    #[test]
    fn canonical_avoids_free_names() {
        let f = p("exists a. a in v0");
        assert_eq!(f.canonical_text(), "exists v1. v1 in v0");
    }

    #[test]
    fn free_vars_in_order() {
        let f = p("forall y in x. (y in z & exists x. x = w)");
        assert_eq!(f.free_vars(), vec![v("x"), v("z"), v("w")]);
        assert!(p("forall y in y. y in y").has_free(&v("y")));
    }

    #[test]
    fn expansion_leaves_only_primitives() {
        let f = p("Pair(z, x, y) & Ordinal(x) & Nat(n, #3) & Union(a, b)");
        let e = f.expand_macros().unwrap();
        assert!(e.is_macro_free());
        assert!(!e.has_unbounded_quantifier());
        let mut fv = e.free_vars();
        fv.sort();
        let mut want = f.free_vars();
        want.sort();
        assert_eq!(fv, want);
    }
}
