//! Classification into Δ_0 / Σ_n / Π_n and the underlined classes, plus
//! prenex normalization.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{fresh_canonical, Arg, Complexity, Formula, MacroKind, Quantifier, Var};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ComplexityClass {
    Delta0,
    Sigma(u32),
    Pi(u32),
    USigma(u32),
    UPi(u32),
    /// Not produced for well-formed formulas; kept for callers that need a sentinel.
    Unclassified,
}

impl ComplexityClass {
    pub fn kind_name(self) -> &'static str {
        match self {
            ComplexityClass::Delta0 => "Delta0",
            ComplexityClass::Sigma(_) => "Sigma",
            ComplexityClass::Pi(_) => "Pi",
            ComplexityClass::USigma(_) => "USigma",
            ComplexityClass::UPi(_) => "UPi",
            ComplexityClass::Unclassified => "Unclassified",
        }
    }

    pub fn level(self) -> Option<u32> {
        match self {
            ComplexityClass::Delta0 => Some(0),
            ComplexityClass::Sigma(n)
            | ComplexityClass::Pi(n)
            | ComplexityClass::USigma(n)
            | ComplexityClass::UPi(n) => Some(n),
            ComplexityClass::Unclassified => None,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, ComplexityClass::Delta0 | ComplexityClass::Sigma(_) | ComplexityClass::Pi(_))
    }
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level() {
            Some(n) if *self != ComplexityClass::Delta0 => write!(f, "{}({n})", self.kind_name()),
            _ => f.write_str(self.kind_name()),
        }
    }
}

/// Least `(s, p)` with the formula in underlined Σ_s and underlined Π_s.
/// Negation is read through, so `¬A` lands where the negation normal form of `A` does.
pub fn underlined_levels(phi: &Formula) -> (u32, u32) {
    match phi {
        Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) => (0, 0),
        Formula::Atom(k, _) => match k.complexity() {
            Complexity::Delta0 => (0, 0),
            Complexity::Delta1 => (1, 1),
        },
        Formula::Not(a) => {
            let (s, p) = underlined_levels(a);
            (p, s)
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (sa, pa) = underlined_levels(a);
            let (sb, pb) = underlined_levels(b);
            (sa.max(sb), pa.max(pb))
        }
        Formula::Implies(a, b) => {
            let (sa, pa) = underlined_levels(a);
            let (sb, pb) = underlined_levels(b);
            (pa.max(sb), sa.max(pb))
        }
        Formula::BForall(_, _, a) | Formula::BExists(_, _, a) => underlined_levels(a),
        Formula::Exists(_, a) => {
            let s = underlined_levels(a).0.max(1);
            (s, s + 1)
        }
        Formula::Forall(_, a) => {
            let p = underlined_levels(a).1.max(1);
            (p + 1, p)
        }
    }
}

/// Splits off the leading unbounded quantifiers.
pub fn prefix(phi: &Formula) -> (Vec<(Quantifier, Var)>, &Formula) {
    let mut out = Vec::new();
    let mut cur = phi;
    loop {
        let (q, x, body) = match cur {
            Formula::Exists(x, body) => (Quantifier::Exists, x, body),
            Formula::Forall(x, body) => (Quantifier::Forall, x, body),
            _ => return (out, cur),
        };
        out.push((q, x.clone()));
        cur = body;
    }
}

fn strict_class(phi: &Formula) -> Option<ComplexityClass> {
    let (pre, matrix) = prefix(phi);
    if pre.is_empty() || matrix.has_unbounded_quantifier() {
        return None;
    }
    if pre.windows(2).any(|w| w[0].0 == w[1].0) {
        return None;
    }
    let n = pre.len() as u32;
    Some(match pre[0].0 {
        Quantifier::Exists => ComplexityClass::Sigma(n),
        Quantifier::Forall => ComplexityClass::Pi(n),
    })
}

pub fn classify(phi: &Formula) -> ComplexityClass {
    let (s, p) = underlined_levels(phi);
    if (s, p) == (0, 0) {
        return ComplexityClass::Delta0;
    }
    if let Some(c) = strict_class(phi) {
        return c;
    }
    if p < s {
        ComplexityClass::UPi(p)
    } else {
        ComplexityClass::USigma(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("formula is not Δ_0 (classified {0})")]
    NotDelta0(ComplexityClass),
    #[error("moving a bounded quantifier past a Σ_{needed}/Π_{needed} prefix needs more collection than level {allowed}")]
    Refused { needed: u32, allowed: u32 },
    #[error("normalization produced {got} instead of {want}")]
    Internal { got: ComplexityClass, want: ComplexityClass },
}

/// Negation with a double negation removed.
pub fn negate(phi: Formula) -> Formula {
    match phi {
        Formula::Not(inner) => *inner,
        other => Formula::not(other),
    }
}

/// Flips every leading unbounded quantifier and negates what remains.
pub fn dual(phi: &Formula) -> Formula {
    let (pre, matrix) = prefix(phi);
    pre.into_iter()
        .rev()
        .fold(negate(matrix.clone()), |acc, (q, x)| Formula::quant(q.dual(), x, acc))
}

fn pair_template(phi: &Formula, x0: &Var, x1: &Var, fresh: &Var) -> Formula {
    let mut used = phi.all_vars();
    used.insert(fresh.clone());
    used.insert(x0.clone());
    used.insert(x1.clone());
    let mut next = || {
        let v = fresh_canonical(&used);
        used.insert(v.clone());
        v
    };
    let (u, y0, y1) = (next(), next(), next());
    let body = phi.substitute_many(&[(x0.clone(), y0.clone()), (x1.clone(), y1.clone())]);
    let pair = Formula::mac(MacroKind::Pair, &[fresh, &y0, &y1]);
    Formula::bexists(
        u.clone(),
        fresh.clone(),
        Formula::bexists(y0, u.clone(), Formula::bexists(y1, u, Formula::and(pair, body))),
    )
}

/// `∃u∈x ∃y0∈u ∃y1∈u [x = ⟨y0, y1⟩ ∧ φ(y0, y1)]` with `x = fresh`.
pub fn pair_collapse(phi: &Formula, x0: &Var, x1: &Var, fresh: &Var) -> Result<Formula, NormalizeError> {
    match classify(phi) {
        ComplexityClass::Delta0 => Ok(pair_template(phi, x0, x1, fresh)),
        other => Err(NormalizeError::NotDelta0(other)),
    }
}

struct Prenex {
    start: Quantifier,
    /// Alternating blocks, the first of type `start`; blocks may be empty.
    blocks: Vec<Vec<Var>>,
    matrix: Formula,
}

impl Prenex {
    fn dual(self) -> Prenex {
        Prenex { start: self.start.dual(), blocks: self.blocks, matrix: negate(self.matrix) }
    }
}

struct Normalizer {
    used: BTreeSet<Var>,
    collection: Option<u32>,
}

impl Normalizer {
    fn fresh(&mut self) -> Var {
        let v = fresh_canonical(&self.used);
        self.used.insert(v.clone());
        v
    }

    /// Renames every binder apart from all other names.
    fn freshen(&mut self, phi: &Formula) -> Formula {
        let mut scope: Vec<(Var, Var)> = Vec::new();
        self.freshen_rec(phi, &mut scope)
    }

    fn freshen_rec(&mut self, phi: &Formula, scope: &mut Vec<(Var, Var)>) -> Formula {
        let look = |x: &Var, scope: &Vec<(Var, Var)>| {
            scope.iter().rev().find(|(a, _)| a == x).map_or_else(|| x.clone(), |(_, b)| b.clone())
        };
        match phi {
            Formula::Mem(a, b) => Formula::Mem(look(a, scope), look(b, scope)),
            Formula::Eq(a, b) => Formula::Eq(look(a, scope), look(b, scope)),
            Formula::Not(a) => Formula::not(self.freshen_rec(a, scope)),
            Formula::And(a, b) => {
                let a = self.freshen_rec(a, scope);
                Formula::and(a, self.freshen_rec(b, scope))
            }
            Formula::Or(a, b) => {
                let a = self.freshen_rec(a, scope);
                Formula::or(a, self.freshen_rec(b, scope))
            }
            Formula::Implies(a, b) => {
                let a = self.freshen_rec(a, scope);
                Formula::implies(a, self.freshen_rec(b, scope))
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let y = self.fresh();
                scope.push((x.clone(), y.clone()));
                let inner = self.freshen_rec(body, scope);
                scope.pop();
                let q = if matches!(phi, Formula::Forall(..)) { Quantifier::Forall } else { Quantifier::Exists };
                Formula::quant(q, y, inner)
            }
            Formula::BForall(x, w, body) | Formula::BExists(x, w, body) => {
                let w = look(w, scope);
                let y = self.fresh();
                scope.push((x.clone(), y.clone()));
                let inner = self.freshen_rec(body, scope);
                scope.pop();
                let q = if matches!(phi, Formula::BForall(..)) { Quantifier::Forall } else { Quantifier::Exists };
                Formula::bquant(q, y, w, inner)
            }
            Formula::Macro(k, args) => Formula::Macro(*k, rename(args, |x| look(x, scope))),
            Formula::Atom(k, args) => Formula::Atom(*k, rename(args, |x| look(x, scope))),
        }
    }

    fn form(&mut self, phi: &Formula, start: Quantifier) -> Result<Prenex, NormalizeError> {
        if !phi.has_unbounded_quantifier() {
            return Ok(Prenex { start, blocks: Vec::new(), matrix: phi.clone() });
        }
        match phi {
            Formula::Not(a) => Ok(self.form(a, start.dual())?.dual()),
            Formula::Implies(a, b) => {
                let left = self.form(a, start.dual())?.dual();
                let right = self.form(b, start)?;
                Ok(merge(left, right, Formula::or))
            }
            Formula::And(a, b) => {
                let left = self.form(a, start)?;
                Ok(merge(left, self.form(b, start)?, Formula::and))
            }
            Formula::Or(a, b) => {
                let left = self.form(a, start)?;
                Ok(merge(left, self.form(b, start)?, Formula::or))
            }
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                let q = if matches!(phi, Formula::Exists(..)) { Quantifier::Exists } else { Quantifier::Forall };
                let mut p = self.form(a, q)?;
                if p.blocks.is_empty() {
                    p.blocks.push(Vec::new());
                }
                p.blocks[0].insert(0, x.clone());
                if start != q {
                    p.blocks.insert(0, Vec::new());
                    p.start = start;
                }
                Ok(p)
            }
            Formula::BExists(x, w, a) | Formula::BForall(x, w, a) => {
                let q = if matches!(phi, Formula::BExists(..)) { Quantifier::Exists } else { Quantifier::Forall };
                let p = self.form(a, start)?;
                self.push_bounded(vec![(q, x.clone(), w.clone())], p)
            }
            Formula::Mem(..) | Formula::Eq(..) | Formula::Macro(..) | Formula::Atom(..) => unreachable!(),
        }
    }

    /// Moves bounded quantifiers (outermost first) inside an unbounded prefix.
    /// Same-type blocks are commuted; a different-type block `H w̄` is crossed
    /// by collection, `q x∈a H w̄ φ ⟶ H b q x∈a H w̄∈b φ`.
    fn push_bounded(&mut self, mut bq: Vec<(Quantifier, Var, Var)>, p: Prenex) -> Result<Prenex, NormalizeError> {
        let n = p.blocks.len();
        let mut ty = p.start;
        let mut blocks = Vec::with_capacity(n);
        for (i, block) in p.blocks.into_iter().enumerate() {
            let remaining = (n - i) as u32;
            let mut w = block;
            let mut inner: Vec<(Quantifier, Var, Var)> = Vec::new();
            for q in bq.into_iter().rev() {
                if q.0 == ty || w.is_empty() {
                    inner.insert(0, q);
                    continue;
                }
                if let Some(allowed) = self.collection {
                    if remaining > allowed {
                        return Err(NormalizeError::Refused { needed: remaining, allowed });
                    }
                }
                let b = self.fresh();
                let mut next = vec![q];
                next.extend(w.drain(..).map(|y| (ty, y, b.clone())));
                next.extend(inner);
                inner = next;
                w = vec![b];
            }
            blocks.push(w);
            bq = inner;
            ty = ty.dual();
        }
        let matrix = bq
            .into_iter()
            .rev()
            .fold(p.matrix, |acc, (q, x, a)| Formula::bquant(q, x, a, acc));
        Ok(Prenex { start: p.start, blocks, matrix })
    }

    /// Pads to exactly `n` alternating quantifiers and collapses multi-variable blocks.
    fn finish(&mut self, mut p: Prenex, n: usize) -> Formula {
        while p.blocks.len() < n {
            p.blocks.push(Vec::new());
        }
        let mut matrix = p.matrix;
        let mut single = Vec::with_capacity(n);
        let types: Vec<Quantifier> = (0..p.blocks.len())
            .map(|i| if i % 2 == 0 { p.start } else { p.start.dual() })
            .collect();
        for (block, ty) in p.blocks.into_iter().zip(types.iter()).rev() {
            let mut vars = block;
            while vars.len() > 1 {
                let x1 = vars.pop().expect("len > 1");
                let x0 = vars.pop().expect("len > 1");
                let x = self.fresh();
                matrix = match ty {
                    Quantifier::Exists => pair_template(&matrix, &x0, &x1, &x),
                    Quantifier::Forall => negate(pair_template(&negate(matrix), &x0, &x1, &x)),
                };
                vars.push(x);
            }
            single.push(vars.pop().unwrap_or_else(|| self.fresh()));
        }
        single.reverse();
        single
            .into_iter()
            .zip(types)
            .rev()
            .fold(matrix, |acc, (x, q)| Formula::quant(q, x, acc))
    }
}

fn rename(args: &[Arg], f: impl Fn(&Var) -> Var) -> Vec<Arg> {
    args.iter()
        .map(|a| match a {
            Arg::Var(x) => Arg::Var(f(x)),
            Arg::Num(n) => Arg::Num(n.clone()),
        })
        .collect()
}

fn merge(a: Prenex, b: Prenex, join: fn(Formula, Formula) -> Formula) -> Prenex {
    debug_assert_eq!(a.start, b.start);
    let n = a.blocks.len().max(b.blocks.len());
    let mut ai = a.blocks.into_iter();
    let mut bi = b.blocks.into_iter();
    let blocks = (0..n)
        .map(|_| {
            let mut v = ai.next().unwrap_or_default();
            v.extend(bi.next().unwrap_or_default());
            v
        })
        .collect();
    Prenex { start: a.start, blocks, matrix: join(a.matrix, b.matrix) }
}

/// Prenex Σ_m / Π_m equivalent of a formula in an underlined class.
/// `collection` bounds the Σ_n-Collection instances used; `None` means unrestricted.
pub fn normalize(phi: &Formula, collection: Option<u32>) -> Result<Formula, NormalizeError> {
    let (start, n, want) = match classify(phi) {
        ComplexityClass::Delta0 | ComplexityClass::Sigma(_) | ComplexityClass::Pi(_) => return Ok(phi.clone()),
        ComplexityClass::USigma(m) => (Quantifier::Exists, m, ComplexityClass::Sigma(m)),
        ComplexityClass::UPi(m) => (Quantifier::Forall, m, ComplexityClass::Pi(m)),
        ComplexityClass::Unclassified => unreachable!("classify never returns Unclassified"),
    };
    let mut nz = Normalizer { used: phi.all_vars(), collection };
    let fresh = nz.freshen(phi);
    let p = nz.form(&fresh, start)?;
    if p.blocks.len() > n as usize {
        return Err(NormalizeError::Internal { got: ComplexityClass::Unclassified, want });
    }
    let out = nz.finish(p, n as usize);
    let got = classify(&out);
    if got != want {
        return Err(NormalizeError::Internal { got, want });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, v};

    fn c(s: &str) -> ComplexityClass {
        classify(&parse(s).unwrap())
    }

    #[test]
    fn classify_examples() {
        assert_eq!(c("forall y in x. forall z in y. z in x"), ComplexityClass::Delta0);
        assert_eq!(c("exists x. x = x"), ComplexityClass::Sigma(1));
        assert_eq!(c("(exists x. forall y. y in x) & (exists z. z = z)"), ComplexityClass::USigma(2));
        assert_eq!(c("forall x. exists y. x in y"), ComplexityClass::Pi(2));
        assert_eq!(c("exists x. exists y. x in y"), ComplexityClass::USigma(1));
        assert_eq!(c("~(exists x. x in a)"), ComplexityClass::UPi(1));
        assert_eq!(c("forall a in b. exists x. x in a"), ComplexityClass::USigma(1));
        assert_eq!(c("exists a. IsLevel(a, x)"), ComplexityClass::Sigma(1));
        assert_eq!(c("IsLevel(a, x)"), ComplexityClass::USigma(1));
        assert_eq!(c("Ordinal(x) & Diag(n, m)"), ComplexityClass::Delta0);
        assert_eq!(c("(exists x. x = x) -> (exists y. y = y)"), ComplexityClass::USigma(2));
    }

    #[test]
    fn dual_examples() {
        let f = parse("exists x. x in a").unwrap();
        let d = dual(&f);
        assert_eq!(d, parse("forall x. ~(x in a)").unwrap());
        assert_eq!(classify(&d), ComplexityClass::Pi(1));
        assert_eq!(dual(&d), f);
        let g = parse("forall x. exists y. ~(x in y)").unwrap();
        assert_eq!(dual(&dual(&g)), g);
    }

    #[test]
    fn pair_collapse_shape() {
        let phi = parse("x0 in x1").unwrap();
        let out = pair_collapse(&phi, &v("x0"), &v("x1"), &v("x")).unwrap();
        assert_eq!(classify(&out), ComplexityClass::Delta0);
        assert_eq!(out.free_vars(), vec![v("x")]);
        assert_eq!(out.to_string(), "exists v0 in x. exists v1 in v0. exists v2 in v0. Pair(x, v1, v2) & v1 in v2");
        assert!(pair_collapse(&parse("exists y. y = x0").unwrap(), &v("x0"), &v("x1"), &v("x")).is_err());
    }

    #[test]
    fn normalize_conjunction_of_sigma1() {
        let f = parse("(exists x. x in a) & (exists y. y = b)").unwrap();
        let n = normalize(&f, None).unwrap();
        assert_eq!(classify(&n), ComplexityClass::Sigma(1));
    }

    #[test]
    fn normalize_keeps_strict_formulas() {
        let f = parse("exists x. forall y. y in x").unwrap();
        assert_eq!(normalize(&f, None).unwrap(), f);
    }

    #[test]
    fn normalize_bounded_over_unbounded() {
        let f = parse("forall x in a. exists y. y = x").unwrap();
        let n = normalize(&f, Some(1)).unwrap();
        assert_eq!(classify(&n), ComplexityClass::Sigma(1));
        assert_eq!(normalize(&f, Some(0)), Err(NormalizeError::Refused { needed: 1, allowed: 0 }));
    }

    #[test]
    fn normalize_produces_strict_classes() {
        for s in [
            "(exists x. forall y. y in x) & (exists z. z = z)",
            "~(exists x. exists y. x in y)",
            "forall a in b. exists x. forall y in x. exists z. z in y",
            "(forall x. x = x) | (exists y. forall z. z in y)",
            "(exists x. x = x) -> (exists y. y = y)",
            "IsLevel(a, x) & forall y. y = y",
            "exists x in a. forall y. forall z. y in z",
        ] {
            let f = parse(s).unwrap();
            let want = match classify(&f) {
                ComplexityClass::USigma(m) => ComplexityClass::Sigma(m),
                ComplexityClass::UPi(m) => ComplexityClass::Pi(m),
                other => other,
            };
            let n = normalize(&f, None).unwrap();
            assert_eq!(classify(&n), want, "{s} => {n}");
            let mut fa = f.free_vars();
            fa.sort();
            let mut fb = n.free_vars();
            fb.sort();
            assert_eq!(fa, fb);
        }
    }
}
