use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{fresh_var, Arg, Formula, FormulaError, Var};

/// Largest numeral that `Nat(x, #k)` expands syntactically.
pub const MAX_NUMERAL_EXPANSION: usize = 64;

/// Declared complexity of an interpreted atom.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Complexity {
    Delta0,
    /// Both Σ_1 and Π_1.
    Delta1,
}

/// Defined notions with a Δ_0 expansion.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum MacroKind {
    /// `z = ∅`
    Empty,
    /// `z = {x}`
    Single,
    /// `z = {x, y}`
    Upair,
    /// `z = ⟨x, y⟩ = {{x}, {x, y}}`
    Pair,
    /// `z = ⋃x`
    Union,
    /// `z = x ∪ y`
    Cup,
    /// `x ⊆ y`
    Subset,
    Transitive,
    Ordinal,
    /// `z = x ∪ {x}`
    Succ,
    /// `x = k` for a literal natural `k`.
    Nat,
}

/// Atoms evaluated natively rather than expanded.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum AtomKind {
    /// `a = L_ξ`
    IsLevel,
    /// `z = TC(x)`
    Tc,
    /// `m = d(n)` for the diagonal function on codes.
    Diag,
    /// `(a, ∈) ⊨ s` for a coded formula `s`.
    Sat,
    /// `⊨_{Σ1}` applied to the code `c` below the level `l`.
    SatSigma1,
    Delta0Code,
    Sigma1Code,
    ExistsInLevelCode,
    RelativizedCode,
}

pub const MACROS: [MacroKind; 11] = [
    MacroKind::Empty,
    MacroKind::Single,
    MacroKind::Upair,
    MacroKind::Pair,
    MacroKind::Union,
    MacroKind::Cup,
    MacroKind::Subset,
    MacroKind::Transitive,
    MacroKind::Ordinal,
    MacroKind::Succ,
    MacroKind::Nat,
];

pub const ATOMS: [AtomKind; 9] = [
    AtomKind::IsLevel,
    AtomKind::Tc,
    AtomKind::Diag,
    AtomKind::Sat,
    AtomKind::SatSigma1,
    AtomKind::Delta0Code,
    AtomKind::Sigma1Code,
    AtomKind::ExistsInLevelCode,
    AtomKind::RelativizedCode,
];

impl MacroKind {
    pub fn name(self) -> &'static str {
        match self {
            MacroKind::Empty => "Empty",
            MacroKind::Single => "Single",
            MacroKind::Upair => "Upair",
            MacroKind::Pair => "Pair",
            MacroKind::Union => "Union",
            MacroKind::Cup => "Cup",
            MacroKind::Subset => "Subset",
            MacroKind::Transitive => "Transitive",
            MacroKind::Ordinal => "Ordinal",
            MacroKind::Succ => "Succ",
            MacroKind::Nat => "Nat",
        }
    }

    pub fn from_name(name: &str) -> Option<MacroKind> {
        MACROS.into_iter().find(|m| m.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            MacroKind::Empty | MacroKind::Transitive | MacroKind::Ordinal => 1,
            MacroKind::Single | MacroKind::Union | MacroKind::Subset | MacroKind::Succ | MacroKind::Nat => 2,
            MacroKind::Upair | MacroKind::Pair | MacroKind::Cup => 3,
        }
    }

    pub(crate) fn check_args(self, args: &[Arg]) -> Result<(), FormulaError> {
        check_arity(self.name(), self.arity(), args)?;
        for (i, a) in args.iter().enumerate() {
            let numeral_slot = self == MacroKind::Nat && i == 1;
            match (a, numeral_slot) {
                (Arg::Var(_), false) | (Arg::Num(_), true) => {}
                (Arg::Num(_), false) => {
                    return Err(FormulaError::ArgKind { name: self.name(), index: i, expected: "variable" })
                }
                (Arg::Var(_), true) => {
                    return Err(FormulaError::ArgKind { name: self.name(), index: i, expected: "numeral" })
                }
            }
        }
        Ok(())
    }
}

impl AtomKind {
    pub fn name(self) -> &'static str {
        match self {
            AtomKind::IsLevel => "IsLevel",
            AtomKind::Tc => "TC",
            AtomKind::Diag => "Diag",
            AtomKind::Sat => "Sat",
            AtomKind::SatSigma1 => "SatSigma1",
            AtomKind::Delta0Code => "Delta0Code",
            AtomKind::Sigma1Code => "Sigma1Code",
            AtomKind::ExistsInLevelCode => "ExistsInLevelCode",
            AtomKind::RelativizedCode => "RelativizedCode",
        }
    }

    pub fn from_name(name: &str) -> Option<AtomKind> {
        ATOMS.into_iter().find(|a| a.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            AtomKind::Delta0Code | AtomKind::Sigma1Code => 1,
            _ => 2,
        }
    }

    pub fn complexity(self) -> Complexity {
        match self {
            AtomKind::Diag => Complexity::Delta0,
            _ => Complexity::Delta1,
        }
    }

    /// Template-only atoms have no evaluator.
    pub fn is_evaluable(self) -> bool {
        matches!(self, AtomKind::IsLevel | AtomKind::Tc | AtomKind::Diag)
    }

    pub(crate) fn check_args(self, args: &[Arg]) -> Result<(), FormulaError> {
        check_arity(self.name(), self.arity(), args)
    }
}

fn check_arity(name: &'static str, expected: usize, args: &[Arg]) -> Result<(), FormulaError> {
    if args.len() != expected {
        return Err(FormulaError::Arity { name, expected, found: args.len() });
    }
    Ok(())
}

struct Fresh<'a>(&'a mut BTreeSet<Var>);

impl Fresh<'_> {
    fn var(&mut self, base: &str) -> Var {
        let x = fresh_var(base, self.0);
        self.0.insert(x.clone());
        x
    }
}

/// One-step Δ_0 definition of a macro application. The result may contain
/// further macros; `avoid` is extended with every bound name introduced.
pub(crate) fn definition(kind: MacroKind, args: &[Arg], avoid: &mut BTreeSet<Var>) -> Result<Formula, FormulaError> {
    kind.check_args(args)?;
    let var = |i: usize| args[i].as_var().cloned().expect("checked");
    let mut fresh = Fresh(avoid);
    use Formula as F;
    Ok(match kind {
        MacroKind::Empty => {
            let (z, w) = (var(0), fresh.var("w"));
            F::bforall(w.clone(), z, F::not(F::eq(w.clone(), w)))
        }
        MacroKind::Single => {
            let (z, x, w) = (var(0), var(1), fresh.var("w"));
            F::and(F::mem(x.clone(), z.clone()), F::bforall(w.clone(), z, F::eq(w, x)))
        }
        MacroKind::Upair => {
            let (z, x, y, w) = (var(0), var(1), var(2), fresh.var("w"));
            F::and(
                F::and(F::mem(x.clone(), z.clone()), F::mem(y.clone(), z.clone())),
                F::bforall(w.clone(), z, F::or(F::eq(w.clone(), x), F::eq(w, y))),
            )
        }
        MacroKind::Pair => {
            let (z, x, y) = (var(0), var(1), var(2));
            let (s, t, w) = (fresh.var("s"), fresh.var("t"), fresh.var("w"));
            F::and(
                F::and(
                    F::bexists(s.clone(), z.clone(), F::mac(MacroKind::Single, &[&s, &x])),
                    F::bexists(t.clone(), z.clone(), F::mac(MacroKind::Upair, &[&t, &x, &y])),
                ),
                F::bforall(
                    w.clone(),
                    z,
                    F::or(F::mac(MacroKind::Single, &[&w, &x]), F::mac(MacroKind::Upair, &[&w, &x, &y])),
                ),
            )
        }
        MacroKind::Union => {
            let (z, x) = (var(0), var(1));
            let (w, y) = (fresh.var("w"), fresh.var("y"));
            F::and(
                F::bforall(w.clone(), z.clone(), F::bexists(y.clone(), x.clone(), F::mem(w.clone(), y.clone()))),
                F::bforall(y.clone(), x, F::bforall(w.clone(), y, F::mem(w, z))),
            )
        }
        MacroKind::Cup => {
            let (z, x, y, w) = (var(0), var(1), var(2), fresh.var("w"));
            F::and(
                F::and(
                    F::bforall(w.clone(), x.clone(), F::mem(w.clone(), z.clone())),
                    F::bforall(w.clone(), y.clone(), F::mem(w.clone(), z.clone())),
                ),
                F::bforall(w.clone(), z, F::or(F::mem(w.clone(), x), F::mem(w, y))),
            )
        }
        MacroKind::Subset => {
            let (x, y, w) = (var(0), var(1), fresh.var("w"));
            F::bforall(w.clone(), x, F::mem(w, y))
        }
        MacroKind::Transitive => {
            let (x, y, z) = (var(0), fresh.var("y"), fresh.var("z"));
            F::bforall(y.clone(), x.clone(), F::bforall(z.clone(), y, F::mem(z, x)))
        }
        MacroKind::Ordinal => {
            let (x, y) = (var(0), fresh.var("y"));
            F::and(
                F::mac(MacroKind::Transitive, &[&x]),
                F::bforall(y.clone(), x, F::mac(MacroKind::Transitive, &[&y])),
            )
        }
        MacroKind::Succ => {
            let (z, x, w) = (var(0), var(1), fresh.var("w"));
            F::and(
                F::and(F::mem(x.clone(), z.clone()), F::bforall(w.clone(), x.clone(), F::mem(w.clone(), z.clone()))),
                F::bforall(w.clone(), z, F::or(F::mem(w.clone(), x.clone()), F::eq(w, x))),
            )
        }
        MacroKind::Nat => {
            let x = var(0);
            let k = match &args[1] {
                Arg::Num(k) => k.clone(),
                Arg::Var(_) => unreachable!("checked"),
            };
            let small = k.to_usize().filter(|&k| k <= MAX_NUMERAL_EXPANSION);
            match small {
                None => return Err(FormulaError::NumeralTooLarge(k)),
                Some(0) => F::mac(MacroKind::Empty, &[&x]),
                Some(k) => {
                    let p = fresh.var("p");
                    let prev = F::Macro(MacroKind::Nat, vec![Arg::Var(p.clone()), Arg::Num(BigUint::from(k - 1))]);
                    F::bexists(p.clone(), x.clone(), F::and(prev, F::mac(MacroKind::Succ, &[&x, &p])))
                }
            }
        }
    })
}
