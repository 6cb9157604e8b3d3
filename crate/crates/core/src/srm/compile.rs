//! Δ_0 formulas to decision programs.
//!
//! Frame: inputs occupy registers `0..k` in free-variable order, register `k`
//! stays empty and serves unconditional jumps, and every bounded quantifier
//! gets a value register plus a work register holding the elements still to
//! visit. The answer is left in register 0 as `#1` or `#0`.

use thiserror::Error;

use super::{Instruction, SrmProgram};
use crate::complexity::{classify, ComplexityClass};
use crate::formula::{Formula, FormulaError, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("formula is not Δ_0 (classified {0})")]
    NotDelta0(ComplexityClass),
    #[error("{0} cannot be compiled")]
    Unsupported(&'static str),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[derive(Clone, Copy)]
enum Op {
    Plain(Instruction),
    /// `JEMPTY r label`
    Empty(usize, usize),
    /// `JMEM r s label`
    Member(usize, usize, usize),
}

struct Gen {
    code: Vec<Op>,
    labels: Vec<Option<usize>>,
    next_reg: usize,
    zero: usize,
    scope: Vec<(Var, usize)>,
}

impl Gen {
    fn label(&mut self) -> usize {
        self.labels.push(None);
        self.labels.len() - 1
    }

    fn place(&mut self, l: usize) {
        self.labels[l] = Some(self.code.len() + 1);
    }

    fn reg(&mut self) -> usize {
        self.next_reg += 1;
        self.next_reg - 1
    }

    fn goto(&mut self, l: usize) {
        self.code.push(Op::Empty(self.zero, l));
    }

    fn lookup(&self, x: &Var) -> usize {
        self.scope.iter().rev().find(|(v, _)| v == x).map(|(_, r)| *r).expect("free variables are inputs")
    }

    /// Jumps to `t` when `∀w∈a (w∈b)`, otherwise to `f`.
    fn subset(&mut self, a: usize, b: usize, t: usize, f: usize) {
        let (work, elem) = (self.reg(), self.reg());
        let top = self.label();
        let body = self.label();
        self.code.push(Op::Plain(Instruction::Copy(a, work)));
        self.place(top);
        self.code.push(Op::Empty(work, t));
        self.code.push(Op::Plain(Instruction::Take(work, elem)));
        self.code.push(Op::Plain(Instruction::Remove(elem, work)));
        self.code.push(Op::Member(elem, b, top));
        self.goto(f);
        let _ = body;
    }

    fn emit(&mut self, phi: &Formula, t: usize, f: usize) -> Result<(), CompileError> {
        match phi {
            Formula::Mem(a, b) => {
                let (ra, rb) = (self.lookup(a), self.lookup(b));
                self.code.push(Op::Member(ra, rb, t));
                self.goto(f);
            }
            Formula::Eq(a, b) => {
                let (ra, rb) = (self.lookup(a), self.lookup(b));
                let second = self.label();
                self.subset(ra, rb, second, f);
                self.place(second);
                self.subset(rb, ra, t, f);
            }
            Formula::Not(a) => self.emit(a, f, t)?,
            Formula::And(a, b) => {
                let mid = self.label();
                self.emit(a, mid, f)?;
                self.place(mid);
                self.emit(b, t, f)?;
            }
            Formula::Or(a, b) => {
                let mid = self.label();
                self.emit(a, t, mid)?;
                self.place(mid);
                self.emit(b, t, f)?;
            }
            Formula::Implies(a, b) => {
                let mid = self.label();
                self.emit(a, mid, t)?;
                self.place(mid);
                self.emit(b, t, f)?;
            }
            Formula::BForall(x, w, body) | Formula::BExists(x, w, body) => {
                let exists = matches!(phi, Formula::BExists(..));
                let bound = self.lookup(w);
                let (work, val) = (self.reg(), self.reg());
                let top = self.label();
                self.code.push(Op::Plain(Instruction::Copy(bound, work)));
                self.place(top);
                self.code.push(Op::Empty(work, if exists { f } else { t }));
                self.code.push(Op::Plain(Instruction::Take(work, val)));
                self.code.push(Op::Plain(Instruction::Remove(val, work)));
                self.scope.push((x.clone(), val));
                let r = if exists { self.emit(body, t, top) } else { self.emit(body, top, f) };
                self.scope.pop();
                r?;
            }
            Formula::Forall(..) | Formula::Exists(..) => unreachable!("classified Δ_0"),
            Formula::Macro(..) => unreachable!("expanded"),
            Formula::Atom(k, _) => return Err(CompileError::Unsupported(k.name())),
        }
        Ok(())
    }
}

/// Decision program for a Δ_0 formula: inputs in free-variable order,
/// halting with `#1` in register 0 when the formula holds and `#0` otherwise.
pub fn compile_delta0(phi: &Formula) -> Result<SrmProgram, CompileError> {
    let class = classify(phi);
    if class != ComplexityClass::Delta0 {
        return Err(CompileError::NotDelta0(class));
    }
    let inputs = phi.free_vars();
    let phi = phi.expand_macros()?;
    let zero = inputs.len();
    let mut g = Gen {
        code: Vec::new(),
        labels: Vec::new(),
        next_reg: zero + 1,
        zero,
        scope: inputs.iter().cloned().zip(0..).collect(),
    };
    let (t, f, end) = (g.label(), g.label(), g.label());
    g.emit(&phi, t, f)?;
    g.place(t);
    g.code.push(Op::Plain(Instruction::Clear(0)));
    g.code.push(Op::Plain(Instruction::Add(zero, 0)));
    g.goto(end);
    g.place(f);
    g.code.push(Op::Plain(Instruction::Clear(0)));
    g.place(end);
    let at = |l: usize| g.labels[l].expect("every label is placed");
    let lines = g
        .code
        .iter()
        .map(|op| match *op {
            Op::Plain(i) => i,
            Op::Empty(r, l) => Instruction::JumpIfEmpty(r, at(l)),
            Op::Member(a, b, l) => Instruction::JumpIfMember(a, b, at(l)),
        })
        .collect();
    Ok(SrmProgram::new(lines).expect("labels resolve inside the program"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::hfs::HSet;
    use crate::level::standard_level;
    use crate::srm::{run, Budget};
    use crate::truth::sigma0_truth;

    fn decide(src: &str, args: &[HSet]) -> HSet {
        let p = compile_delta0(&parse(src).unwrap()).unwrap();
        let r = run(&p, args, standard_level(4).unwrap(), Budget::default(), false).unwrap();
        r.outcome.halted().expect("halts").registers[0].clone()
    }

    #[test]
    fn membership_grid() {
        let l3 = standard_level(3).unwrap();
        for a in l3.elements() {
            for b in l3.elements() {
                let want = if b.contains(a) { HSet::nat(1) } else { HSet::empty() };
                assert_eq!(decide("x in y", &[a.clone(), b.clone()]), want);
            }
        }
    }

    #[test]
    fn constant_true() {
        for x in standard_level(3).unwrap().elements() {
            assert_eq!(decide("x = x", std::slice::from_ref(x)), HSet::nat(1));
        }
    }

    #[test]
    fn transitivity_matches_sigma0() {
        let phi = parse("Transitive(x)").unwrap();
        for x in standard_level(4).unwrap().elements() {
            let env = [(crate::formula::v("x"), x.clone())].into_iter().collect();
            let want = sigma0_truth(&phi, &env).unwrap();
            assert_eq!(decide("Transitive(x)", std::slice::from_ref(x)) == HSet::nat(1), want, "{x:?}");
        }
    }

    #[test]
    fn input_order_survives_expansion() {
        let (e, one) = (HSet::empty(), HSet::nat(1));
        assert_eq!(decide("Single(x, y)", &[one.clone(), e.clone()]), HSet::nat(1));
        assert_eq!(decide("Single(x, y)", &[e, one]), HSet::empty());
    }

    #[test]
    fn rejects_unbounded() {
        assert!(matches!(compile_delta0(&parse("exists x. x = x").unwrap()), Err(CompileError::NotDelta0(_))));
        assert!(matches!(compile_delta0(&parse("Diag(n, m)").unwrap()), Err(CompileError::Unsupported("Diag"))));
    }
}
