//! Seeded random formulas and programs for tests and batch runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, MacroKind, Quantifier, Var};
use crate::srm::{Instruction, SrmProgram};

pub struct Corpus {
    rng: ChaCha8Rng,
    counter: usize,
}

impl Corpus {
    pub fn new(seed: u64) -> Corpus {
        Corpus { rng: ChaCha8Rng::seed_from_u64(seed), counter: 0 }
    }

    fn fresh(&mut self) -> Var {
        self.counter += 1;
        Var::new(&format!("q{}", self.counter))
    }

    fn pick(&mut self, scope: &[Var]) -> Var {
        scope.choose(&mut self.rng).expect("non-empty scope").clone()
    }

    fn atomic(&mut self, scope: &[Var]) -> Formula {
        let (a, b, c) = (self.pick(scope), self.pick(scope), self.pick(scope));
        match self.rng.gen_range(0..10) {
            0..=3 => Formula::mem(a, b),
            4..=5 => Formula::eq(a, b),
            6 => Formula::mac(MacroKind::Empty, &[&a]),
            7 => Formula::mac(MacroKind::Subset, &[&a, &b]),
            8 => Formula::mac(MacroKind::Single, &[&a, &b]),
            _ => Formula::mac(MacroKind::Upair, &[&a, &b, &c]),
        }
    }

    /// Δ_0 formula whose free variables lie in `scope`.
    pub fn delta0(&mut self, scope: &[Var], depth: usize) -> Formula {
        self.gen(scope, depth, depth, false)
    }

    /// Closed formula with at most `qdepth` nested quantifiers, mixing
    /// bounded and unbounded ones freely.
    pub fn underlined(&mut self, qdepth: usize) -> Formula {
        let x = self.fresh();
        let q = if self.rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall };
        let body = self.gen(std::slice::from_ref(&x), qdepth + 1, qdepth.saturating_sub(1), true);
        Formula::quant(q, x, body)
    }

    /// Closed strict Σ_n (or Π_n) formula with a Δ_0 matrix.
    pub fn prenex(&mut self, n: usize, start: Quantifier) -> Formula {
        let vars: Vec<Var> = (0..n).map(|_| self.fresh()).collect();
        let mut phi = self.delta0(&vars, 2);
        let mut q = if n.is_multiple_of(2) { start.dual() } else { start };
        for x in vars.into_iter().rev() {
            phi = Formula::quant(q, x, phi);
            q = q.dual();
        }
        phi
    }

    /// `depth` bounds the nesting of connectives and quantifiers, `quants`
    /// the nesting of quantifiers alone.
    fn gen(&mut self, scope: &[Var], depth: usize, quants: usize, unbounded: bool) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.atomic(scope);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..7) {
            0 => Formula::not(self.gen(scope, d, quants, unbounded)),
            1 => Formula::and(self.gen(scope, d, quants, unbounded), self.gen(scope, d, quants, unbounded)),
            2 => Formula::or(self.gen(scope, d, quants, unbounded), self.gen(scope, d, quants, unbounded)),
            3 => Formula::implies(self.gen(scope, d, quants, unbounded), self.gen(scope, d, quants, unbounded)),
            _ if quants == 0 => self.atomic(scope),
            k => {
                let x = self.fresh();
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                let q = if k % 2 == 0 { Quantifier::Exists } else { Quantifier::Forall };
                let body = self.gen(&inner, d, quants - 1, unbounded);
                if unbounded && self.rng.gen_bool(0.5) {
                    Formula::quant(q, x, body)
                } else {
                    let b = self.pick(scope);
                    Formula::bquant(q, x, b, body)
                }
            }
        }
    }

    /// Random program; jump targets stay within `1..=len + 1`.
    pub fn program(&mut self, len: usize, registers: usize) -> SrmProgram {
        let lines = (0..len)
            .map(|_| {
                let i = self.rng.gen_range(0..registers);
                let j = self.rng.gen_range(0..registers);
                let k = self.rng.gen_range(1..=len + 1);
                match self.rng.gen_range(0..7) {
                    0 => Instruction::Clear(i),
                    1 => Instruction::Add(i, j),
                    2 => Instruction::Copy(i, j),
                    3 => Instruction::Take(i, j),
                    4 => Instruction::Remove(i, j),
                    5 => Instruction::JumpIfEmpty(i, k),
                    _ => Instruction::JumpIfMember(i, j, k),
                }
            })
            .collect();
        SrmProgram::new(lines).expect("targets in range")
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::{classify, ComplexityClass};
    use crate::formula::v;

    #[test]
    fn seeded_and_shaped() {
        let (mut a, mut b) = (Corpus::new(7), Corpus::new(7));
        for _ in 0..50 {
            let f = a.delta0(&[v("x"), v("y")], 3);
            assert_eq!(f, b.delta0(&[v("x"), v("y")], 3));
            assert_eq!(classify(&f), ComplexityClass::Delta0);
            assert!(f.free_vars().iter().all(|z| *z == v("x") || *z == v("y")));
        }
        for _ in 0..50 {
            let f = a.underlined(3);
            assert!(f.is_closed());
            assert!(f.quantifier_depth() <= 3, "{f}");
        }
        for n in 1..=3 {
            assert_eq!(classify(&a.prenex(n, Quantifier::Exists)), ComplexityClass::Sigma(n as u32));
            assert_eq!(classify(&a.prenex(n, Quantifier::Forall)), ComplexityClass::Pi(n as u32));
        }
    }
}
