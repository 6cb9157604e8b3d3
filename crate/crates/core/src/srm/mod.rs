//! Set register machines: programs, assembly text, the interpreter and the Δ_0 compiler.

mod asm;
mod compile;
mod vm;

use std::fmt;

use thiserror::Error;

pub use asm::{assemble, disassemble, AsmError};
pub use compile::{compile_delta0, CompileError};
pub use vm::{height, run, step, Budget, Configuration, OrdinalClock, Outcome, RunResult, Step, VmError};

/// One instruction. Registers are 0-based, jump targets are 1-based lines.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Instruction {
    /// `r_i := ∅`
    Clear(usize),
    /// `r_j := r_j ∪ {r_i}`
    Add(usize, usize),
    /// `r_j := r_i`
    Copy(usize, usize),
    /// `r_j :=` the `<_L`-least element of `r_i`, if any.
    Take(usize, usize),
    /// `r_j := r_j ∖ {r_i}`
    Remove(usize, usize),
    /// `if r_i = ∅ goto k`
    JumpIfEmpty(usize, usize),
    /// `if r_i ∈ r_j goto k`
    JumpIfMember(usize, usize, usize),
}

impl Instruction {
    fn max_register(self) -> usize {
        match self {
            Instruction::Clear(i) | Instruction::JumpIfEmpty(i, _) => i,
            Instruction::Add(i, j)
            | Instruction::Copy(i, j)
            | Instruction::Take(i, j)
            | Instruction::Remove(i, j)
            | Instruction::JumpIfMember(i, j, _) => i.max(j),
        }
    }

    fn target(self) -> Option<usize> {
        match self {
            Instruction::JumpIfEmpty(_, k) | Instruction::JumpIfMember(_, _, k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instruction::Clear(i) => write!(f, "CLEAR {i}"),
            Instruction::Add(i, j) => write!(f, "ADD {i} {j}"),
            Instruction::Copy(i, j) => write!(f, "COPY {i} {j}"),
            Instruction::Take(i, j) => write!(f, "TAKE {i} {j}"),
            Instruction::Remove(i, j) => write!(f, "REMOVE {i} {j}"),
            Instruction::JumpIfEmpty(i, k) => write!(f, "JEMPTY {i} {k}"),
            Instruction::JumpIfMember(i, j, k) => write!(f, "JMEM {i} {j} {k}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("line {line}: jump target {target} outside 1..={max}")]
    BadTarget { line: usize, target: usize, max: usize },
}

/// A validated program. Jumps may target `len + 1`, which halts.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SrmProgram {
    lines: Vec<Instruction>,
    registers: usize,
}

impl SrmProgram {
    pub fn new(lines: Vec<Instruction>) -> Result<SrmProgram, ProgramError> {
        let max = lines.len() + 1;
        for (i, ins) in lines.iter().enumerate() {
            if let Some(k) = ins.target() {
                if k == 0 || k > max {
                    return Err(ProgramError::BadTarget { line: i + 1, target: k, max });
                }
            }
        }
        let registers = lines.iter().map(|i| i.max_register() + 1).max().unwrap_or(0);
        Ok(SrmProgram { lines, registers })
    }

    pub fn lines(&self) -> &[Instruction] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Largest register index used, plus one.
    pub fn register_count(&self) -> usize {
        self.registers
    }

    /// Instruction at a 1-based line.
    pub fn line(&self, l: usize) -> Option<Instruction> {
        l.checked_sub(1).and_then(|i| self.lines.get(i)).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_validated() {
        assert!(SrmProgram::new(vec![Instruction::JumpIfEmpty(0, 2)]).is_ok());
        assert_eq!(
            SrmProgram::new(vec![Instruction::JumpIfEmpty(0, 3)]),
            Err(ProgramError::BadTarget { line: 1, target: 3, max: 2 })
        );
        assert!(SrmProgram::new(vec![Instruction::JumpIfEmpty(0, 0)]).is_err());
    }

    #[test]
    fn register_count() {
        let p = SrmProgram::new(vec![Instruction::Clear(0), Instruction::JumpIfMember(1, 4, 1)]).unwrap();
        assert_eq!(p.register_count(), 5);
        assert_eq!(SrmProgram::new(vec![]).unwrap().register_count(), 0);
    }
}
