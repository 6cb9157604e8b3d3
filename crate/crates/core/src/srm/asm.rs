use thiserror::Error;

use super::{Instruction, ProgramError, SrmProgram};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AsmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// Reads one instruction per line; `#` starts a comment.
pub fn assemble(text: &str) -> Result<SrmProgram, AsmError> {
    let mut lines = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let err = |message: String| AsmError::Syntax { line: n + 1, message };
        let mut words = code.split_whitespace();
        let op = words.next().expect("non-empty line");
        let args: Vec<usize> = words
            .map(|w| w.parse::<usize>().map_err(|_| err(format!("bad operand '{w}'"))))
            .collect::<Result<_, _>>()?;
        let want = match op {
            "CLEAR" => 1,
            "ADD" | "COPY" | "TAKE" | "REMOVE" | "JEMPTY" => 2,
            "JMEM" => 3,
            _ => return Err(err(format!("unknown mnemonic '{op}'"))),
        };
        if args.len() != want {
            return Err(err(format!("{op} takes {want} operands, got {}", args.len())));
        }
        lines.push(match op {
            "CLEAR" => Instruction::Clear(args[0]),
            "ADD" => Instruction::Add(args[0], args[1]),
            "COPY" => Instruction::Copy(args[0], args[1]),
            "TAKE" => Instruction::Take(args[0], args[1]),
            "REMOVE" => Instruction::Remove(args[0], args[1]),
            "JEMPTY" => Instruction::JumpIfEmpty(args[0], args[1]),
            _ => Instruction::JumpIfMember(args[0], args[1], args[2]),
        });
    }
    Ok(SrmProgram::new(lines)?)
}

pub fn disassemble(p: &SrmProgram) -> String {
    let mut out = String::new();
    for ins in p.lines() {
        out.push_str(&ins.to_string());
        out.push('\n');
    }
    out
}
