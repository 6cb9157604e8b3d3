use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{Instruction, SrmProgram};
use crate::hfs::HSet;
use crate::level::{self, Level, LevelError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VmError {
    #[error("line {line}: value {value:?} is outside L_{level}")]
    ValueEscapes { line: usize, value: HSet, level: usize },
    #[error("input {index} is outside L_{level}")]
    InputOutside { index: usize, level: usize },
    #[error("{given} inputs for a machine with {registers} registers")]
    TooManyInputs { given: usize, registers: usize },
    #[error(transparent)]
    Level(#[from] LevelError),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Configuration {
    /// 1-based active line; `len + 1` means halted.
    pub line: usize,
    pub registers: Vec<HSet>,
}

/// Stage `ω·limits + steps`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Default)]
pub struct OrdinalClock {
    pub limits: u64,
    pub steps: u64,
}

impl OrdinalClock {
    fn tick(self) -> OrdinalClock {
        OrdinalClock { limits: self.limits, steps: self.steps + 1 }
    }

    fn limit(self) -> OrdinalClock {
        OrdinalClock { limits: self.limits + 1, steps: 0 }
    }
}

impl fmt::Display for OrdinalClock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ω·{}+{}", self.limits, self.steps)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Budget {
    /// Successor steps over the whole run.
    pub max_steps: u64,
    /// ω-limits that may be taken.
    pub max_limits: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_steps: 100_000, max_limits: 4 }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Step {
    Next(Configuration),
    Halted,
}

fn checked(lv: &Level, line: usize, value: HSet) -> Result<HSet, VmError> {
    if lv.contains(&value) {
        Ok(value)
    } else {
        Err(VmError::ValueEscapes { line, value, level: lv.index() })
    }
}

/// One successor step.
pub fn step(p: &SrmProgram, c: &Configuration, lv: &Level) -> Result<Step, VmError> {
    let Some(ins) = p.line(c.line) else {
        return Ok(Step::Halted);
    };
    let mut regs = c.registers.clone();
    let mut line = c.line + 1;
    match ins {
        Instruction::Clear(i) => regs[i] = HSet::empty(),
        Instruction::Add(i, j) => regs[j] = checked(lv, c.line, regs[j].insert(&regs[i]))?,
        Instruction::Copy(i, j) => regs[j] = regs[i].clone(),
        Instruction::Take(i, j) => {
            if let Some(m) = lv.l_min(regs[i].elements())? {
                regs[j] = m;
            }
        }
        Instruction::Remove(i, j) => regs[j] = regs[j].diff_element(&regs[i]),
        Instruction::JumpIfEmpty(i, k) => {
            if regs[i].is_empty() {
                line = k;
            }
        }
        Instruction::JumpIfMember(i, j, k) => {
            if regs[j].contains(&regs[i]) {
                line = k;
            }
        }
    }
    Ok(Step::Next(Configuration { line, registers: regs }))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Outcome {
    Halted { config: Configuration, clock: OrdinalClock },
    BudgetExhausted { config: Configuration, clock: OrdinalClock },
    /// Another limit was needed after `max_limits` were taken.
    LimitUndetermined { config: Configuration, clock: OrdinalClock, cycle_length: usize },
}

impl Outcome {
    pub fn halted(&self) -> Option<&Configuration> {
        match self {
            Outcome::Halted { config, .. } => Some(config),
            _ => None,
        }
    }

    pub fn clock(&self) -> OrdinalClock {
        match self {
            Outcome::Halted { clock, .. }
            | Outcome::BudgetExhausted { clock, .. }
            | Outcome::LimitUndetermined { clock, .. } => *clock,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RunResult {
    pub outcome: Outcome,
    /// Every configuration visited, successor and limit stages alike.
    pub trace: Option<Vec<(OrdinalClock, Configuration)>>,
}

/// Limit of an eventually periodic run: least line of the cycle and the
/// `<_L`-least value of each register over the cycle.
fn limit_of(cycle: &[Configuration], lv: &Level) -> Result<Configuration, VmError> {
    let line = cycle.iter().map(|c| c.line).min().expect("non-empty cycle");
    let width = cycle[0].registers.len();
    let registers = (0..width)
        .map(|r| lv.l_min(cycle.iter().map(|c| &c.registers[r])).map(|m| m.expect("non-empty cycle")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Configuration { line, registers })
}

pub fn run(p: &SrmProgram, inputs: &[HSet], lv: &Level, budget: Budget, trace: bool) -> Result<RunResult, VmError> {
    let width = p.register_count().max(inputs.len());
    if inputs.len() > width {
        return Err(VmError::TooManyInputs { given: inputs.len(), registers: width });
    }
    let mut registers = vec![HSet::empty(); width];
    for (i, x) in inputs.iter().enumerate() {
        if !lv.contains(x) {
            return Err(VmError::InputOutside { index: i, level: lv.index() });
        }
        registers[i] = x.clone();
    }
    let mut cur = Configuration { line: 1, registers };
    let mut clock = OrdinalClock::default();
    let mut total_steps = 0u64;
    let mut log = trace.then(Vec::new);
    let mut history: Vec<Configuration> = Vec::new();
    let mut seen: HashMap<Configuration, usize> = HashMap::new();
    loop {
        if let Some(log) = log.as_mut() {
            log.push((clock, cur.clone()));
        }
        if let Some(&start) = seen.get(&cur) {
            let cycle_length = history.len() - start;
            if clock.limits == budget.max_limits {
                let outcome = Outcome::LimitUndetermined { config: cur, clock, cycle_length };
                return Ok(RunResult { outcome, trace: log });
            }
            cur = limit_of(&history[start..], lv)?;
            clock = clock.limit();
            history.clear();
            seen.clear();
            continue;
        }
        if p.line(cur.line).is_none() {
            return Ok(RunResult { outcome: Outcome::Halted { config: cur, clock }, trace: log });
        }
        if total_steps == budget.max_steps {
            return Ok(RunResult { outcome: Outcome::BudgetExhausted { config: cur, clock }, trace: log });
        }
        seen.insert(cur.clone(), history.len());
        history.push(cur.clone());
        cur = match step(p, &cur, lv)? {
            Step::Next(c) => c,
            Step::Halted => unreachable!("checked above"),
        };
        clock = clock.tick();
        total_steps += 1;
    }
}

/// Least `b ≤ lv.index()` (from 1) such that for every `x ∈ L_b` the run on `x`
/// halts with every intermediate value in `L_b`.
pub fn height(p: &SrmProgram, lv: &Level, budget: Budget) -> Result<Option<usize>, VmError> {
    'levels: for b in 1..=lv.index() {
        let lb = level::standard_level(b)?;
        for x in lb.elements() {
            match run(p, std::slice::from_ref(x), lb, budget, false) {
                Ok(r) if r.outcome.halted().is_some() => {}
                Ok(_) | Err(VmError::ValueEscapes { .. }) => continue 'levels,
                Err(e) => return Err(e),
            }
        }
        return Ok(Some(b));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::standard_level;
    use crate::srm::assemble;

    fn l4() -> &'static Level {
        standard_level(4).unwrap()
    }

    #[test]
    fn two_step_program() {
        let p = assemble("CLEAR 0\nADD 0 0").unwrap();
        let r = run(&p, &[HSet::empty()], l4(), Budget::default(), true).unwrap();
        match r.outcome {
            Outcome::Halted { config, clock } => {
                assert_eq!(config.registers, vec![HSet::nat(1)]);
                assert_eq!(clock, OrdinalClock { limits: 0, steps: 2 });
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(r.trace.unwrap().len(), 3);
    }

    #[test]
    fn take_uses_l_order() {
        let p = assemble("TAKE 1 2").unwrap();
        let c = Configuration { line: 1, registers: vec![HSet::empty(), HSet::nat(2), HSet::nat(3)] };
        match step(&p, &c, l4()).unwrap() {
            Step::Next(n) => assert_eq!(n.registers[2], HSet::empty()),
            Step::Halted => panic!(),
        }
        let c = Configuration { line: 1, registers: vec![HSet::empty(), HSet::empty(), HSet::nat(3)] };
        match step(&p, &c, l4()).unwrap() {
            Step::Next(n) => assert_eq!(n.registers[2], HSet::nat(3)),
            Step::Halted => panic!(),
        }
    }

    #[test]
    fn jump_if_member() {
        let p = assemble("JMEM 0 1 3\nCLEAR 0").unwrap();
        let c = Configuration { line: 1, registers: vec![HSet::empty(), HSet::nat(1)] };
        assert_eq!(step(&p, &c, l4()).unwrap(), Step::Next(Configuration { line: 3, registers: c.registers.clone() }));
    }

    #[test]
    fn self_loop_limits() {
        let p = assemble("JEMPTY 0 1").unwrap();
        let budget = Budget { max_steps: 1000, max_limits: 3 };
        let r = run(&p, &[HSet::empty()], l4(), budget, true).unwrap();
        match &r.outcome {
            Outcome::LimitUndetermined { config, clock, cycle_length } => {
                assert_eq!(config.line, 1);
                assert_eq!(config.registers, vec![HSet::empty()]);
                assert_eq!(clock.limits, 3);
                assert_eq!(*cycle_length, 1);
            }
            other => panic!("{other:?}"),
        }
        let trace = r.trace.unwrap();
        assert!(trace.windows(2).all(|w| w[0].0 < w[1].0));
        let at_limits: Vec<_> = trace.iter().filter(|(c, _)| c.steps == 0 && c.limits > 0).collect();
        assert_eq!(at_limits.len(), 3);
        assert!(at_limits.iter().all(|(_, c)| c.line == 1 && c.registers == vec![HSet::empty()]));
    }

    #[test]
    fn limit_takes_cycle_minimum() {
        // Register 1 alternates between {∅} and ∅; the limit keeps ∅ and sits on line 1.
        let p = assemble("ADD 0 1\nREMOVE 0 1\nJEMPTY 0 1").unwrap();
        let budget = Budget { max_steps: 1000, max_limits: 1 };
        let r = run(&p, &[HSet::empty(), HSet::empty()], l4(), budget, true).unwrap();
        let trace = r.trace.unwrap();
        let (_, lim) = trace.iter().find(|(c, _)| c.limits == 1).unwrap();
        assert_eq!(lim.line, 1);
        assert_eq!(lim.registers[1], HSet::empty());
    }

    #[test]
    fn budget_and_escape() {
        let p = assemble("ADD 0 0\nJEMPTY 1 1").unwrap();
        let err = run(&p, &[HSet::empty()], l4(), Budget::default(), false).unwrap_err();
        assert!(matches!(err, VmError::ValueEscapes { line: 1, .. }));
        let p = assemble("ADD 1 0\nREMOVE 1 0\nJEMPTY 1 1").unwrap();
        let r = run(&p, &[], l4(), Budget { max_steps: 2, max_limits: 0 }, false).unwrap();
        assert!(matches!(r.outcome, Outcome::BudgetExhausted { .. }));
    }

    #[test]
    fn heights() {
        let lv = l4();
        assert_eq!(height(&assemble("CLEAR 0").unwrap(), lv, Budget::default()).unwrap(), Some(1));
        assert_eq!(height(&assemble("CLEAR 0\nADD 0 0").unwrap(), lv, Budget::default()).unwrap(), Some(2));
        assert_eq!(height(&assemble("JEMPTY 1 1").unwrap(), lv, Budget::default()).unwrap(), None);
    }
}
