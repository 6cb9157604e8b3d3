//! Library results against brute-force reimplementations.

use std::collections::BTreeSet;

use setlab::corpus::Corpus;
use setlab::formula::{diag, diagonalize, encode, parse, v, Bindings, Formula};
use setlab::hfs::HSet;
use setlab::level::standard_level;
use setlab::srm::{run, Budget, Instruction, SrmProgram};
use setlab::truth::{least_witness_level, model_check_level};

fn l4() -> &'static [HSet] {
    standard_level(4).unwrap().elements()
}

fn sample() -> Vec<HSet> {
    let mut xs = l4().to_vec();
    xs.extend((4..7).map(HSet::nat));
    xs.push(HSet::kpair(&HSet::nat(2), &HSet::nat(3)));
    xs
}

/// Transitive and linearly ordered by membership.
fn classical_ordinal(x: &HSet) -> bool {
    let es = x.elements();
    let transitive = es.iter().all(|y| y.elements().iter().all(|z| x.contains(z)));
    transitive && es.iter().all(|a| es.iter().all(|b| a == b || a.contains(b) || b.contains(a)))
}

#[test]
fn ordinals_match_classical_definition() {
    for x in sample() {
        assert_eq!(x.is_ordinal(), classical_ordinal(&x), "{x}");
    }
}

fn closure_by_iteration(x: &HSet) -> BTreeSet<HSet> {
    let mut out: BTreeSet<HSet> = x.elements().iter().cloned().collect();
    loop {
        let next: BTreeSet<HSet> = out.iter().flat_map(|y| y.elements().iter().cloned()).collect();
        let before = out.len();
        out.extend(next);
        if out.len() == before {
            return out;
        }
    }
}

#[test]
fn transitive_closure_is_least() {
    for x in sample() {
        let tc = x.transitive_closure();
        assert_eq!(tc.elements().iter().cloned().collect::<BTreeSet<_>>(), closure_by_iteration(&x));
        assert!(tc.is_transitive() && x.is_subset(&tc));
        for t in l4().iter().filter(|t| t.is_transitive() && x.is_subset(t)) {
            assert!(tc.is_subset(t), "TC({x}) is not below {t}");
        }
    }
}

#[test]
fn set_operations_match_definitions() {
    let xs = sample();
    for a in &xs {
        let big: BTreeSet<HSet> = a.elements().iter().flat_map(|y| y.elements().iter().cloned()).collect();
        assert_eq!(a.union(), HSet::from_elements(big));
        for b in &xs {
            assert_eq!(HSet::pair(a, b), HSet::from_elements([a.clone(), b.clone()]));
            assert_eq!(HSet::kpair(a, b), HSet::pair(&HSet::singleton(a), &HSet::pair(a, b)));
            let diff: Vec<HSet> = a.elements().iter().filter(|z| *z != b).cloned().collect();
            assert_eq!(a.diff_element(b), HSet::from_elements(diff));
            assert_eq!(a.is_subset(b), a.elements().iter().all(|z| b.contains(z)));
        }
    }
}

#[test]
fn l_order_follows_positions() {
    let lv = standard_level(4).unwrap();
    for (i, a) in lv.elements().iter().enumerate() {
        assert_eq!(lv.position(a), Some(i));
        for (j, b) in lv.elements().iter().enumerate() {
            assert_eq!(lv.l_order(a, b).unwrap(), i.cmp(&j));
        }
    }
}

#[test]
fn least_witness_level_by_search() {
    let mut c = Corpus::new(21);
    let x = v("x");
    for _ in 0..40 {
        let s = Formula::exists(x.clone(), c.delta0(std::slice::from_ref(&x), 3));
        let want = (0..=4).find(|&n| model_check_level(standard_level(n).unwrap(), &s, &Bindings::new()).unwrap());
        assert_eq!(least_witness_level(&s, 4).unwrap(), want, "{s}");
    }
}

#[test]
fn diagonal_fixed_point_codes() {
    let phi = parse("exists y in x. n in y").unwrap();
    let d = diagonalize(&phi, &v("n"), &v("x")).unwrap();
    assert_eq!(diag(&d.code.0), Some(encode(&d.psi).0));
}

/// Successor steps only; `None` when the program is still running after
/// `fuel` steps or a register leaves `L_4`.
fn reference_run(p: &SrmProgram, inputs: &[HSet], fuel: usize) -> Option<(Vec<HSet>, usize)> {
    let mut regs = vec![HSet::empty(); p.register_count().max(inputs.len())];
    regs[..inputs.len()].clone_from_slice(inputs);
    let mut line = 1;
    for steps in 0..fuel {
        if line > p.len() {
            return Some((regs, steps));
        }
        let mut next = line + 1;
        match p.lines()[line - 1] {
            Instruction::Clear(i) => regs[i] = HSet::empty(),
            Instruction::Add(i, j) => {
                let mut es = regs[j].elements().to_vec();
                es.push(regs[i].clone());
                regs[j] = HSet::from_elements(es);
            }
            Instruction::Copy(i, j) => regs[j] = regs[i].clone(),
            Instruction::Take(i, j) => {
                if let Some(least) = standard_level(4).unwrap().l_min(regs[i].elements()).unwrap() {
                    regs[j] = least;
                }
            }
            Instruction::Remove(i, j) => {
                let es: Vec<HSet> = regs[j].elements().iter().filter(|z| **z != regs[i]).cloned().collect();
                regs[j] = HSet::from_elements(es);
            }
            Instruction::JumpIfEmpty(i, k) => {
                if regs[i].is_empty() {
                    next = k;
                }
            }
            Instruction::JumpIfMember(i, j, k) => {
                if regs[j].elements().contains(&regs[i]) {
                    next = k;
                }
            }
        }
        if regs.iter().any(|r| !standard_level(4).unwrap().contains(r)) {
            return None;
        }
        line = next;
    }
    None
}

#[test]
fn successor_steps_match_reference() {
    let mut c = Corpus::new(33);
    let lv = standard_level(4).unwrap();
    let mut compared = 0;
    for _ in 0..400 {
        let p = c.program(6, 3);
        let inputs = [HSet::nat(1), HSet::pair(&HSet::nat(0), &HSet::nat(2))];
        let Some((regs, steps)) = reference_run(&p, &inputs, 200) else { continue };
        let r = run(&p, &inputs, lv, Budget::default(), false).unwrap();
        let halted = r.outcome.halted().expect("reference halted without limits");
        assert_eq!(halted.registers, regs, "{p:?}");
        assert_eq!(r.outcome.clock().steps, steps as u64);
        compared += 1;
    }
    assert!(compared > 100, "only {compared} programs compared");
}
