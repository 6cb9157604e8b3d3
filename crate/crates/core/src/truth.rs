//! Tarskian truth over finite transitive structures, `⊨_{Σ0}` and the layered `⊨_{Σn}`.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::complexity::{classify, dual, prefix, ComplexityClass};
use crate::formula::{diag, Arg, AtomKind, Bindings, Formula, MacroKind, Quantifier, Var};
use crate::hfs::{HSet, MAX_NAT_LITERAL};
use crate::level::{self, Level, LevelError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TruthError {
    #[error("domain is not transitive: {0:?} has an element outside it")]
    NonTransitive(HSet),
    #[error("unbound variable {0}")]
    Unbound(Var),
    #[error("value of {0} is not in the domain")]
    NotInDomain(Var),
    #[error("expected {want}, formula classifies as {got}")]
    Classification { want: String, got: ComplexityClass },
    #[error("formula must be closed; free variables: {0:?}")]
    NotClosed(Vec<Var>),
    #[error("{0} has no evaluator")]
    Unsupported(&'static str),
    #[error("numeral #{0} is too large to build as a set")]
    NumeralTooLarge(BigUint),
    #[error(transparent)]
    Level(#[from] LevelError),
}

/// A finite transitive set of sets, the carrier of a structure `(M, ∈)`.
#[derive(Clone, Debug)]
pub struct Domain {
    elems: Vec<HSet>,
    members: HashSet<HSet>,
}

impl Domain {
    pub fn new(elems: Vec<HSet>) -> Result<Domain, TruthError> {
        let members: HashSet<HSet> = elems.iter().cloned().collect();
        for e in &elems {
            if e.elements().iter().any(|y| !members.contains(y)) {
                return Err(TruthError::NonTransitive(e.clone()));
            }
        }
        let mut seen = HashSet::new();
        let elems = elems.into_iter().filter(|e| seen.insert(e.clone())).collect();
        Ok(Domain { elems, members })
    }

    /// `TC({v_1, ..., v_k})`: the values together with their transitive closures.
    pub fn closure_of<'a>(values: impl IntoIterator<Item = &'a HSet>) -> Domain {
        let mut elems = Vec::new();
        let mut members = HashSet::new();
        for v in values {
            if members.insert(v.clone()) {
                elems.push(v.clone());
            }
            for y in v.transitive_closure().elements() {
                if members.insert(y.clone()) {
                    elems.push(y.clone());
                }
            }
        }
        Domain { elems, members }
    }

    pub fn elements(&self) -> &[HSet] {
        &self.elems
    }

    pub fn contains(&self, x: &HSet) -> bool {
        self.members.contains(x)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

#[derive(Clone, Debug)]
enum Term {
    Slot(usize),
    Num(BigUint),
}

#[derive(Clone, Debug)]
enum Node {
    Mem(usize, usize),
    Eq(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Unbounded {
        q: Quantifier,
        slot: usize,
        body: Box<Node>,
        id: usize,
        free: Vec<usize>,
    },
    Bounded {
        q: Quantifier,
        slot: usize,
        bound: usize,
        body: Box<Node>,
    },
    Macro(MacroKind, Vec<Term>),
    Atom(AtomKind, Vec<Term>),
}

struct Compiler {
    next_slot: usize,
    next_id: usize,
    scope: Vec<(Var, usize)>,
}

impl Compiler {
    fn slot(&self, x: &Var) -> Result<usize, TruthError> {
        self.scope
            .iter()
            .rev()
            .find(|(v, _)| v == x)
            .map(|(_, s)| *s)
            .ok_or_else(|| TruthError::Unbound(x.clone()))
    }

    fn terms(&self, args: &[Arg]) -> Result<Vec<Term>, TruthError> {
        args.iter()
            .map(|a| match a {
                Arg::Var(x) => self.slot(x).map(Term::Slot),
                Arg::Num(n) => Ok(Term::Num(n.clone())),
            })
            .collect()
    }

    fn bind(&mut self, x: &Var) -> usize {
        let s = self.next_slot;
        self.next_slot += 1;
        self.scope.push((x.clone(), s));
        s
    }

    fn compile(&mut self, phi: &Formula) -> Result<Node, TruthError> {
        Ok(match phi {
            Formula::Mem(a, b) => Node::Mem(self.slot(a)?, self.slot(b)?),
            Formula::Eq(a, b) => Node::Eq(self.slot(a)?, self.slot(b)?),
            Formula::Not(a) => Node::Not(Box::new(self.compile(a)?)),
            Formula::And(a, b) => Node::And(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Or(a, b) => Node::Or(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Implies(a, b) => Node::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let q = if matches!(phi, Formula::Forall(..)) { Quantifier::Forall } else { Quantifier::Exists };
                let outer: Vec<usize> = self.scope.iter().map(|(_, s)| *s).collect();
                let slot = self.bind(x);
                let body = self.compile(body);
                self.scope.pop();
                let body = body?;
                let mut used = HashSet::new();
                slots_used(&body, &mut used);
                let mut free: Vec<usize> = outer.into_iter().filter(|s| used.contains(s)).collect();
                free.sort_unstable();
                free.dedup();
                let id = self.next_id;
                self.next_id += 1;
                Node::Unbounded { q, slot, body: Box::new(body), id, free }
            }
            Formula::BForall(x, w, body) | Formula::BExists(x, w, body) => {
                let q = if matches!(phi, Formula::BForall(..)) { Quantifier::Forall } else { Quantifier::Exists };
                let bound = self.slot(w)?;
                let slot = self.bind(x);
                let body = self.compile(body);
                self.scope.pop();
                Node::Bounded { q, slot, bound, body: Box::new(body?) }
            }
            Formula::Macro(k, args) => Node::Macro(*k, self.terms(args)?),
            Formula::Atom(k, args) => {
                if !k.is_evaluable() {
                    return Err(TruthError::Unsupported(k.name()));
                }
                Node::Atom(*k, self.terms(args)?)
            }
        })
    }
}

fn slots_used(n: &Node, out: &mut HashSet<usize>) {
    match n {
        Node::Mem(a, b) | Node::Eq(a, b) => {
            out.insert(*a);
            out.insert(*b);
        }
        Node::Not(a) => slots_used(a, out),
        Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => {
            slots_used(a, out);
            slots_used(b, out);
        }
        Node::Unbounded { body, free, .. } => {
            out.extend(free.iter().copied());
            let _ = body;
        }
        Node::Bounded { bound, body, .. } => {
            out.insert(*bound);
            slots_used(body, out);
        }
        Node::Macro(_, ts) | Node::Atom(_, ts) => {
            for t in ts {
                if let Term::Slot(s) = t {
                    out.insert(*s);
                }
            }
        }
    }
}

/// Evaluation counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: u64,
    pub memo_hits: u64,
}

/// A formula compiled against a fixed order of input variables.
#[derive(Clone, Debug)]
pub struct Prepared {
    root: Node,
    inputs: Vec<Var>,
    slots: usize,
}

impl Prepared {
    /// Every free variable of `phi` must be among `inputs`.
    pub fn new(phi: &Formula, inputs: &[Var]) -> Result<Prepared, TruthError> {
        let mut c = Compiler { next_slot: 0, next_id: 0, scope: Vec::new() };
        for x in inputs {
            c.bind(x);
        }
        let root = c.compile(phi)?;
        Ok(Prepared { root, inputs: inputs.to_vec(), slots: c.next_slot })
    }

    pub fn inputs(&self) -> &[Var] {
        &self.inputs
    }

    pub fn eval(&self, dom: &Domain, values: &[HSet]) -> Result<bool, TruthError> {
        self.eval_with_stats(dom, values, true).map(|(b, _)| b)
    }

    pub fn eval_with_stats(&self, dom: &Domain, values: &[HSet], memo: bool) -> Result<(bool, Stats), TruthError> {
        assert_eq!(values.len(), self.inputs.len(), "one value per input");
        for (x, val) in self.inputs.iter().zip(values) {
            if !dom.contains(val) {
                return Err(TruthError::NotInDomain(x.clone()));
            }
        }
        let mut vals = vec![HSet::empty(); self.slots];
        vals[..values.len()].clone_from_slice(values);
        let mut ctx = Ctx { dom, vals, memo: memo.then(HashMap::new), stats: Stats::default() };
        let b = ctx.eval(&self.root)?;
        Ok((b, ctx.stats))
    }
}

struct Ctx<'a> {
    dom: &'a Domain,
    vals: Vec<HSet>,
    memo: Option<HashMap<(usize, Vec<u64>), bool>>,
    stats: Stats,
}

impl Ctx<'_> {
    fn nat(&self, t: &Term) -> Option<BigUint> {
        match t {
            Term::Slot(s) => self.vals[*s].as_nat().map(BigUint::from),
            Term::Num(n) => Some(n.clone()),
        }
    }

    fn set(&self, t: &Term) -> Result<HSet, TruthError> {
        match t {
            Term::Slot(s) => Ok(self.vals[*s].clone()),
            Term::Num(n) => match n.to_usize() {
                Some(k) if k <= MAX_NAT_LITERAL => Ok(HSet::nat(k)),
                _ => Err(TruthError::NumeralTooLarge(n.clone())),
            },
        }
    }

    fn eval(&mut self, n: &Node) -> Result<bool, TruthError> {
        self.stats.nodes += 1;
        Ok(match n {
            Node::Mem(a, b) => self.vals[*b].contains(&self.vals[*a]),
            Node::Eq(a, b) => self.vals[*a] == self.vals[*b],
            Node::Not(a) => !self.eval(a)?,
            Node::And(a, b) => self.eval(a)? && self.eval(b)?,
            Node::Or(a, b) => self.eval(a)? || self.eval(b)?,
            Node::Implies(a, b) => !self.eval(a)? || self.eval(b)?,
            Node::Unbounded { q, slot, body, id, free } => {
                let key = self
                    .memo
                    .as_ref()
                    .map(|_| (*id, free.iter().map(|s| self.vals[*s].id()).collect::<Vec<u64>>()));
                if let (Some(memo), Some(key)) = (&self.memo, &key) {
                    if let Some(&b) = memo.get(key) {
                        self.stats.memo_hits += 1;
                        return Ok(b);
                    }
                }
                let dom = self.dom;
                let b = self.quantify(*q, *slot, body, dom.elements())?;
                if let (Some(memo), Some(key)) = (&mut self.memo, key) {
                    memo.insert(key, b);
                }
                b
            }
            Node::Bounded { q, slot, bound, body } => {
                let range = self.vals[*bound].clone();
                self.quantify(*q, *slot, body, range.elements())?
            }
            Node::Macro(k, ts) => self.eval_macro(*k, ts)?,
            Node::Atom(k, ts) => self.eval_atom(*k, ts)?,
        })
    }

    fn quantify(&mut self, q: Quantifier, slot: usize, body: &Node, range: &[HSet]) -> Result<bool, TruthError> {
        let want = q == Quantifier::Exists;
        for x in range {
            self.vals[slot] = x.clone();
            if self.eval(body)? == want {
                return Ok(want);
            }
        }
        Ok(!want)
    }

    fn eval_macro(&self, k: MacroKind, ts: &[Term]) -> Result<bool, TruthError> {
        if k == MacroKind::Nat {
            return Ok(self.nat(&ts[0]).is_some_and(|n| Some(n) == self.nat(&ts[1])));
        }
        let a: Vec<HSet> = ts.iter().map(|t| self.set(t)).collect::<Result<_, _>>()?;
        Ok(match k {
            MacroKind::Empty => a[0].is_empty(),
            MacroKind::Single => is_single(&a[0], &a[1]),
            MacroKind::Upair => is_upair(&a[0], &a[1], &a[2]),
            MacroKind::Pair => is_kpair(&a[0], &a[1], &a[2]),
            MacroKind::Union => a[0] == a[1].union(),
            MacroKind::Cup => a[0] == a[1].cup(&a[2]),
            MacroKind::Subset => a[0].is_subset(&a[1]),
            MacroKind::Transitive => a[0].is_transitive(),
            MacroKind::Ordinal => a[0].is_ordinal(),
            MacroKind::Succ => a[0].len() == a[1].len() + 1 && a[0].contains(&a[1]) && a[1].is_subset(&a[0]),
            MacroKind::Nat => unreachable!(),
        })
    }

    fn eval_atom(&self, k: AtomKind, ts: &[Term]) -> Result<bool, TruthError> {
        Ok(match k {
            AtomKind::IsLevel => {
                let a = self.set(&ts[0])?;
                match self.nat(&ts[1]).and_then(|n| n.to_usize()) {
                    None => false,
                    Some(n) if a.rank() as usize != n => false,
                    Some(n) => level::standard_level(n)?.as_set() == &a,
                }
            }
            AtomKind::Tc => self.set(&ts[0])? == self.set(&ts[1])?.transitive_closure(),
            AtomKind::Diag => match (self.nat(&ts[0]), self.nat(&ts[1])) {
                (Some(n), Some(m)) => diag(&n) == Some(m),
                _ => false,
            },
            other => return Err(TruthError::Unsupported(other.name())),
        })
    }
}

fn is_single(z: &HSet, x: &HSet) -> bool {
    z.len() == 1 && &z.elements()[0] == x
}

fn is_upair(z: &HSet, x: &HSet, y: &HSet) -> bool {
    if x == y {
        is_single(z, x)
    } else {
        z.len() == 2 && z.contains(x) && z.contains(y)
    }
}

fn is_kpair(z: &HSet, x: &HSet, y: &HSet) -> bool {
    if x == y {
        return z.len() == 1 && is_single(&z.elements()[0], x);
    }
    z.len() == 2 && {
        let (a, b) = (&z.elements()[0], &z.elements()[1]);
        (is_single(a, x) && is_upair(b, x, y)) || (is_single(b, x) && is_upair(a, x, y))
    }
}

fn inputs_for(phi: &Formula, env: &Bindings<HSet>) -> Result<(Vec<Var>, Vec<HSet>), TruthError> {
    let mut vars = Vec::new();
    let mut vals = Vec::new();
    for x in phi.free_vars() {
        let val = env.get(&x).ok_or_else(|| TruthError::Unbound(x.clone()))?;
        vars.push(x);
        vals.push(val.clone());
    }
    Ok((vars, vals))
}

/// `(M, ∈) ⊨ φ[env]` for a transitive domain `M`.
pub fn model_check(dom: &Domain, phi: &Formula, env: &Bindings<HSet>) -> Result<bool, TruthError> {
    let (vars, vals) = inputs_for(phi, env)?;
    Prepared::new(phi, &vars)?.eval(dom, &vals)
}

/// `model_check` with counters; `memo` toggles the quantifier memo table.
pub fn model_check_stats(
    dom: &Domain,
    phi: &Formula,
    env: &Bindings<HSet>,
    memo: bool,
) -> Result<(bool, Stats), TruthError> {
    let (vars, vals) = inputs_for(phi, env)?;
    Prepared::new(phi, &vars)?.eval_with_stats(dom, &vals, memo)
}

pub fn model_check_level(lv: &Level, phi: &Formula, env: &Bindings<HSet>) -> Result<bool, TruthError> {
    model_check(lv.domain(), phi, env)
}

/// `⊨_{Σ0} φ[env]`: evaluation in the transitive closure of the parameters.
pub fn sigma0_truth(phi: &Formula, env: &Bindings<HSet>) -> Result<bool, TruthError> {
    let got = classify(phi);
    if got != ComplexityClass::Delta0 {
        return Err(TruthError::Classification { want: "Delta0".into(), got });
    }
    let (vars, vals) = inputs_for(phi, env)?;
    let dom = Domain::closure_of(&vals);
    Prepared::new(phi, &vars)?.eval(&dom, &vals)
}

/// Layered `⊨_{Σn}` with the unbounded witnesses ranging over `lv`.
pub fn sigma_n_truth(n: u32, phi: &Formula, env: &Bindings<HSet>, lv: &Level) -> Result<bool, TruthError> {
    let got = classify(phi);
    if got != ComplexityClass::Sigma(n) {
        return Err(TruthError::Classification { want: format!("Sigma({n})"), got });
    }
    let mut env = env.clone();
    layered(n, phi, &mut env, lv)
}

/// `¬ ⊨_{Σn} dual(φ)` for a strict Π_n formula.
pub fn pi_n_truth(n: u32, phi: &Formula, env: &Bindings<HSet>, lv: &Level) -> Result<bool, TruthError> {
    let got = classify(phi);
    if got != ComplexityClass::Pi(n) {
        return Err(TruthError::Classification { want: format!("Pi({n})"), got });
    }
    let mut env = env.clone();
    Ok(!layered(n, &dual(phi), &mut env, lv)?)
}

fn layered(n: u32, phi: &Formula, env: &mut Bindings<HSet>, lv: &Level) -> Result<bool, TruthError> {
    if n == 0 {
        return if classify(phi) == ComplexityClass::Delta0 {
            sigma0_truth(phi, env)
        } else {
            // A matrix with Δ_1 atoms; evaluate it where the witnesses live.
            model_check_level(lv, phi, env)
        };
    }
    let (pre, _) = prefix(phi);
    let x = pre[0].1.clone();
    let psi = match phi {
        Formula::Exists(_, body) => body.as_ref(),
        _ => unreachable!("strict Σ_n starts with ∃"),
    };
    let neg = dual(psi);
    let saved = env.get(&x).cloned();
    let mut found = false;
    for w in lv.elements() {
        env.insert(x.clone(), w.clone());
        if !layered(n - 1, &neg, env, lv)? {
            found = true;
            break;
        }
    }
    match saved {
        Some(v) => env.insert(x, v),
        None => env.remove(&x),
    };
    Ok(found)
}

/// Least `n ≤ max_n` with `L_n ⊨ φ` for a closed strict Σ_1 sentence.
pub fn least_witness_level(phi: &Formula, max_n: usize) -> Result<Option<usize>, TruthError> {
    let got = classify(phi);
    if got != ComplexityClass::Sigma(1) {
        return Err(TruthError::Classification { want: "Sigma(1)".into(), got });
    }
    if !phi.is_closed() {
        return Err(TruthError::NotClosed(phi.free_vars()));
    }
    let prepared = Prepared::new(phi, &[])?;
    for n in 0..=max_n {
        if prepared.eval(level::standard_level(n)?.domain(), &[])? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, v};
    use crate::level::standard_level;

    fn env(pairs: &[(&str, HSet)]) -> Bindings<HSet> {
        pairs.iter().map(|(k, s)| (v(k), s.clone())).collect()
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn model_check_examples() {
        let l3 = standard_level(3).unwrap();
        let l4 = standard_level(4).unwrap();
        assert!(model_check_level(l3, &f("Ordinal(x)"), &env(&[("x", HSet::nat(2))])).unwrap());
        assert!(model_check_level(l3, &f("exists y. forall z in y. ~(z = z)"), &env(&[])).unwrap());
        assert!(!model_check_level(l4, &f("forall x. exists y. x in y"), &env(&[])).unwrap());
    }

    #[test]
    fn model_check_errors() {
        let bad = Domain::new(vec![HSet::nat(1)]);
        assert!(matches!(bad, Err(TruthError::NonTransitive(_))));
        let l1 = standard_level(1).unwrap();
        assert_eq!(model_check_level(l1, &f("x in y"), &env(&[("x", HSet::empty())])), Err(TruthError::Unbound(v("y"))));
        assert_eq!(
            model_check_level(l1, &f("x = x"), &env(&[("x", HSet::nat(1))])),
            Err(TruthError::NotInDomain(v("x")))
        );
        assert!(matches!(
            model_check_level(l1, &f("Sat(a, b)"), &env(&[("a", HSet::empty()), ("b", HSet::empty())])),
            Err(TruthError::Unsupported("Sat"))
        ));
    }

    #[test]
    fn sigma0_examples() {
        assert!(sigma0_truth(&f("Transitive(x)"), &env(&[("x", HSet::nat(1))])).unwrap());
        assert!(sigma0_truth(&f("Empty(z)"), &env(&[("z", HSet::empty())])).unwrap());
        assert!(matches!(
            sigma0_truth(&f("exists y. y = x"), &env(&[("x", HSet::empty())])),
            Err(TruthError::Classification { .. })
        ));
    }

    #[test]
    fn macros_agree_with_expansion() {
        let l3 = standard_level(3).unwrap();
        let forms = [
            "Empty(a)",
            "Single(a, b)",
            "Upair(a, b, c)",
            "Pair(a, b, c)",
            "Union(a, b)",
            "Cup(a, b, c)",
            "Subset(a, b)",
            "Transitive(a)",
            "Ordinal(a)",
            "Succ(a, b)",
            "Nat(a, #2)",
        ];
        let elems = l3.elements();
        for src in forms {
            let g = f(src);
            let e = g.expand_macros().unwrap();
            for a in elems {
                for b in elems {
                    for c in elems {
                        let en = env(&[("a", a.clone()), ("b", b.clone()), ("c", c.clone())]);
                        let mut full = en.clone();
                        full.retain(|k, _| g.has_free(k));
                        assert_eq!(
                            model_check_level(l3, &g, &full).unwrap(),
                            model_check_level(l3, &e, &full).unwrap(),
                            "{src} at {a:?} {b:?} {c:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kpair_macro_on_real_pairs() {
        let a = HSet::nat(1);
        let b = HSet::nat(2);
        let z = HSet::kpair(&a, &b);
        assert!(is_kpair(&z, &a, &b));
        assert!(!is_kpair(&z, &b, &a));
        assert!(is_kpair(&HSet::kpair(&a, &a), &a, &a));
    }

    #[test]
    fn layered_truth_examples() {
        let l1 = standard_level(1).unwrap();
        let l2 = standard_level(2).unwrap();
        assert!(sigma_n_truth(1, &f("exists x. x = x"), &env(&[]), l1).unwrap());
        assert!(sigma_n_truth(2, &f("exists x. forall y. ~(y in x)"), &env(&[]), l2).unwrap());
        assert!(!pi_n_truth(1, &f("forall x. ~(x = x)"), &env(&[]), l1).unwrap());
    }

    #[test]
    fn least_witness_examples() {
        assert_eq!(least_witness_level(&f("exists x. Nat(x, #1)"), 4).unwrap(), Some(2));
        assert_eq!(least_witness_level(&f("exists x. Empty(x)"), 4).unwrap(), Some(1));
        assert_eq!(least_witness_level(&f("exists x. x in x"), 4).unwrap(), None);
    }

    #[test]
    fn memo_does_not_change_answers() {
        let l4 = standard_level(4).unwrap();
        let g = f("forall x. exists y. forall z. (z in y -> ~(z = x)) | x in y");
        let (a, s1) = model_check_stats(l4.domain(), &g, &env(&[]), true).unwrap();
        let (b, s2) = model_check_stats(l4.domain(), &g, &env(&[]), false).unwrap();
        assert_eq!(a, b);
        assert!(s1.nodes <= s2.nodes);
    }

    #[test]
    fn is_level_atom() {
        let l4 = standard_level(4).unwrap();
        let l2 = standard_level(2).unwrap().as_set().clone();
        assert!(model_check_level(l4, &f("IsLevel(a, #2)"), &env(&[("a", l2.clone())])).unwrap());
        assert!(!model_check_level(l4, &f("IsLevel(a, #1)"), &env(&[("a", l2)])).unwrap());
        assert!(model_check_level(l4, &f("exists a. IsLevel(a, #3)"), &env(&[])).unwrap());
        assert!(!model_check_level(l4, &f("exists a. IsLevel(a, #4)"), &env(&[])).unwrap());
    }
}
