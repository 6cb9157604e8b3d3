//! Representations of ordinals and the sentences built from them.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::complexity::{classify, normalize, ComplexityClass, NormalizeError};
use crate::formula::{fresh_var, v, Arg, AtomKind, Bindings, Formula, FormulaError, MacroKind, Var};
use crate::hfs::HSet;
use crate::level::Level;
use crate::truth::{least_witness_level, model_check_level, TruthError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForgeError {
    #[error("matrix must be Δ_0, got {0}")]
    NotDelta0(ComplexityClass),
    #[error("{what} has unexpected free variables {found:?}")]
    Slot { what: &'static str, found: Vec<Var> },
    #[error("emitted formula classifies {got}, expected {want}")]
    Classification { want: ComplexityClass, got: ComplexityClass },
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// A Σ_1 formula in the single free variable `var` meant to define one ordinal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub var: Var,
    pub sigma_form: Formula,
    /// `∀y [R(y) → var = y]`
    pub pi_dual: Formula,
    pub label: String,
}

impl Representation {
    /// Wraps a Σ_1 formula in `var`; the dual is derived.
    pub fn from_sigma(var: Var, sigma_form: Formula, label: String) -> Result<Representation, ForgeError> {
        only_free(&sigma_form, &[&var], "representation")?;
        Representation::new(var, sigma_form, label)
    }

    fn new(var: Var, sigma_form: Formula, label: String) -> Result<Representation, ForgeError> {
        expect_class(&sigma_form, ComplexityClass::Sigma(1))?;
        let pi_dual = pi_dual(&sigma_form, &var);
        expect_class(&pi_dual, ComplexityClass::Pi(1))?;
        Ok(Representation { var, sigma_form, pi_dual, label })
    }

    /// `R` with its free variable renamed to `y`.
    pub fn at(&self, y: &Var) -> Formula {
        self.sigma_form.substitute(&self.var, y)
    }

    /// Elements of `lv` satisfying the Σ form, in `<_L` order.
    pub fn satisfiers(&self, lv: &Level) -> Result<Vec<HSet>, TruthError> {
        satisfiers_of(&self.sigma_form, &self.var, lv)
    }

    pub fn dual_satisfiers(&self, lv: &Level) -> Result<Vec<HSet>, TruthError> {
        satisfiers_of(&self.pi_dual, &self.var, lv)
    }
}

fn satisfiers_of(phi: &Formula, x: &Var, lv: &Level) -> Result<Vec<HSet>, TruthError> {
    let mut env = Bindings::new();
    let mut out = Vec::new();
    for e in lv.elements() {
        env.insert(x.clone(), e.clone());
        if model_check_level(lv, phi, &env)? {
            out.push(e.clone());
        }
    }
    Ok(out)
}

/// Normalizes and checks that the prenex form lands in `want`.
fn expect_class(phi: &Formula, want: ComplexityClass) -> Result<(), ForgeError> {
    let got = classify(&normalize(phi, None)?);
    if got != want {
        return Err(ForgeError::Classification { want, got });
    }
    Ok(())
}

fn pi_dual(sigma: &Formula, x: &Var) -> Formula {
    let y = fresh_var("y", &sigma.all_vars());
    Formula::forall(y.clone(), Formula::implies(sigma.substitute(x, &y), Formula::eq(x.clone(), y))).canonical()
}

fn is_level(a: &Var, xi: &Var) -> Formula {
    Formula::Atom(AtomKind::IsLevel, vec![Arg::Var(a.clone()), Arg::Var(xi.clone())])
}

fn only_free(phi: &Formula, allowed: &[&Var], what: &'static str) -> Result<(), ForgeError> {
    let found: Vec<Var> = phi.free_vars().into_iter().filter(|z| !allowed.contains(&z)).collect();
    if found.is_empty() {
        Ok(())
    } else {
        Err(ForgeError::Slot { what, found })
    }
}

/// `R^γ(ξ)`: ξ is the least ordinal whose level holds a witness of `∃x A(x)`.
pub fn kleene_representation(a: &Formula, x: &Var) -> Result<Representation, ForgeError> {
    let class = classify(a);
    if class != ComplexityClass::Delta0 {
        return Err(ForgeError::NotDelta0(class));
    }
    only_free(a, &[x], "matrix")?;
    let (xi, eta, lv, w) = (v("xi"), v("eta"), v("a"), v("x"));
    let body = a.canonical().substitute(x, &w);
    let holds_at = |ord: &Var, inner: Formula| Formula::exists(lv.clone(), Formula::and(is_level(&lv, ord), inner));
    let phi = Formula::and_all(vec![
        Formula::mac(MacroKind::Ordinal, &[&xi]),
        holds_at(&xi, Formula::bexists(w.clone(), lv.clone(), body.clone())),
        Formula::bforall(eta.clone(), xi.clone(), holds_at(&eta, Formula::bforall(w.clone(), lv.clone(), Formula::not(body)))),
    ]);
    Representation::new(xi, phi.canonical(), format!("kleene({})", a.canonical_text()))
}

/// `R^{β+1}(ξ) := ∃η∈ξ R(η) ∧ ∀η∈ξ [R_*(η) → ξ = η ∪ {η}]`.
///
/// The first conjunct rules out ordinals with no predecessor satisfying `R`,
/// which would otherwise pass the universal clause vacuously.
pub fn successor_representation(r: &Representation) -> Representation {
    let mut avoid = r.sigma_form.all_vars();
    avoid.extend(r.pi_dual.all_vars());
    let xi = fresh_var("xi", &avoid);
    avoid.insert(xi.clone());
    let eta = fresh_var("eta", &avoid);
    let dual_at = r.pi_dual.substitute(&r.var, &eta);
    let phi = Formula::and(
        Formula::bexists(eta.clone(), xi.clone(), r.at(&eta)),
        Formula::bforall(
            eta.clone(),
            xi.clone(),
            Formula::implies(dual_at, Formula::mac(MacroKind::Succ, &[&xi, &eta])),
        ),
    );
    Representation::new(xi, phi.canonical(), format!("{}+1", r.label)).expect("successor of a representation is Σ_1")
}

/// `Exists(γ) := ∃x R(x)`.
pub fn exists_sentence(r: &Representation) -> Formula {
    Formula::exists(r.var.clone(), r.sigma_form.clone()).canonical()
}

/// `Comp(γ, δ) := ∀ξ [R^δ(ξ) → ∀a (a = L_ξ → Exists(γ)^a)]`.
pub fn comp_sentence(g: &Representation, d: &Representation) -> Formula {
    let ex = exists_sentence(g);
    let mut avoid = ex.all_vars();
    avoid.extend(d.sigma_form.all_vars());
    let xi = fresh_var("xi", &avoid);
    avoid.insert(xi.clone());
    let a = fresh_var("a", &avoid);
    let inner = ex.relativize(&a, false).expect("fresh bound variable");
    Formula::forall(
        xi.clone(),
        Formula::implies(d.at(&xi), Formula::forall(a.clone(), Formula::implies(is_level(&a, &xi), inner))),
    )
    .canonical()
}

fn slot(theory: &Formula) -> Result<Var, ForgeError> {
    match theory.free_vars().as_slice() {
        [s] => Ok(s.clone()),
        other => Err(ForgeError::Slot { what: "theory definition", found: other.to_vec() }),
    }
}

/// `∀c ∀e [Δ_0(c) ∧ e = ⌜∃x∈L_α φ⌝ ∧ θ(e) → L_α ⊨_{Σ1} ∃x φ]` with `α` free as `level`.
pub fn rfn_template(theory: &Formula, level: &Var) -> Result<Formula, ForgeError> {
    let s = slot(theory)?;
    let mut avoid = theory.all_vars();
    avoid.insert(level.clone());
    let c = fresh_var("c", &avoid);
    avoid.insert(c.clone());
    let e = fresh_var("e", &avoid);
    let code = |k: AtomKind, args: &[&Var]| Formula::Atom(k, args.iter().map(|z| Arg::Var((*z).clone())).collect());
    let hyp = Formula::and_all(vec![
        code(AtomKind::Delta0Code, &[&c]),
        code(AtomKind::ExistsInLevelCode, &[&c, &e]),
        theory.substitute(&s, &e),
    ]);
    let phi = Formula::forall(c.clone(), Formula::forall(e.clone(), Formula::implies(hyp, code(AtomKind::SatSigma1, &[level, &c]))));
    Ok(phi)
}

/// `φ_T(ξ) := ∀s ∀r [Σ_1(s) ∧ r = ⌜s^{L_α}⌝ ∧ θ(r) → ∀a (a = L_ξ → a ⊨ s)]`, free in `xi`.
pub fn phit_template(theory: &Formula) -> Result<Formula, ForgeError> {
    let sl = slot(theory)?;
    let mut avoid = theory.all_vars();
    let mut fresh = |base: &str| {
        let z = fresh_var(base, &avoid);
        avoid.insert(z.clone());
        z
    };
    let (xi, s, r, a) = (fresh("xi"), fresh("s"), fresh("r"), fresh("a"));
    let code = |k: AtomKind, args: &[&Var]| Formula::Atom(k, args.iter().map(|z| Arg::Var((*z).clone())).collect());
    let hyp = Formula::and_all(vec![
        code(AtomKind::Sigma1Code, &[&s]),
        code(AtomKind::RelativizedCode, &[&s, &r]),
        theory.substitute(&sl, &r),
    ]);
    let conc = Formula::forall(a.clone(), Formula::implies(is_level(&a, &xi), code(AtomKind::Sat, &[&a, &s])));
    Ok(Formula::forall(s, Formula::forall(r, Formula::implies(hyp, conc))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumResult {
    /// Least level satisfying every sentence; `None` when some sentence has
    /// no witness up to the scale searched.
    pub value: Option<usize>,
    pub per_sentence: BTreeMap<String, Option<usize>>,
}

/// Least `n ≤ max_n` with `L_n` satisfying every closed strict Σ_1 sentence.
pub fn spectrum(sentences: &[Formula], max_n: usize) -> Result<SpectrumResult, TruthError> {
    let mut per_sentence = BTreeMap::new();
    let mut value = Some(0);
    for phi in sentences {
        let n = least_witness_level(phi, max_n)?;
        value = match (value, n) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        per_sentence.insert(phi.to_string(), n);
    }
    Ok(SpectrumResult { value, per_sentence })
}
