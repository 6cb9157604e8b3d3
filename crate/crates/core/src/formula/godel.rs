use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use super::{parse, Arg, AtomKind, Formula, MacroKind, Var};

/// Code of a formula: the bytes of its canonical print read as a base-256 natural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GodelCode(pub BigUint);

impl fmt::Display for GodelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn encode(phi: &Formula) -> GodelCode {
    GodelCode(BigUint::from_bytes_be(phi.canonical_text().as_bytes()))
}

/// Inverse of [`encode`] up to alpha-equivalence; `None` for non-codes.
pub fn decode(code: &GodelCode) -> Option<Formula> {
    let bytes = code.0.to_bytes_be();
    let text = std::str::from_utf8(&bytes).ok()?;
    let f = parse(text).ok()?;
    (f.canonical_text() == text).then_some(f)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagonalizeError {
    #[error("code slot and set slot must be distinct variables")]
    SameSlot,
    #[error("formula has free variables outside the two slots: {0:?}")]
    SlotArity(Vec<Var>),
}

/// Result of the diagonal construction.
#[derive(Clone, Debug)]
pub struct Diagonal {
    /// `φ'(n, x) := ∃m (Diag(n, m) ∧ φ(m, x))`
    pub phi_prime: Formula,
    /// `k = ⌜φ'⌝`
    pub code: GodelCode,
    /// `ψ(x) := φ'(#k, x)`
    pub psi: Formula,
}

/// `θ(#k, ...)` where the code slot is the first free variable of `θ`.
fn instantiate_numeral(theta: &Formula, slot: &Var, k: &BigUint) -> Formula {
    let lit = Formula::Macro(MacroKind::Nat, vec![Arg::Var(slot.clone()), Arg::Num(k.clone())]);
    Formula::exists(slot.clone(), Formula::and(lit, theta.clone()))
}

/// The diagonal function on codes: `d(⌜θ⌝) = ⌜θ(⌜θ⌝, x)⌝`.
pub fn diag(k: &BigUint) -> Option<BigUint> {
    let theta = decode(&GodelCode(k.clone()))?;
    let slot = theta.free_vars().into_iter().next()?;
    Some(encode(&instantiate_numeral(&theta, &slot, k)).0)
}

pub fn diagonalize(phi: &Formula, code: &Var, x: &Var) -> Result<Diagonal, DiagonalizeError> {
    if code == x {
        return Err(DiagonalizeError::SameSlot);
    }
    let extra: Vec<Var> = phi.free_vars().into_iter().filter(|v| v != code && v != x).collect();
    if !extra.is_empty() {
        return Err(DiagonalizeError::SlotArity(extra));
    }
    let mut avoid = phi.all_vars();
    avoid.insert(code.clone());
    avoid.insert(x.clone());
    let m = super::fresh_var("m", &avoid);
    let diag_atom = Formula::Atom(AtomKind::Diag, vec![Arg::Var(code.clone()), Arg::Var(m.clone())]);
    // Keep the code slot as the first free variable so that `diag` finds it.
    let phi_prime = Formula::exists(m.clone(), Formula::and(diag_atom, phi.substitute(code, &m)));
    let k = encode(&phi_prime);
    let psi = instantiate_numeral(&phi_prime, code, &k.0);
    Ok(Diagonal { phi_prime, code: k, psi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::v;

    #[test]
    fn code_round_trip() {
        let f = parse("exists a. forall b in a. ~(b = c)").unwrap();
        let back = decode(&encode(&f)).unwrap();
        assert!(back.alpha_eq(&f));
        assert_eq!(encode(&f), encode(&parse("exists q. forall r in q. ~(r = c)").unwrap()));
        assert_eq!(decode(&GodelCode(BigUint::from(3u32))), None);
    }

    #[test]
    fn diagonal_construction() {
        let phi = parse("x = x & n = n").unwrap();
        let d = diagonalize(&phi, &v("n"), &v("x")).unwrap();
        assert_eq!(d.code, encode(&d.phi_prime));
        assert_eq!(d.psi.free_vars(), vec![v("x")]);
        assert_eq!(diag(&d.code.0), Some(encode(&d.psi).0));
        let again = diagonalize(&phi, &v("n"), &v("x")).unwrap();
        assert_eq!(again.psi, d.psi);
    }

    #[test]
    fn diagonal_slot_errors() {
        let phi = parse("x = y & n = n").unwrap();
        assert_eq!(diagonalize(&phi, &v("n"), &v("x")).unwrap_err(), DiagonalizeError::SlotArity(vec![v("y")]));
        assert_eq!(diagonalize(&phi, &v("n"), &v("n")).unwrap_err(), DiagonalizeError::SameSlot);
    }
}
