//! Finite constructible levels `L_n` and the `<_L` order.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formula::{encode, Formula, GodelCode, Var};
use crate::hfs::HSet;
use crate::truth::{Domain, Prepared};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LevelError {
    #[error("formula bound exhausted at L_{index}: found {found} of {wanted} subsets")]
    ResourceLimit { index: usize, found: usize, wanted: usize },
    #[error("L_{0} is beyond the configured bound; only its size is available")]
    TooLarge(usize),
    #[error("{0:?} is not in L_{1}")]
    NotInLevel(HSet, usize),
}

/// Defining formula and parameters of a set at its birth stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub formula: Formula,
    pub code: GodelCode,
    pub params: Vec<HSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    /// Largest AST size of the enumerated defining formulas.
    pub max_formula_size: usize,
    pub max_params: usize,
    /// Largest index built in full.
    pub max_full_index: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { max_formula_size: 3, max_params: 2, max_full_index: 4 }
    }
}

#[derive(Debug)]
pub struct Level {
    index: usize,
    domain: Domain,
    position: HashMap<HSet, usize>,
    birth: Vec<usize>,
    witness: Vec<Witness>,
    as_set: HSet,
}

impl Level {
    pub fn empty() -> Level {
        Level {
            index: 0,
            domain: Domain::new(Vec::new()).expect("empty domain is transitive"),
            position: HashMap::new(),
            birth: Vec::new(),
            witness: Vec::new(),
            as_set: HSet::empty(),
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Elements in `<_L` order.
    pub fn elements(&self) -> &[HSet] {
        self.domain.elements()
    }

    pub fn len(&self) -> usize {
        self.elements().len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements().is_empty()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The level itself as a set.
    pub fn as_set(&self) -> &HSet {
        &self.as_set
    }

    pub fn contains(&self, x: &HSet) -> bool {
        self.position.contains_key(x)
    }

    pub fn position(&self, x: &HSet) -> Option<usize> {
        self.position.get(x).copied()
    }

    pub fn birth_stage(&self, x: &HSet) -> Option<usize> {
        self.position(x).map(|i| self.birth[i])
    }

    pub fn witness(&self, x: &HSet) -> Option<&Witness> {
        self.position(x).map(|i| &self.witness[i])
    }

    /// `<_L` restricted to this level.
    pub fn l_order(&self, x: &HSet, y: &HSet) -> Result<Ordering, LevelError> {
        let px = self.position(x).ok_or_else(|| LevelError::NotInLevel(x.clone(), self.index))?;
        let py = self.position(y).ok_or_else(|| LevelError::NotInLevel(y.clone(), self.index))?;
        Ok(px.cmp(&py))
    }

    /// `<_L`-least element of a non-empty collection of members.
    pub fn l_min<'a>(&self, xs: impl IntoIterator<Item = &'a HSet>) -> Result<Option<HSet>, LevelError> {
        let mut best: Option<(usize, &HSet)> = None;
        for x in xs {
            let p = self.position(x).ok_or_else(|| LevelError::NotInLevel(x.clone(), self.index))?;
            if best.is_none_or(|(q, _)| p < q) {
                best = Some((p, x));
            }
        }
        Ok(best.map(|(_, x)| x.clone()))
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct W {
            formula: String,
            code: String,
            params: Vec<String>,
        }
        #[derive(Serialize)]
        struct E {
            position: usize,
            set: String,
            birth_stage: usize,
            witness: W,
        }
        #[derive(Serialize)]
        struct L {
            index: usize,
            size: usize,
            elements: Vec<E>,
        }
        let elements = self
            .elements()
            .iter()
            .enumerate()
            .map(|(i, x)| E {
                position: i,
                set: x.to_string(),
                birth_stage: self.birth[i],
                witness: W {
                    formula: self.witness[i].formula.to_string(),
                    code: self.witness[i].code.to_string(),
                    params: self.witness[i].params.iter().map(|p| p.to_string()).collect(),
                },
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&L { index: self.index, size: self.len(), elements })
            .expect("serializable");
        s.push('\n');
        s
    }

    /// Hex SHA-256 of [`Level::to_json`].
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Candidate defining formulas in the subject `x` and parameters `p0, p1, ...`,
/// sorted by code.
#[derive(Debug)]
pub struct FormulaStock {
    entries: Vec<(Formula, GodelCode, usize)>,
}

impl FormulaStock {
    pub fn new(max_size: usize, max_params: usize) -> FormulaStock {
        let subject = Var::new("x");
        let params: Vec<Var> = (0..max_params).map(|i| Var::new(&format!("p{i}"))).collect();
        let mut scope = vec![subject.clone()];
        scope.extend(params.iter().cloned());
        let mut seen = BTreeSet::new();
        let mut entries = Vec::new();
        for size in 1..=max_size {
            for f in generate(size, &scope, 0) {
                let canon = f.canonical();
                let text = canon.to_string();
                if !seen.insert(text) {
                    continue;
                }
                let free = canon.free_vars();
                let k = params.iter().take_while(|p| free.contains(p)).count();
                if params[k..].iter().any(|p| free.contains(p)) {
                    continue;
                }
                let code = encode(&canon);
                entries.push((canon, code, k));
            }
        }
        entries.sort_by(|a, b| a.1.cmp(&b.1));
        FormulaStock { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const BOUND_NAMES: [&str; 3] = ["y", "z", "w"];

fn generate(size: usize, scope: &[Var], depth: usize) -> Vec<Formula> {
    let mut out = Vec::new();
    if size == 1 {
        for a in scope {
            for b in scope {
                out.push(Formula::Mem(a.clone(), b.clone()));
                out.push(Formula::Eq(a.clone(), b.clone()));
            }
        }
        return out;
    }
    for f in generate(size - 1, scope, depth) {
        out.push(Formula::not(f));
    }
    for l in 1..size - 1 {
        let r = size - 1 - l;
        let lefts = generate(l, scope, depth);
        let rights = generate(r, scope, depth);
        for a in &lefts {
            for b in &rights {
                out.push(Formula::and(a.clone(), b.clone()));
                out.push(Formula::or(a.clone(), b.clone()));
            }
        }
    }
    if depth < BOUND_NAMES.len() {
        let y = Var::new(BOUND_NAMES[depth]);
        let mut inner = scope.to_vec();
        inner.push(y.clone());
        for body in generate(size - 1, &inner, depth + 1) {
            out.push(Formula::exists(y.clone(), body.clone()));
            out.push(Formula::forall(y.clone(), body));
        }
    }
    out
}

fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if k == 0 { 1 } else { n.checked_pow(k as u32).unwrap_or(0) };
    (0..total).map(move |mut t| {
        let mut digits = vec![0; k];
        for d in digits.iter_mut().rev() {
            *d = t % n.max(1);
            t /= n.max(1);
        }
        digits
    })
}

/// All parameter-definable subsets of `m`, first witness kept, in
/// (formula code, `<_L`-lex parameter tuple) order.
pub fn definable_subsets(m: &Level, stock: &FormulaStock) -> Result<Vec<(HSet, Witness)>, LevelError> {
    let n = m.len();
    let wanted = if n < usize::BITS as usize { 1usize << n } else { usize::MAX };
    let mut found: Vec<(HSet, Witness)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let subject = Var::new("x");
    'formulas: for (phi, code, k) in &stock.entries {
        let mut inputs = vec![subject.clone()];
        inputs.extend((0..*k).map(|i| Var::new(&format!("p{i}"))));
        let prepared = Prepared::new(phi, &inputs).expect("stock formulas only use their inputs");
        for tuple in tuples(n, *k) {
            let params: Vec<HSet> = tuple.iter().map(|&i| m.elements()[i].clone()).collect();
            let mut vals = vec![HSet::empty()];
            vals.extend(params.iter().cloned());
            let mut members = Vec::new();
            for x in m.elements() {
                vals[0] = x.clone();
                if prepared.eval(m.domain(), &vals).expect("closed evaluation") {
                    members.push(x.clone());
                }
            }
            let set = HSet::from_elements(members);
            if seen.insert(set.clone()) {
                found.push((set, Witness { formula: phi.clone(), code: code.clone(), params }));
                if found.len() == wanted {
                    break 'formulas;
                }
            }
        }
    }
    if found.len() < wanted {
        return Err(LevelError::ResourceLimit { index: m.index, found: found.len(), wanted });
    }
    Ok(found)
}

/// `L_{n+1}` from `L_n`.
pub fn next_level(m: &Level, stock: &FormulaStock) -> Result<Level, LevelError> {
    let mut elems = m.elements().to_vec();
    let mut birth = m.birth.clone();
    let mut witness = m.witness.clone();
    let mut position = m.position.clone();
    for (set, w) in definable_subsets(m, stock)? {
        if !position.contains_key(&set) {
            position.insert(set.clone(), elems.len());
            elems.push(set);
            birth.push(m.index + 1);
            witness.push(w);
        }
    }
    let as_set = HSet::from_elements(elems.iter().cloned());
    let domain = Domain::new(elems).expect("levels are transitive");
    Ok(Level { index: m.index + 1, domain, position, birth, witness, as_set })
}

/// `L_0, ..., L_n`.
pub fn build_tower(n: usize, cfg: &BuildConfig) -> Result<Vec<Level>, LevelError> {
    if n > cfg.max_full_index {
        return Err(LevelError::TooLarge(n));
    }
    let stock = FormulaStock::new(cfg.max_formula_size, cfg.max_params);
    let mut out = vec![Level::empty()];
    for _ in 0..n {
        let next = next_level(out.last().expect("non-empty"), &stock)?;
        out.push(next);
    }
    Ok(out)
}

pub fn build(n: usize) -> Result<Level, LevelError> {
    Ok(build_tower(n, &BuildConfig::default())?.pop().expect("non-empty"))
}

/// `|L_n|`, available past the full-build bound; `None` once it no longer fits in memory.
pub fn level_size(n: usize) -> Option<BigUint> {
    let mut size = BigUint::from(0u32);
    for _ in 0..n {
        size = BigUint::from(1u32) << size.to_u32()?;
    }
    Some(size)
}

fn standard_tower() -> &'static Result<Vec<Level>, LevelError> {
    static TOWER: OnceLock<Result<Vec<Level>, LevelError>> = OnceLock::new();
    TOWER.get_or_init(|| build_tower(BuildConfig::default().max_full_index, &BuildConfig::default()))
}

/// Shared `L_n` built once per process with the default configuration.
pub fn standard_level(n: usize) -> Result<&'static Level, LevelError> {
    match standard_tower() {
        Ok(t) => t.get(n).ok_or(LevelError::TooLarge(n)),
        Err(e) => Err(e.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        assert!(standard_level(0).unwrap().is_empty());
        assert_eq!(standard_level(1).unwrap().elements(), &[HSet::empty()]);
        let sizes: Vec<usize> = (0..=4).map(|n| standard_level(n).unwrap().len()).collect();
        assert_eq!(sizes, vec![0, 1, 2, 4, 16]);
        assert_eq!(level_size(5), Some(BigUint::from(65536u32)));
        assert_eq!(level_size(7), None);
        assert_eq!(standard_level(5).unwrap_err(), LevelError::TooLarge(5));
    }

    #[test]
    fn definable_subsets_of_small_levels() {
        let stock = FormulaStock::new(3, 2);
        let l0 = standard_level(0).unwrap();
        let sets: Vec<HSet> = definable_subsets(l0, &stock).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(sets, vec![HSet::empty()]);
        let l1 = standard_level(1).unwrap();
        let mut sets: Vec<HSet> = definable_subsets(l1, &stock).unwrap().into_iter().map(|p| p.0).collect();
        sets.sort();
        assert_eq!(sets, vec![HSet::empty(), HSet::nat(1)]);
    }

    #[test]
    fn tiny_stock_runs_out() {
        let stock = FormulaStock::new(1, 0);
        let l3 = standard_level(3).unwrap();
        assert!(matches!(definable_subsets(l3, &stock), Err(LevelError::ResourceLimit { index: 3, .. })));
    }

    #[test]
    fn birth_order() {
        let l4 = standard_level(4).unwrap();
        assert_eq!(l4.position(&HSet::empty()), Some(0));
        assert_eq!(l4.position(&HSet::nat(1)), Some(1));
        assert_eq!(l4.birth_stage(&HSet::nat(2)), Some(3));
        assert_eq!(l4.l_order(&HSet::empty(), &HSet::nat(1)).unwrap(), Ordering::Less);
        assert!(l4.l_order(&HSet::nat(4), &HSet::empty()).is_err());
    }

    #[test]
    fn witnesses_define_their_sets() {
        let l4 = standard_level(4).unwrap();
        for x in l4.elements() {
            let w = l4.witness(x).unwrap();
            let below = standard_level(l4.birth_stage(x).unwrap() - 1).unwrap();
            let mut inputs = vec![Var::new("x")];
            inputs.extend((0..w.params.len()).map(|i| Var::new(&format!("p{i}"))));
            let p = Prepared::new(&w.formula, &inputs).unwrap();
            let members: Vec<HSet> = below
                .elements()
                .iter()
                .filter(|y| {
                    let mut vals = vec![(*y).clone()];
                    vals.extend(w.params.iter().cloned());
                    p.eval(below.domain(), &vals).unwrap()
                })
                .cloned()
                .collect();
            assert_eq!(&HSet::from_elements(members), x);
        }
    }

    #[test]
    fn json_is_stable() {
        let a = build(3).unwrap().to_json();
        let b = build(3).unwrap().to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"birth_stage\""));
    }
}
