//! Hereditarily finite sets with hash-consing.
//!
//! Every [`HSet`] is interned: two structurally equal sets are the same node,
//! so equality and hashing are O(1) on the node id. Elements are kept in the
//! canonical order (rank first, then lexicographic on the element sequences),
//! which makes the braces text form unique per set.
//!
//! The intern table is process-wide and append-only. Nodes live for the rest
//! of the process; reads never take the lock.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

struct Node {
    id: u64,
    rank: u32,
    elems: Box<[HSet]>,
}

/// A canonical hereditarily finite set.
#[derive(Clone)]
pub struct HSet(Arc<Node>);

struct Interner {
    table: Mutex<HashMap<Box<[u64]>, HSet>>,
    next_id: AtomicU64,
}

fn interner() -> &'static Interner {
    static INTERNER: OnceLock<Interner> = OnceLock::new();
    INTERNER.get_or_init(|| Interner {
        table: Mutex::new(HashMap::new()),
        next_id: AtomicU64::new(0),
    })
}

/// Number of distinct sets interned so far.
pub fn interned_count() -> usize {
    interner().table.lock().expect("intern table poisoned").len()
}

impl HSet {
    /// Interns a set whose elements are already sorted canonically and deduplicated.
    fn intern_sorted(elems: Vec<HSet>) -> HSet {
        let key: Box<[u64]> = elems.iter().map(|e| e.0.id).collect();
        let int = interner();
        let mut table = int.table.lock().expect("intern table poisoned");
        if let Some(found) = table.get(&key) {
            return found.clone();
        }
        let rank = elems.iter().map(|e| e.0.rank + 1).max().unwrap_or(0);
        let node = Node {
            id: int.next_id.fetch_add(1, AtomicOrdering::Relaxed),
            rank,
            elems: elems.into_boxed_slice(),
        };
        let set = HSet(Arc::new(node));
        table.insert(key, set.clone());
        set
    }

    /// The empty set.
    pub fn empty() -> HSet {
        static EMPTY: OnceLock<HSet> = OnceLock::new();
        EMPTY.get_or_init(|| HSet::intern_sorted(Vec::new())).clone()
    }

    /// Builds the set of the given elements (duplicates collapse).
    pub fn from_elements<I: IntoIterator<Item = HSet>>(elems: I) -> HSet {
        let mut v: Vec<HSet> = elems.into_iter().collect();
        v.sort();
        v.dedup();
        HSet::intern_sorted(v)
    }

    /// The von Neumann natural `n`.
    pub fn nat(n: usize) -> HSet {
        let mut cur = HSet::empty();
        for _ in 0..n {
            cur = cur.successor();
        }
        cur
    }

    /// `{x}`
    pub fn singleton(x: &HSet) -> HSet {
        HSet::intern_sorted(vec![x.clone()])
    }

    /// `{x, y}`
    pub fn pair(x: &HSet, y: &HSet) -> HSet {
        HSet::from_elements([x.clone(), y.clone()])
    }

    /// Kuratowski pair `{{x}, {x, y}}`.
    pub fn kpair(x: &HSet, y: &HSet) -> HSet {
        HSet::pair(&HSet::singleton(x), &HSet::pair(x, y))
    }

    /// `x ∪ {x}`
    pub fn successor(&self) -> HSet {
        self.insert(self)
    }

    /// Stable node id; unique per extensional set within the process.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn rank(&self) -> u32 {
        self.0.rank
    }

    pub fn len(&self) -> usize {
        self.0.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.elems.is_empty()
    }

    /// Elements in canonical order.
    pub fn elements(&self) -> &[HSet] {
        &self.0.elems
    }

    pub fn contains(&self, x: &HSet) -> bool {
        let elems = &self.0.elems;
        if x.rank() >= self.rank() {
            return false;
        }
        if elems.len() <= 16 {
            elems.iter().any(|e| e == x)
        } else {
            elems.binary_search(x).is_ok()
        }
    }

    /// `self ∪ {x}`
    pub fn insert(&self, x: &HSet) -> HSet {
        if self.contains(x) {
            return self.clone();
        }
        let mut v = self.0.elems.to_vec();
        let pos = v.binary_search(x).unwrap_err();
        v.insert(pos, x.clone());
        HSet::intern_sorted(v)
    }

    /// `self ∖ {y}`
    pub fn diff_element(&self, y: &HSet) -> HSet {
        if !self.contains(y) {
            return self.clone();
        }
        let v: Vec<HSet> = self.0.elems.iter().filter(|e| *e != y).cloned().collect();
        HSet::intern_sorted(v)
    }

    /// `⋃ self`
    pub fn union(&self) -> HSet {
        HSet::from_elements(self.0.elems.iter().flat_map(|e| e.elements().iter().cloned()))
    }

    /// `self ∪ other`
    pub fn cup(&self, other: &HSet) -> HSet {
        HSet::from_elements(self.elements().iter().chain(other.elements()).cloned())
    }

    pub fn is_subset(&self, other: &HSet) -> bool {
        self.elements().iter().all(|e| other.contains(e))
    }

    /// Transitive closure of the set, not including the set itself:
    /// `TC(x) = x ∪ ⋃{TC(y) : y ∈ x}`.
    pub fn transitive_closure(&self) -> HSet {
        let mut seen: HashMap<u64, HSet> = HashMap::new();
        let mut stack: Vec<HSet> = self.elements().to_vec();
        while let Some(s) = stack.pop() {
            if seen.insert(s.id(), s.clone()).is_none() {
                stack.extend(s.elements().iter().cloned());
            }
        }
        HSet::from_elements(seen.into_values())
    }

    pub fn is_transitive(&self) -> bool {
        self.elements()
            .iter()
            .all(|y| y.elements().iter().all(|z| self.contains(z)))
    }

    /// A transitive set of transitive sets.
    pub fn is_ordinal(&self) -> bool {
        self.is_transitive() && self.elements().iter().all(HSet::is_transitive)
    }

    /// `Some(n)` when the set is the von Neumann natural `n`.
    pub fn as_nat(&self) -> Option<usize> {
        let n = self.len();
        if self.rank() as usize != n || !self.is_ordinal() {
            return None;
        }
        Some(n)
    }

    /// Braces text with `#n` shorthand for naturals.
    pub fn shorthand(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s, true);
        s
    }

    fn write_text(&self, out: &mut String, short: bool) {
        if short {
            if let Some(n) = self.as_nat() {
                out.push('#');
                out.push_str(&n.to_string());
                return;
            }
        }
        out.push('{');
        for (i, e) in self.elements().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            e.write_text(out, short);
        }
        out.push('}');
    }
}

impl PartialEq for HSet {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for HSet {}

impl Hash for HSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

/// Canonical order: rank, then lexicographic on the canonical element lists.
impl Ord for HSet {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.elements().cmp(other.elements()))
    }
}

impl PartialOrd for HSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_text(&mut s, false);
        f.write_str(&s)
    }
}

impl fmt::Debug for HSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.shorthand())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseSetError {
    #[error("unexpected end of input")]
    Eof,
    #[error("unexpected character {found:?} at offset {offset}")]
    Unexpected { found: char, offset: usize },
    #[error("bad natural literal at offset {offset}")]
    BadNatural { offset: usize },
    #[error("natural literal {0} too large")]
    NaturalTooLarge(usize),
}

/// Largest `#n` literal accepted by the text parser.
pub const MAX_NAT_LITERAL: usize = 4096;

impl std::str::FromStr for HSet {
    type Err = ParseSetError;

    /// Accepts `{...}` with comma-separated elements, `∅`, and `#n`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<(usize, char)> = s.char_indices().collect();
        let mut pos = 0;
        let set = parse_set(&chars, &mut pos, 0)?;
        skip_ws(&chars, &mut pos);
        if let Some(&(offset, found)) = chars.get(pos) {
            return Err(ParseSetError::Unexpected { found, offset });
        }
        Ok(set)
    }
}

const MAX_DEPTH: usize = 256;

fn skip_ws(chars: &[(usize, char)], pos: &mut usize) {
    while chars.get(*pos).is_some_and(|(_, c)| c.is_whitespace()) {
        *pos += 1;
    }
}

fn parse_set(chars: &[(usize, char)], pos: &mut usize, depth: usize) -> Result<HSet, ParseSetError> {
    skip_ws(chars, pos);
    let &(offset, c) = chars.get(*pos).ok_or(ParseSetError::Eof)?;
    if depth > MAX_DEPTH {
        return Err(ParseSetError::Unexpected { found: c, offset });
    }
    match c {
        '∅' => {
            *pos += 1;
            Ok(HSet::empty())
        }
        '#' => {
            *pos += 1;
            let start = *pos;
            while chars.get(*pos).is_some_and(|(_, c)| c.is_ascii_digit()) {
                *pos += 1;
            }
            if start == *pos {
                return Err(ParseSetError::BadNatural { offset });
            }
            let digits: String = chars[start..*pos].iter().map(|(_, c)| c).collect();
            let n: usize = digits
                .parse()
                .map_err(|_| ParseSetError::BadNatural { offset })?;
            if n > MAX_NAT_LITERAL {
                return Err(ParseSetError::NaturalTooLarge(n));
            }
            Ok(HSet::nat(n))
        }
        '{' => {
            *pos += 1;
            let mut elems = Vec::new();
            skip_ws(chars, pos);
            if chars.get(*pos).is_some_and(|(_, c)| *c == '}') {
                *pos += 1;
                return Ok(HSet::empty());
            }
            loop {
                elems.push(parse_set(chars, pos, depth + 1)?);
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    Some((_, ',')) => *pos += 1,
                    Some((_, '}')) => {
                        *pos += 1;
                        return Ok(HSet::from_elements(elems));
                    }
                    Some(&(offset, found)) => return Err(ParseSetError::Unexpected { found, offset }),
                    None => return Err(ParseSetError::Eof),
                }
            }
        }
        found => Err(ParseSetError::Unexpected { found, offset }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> HSet {
        text.parse().unwrap()
    }

    #[test]
    fn kpair_examples() {
        let e = HSet::empty();
        let one = HSet::nat(1);
        assert_eq!(HSet::kpair(&e, &e), s("{{∅}}"));
        assert_eq!(HSet::kpair(&e, &one), s("{{∅},{∅,{∅}}}"));
    }

    #[test]
    fn transitive_closure_examples() {
        assert_eq!(HSet::empty().transitive_closure(), HSet::empty());
        assert_eq!(s("{{∅}}").transitive_closure(), s("{{∅},∅}"));
    }

    #[test]
    fn ordinal_examples() {
        assert!(HSet::empty().is_ordinal());
        assert!(s("{∅,{∅}}").is_ordinal());
        assert!(!s("{{∅}}").is_ordinal());
    }

    #[test]
    fn basic_operations() {
        assert_eq!(s("{{∅},{{∅}}}").union(), s("{∅,{∅}}"));
        assert_eq!(HSet::pair(&HSet::empty(), &HSet::empty()), s("{∅}"));
        assert_eq!(s("{∅,{∅}}").diff_element(&HSet::empty()), s("{{∅}}"));
        assert_eq!(HSet::nat(2).cup(&s("{{{∅}}}")), s("{∅,#1,{#1}}"));
    }

    #[test]
    fn canonical_regardless_of_construction_order() {
        let a = HSet::empty().insert(&HSet::nat(1)).insert(&HSet::nat(2));
        let b = HSet::from_elements([HSet::nat(2), HSet::nat(1)]);
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn text_round_trip_and_shorthand() {
        let x = s("{#2, {#1}, ∅}");
        assert_eq!(x.shorthand(), "{#0,#2,{#1}}");
        assert_eq!(s(&x.to_string()), x);
        assert_eq!(s("{}"), HSet::empty());
        assert_eq!(HSet::nat(3).as_nat(), Some(3));
        assert_eq!(s("{{∅}}").as_nat(), None);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("{".parse::<HSet>(), Err(ParseSetError::Eof)));
        assert!(matches!("{∅,}".parse::<HSet>(), Err(ParseSetError::Unexpected { .. })));
        assert!(matches!("#".parse::<HSet>(), Err(ParseSetError::BadNatural { .. })));
        assert!(matches!("{} x".parse::<HSet>(), Err(ParseSetError::Unexpected { .. })));
    }

    #[test]
    fn rank_of_elements_is_smaller() {
        let x = s("{#3,{#1,{#2}}}");
        assert_eq!(x.rank(), 5);
        assert!(x.elements().iter().all(|e| e.rank() < x.rank()));
    }
}
