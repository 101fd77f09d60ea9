//! Sumset algebra, Ruzsa's triangle-type inequality for three sets, and an
//! exact decision procedure for binary sumset decompositions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Result, SieveError};
use crate::exec::Exec;

/// Finite set of non-negative integers, stored sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct IntegerSet(Vec<u64>);

impl IntegerSet {
    pub fn new(mut v: Vec<u64>) -> Self {
        v.sort_unstable();
        v.dedup();
        IntegerSet(v)
    }

    /// `[lo, hi]`
    pub fn range(lo: u64, hi: u64) -> Self {
        IntegerSet((lo..=hi).collect())
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &IntegerSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    /// `{v - t : v ∈ self}`; `t` must not exceed the minimum.
    pub fn translate_down(&self, t: u64) -> IntegerSet {
        IntegerSet(self.0.iter().map(|&v| v - t).collect())
    }

    pub fn translate_up(&self, t: u64) -> IntegerSet {
        IntegerSet(self.0.iter().map(|&v| v + t).collect())
    }
}

impl FromIterator<u64> for IntegerSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        IntegerSet::new(iter.into_iter().collect())
    }
}

impl From<Vec<u64>> for IntegerSet {
    fn from(v: Vec<u64>) -> Self {
        IntegerSet::new(v)
    }
}

impl fmt::Display for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for IntegerSet {
    type Err = SieveError;

    /// Accepts `1,2,5` or `lo..hi` (inclusive) or a mix such as `0,3..6,9`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let bad = || SieveError::Parse(format!("bad set element '{tok}'"));
            if let Some((lo, hi)) = tok.split_once("..") {
                let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u64 = hi
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| bad())?;
                if hi < lo {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            } else {
                out.push(tok.parse().map_err(|_| bad())?);
            }
        }
        Ok(IntegerSet::new(out))
    }
}

/// Dense membership over `[0, len)`.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: u64) {
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }
    fn get(&self, i: u64) -> bool {
        let w = (i / 64) as usize;
        w < self.0.len() && self.0[w] >> (i % 64) & 1 == 1
    }
}

const DENSE_SUMSET_LIMIT: u64 = 1 << 28;

/// `A + B = {a + b}`, sorted and deduplicated.
pub fn sumset(a: &IntegerSet, b: &IntegerSet) -> IntegerSet {
    let (Some(ma), Some(mb)) = (a.max(), b.max()) else {
        return IntegerSet::default();
    };
    let top = ma + mb;
    if top < DENSE_SUMSET_LIMIT {
        let mut bits = Bits::new(top as usize + 1);
        for x in a.iter() {
            for y in b.iter() {
                bits.set(x + y);
            }
        }
        let lo = a.min().unwrap() + b.min().unwrap();
        IntegerSet((lo..=top).filter(|&v| bits.get(v)).collect())
    } else {
        let set: BTreeSet<u64> = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| x + y))
            .collect();
        IntegerSet(set.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuzsaCheck {
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

/// `|A+B+C|^2 <= |A+B| |A+C| |B+C|`
pub fn ruzsa_check(a: &IntegerSet, b: &IntegerSet, c: &IntegerSet) -> Result<RuzsaCheck> {
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return domain("ruzsa_check needs three non-empty sets");
    }
    let ab = sumset(a, b);
    let abc = sumset(&ab, c).len() as u128;
    let lhs = abc * abc;
    let rhs = ab.len() as u128 * sumset(a, c).len() as u128 * sumset(b, c).len() as u128;
    Ok(RuzsaCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionResult {
    pub decomposable: bool,
    /// `(A, B)` with `min(A) = 0`, `A + B` equal to (or sandwiched by) the
    /// queried set.
    pub witness: Option<(IntegerSet, IntegerSet)>,
    pub nodes_explored: u64,
    pub normalized: bool,
}

/// Options for the decomposition search.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub min_part: usize,
    /// Abort with a capacity error after this many search nodes.
    pub node_cap: u64,
    /// Split the top level of the search across threads.
    pub exec: Exec,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            min_part: 2,
            node_cap: 50_000_000,
            exec: Exec::Sequential,
        }
    }
}

/// Largest accepted `#S` for the search.
pub const MAX_SEARCH_SET: usize = 10_000;

/// Search state shared by the exact and the sandwiched variant.
///
/// Elements are normalised so that `min(A) = 0`. `base` is the smallest
/// element of `B`; `upper` is the set every sum must land in; `cover` is the
/// set every element of which must be hit.
struct Problem<'a> {
    upper: &'a [u64],
    upper_bits: Bits,
    cover: &'a [u64],
    base: u64,
    min_part: usize,
    node_cap: u64,
}

struct Frame {
    a: Vec<u64>,
    b: Vec<u64>,
}

enum Outcome {
    Found(Vec<u64>, Vec<u64>),
    Exhausted,
    CapHit,
}

impl Problem<'_> {
    fn in_upper(&self, v: u64) -> bool {
        self.upper_bits.get(v)
    }

    /// `B_max(A ∪ {a})` from `B_max(A)`.
    fn restrict(&self, b: &[u64], a: u64) -> Vec<u64> {
        b.iter()
            .copied()
            .filter(|&x| self.in_upper(x + a))
            .collect()
    }

    /// Covered elements of `cover` that are `<= limit`; `None` when one of
    /// them is missed.
    fn covers_up_to(&self, a: &[u64], b: &[u64], limit: u64) -> bool {
        let top = self.cover.partition_point(|&v| v <= limit);
        let targets = &self.cover[..top];
        if targets.is_empty() {
            return true;
        }
        let span = limit + 1;
        let mut hit = Bits::new(span as usize);
        for &x in a {
            for &y in b {
                let s = x + y;
                if s > limit {
                    break;
                }
                hit.set(s);
            }
        }
        targets.iter().all(|&t| hit.get(t))
    }

    fn is_solution(&self, a: &[u64], b: &[u64]) -> bool {
        a.len() >= self.min_part
            && b.len() >= self.min_part
            && self.covers_up_to(a, b, *self.cover.last().unwrap_or(&0))
    }

    /// Candidates for the next element of `A` after `frame`.
    fn children(&self, frame: &Frame) -> Vec<u64> {
        let last = *frame.a.last().unwrap();
        // a + base must land in `upper`
        self.upper
            .iter()
            .filter_map(|&u| u.checked_sub(self.base))
            .filter(|&a| a > last)
            .collect()
    }

    /// Depth-first search below `frame`, preorder, children ascending.
    fn dfs(&self, frame: Frame, nodes: &mut u64) -> Outcome {
        let mut stack = vec![frame];
        while let Some(frame) = stack.pop() {
            *nodes += 1;
            if *nodes > self.node_cap {
                return Outcome::CapHit;
            }
            if self.is_solution(&frame.a, &frame.b) {
                return Outcome::Found(frame.a, frame.b);
            }
            let mut next = Vec::new();
            for a in self.children(&frame) {
                let b = self.restrict(&frame.b, a);
                if b.len() < self.min_part || b.first() != Some(&self.base) {
                    continue;
                }
                // every cover element <= a + base can no longer gain new sums
                if !self.covers_up_to(&frame.a, &frame.b, a + self.base - 1) {
                    break;
                }
                let mut na = frame.a.clone();
                na.push(a);
                next.push(Frame { a: na, b });
            }
            stack.extend(next.into_iter().rev());
        }
        Outcome::Exhausted
    }

    /// Runs the search from the root `A = root`.
    fn solve(&self, root: Vec<u64>, exec: Exec) -> (Outcome, u64) {
        let mut b = self
            .upper
            .iter()
            .copied()
            .filter(|&v| v >= self.base)
            .collect::<Vec<_>>();
        for &a in &root {
            b = self.restrict(&b, a);
        }
        if b.len() < self.min_part || b.first() != Some(&self.base) {
            return (Outcome::Exhausted, 1);
        }
        let frame = Frame { a: root, b };
        if !exec.is_parallel() {
            let mut nodes = 0;
            let out = self.dfs(frame, &mut nodes);
            return (out, nodes);
        }
        // root first, then each child subtree in parallel; the first subtree
        // (in ascending order of its element) with a witness wins
        let mut nodes = 1;
        if self.is_solution(&frame.a, &frame.b) {
            return (Outcome::Found(frame.a, frame.b), nodes);
        }
        let mut kids = Vec::new();
        for a in self.children(&frame) {
            let b = self.restrict(&frame.b, a);
            if b.len() < self.min_part || b.first() != Some(&self.base) {
                continue;
            }
            if !self.covers_up_to(&frame.a, &frame.b, a + self.base - 1) {
                break;
            }
            let mut na = frame.a.clone();
            na.push(a);
            kids.push(Frame { a: na, b });
        }
        let results: Vec<(Outcome, u64)> = exec.map_range(kids.len(), |i| {
            let mut n = 0;
            let f = Frame {
                a: kids[i].a.clone(),
                b: kids[i].b.clone(),
            };
            (self.dfs(f, &mut n), n)
        });
        let mut found = None;
        let mut cap = false;
        for (out, n) in results {
            nodes += n;
            match out {
                Outcome::Found(a, b) if found.is_none() && !cap => found = Some((a, b)),
                Outcome::CapHit if found.is_none() => cap = true,
                _ => {}
            }
        }
        match (found, cap) {
            (Some((a, b)), _) => (Outcome::Found(a, b), nodes),
            (None, true) => (Outcome::CapHit, nodes),
            (None, false) => (Outcome::Exhausted, nodes),
        }
    }

    /// Drops elements of `b` (ascending, keeping `base`) while the
    /// coverage requirement and the size floor still hold.
    fn minimise_b(&self, a: &[u64], mut b: Vec<u64>) -> Vec<u64> {
        let top = *self.cover.last().unwrap_or(&0);
        let mut i = 1;
        while i < b.len() {
            if b.len() <= self.min_part {
                break;
            }
            let removed = b.remove(i);
            if !self.covers_up_to(a, &b, top) {
                b.insert(i, removed);
                i += 1;
            }
        }
        b
    }
}

fn check_search_input(s: &IntegerSet, min_part: usize) -> Result<()> {
    if min_part < 2 {
        return domain("min_part must be at least 2");
    }
    if s.len() > MAX_SEARCH_SET {
        return Err(SieveError::Capacity {
            what: "decomposition search set size",
            requested: s.len() as u64,
            limit: MAX_SEARCH_SET as u64,
        });
    }
    Ok(())
}

/// Decides whether `s = A + B` with `#A, #B >= min_part`.
///
/// After translating `min(s)` to zero, both parts contain zero, so both are
/// subsets of `s`. The smallest non-zero element of `s` lies in one of the
/// parts and by symmetry is placed in `A`. `A` is then grown in ascending
/// order while `B` is kept as the largest compatible set
/// `{b : a + b ∈ s for all a ∈ A}`. A branch dies once `B` is too small or
/// some element of `s` below the next candidate can no longer be hit.
pub fn decompose_binary(s: &IntegerSet, min_part: usize) -> Result<DecompositionResult> {
    decompose_binary_with(
        s,
        SearchOptions {
            min_part,
            ..SearchOptions::default()
        },
    )
}

pub fn decompose_binary_with(s: &IntegerSet, opts: SearchOptions) -> Result<DecompositionResult> {
    check_search_input(s, opts.min_part)?;
    if s.len() < 2 {
        return domain("decompose_binary needs at least two elements");
    }
    let shift = s.min().unwrap();
    let norm = s.translate_down(shift);
    let elems = norm.as_slice();
    let mut upper_bits = Bits::new(*elems.last().unwrap() as usize + 1);
    for &v in elems {
        upper_bits.set(v);
    }
    let problem = Problem {
        upper: elems,
        upper_bits,
        cover: elems,
        base: 0,
        min_part: opts.min_part,
        node_cap: opts.node_cap,
    };
    let (outcome, nodes) = problem.solve(vec![0, elems[1]], opts.exec);
    finish(&problem, outcome, nodes, shift)
}

fn finish(
    problem: &Problem<'_>,
    outcome: Outcome,
    nodes: u64,
    shift: u64,
) -> Result<DecompositionResult> {
    match outcome {
        Outcome::Found(a, b) => {
            let b = problem.minimise_b(&a, b);
            Ok(DecompositionResult {
                decomposable: true,
                witness: Some((IntegerSet(a), IntegerSet(b).translate_up(shift))),
                nodes_explored: nodes,
                normalized: true,
            })
        }
        Outcome::Exhausted => Ok(DecompositionResult {
            decomposable: false,
            witness: None,
            nodes_explored: nodes,
            normalized: true,
        }),
        Outcome::CapHit => Err(SieveError::Capacity {
            what: "decomposition search nodes",
            requested: nodes,
            limit: problem.node_cap,
        }),
    }
}

/// Decides whether there are `A, B` with `#A, #B >= min_part` and
/// `s0 ⊆ A + B ⊆ s` (the finitised inclusion form of a decomposition).
pub fn decompose_binary_relative(
    s0: &IntegerSet,
    s: &IntegerSet,
    min_part: usize,
) -> Result<DecompositionResult> {
    decompose_binary_relative_with(
        s0,
        s,
        SearchOptions {
            min_part,
            ..SearchOptions::default()
        },
    )
}

pub fn decompose_binary_relative_with(
    s0: &IntegerSet,
    s: &IntegerSet,
    opts: SearchOptions,
) -> Result<DecompositionResult> {
    check_search_input(s, opts.min_part)?;
    if s0.is_empty() || !s0.is_subset(s) {
        return domain("need a non-empty s0 contained in s");
    }
    let shift = s.min().unwrap();
    let upper = s.translate_down(shift);
    let cover = s0.translate_down(shift);
    let mut upper_bits = Bits::new(upper.max().unwrap() as usize + 1);
    for v in upper.iter() {
        upper_bits.set(v);
    }
    let mut total_nodes = 0;
    // the smallest sum min(A) + min(B) is an element of s not above min(s0)
    for base in upper.iter().take_while(|&m| m <= cover.min().unwrap()) {
        let problem = Problem {
            upper: upper.as_slice(),
            upper_bits: upper_bits.clone(),
            cover: cover.as_slice(),
            base,
            min_part: opts.min_part,
            node_cap: opts.node_cap.saturating_sub(total_nodes),
        };
        let (outcome, nodes) = problem.solve(vec![0], opts.exec);
        total_nodes += nodes;
        match outcome {
            Outcome::Exhausted => continue,
            other => return finish(&problem, other, total_nodes, shift),
        }
    }
    Ok(DecompositionResult {
        decomposable: false,
        witness: None,
        nodes_explored: total_nodes,
        normalized: true,
    })
}

/// Every `A` (with `min A = 0`) for which `s = A + B_max(A)`, paired with
/// that maximal `B`; stops after `cap` witnesses.
pub fn all_binary_witnesses(
    s: &IntegerSet,
    min_part: usize,
    cap: usize,
) -> Result<Vec<(IntegerSet, IntegerSet)>> {
    check_search_input(s, min_part)?;
    if s.len() < 2 {
        return domain("need at least two elements");
    }
    let shift = s.min().unwrap();
    let norm = s.translate_down(shift);
    let elems = norm.as_slice();
    let mut upper_bits = Bits::new(*elems.last().unwrap() as usize + 1);
    for &v in elems {
        upper_bits.set(v);
    }
    let problem = Problem {
        upper: elems,
        upper_bits,
        cover: elems,
        base: 0,
        min_part,
        node_cap: u64::MAX,
    };
    let mut out = Vec::new();
    let mut stack = vec![Frame {
        a: vec![0],
        b: elems.to_vec(),
    }];
    while let Some(frame) = stack.pop() {
        if out.len() >= cap {
            break;
        }
        if problem.is_solution(&frame.a, &frame.b) {
            out.push((
                IntegerSet(frame.a.clone()),
                IntegerSet(frame.b.clone()).translate_up(shift),
            ));
        }
        let mut next = Vec::new();
        for a in problem.children(&frame) {
            let b = problem.restrict(&frame.b, a);
            if b.len() < min_part || b.first() != Some(&0) {
                continue;
            }
            if !problem.covers_up_to(&frame.a, &frame.b, a - 1) {
                break;
            }
            let mut na = frame.a.clone();
            na.push(a);
            next.push(Frame { a: na, b });
        }
        stack.extend(next.into_iter().rev());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TernaryVerdict {
    TernaryImpossible,
    Inconclusive,
}

/// Ruzsa-based deduction: if every two-part sumset inside a putative
/// `A + B + C = s` has at most `binary_bound` elements, then
/// `#s^2 <= binary_bound^3`; a larger `#s` rules the ternary form out.
pub fn decompose_ternary_via_ruzsa(size: u64, binary_bound: f64) -> TernaryVerdict {
    let lhs = (size as f64) * (size as f64);
    if lhs > binary_bound.powi(3) {
        TernaryVerdict::TernaryImpossible
    } else {
        TernaryVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> IntegerSet {
        IntegerSet::new(v.to_vec())
    }

    #[test]
    fn parse_forms() {
        assert_eq!("0,1,2,3".parse::<IntegerSet>().unwrap(), set(&[0, 1, 2, 3]));
        assert_eq!("2..5".parse::<IntegerSet>().unwrap(), set(&[2, 3, 4, 5]));
        assert_eq!(
            "9, 0..2 ,1".parse::<IntegerSet>().unwrap(),
            set(&[0, 1, 2, 9])
        );
        assert!("5..2".parse::<IntegerSet>().is_err());
        assert!("a".parse::<IntegerSet>().is_err());
    }

    #[test]
    fn sumset_examples() {
        assert_eq!(sumset(&set(&[0, 1]), &set(&[0, 2])), set(&[0, 1, 2, 3]));
        let a = set(&[3, 8, 20]);
        assert_eq!(sumset(&a, &set(&[0])), a);
        assert!(sumset(&a, &IntegerSet::default()).is_empty());
        let big = set(&[0, 1 << 40]);
        assert_eq!(sumset(&big, &big), set(&[0, 1 << 40, 1 << 41]));
    }

    #[test]
    fn ruzsa_examples() {
        let two = set(&[0, 1]);
        let r = ruzsa_check(&two, &two, &two).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (16, 27, true));
        let one = set(&[7]);
        let r = ruzsa_check(&one, &one, &one).unwrap();
        assert_eq!((r.lhs, r.rhs), (1, 1));
        assert!(ruzsa_check(&one, &IntegerSet::default(), &one).is_err());
    }

    #[test]
    fn decompose_examples() {
        let r = decompose_binary(&set(&[0, 1, 2, 3]), 2).unwrap();
        assert!(r.decomposable);
        assert_eq!(r.witness, Some((set(&[0, 1]), set(&[0, 2]))));
        assert!(!decompose_binary(&set(&[0, 1, 3]), 2).unwrap().decomposable);
        // translated input keeps the translation in B
        let r = decompose_binary(&set(&[10, 11, 12, 13]), 2).unwrap();
        assert_eq!(r.witness, Some((set(&[0, 1]), set(&[10, 12]))));
        assert!(decompose_binary(&set(&[4]), 2).is_err());
        assert!(decompose_binary(&set(&[0, 1]), 1).is_err());
    }

    #[test]
    fn relative_examples() {
        let s = set(&[0, 1, 2, 3]);
        assert_eq!(
            decompose_binary_relative(&s, &s, 2).unwrap().decomposable,
            decompose_binary(&s, 2).unwrap().decomposable
        );
        let r = decompose_binary_relative(&set(&[0]), &set(&[0, 1]), 2).unwrap();
        assert!(!r.decomposable);
        // {5,7} ⊆ {0,2}+{5} is too small, but {1,3}+{4,6} ⊆ s covers s0
        let s = set(&[5, 7, 9, 11, 13]);
        let s0 = set(&[7, 11]);
        let r = decompose_binary_relative(&s0, &s, 2).unwrap();
        assert!(r.decomposable);
        let (a, b) = r.witness.unwrap();
        let sum = sumset(&a, &b);
        assert!(s0.is_subset(&sum) && sum.is_subset(&s));
        assert!(decompose_binary_relative(&set(&[99]), &s, 2).is_err());
    }

    #[test]
    fn parallel_search_reports_same_witness() {
        let a = set(&[0, 3, 4, 11, 19]);
        let b = set(&[0, 1, 7, 8, 30, 41, 44]);
        let s = sumset(&a, &b);
        let seq = decompose_binary(&s, 2).unwrap();
        let par = decompose_binary_with(
            &s,
            SearchOptions {
                exec: Exec::Parallel,
                ..SearchOptions::default()
            },
        )
        .unwrap();
        assert_eq!(seq.witness, par.witness);
    }

    #[test]
    fn node_cap_is_a_capacity_error() {
        let s: IntegerSet = (0..40u64).map(|i| i * i).collect();
        let r = decompose_binary_with(
            &s,
            SearchOptions {
                node_cap: 1,
                ..SearchOptions::default()
            },
        );
        assert!(matches!(r, Err(SieveError::Capacity { .. })) || !r.unwrap().decomposable);
    }

    #[test]
    fn all_witnesses_each_verify() {
        let s = set(&[0, 1, 2, 3, 4, 5]);
        let ws = all_binary_witnesses(&s, 2, 100).unwrap();
        assert!(ws.len() >= 2);
        for (a, b) in ws {
            assert_eq!(sumset(&a, &b), s);
        }
    }

    #[test]
    fn ternary_examples() {
        assert_eq!(
            decompose_ternary_via_ruzsa(100, 10.0),
            TernaryVerdict::TernaryImpossible
        );
        assert_eq!(
            decompose_ternary_via_ruzsa(10, 100.0),
            TernaryVerdict::Inconclusive
        );
    }
}
