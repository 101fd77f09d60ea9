//! Prime tables, prime subsets and the prime partial sums every sieve
//! formula consumes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result, SieveError};

/// Hard ceiling on the sieve limit.
pub const MAX_TABLE_LIMIT: u64 = 1 << 40;

/// Above this limit the table is sieved in fixed-size segments.
const SEGMENT_THRESHOLD: u64 = 10_000_000;
const SEGMENT_SPAN: u64 = 1 << 21;

/// Exact primality for every integer up to `limit`.
///
/// Membership is an odd-only bitset; the primes themselves are also kept as
/// an ascending list because nearly every consumer iterates over them.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    // bit i set <=> 2i+1 is prime
    odd_bits: Vec<u64>,
    primes: Vec<u64>,
}

impl PrimeTable {
    /// Sieves `[2, limit]`.
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_cap(limit, MAX_TABLE_LIMIT)
    }

    pub fn with_cap(limit: u64, cap: u64) -> Result<Self> {
        if limit < 2 || limit > cap.min(MAX_TABLE_LIMIT) {
            return Err(SieveError::Capacity {
                what: "prime table limit",
                requested: limit,
                limit: cap.min(MAX_TABLE_LIMIT),
            });
        }
        let n_odd = limit.div_ceil(2) as usize;
        let mut odd_bits = vec![0u64; n_odd.div_ceil(64)];
        if limit <= SEGMENT_THRESHOLD {
            let mut composite = vec![false; n_odd];
            let mut i = 1usize;
            while (2 * i + 1) * (2 * i + 1) <= limit as usize {
                if !composite[i] {
                    let p = 2 * i + 1;
                    let mut j = (p * p) / 2;
                    while j < n_odd {
                        composite[j] = true;
                        j += p;
                    }
                }
                i += 1;
            }
            for (i, c) in composite.iter().enumerate().skip(1) {
                if !c {
                    odd_bits[i / 64] |= 1 << (i % 64);
                }
            }
        } else {
            let root = isqrt(limit);
            let base = PrimeTable::new(root.max(2))?;
            let base_odd: Vec<u64> = base.primes.iter().copied().filter(|&p| p > 2).collect();
            let mut lo = 0u64;
            while lo <= limit {
                let hi = (lo + SEGMENT_SPAN - 1).min(limit);
                // odd numbers in [lo, hi]
                let first_odd = if lo % 2 == 1 { lo } else { lo + 1 };
                if first_odd <= hi {
                    let count = ((hi - first_odd) / 2 + 1) as usize;
                    let mut composite = vec![false; count];
                    for &p in &base_odd {
                        if p * p > hi {
                            break;
                        }
                        let mut start = (p * p).max(first_odd.div_ceil(p) * p);
                        if start % 2 == 0 {
                            start += p;
                        }
                        while start <= hi {
                            composite[((start - first_odd) / 2) as usize] = true;
                            start += 2 * p;
                        }
                    }
                    for (j, c) in composite.iter().enumerate() {
                        let n = first_odd + 2 * j as u64;
                        if !c && n > 1 {
                            let i = (n / 2) as usize;
                            odd_bits[i / 64] |= 1 << (i % 64);
                        }
                    }
                }
                lo = hi + 1;
            }
        }
        let mut primes = Vec::with_capacity(prime_count_estimate(limit));
        primes.push(2);
        for (w, &word) in odd_bits.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as u64;
                primes.push(2 * (w as u64 * 64 + b) + 1);
                bits &= bits - 1;
            }
        }
        Ok(PrimeTable {
            limit,
            odd_bits,
            primes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n > self.limit || n < 2 {
            return false;
        }
        if n == 2 {
            return true;
        }
        if n % 2 == 0 {
            return false;
        }
        let i = (n / 2) as usize;
        self.odd_bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// All primes up to the table limit, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p` with `lo < p <= hi` (real bounds).
    pub fn primes_in(&self, lo: f64, hi: f64) -> &[u64] {
        let start = self.primes.partition_point(|&p| (p as f64) <= lo);
        let end = self.primes.partition_point(|&p| (p as f64) <= hi);
        &self.primes[start..end.max(start)]
    }

    pub fn primes_up_to(&self, n: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= n);
        &self.primes[..end]
    }

    /// pi(n) for n up to the limit.
    pub fn pi(&self, n: u64) -> usize {
        self.primes.partition_point(|&p| p <= n)
    }
}

fn prime_count_estimate(n: u64) -> usize {
    if n < 100 {
        return 32;
    }
    let nf = n as f64;
    (1.3 * nf / nf.ln()) as usize
}

/// Integer square root, floor.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = ((n as f64).sqrt() as u64).min(u32::MAX as u64);
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Predicate selecting a subset of the primes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Selector {
    All,
    /// `lo < p <= hi`
    Interval {
        lo: f64,
        hi: f64,
    },
    /// `p ≡ a (mod m)`
    Residue {
        a: u64,
        m: u64,
    },
    /// Every prime except the listed ones.
    Except {
        primes: BTreeSet<u64>,
    },
    /// Exactly the listed primes.
    Only {
        primes: BTreeSet<u64>,
    },
    /// `p >= threshold`; used for the `P0 ∩ [K^3, ∞)` construction.
    Min {
        threshold: f64,
    },
    Not {
        inner: Box<Selector>,
    },
    And {
        parts: Vec<Selector>,
    },
}

impl Selector {
    pub fn matches(&self, p: u64) -> bool {
        match self {
            Selector::All => true,
            Selector::Interval { lo, hi } => (p as f64) > *lo && (p as f64) <= *hi,
            Selector::Residue { a, m } => *m > 0 && p % m == a % m,
            Selector::Except { primes } => !primes.contains(&p),
            Selector::Only { primes } => primes.contains(&p),
            Selector::Min { threshold } => (p as f64) >= *threshold,
            Selector::Not { inner } => !inner.matches(p),
            Selector::And { parts } => parts.iter().all(|s| s.matches(p)),
        }
    }
}

fn join_u64(set: &BTreeSet<u64>) -> String {
    set.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::All => write!(f, "all"),
            Selector::Interval { lo, hi } => write!(f, "interval:{lo},{hi}"),
            Selector::Residue { a, m } => write!(f, "ap:{a},{m}"),
            Selector::Except { primes } => write!(f, "except:{}", join_u64(primes)),
            Selector::Only { primes } => write!(f, "set:{}", join_u64(primes)),
            Selector::Min { threshold } => write!(f, "min:{threshold}"),
            Selector::Not { inner } => write!(f, "not({inner})"),
            Selector::And { parts } => {
                let inner: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "and({})", inner.join(";"))
            }
        }
    }
}

const KEYWORDS: [&str; 8] = [
    "all",
    "ap:",
    "interval:",
    "min:",
    "except:",
    "set:",
    "not(",
    "and(",
];

fn split_top_level(body: &str) -> Vec<String> {
    let mut raw = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in body.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' | ';' if depth == 0 => {
                raw.push((std::mem::take(&mut cur), ch));
            }
            _ => cur.push(ch),
        }
    }
    raw.push((cur, ';'));
    // re-attach numeric continuations such as the "4" in "ap:1,4"
    let mut parts: Vec<String> = Vec::new();
    for (tok, _) in raw {
        let t = tok.trim().to_string();
        let starts_kw = KEYWORDS.iter().any(|k| t.starts_with(k));
        match parts.last_mut() {
            Some(last) if !starts_kw => {
                last.push(',');
                last.push_str(&t);
            }
            _ => parts.push(t),
        }
    }
    parts
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| SieveError::Parse(format!("bad number '{t}'")))
        })
        .collect()
}

impl FromStr for Selector {
    type Err = SieveError;

    /// Grammar: `all | ap:a,m | interval:lo,hi | min:t | except:p,.. |
    /// set:p,.. | not(sel) | and(sel;sel;..)` (`,` also separates `and`
    /// arguments).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "all" {
            return Ok(Selector::All);
        }
        if let Some(rest) = s.strip_prefix("ap:") {
            let v: Vec<u64> = parse_list(rest)?;
            return match v.as_slice() {
                [a, m] if *m > 0 => Ok(Selector::Residue { a: a % m, m: *m }),
                _ => Err(SieveError::Parse(format!("ap needs a,m with m>0: '{s}'"))),
            };
        }
        if let Some(rest) = s.strip_prefix("interval:") {
            let v: Vec<f64> = parse_list(rest)?;
            return match v.as_slice() {
                [lo, hi] => Ok(Selector::Interval { lo: *lo, hi: *hi }),
                _ => Err(SieveError::Parse(format!("interval needs lo,hi: '{s}'"))),
            };
        }
        if let Some(rest) = s.strip_prefix("min:") {
            let v: Vec<f64> = parse_list(rest)?;
            return match v.as_slice() {
                [t] => Ok(Selector::Min { threshold: *t }),
                _ => Err(SieveError::Parse(format!("min needs one value: '{s}'"))),
            };
        }
        if let Some(rest) = s.strip_prefix("except:") {
            return Ok(Selector::Except {
                primes: parse_list(rest)?.into_iter().collect(),
            });
        }
        if let Some(rest) = s.strip_prefix("set:") {
            return Ok(Selector::Only {
                primes: parse_list(rest)?.into_iter().collect(),
            });
        }
        if let Some(body) = s.strip_prefix("not(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Selector::Not {
                inner: Box::new(body.parse()?),
            });
        }
        if let Some(body) = s.strip_prefix("and(").and_then(|r| r.strip_suffix(')')) {
            let parts = split_top_level(body)
                .iter()
                .filter(|p| !p.is_empty())
                .map(|p| p.parse())
                .collect::<Result<Vec<_>>>()?;
            return Ok(Selector::And { parts });
        }
        Err(SieveError::Parse(format!("unknown prime selector '{s}'")))
    }
}

/// A set of primes `P0`: a selector evaluated over a shared prime table.
/// Membership is only defined for primes up to the table limit.
#[derive(Debug, Clone)]
pub struct PrimeSubset {
    table: Arc<PrimeTable>,
    selector: Selector,
}

impl PrimeSubset {
    pub fn new(table: Arc<PrimeTable>, selector: Selector) -> Self {
        PrimeSubset { table, selector }
    }

    pub fn all(table: Arc<PrimeTable>) -> Self {
        Self::new(table, Selector::All)
    }

    pub fn empty(table: Arc<PrimeTable>) -> Self {
        Self::new(
            table,
            Selector::Only {
                primes: BTreeSet::new(),
            },
        )
    }

    pub fn table(&self) -> &Arc<PrimeTable> {
        &self.table
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    pub fn limit(&self) -> u64 {
        self.table.limit()
    }

    /// Text form of the selector, suitable for reports.
    pub fn descriptor(&self) -> String {
        self.selector.to_string()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.table.is_prime(p) && self.selector.matches(p)
    }

    /// Members `p` with `lo < p <= hi`, ascending.
    pub fn iter_range(&self, lo: f64, hi: f64) -> impl Iterator<Item = u64> + '_ {
        self.table
            .primes_in(lo, hi)
            .iter()
            .copied()
            .filter(move |&p| self.selector.matches(p))
    }

    /// Members up to `n` (clipped to the table limit).
    pub fn members_up_to(&self, n: u64) -> Vec<u64> {
        self.table
            .primes_up_to(n)
            .iter()
            .copied()
            .filter(|&p| self.selector.matches(p))
            .collect()
    }

    pub fn members(&self) -> Vec<u64> {
        self.members_up_to(self.table.limit())
    }

    /// `self ∩ [threshold, ∞)`.
    pub fn at_least(&self, threshold: f64) -> PrimeSubset {
        let selector = match &self.selector {
            Selector::And { parts } => {
                let mut parts = parts.clone();
                parts.push(Selector::Min { threshold });
                Selector::And { parts }
            }
            other => Selector::And {
                parts: vec![other.clone(), Selector::Min { threshold }],
            },
        };
        PrimeSubset::new(self.table.clone(), selector)
    }

    /// Same selector over a different table.
    pub fn rebased(&self, table: Arc<PrimeTable>) -> PrimeSubset {
        PrimeSubset::new(table, self.selector.clone())
    }
}

/// `Σ log p`, `Σ log p / p` and `Σ 1/p` over one range of a prime subset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PrimeSums {
    pub theta: f64,
    pub mertens_log: f64,
    pub mertens_recip: f64,
    pub count: u64,
}

impl std::ops::Add for PrimeSums {
    type Output = PrimeSums;
    fn add(self, o: PrimeSums) -> PrimeSums {
        PrimeSums {
            theta: self.theta + o.theta,
            mertens_log: self.mertens_log + o.mertens_log,
            mertens_recip: self.mertens_recip + o.mertens_recip,
            count: self.count + o.count,
        }
    }
}

/// Sums over members `p` of `ps` with `lo < p <= hi`, accumulated in
/// ascending order of `p`.
pub fn subset_sums(ps: &PrimeSubset, lo: f64, hi: f64) -> Result<PrimeSums> {
    if hi > ps.limit() as f64 {
        return Err(SieveError::Capacity {
            what: "prime sum range",
            requested: hi.ceil() as u64,
            limit: ps.limit(),
        });
    }
    if !(lo >= 0.0 && lo < hi) {
        return domain(format!("need 0 <= lo < hi, got ({lo}, {hi}]"));
    }
    let mut s = PrimeSums::default();
    for p in ps.iter_range(lo, hi) {
        let pf = p as f64;
        let lp = pf.ln();
        s.theta += lp;
        s.mertens_log += lp / pf;
        s.mertens_recip += 1.0 / pf;
        s.count += 1;
    }
    Ok(s)
}

/// Sums over the dyadic window `(y/2, y]`.
pub fn window_sums(ps: &PrimeSubset, y: f64) -> Result<PrimeSums> {
    subset_sums(ps, y / 2.0, y)
}

/// One dyadic window of the density-ratio computation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityWindow {
    pub y: f64,
    pub theta_subset: f64,
    pub theta_all: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityRatio {
    /// Minimum of `θ_P0 / θ_all` over the windows that contain a prime.
    pub c: f64,
    pub windows: Vec<DensityWindow>,
    /// `c > x^{-1/10}`
    pub hypothesis_holds: bool,
}

/// Mesh infimum of `θ_{P0}(y/2, y] / θ(y/2, y]` over `y = x^{1/2}, x^{1/2}/2,
/// …` while `y >= x^{low_exponent}` (the standard range uses 1/10).
pub fn density_ratio_c(ps: &PrimeSubset, x: u64) -> Result<DensityRatio> {
    density_ratio_c_with(ps, x, 0.1)
}

pub fn density_ratio_c_with(ps: &PrimeSubset, x: u64, low_exponent: f64) -> Result<DensityRatio> {
    if x < 100 {
        return domain(format!("density ratio needs x >= 100, got {x}"));
    }
    let xf = x as f64;
    let top = xf.sqrt();
    if top > ps.limit() as f64 {
        return Err(SieveError::Capacity {
            what: "prime table for density ratio (needs sqrt(x))",
            requested: top.ceil() as u64,
            limit: ps.limit(),
        });
    }
    let all = PrimeSubset::all(ps.table().clone());
    let floor = xf.powf(low_exponent);
    let mut windows = Vec::new();
    let mut y = top;
    while y >= floor && y >= 2.0 {
        let sub = window_sums(ps, y)?;
        let tot = window_sums(&all, y)?;
        windows.push(DensityWindow {
            y,
            theta_subset: sub.theta,
            theta_all: tot.theta,
        });
        y /= 2.0;
    }
    let usable: Vec<&DensityWindow> = windows.iter().filter(|w| w.theta_all > 0.0).collect();
    if usable.is_empty() || usable.iter().all(|w| w.theta_subset == 0.0) {
        return Err(SieveError::Degenerate(
            "no dyadic window contains a prime of the subset".into(),
        ));
    }
    let c = usable
        .iter()
        .map(|w| w.theta_subset / w.theta_all)
        .fold(f64::INFINITY, f64::min);
    Ok(DensityRatio {
        c,
        hypothesis_holds: c > xf.powf(-0.1),
        windows,
    })
}
