//! Exact counts of smooth numbers, their residue-class and coprime
//! refinements, the Dickman function, discrepancy sums of smooth numbers
//! in residue classes, and counts of smooth shifted tuples.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::arith::{for_each_squarefree, gcd, SquarefreeTerm};
use crate::error::{domain, Result, SieveError};
use crate::exec::Exec;
use crate::primes::{PrimeSubset, PrimeTable};
use crate::sieves::{discrepancy_sum, DiscrepancyReference, DiscrepancyReport, ShiftSet};

/// Largest `x` accepted by the exact counters.
pub const MAX_PSI_X: u64 = 1_000_000_000;
/// Largest `x` accepted by [`smooth_tuple_count`].
pub const MAX_TUPLE_X: u64 = 100_000_000;
/// Largest prime table built internally for a smoothness bound.
pub const MAX_SMOOTH_TABLE: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmoothQuery {
    pub x: u64,
    pub y: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<u64>,
}

impl SmoothQuery {
    pub fn new(x: u64, y: u64) -> Self {
        SmoothQuery {
            x,
            y,
            modulus: None,
            residue: None,
        }
    }

    pub fn in_class(x: u64, y: u64, a: u64, d: u64) -> Self {
        SmoothQuery {
            x,
            y,
            modulus: Some(d),
            residue: Some(a),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.y < 2 {
            return domain(format!("y must be at least 2, got {}", self.y));
        }
        if self.x < 1 {
            return domain("x must be at least 1");
        }
        if self.x > MAX_PSI_X {
            return Err(SieveError::Capacity {
                what: "exact smooth-count x",
                requested: self.x,
                limit: MAX_PSI_X,
            });
        }
        match (self.modulus, self.residue) {
            (None, None) => Ok(()),
            (Some(d), Some(a)) if d >= 1 && a < d => Ok(()),
            _ => domain("need both a modulus d >= 1 and a residue 0 <= a < d"),
        }
    }
}

fn smoothness_primes(x: u64, y: u64) -> Result<Vec<u64>> {
    let top = y.min(x).max(2);
    if top > MAX_SMOOTH_TABLE {
        return Err(SieveError::Capacity {
            what: "smoothness prime table",
            requested: top,
            limit: MAX_SMOOTH_TABLE,
        });
    }
    Ok(PrimeTable::new(top)?.primes_up_to(top).to_vec())
}

fn memo_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("SIEVEKIT_MEMO_CAP")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(4_000_000)
    })
}

/// Counts `n <= x` whose prime factors all lie in a sorted prime list, via
/// `count(x, P) = 1 + Σ_{p ∈ P, p <= x} count(x/p, {q ∈ P : q <= p})`
/// with memoisation on `(x, number of usable primes)`.
struct SmoothCounter<'a> {
    primes: &'a [u64],
    /// The list holds every prime up to its last element.
    complete: bool,
    memo: HashMap<(u64, u32), u64>,
    cap: usize,
}

impl<'a> SmoothCounter<'a> {
    fn new(primes: &'a [u64], complete: bool) -> Self {
        SmoothCounter {
            primes,
            complete,
            memo: HashMap::new(),
            cap: memo_cap(),
        }
    }

    /// Count using the first `j` primes.
    fn count(&mut self, x: u64, j: usize) -> u64 {
        if x == 0 {
            return 0;
        }
        let j = j.min(self.primes.partition_point(|&p| p <= x));
        if j == 0 {
            return 1;
        }
        if self.complete && j == self.usable_all(x) && self.covers(x) {
            return x;
        }
        let key = (x, j as u32);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut total = 1;
        for i in 0..j {
            let p = self.primes[i];
            let m = x / p;
            total += if self.complete && m < p {
                // every n <= m is built from primes below p
                m
            } else {
                self.count(m, i + 1)
            };
        }
        if self.memo.len() < self.cap {
            self.memo.insert(key, total);
        }
        total
    }

    fn usable_all(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// All primes up to `x` are in the list.
    fn covers(&self, x: u64) -> bool {
        *self.primes.last().unwrap() >= x
    }
}

/// `Ψ(x, y) = #{n <= x : every prime factor of n is <= y}`; with a modulus
/// and residue, `Ψ(x, y; a, d)` by enumeration.
pub fn psi(q: &SmoothQuery) -> Result<u64> {
    q.validate()?;
    if let (Some(d), Some(a)) = (q.modulus, q.residue) {
        return psi_ap(q.x, q.y, a, d);
    }
    if q.y >= q.x {
        return Ok(q.x);
    }
    let primes = smoothness_primes(q.x, q.y)?;
    Ok(SmoothCounter::new(&primes, true).count(q.x, primes.len()))
}

/// Calls `f` on every `n <= x` built from `primes` (ascending), in
/// depth-first order starting with `n = 1`.
pub fn for_each_smooth<F: FnMut(u64)>(x: u64, primes: &[u64], mut f: F) {
    fn rec<F: FnMut(u64)>(primes: &[u64], start: usize, n: u64, x: u64, f: &mut F) {
        for i in start..primes.len() {
            let p = primes[i];
            if n > x / p {
                break;
            }
            let mut m = n;
            while m <= x / p {
                m *= p;
                f(m);
                rec(primes, i + 1, m, x, f);
            }
        }
    }
    if x == 0 {
        return;
    }
    f(1);
    rec(primes, 0, 1, x, &mut f);
}

/// The `y`-smooth numbers up to `x`, ascending.
pub fn enumerate_smooth(x: u64, y: u64) -> Result<Vec<u64>> {
    SmoothQuery::new(x, y).validate()?;
    let primes = smoothness_primes(x, y)?;
    let mut out = Vec::new();
    for_each_smooth(x, &primes, |n| out.push(n));
    out.sort_unstable();
    Ok(out)
}

/// `Ψ(x, y; a, d)`
pub fn psi_ap(x: u64, y: u64, a: u64, d: u64) -> Result<u64> {
    SmoothQuery::in_class(x, y, a, d).validate()?;
    let primes = smoothness_primes(x, y)?;
    let mut count = 0;
    for_each_smooth(x, &primes, |n| count += (n % d == a) as u64);
    Ok(count)
}

/// `Ψ_d(x, y) = #{n <= x : n y-smooth, (n, d) = 1}`
pub fn psi_coprime(q: &SmoothQuery, d: u64) -> Result<u64> {
    q.validate()?;
    if d == 0 {
        return domain("d must be positive");
    }
    let primes = smoothness_primes(q.x, q.y)?;
    let kept: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&p| p <= q.y && d % p != 0)
        .collect();
    let complete = kept.len() == primes.len() && q.y >= *primes.last().unwrap();
    if kept.is_empty() {
        return Ok(1);
    }
    Ok(SmoothCounter::new(&kept, complete).count(q.x, kept.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DickmanValue {
    pub u: f64,
    pub rho: f64,
}

const RHO_STEPS: usize = 1024;
/// Largest argument of [`dickman_rho`].
pub const RHO_MAX_U: f64 = 500.0;

struct RhoTable {
    /// `values[n] = ρ(n / RHO_STEPS)` for `n = 0..=RHO_MAX_U · RHO_STEPS`.
    values: Vec<f64>,
    /// Largest difference against the half-resolution table on shared
    /// nodes of `[0, 20]`.
    richardson_error: f64,
}

/// Below this the table comes from the differential equation; above it
/// from the integral identity.
const RHO_SWITCH: usize = 6;
const RHO_BLOCK: usize = 64;

/// Cumulative fourth-order quadrature of `ρ(u) = ρ(k) − ∫_k^u ρ(t−1)/t dt`
/// on each unit interval up to [`RHO_SWITCH`], with one-sided end formulas
/// so the stencil never crosses the kink of `ρ(t − 1)` at integers.
///
/// Beyond that, forward integration only keeps absolute accuracy: rounding
/// excites a solution of the delay equation decaying like `1/u`, which
/// swamps `ρ` near `u = 8`. There `u ρ(u) = ∫_{u−1}^u ρ` is solved for each
/// node instead (extended fourth-order rule, weights 3/8, 7/6, 23/24, 1, …),
/// a sum of positive terms, so relative errors do not grow. Window sums are
/// formed from fixed block sums rather than a running difference.
fn integrate_rho(steps: usize) -> Vec<f64> {
    let total = RHO_MAX_U as usize * steps;
    let h = 1.0 / steps as f64;
    let mut rho = vec![1.0; steps + 1];
    rho.reserve(total - steps);
    for k in 1..RHO_SWITCH {
        let base = k * steps;
        let f: Vec<f64> = (0..=steps)
            .map(|i| rho[base - steps + i] / (k as f64 + i as f64 * h))
            .collect();
        for i in 0..steps {
            let step = if i == 0 {
                9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
            } else if i == steps - 1 {
                f[i - 2] - 5.0 * f[i - 1] + 19.0 * f[i] + 9.0 * f[i + 1]
            } else {
                -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]
            };
            rho.push(rho[base + i] - h / 24.0 * step);
        }
    }
    let mut blocks: Vec<f64> = rho
        .chunks_exact(RHO_BLOCK)
        .map(|c| c.iter().sum())
        .collect();
    let range_sum = |rho: &[f64], blocks: &[f64], lo: usize, hi: usize| -> f64 {
        let first = lo.div_ceil(RHO_BLOCK);
        let last = (hi + 1) / RHO_BLOCK;
        if first >= last {
            return rho[lo..=hi].iter().sum();
        }
        rho[lo..first * RHO_BLOCK].iter().sum::<f64>()
            + blocks[first..last].iter().sum::<f64>()
            + rho[last * RHO_BLOCK..=hi].iter().sum::<f64>()
    };
    for n in RHO_SWITCH * steps + 1..=total {
        let w = n - steps;
        let known = 3.0 / 8.0 * rho[w]
            + 7.0 / 6.0 * rho[w + 1]
            + 23.0 / 24.0 * rho[w + 2]
            + range_sum(&rho, &blocks, w + 3, n - 3)
            + 23.0 / 24.0 * rho[n - 2]
            + 7.0 / 6.0 * rho[n - 1];
        rho.push(h * known / (n as f64 * h - 3.0 / 8.0 * h));
        if rho.len() % RHO_BLOCK == 0 {
            blocks.push(rho[rho.len() - RHO_BLOCK..].iter().sum());
        }
    }
    rho
}

fn rho_table() -> &'static RhoTable {
    static TABLE: OnceLock<RhoTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let fine = integrate_rho(RHO_STEPS);
        let coarse = integrate_rho(RHO_STEPS / 2);
        let err = (0..=20 * RHO_STEPS / 2)
            .map(|i| (fine[2 * i] - coarse[i]).abs())
            .fold(0.0, f64::max);
        RhoTable {
            values: fine,
            richardson_error: err,
        }
    })
}

/// Difference between the step-`1/1024` and step-`1/512` tables on `[0, 20]`.
pub fn dickman_richardson_error() -> f64 {
    rho_table().richardson_error
}

/// Dickman's function `ρ(u)`, for `0 <= u <= 500`. Values below the
/// smallest positive `f64` are returned as 0.
pub fn dickman_rho(u: f64) -> Result<DickmanValue> {
    if !(0.0..=RHO_MAX_U).contains(&u) {
        return domain(format!("u must lie in [0, {RHO_MAX_U}], got {u}"));
    }
    if u <= 1.0 {
        return Ok(DickmanValue { u, rho: 1.0 });
    }
    let t = rho_table();
    let k = (u.floor() as usize).min(RHO_MAX_U as usize - 1);
    let row = &t.values[k * RHO_STEPS..=(k + 1) * RHO_STEPS];
    let pos = (u - k as f64) * RHO_STEPS as f64;
    // four nodes inside the unit interval around pos
    let start = (pos.floor() as isize - 1).clamp(0, RHO_STEPS as isize - 3) as usize;
    let mut rho = 0.0;
    for j in 0..4 {
        let xj = (start + j) as f64;
        let mut w = 1.0;
        for m in 0..4 {
            if m != j {
                let xm = (start + m) as f64;
                w *= (pos - xm) / (xj - xm);
            }
        }
        rho += w * row[start + j];
    }
    Ok(DickmanValue {
        u,
        rho: rho.max(0.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BvDiscrepancy {
    pub psi: u64,
    pub exponent: f64,
    pub total: f64,
    pub terms: Vec<crate::sieves::DiscrepancyTerm>,
}

/// Default work budget for [`bv_discrepancy_sum`].
pub const DEFAULT_DISCREPANCY_BUDGET: u64 = 4_000_000_000;

/// `Σ_{d <= Q²} μ²(d) τ₃(d)^{1 + log k / log 3} max_{(a,d)=1} |Ψ(x,y;a,d) − Ψ_d(x,y)/φ(d)|`
/// over `d` supported on `ps`.
pub fn bv_discrepancy_sum(
    q: &SmoothQuery,
    ps: &PrimeSubset,
    big_q: u64,
    exponent_k: u64,
) -> Result<BvDiscrepancy> {
    bv_discrepancy_sum_with(
        q,
        ps,
        big_q,
        exponent_k,
        DEFAULT_DISCREPANCY_BUDGET,
        Exec::default(),
    )
}

pub fn bv_discrepancy_sum_with(
    q: &SmoothQuery,
    ps: &PrimeSubset,
    big_q: u64,
    exponent_k: u64,
    budget: u64,
    exec: Exec,
) -> Result<BvDiscrepancy> {
    q.validate()?;
    if exponent_k == 0 {
        return domain("exponent k must be positive");
    }
    let q2 = big_q
        .checked_mul(big_q)
        .ok_or_else(|| SieveError::Domain("Q² overflows".into()))?;
    let support = ps.members_up_to(q2);
    if let Some(&p) = support.iter().find(|&&p| p <= q.y) {
        return domain(format!("modulus prime {p} must exceed y = {}", q.y));
    }
    let smooth = enumerate_smooth(q.x, q.y)?;
    let mut moduli = Vec::new();
    for_each_squarefree(&support, q2, |d, f| {
        moduli.push(SquarefreeTerm {
            q: d,
            primes: f.to_vec(),
        })
    });
    let exponent = 1.0 + (exponent_k as f64).ln() / 3f64.ln();
    let DiscrepancyReport { total, terms } = discrepancy_sum(
        &smooth,
        &moduli,
        exponent,
        DiscrepancyReference::CoprimeCount,
        budget,
        exec,
    )?;
    Ok(BvDiscrepancy {
        psi: smooth.len() as u64,
        exponent,
        total,
        terms,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TupleCount {
    pub x: u64,
    pub y: u64,
    pub shifts: Vec<u64>,
    pub count: u64,
    pub u: f64,
    /// `x ρ(u)^k`
    pub heuristic_rho_power: f64,
    /// `x / u^k`
    pub heuristic_u_power: f64,
    /// `x / u^{u + k − 1}`
    pub heuristic_u_u: f64,
}

const TUPLE_SEGMENT: u64 = 1 << 18;

/// Marks the `y`-smooth numbers in `[lo, hi]` by dividing out every prime
/// `p <= y` from the multiples of `p`.
fn smooth_bits(lo: u64, hi: u64, primes: &[u64]) -> Vec<bool> {
    let len = (hi - lo + 1) as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    for &p in primes {
        let first = lo.div_ceil(p) * p;
        let mut v = first;
        while v <= hi {
            let r = &mut rem[(v - lo) as usize];
            while *r % p == 0 {
                *r /= p;
            }
            v += p;
        }
    }
    let mut out = vec![false; len];
    for (o, r) in out.iter_mut().zip(&rem) {
        *o = *r == 1;
    }
    out
}

/// `#{1 <= n <= x : n + a_i is y-smooth for every i}`.
pub fn smooth_tuple_count(x: u64, y: u64, shifts: &ShiftSet) -> Result<TupleCount> {
    smooth_tuple_count_with(x, y, shifts, Exec::default())
}

pub fn smooth_tuple_count_with(
    x: u64,
    y: u64,
    shifts: &ShiftSet,
    exec: Exec,
) -> Result<TupleCount> {
    if x > MAX_TUPLE_X {
        return Err(SieveError::Capacity {
            what: "tuple count x",
            requested: x,
            limit: MAX_TUPLE_X,
        });
    }
    if y < 2 || x < 1 {
        return domain("need x >= 1 and y >= 2");
    }
    let top = x + shifts.max();
    let primes = if y >= top {
        Vec::new()
    } else {
        smoothness_primes(top, y)?
    };
    let all_smooth = y >= top;
    let segments = x.div_ceil(TUPLE_SEGMENT);
    let a = shifts.values();
    let counts = exec.map_range(segments as usize, |s| {
        let lo = 1 + s as u64 * TUPLE_SEGMENT;
        let hi = (lo + TUPLE_SEGMENT - 1).min(x);
        if all_smooth {
            return hi - lo + 1;
        }
        let bits = smooth_bits(lo, hi + shifts.max(), &primes);
        (0..=(hi - lo) as usize)
            .filter(|&o| a.iter().all(|&ai| bits[o + ai as usize]))
            .count() as u64
    });
    let count = counts.iter().sum();
    let u = (x as f64).ln() / (y as f64).ln();
    let k = a.len() as f64;
    let rho = dickman_rho(u.min(RHO_MAX_U))?.rho;
    Ok(TupleCount {
        x,
        y,
        shifts: a.to_vec(),
        count,
        u,
        heuristic_rho_power: x as f64 * rho.powf(k),
        heuristic_u_power: x as f64 / u.powf(k),
        heuristic_u_u: x as f64 / u.powf(u + k - 1.0),
    })
}

/// Largest prime factor of `n` is at most `y` (trial division).
pub fn is_smooth(mut n: u64, y: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut p = 2;
    while p * p <= n && p <= y {
        while n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    n == 1 || n <= y
}

/// `gcd`-based count used by the coprime cross-check.
pub fn count_coprime(values: &[u64], d: u64) -> u64 {
    values.iter().filter(|&&v| gcd(v, d) == 1).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_psi(x: u64, y: u64) -> u64 {
        (1..=x).filter(|&n| is_smooth(n, y)).count() as u64
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&SmoothQuery::new(10, 2)).unwrap(), 4);
        assert_eq!(psi(&SmoothQuery::new(100, 3)).unwrap(), 20);
        assert_eq!(psi(&SmoothQuery::new(50, 60)).unwrap(), 50);
        assert_eq!(psi(&SmoothQuery::new(1, 2)).unwrap(), 1);
        assert!(psi(&SmoothQuery::new(MAX_PSI_X + 1, 5)).is_err());
        assert!(psi(&SmoothQuery::new(10, 1)).is_err());
        assert!(psi(&SmoothQuery::in_class(10, 3, 5, 5)).is_err());
    }

    #[test]
    fn psi_matches_brute_force() {
        for x in [1, 2, 17, 100, 999, 5000] {
            for y in [2, 3, 5, 7, 11, 30, 97, 1000] {
                assert_eq!(
                    psi(&SmoothQuery::new(x, y)).unwrap(),
                    brute_psi(x, y),
                    "x={x} y={y}"
                );
            }
        }
    }

    #[test]
    fn enumeration_and_classes() {
        let list = enumerate_smooth(100, 3).unwrap();
        assert_eq!(list.len(), 20);
        assert!(list.iter().all(|&n| is_smooth(n, 3)));
        let total: u64 = (0..7).map(|a| psi_ap(1000, 5, a, 7).unwrap()).sum();
        assert_eq!(total, psi(&SmoothQuery::new(1000, 5)).unwrap());
    }

    #[test]
    fn coprime_examples() {
        let q = SmoothQuery::new(100, 3);
        assert_eq!(psi_coprime(&q, 1).unwrap(), 20);
        assert_eq!(psi_coprime(&q, 6).unwrap(), 1);
        assert_eq!(psi_coprime(&q, 2).unwrap(), 5);
        assert_eq!(psi_coprime(&q, 35).unwrap(), 20);
        let q = SmoothQuery::new(5000, 13);
        let list = enumerate_smooth(5000, 13).unwrap();
        for d in [2, 15, 77, 1001, 30030] {
            assert_eq!(psi_coprime(&q, d).unwrap(), count_coprime(&list, d));
        }
    }

    #[test]
    fn rho_examples() {
        assert_eq!(dickman_rho(0.5).unwrap().rho, 1.0);
        assert_eq!(dickman_rho(0.0).unwrap().rho, 1.0);
        let r2 = dickman_rho(2.0).unwrap().rho;
        assert!((r2 - (1.0 - 2f64.ln())).abs() < 1e-12);
        // on [1, 2], ρ(u) = 1 − ln u
        for u in [1.1, 1.337, 1.5, 1.999] {
            assert!((dickman_rho(u).unwrap().rho - (1.0 - f64::ln(u))).abs() < 1e-12);
        }
        assert!(dickman_rho(-0.1).is_err());
        assert!(dickman_rho(501.0).is_err());
        assert!(dickman_richardson_error() < 1e-10);
    }

    #[test]
    fn rho_keeps_relative_accuracy() {
        // ρ(u + 1) = ∫_u^{u+1} ρ / (u + 1) < ρ(u) / (u + 1), since ρ decreases
        for u in 3..=115 {
            let a = dickman_rho(u as f64).unwrap().rho;
            let b = dickman_rho(u as f64 + 1.0).unwrap().rho;
            assert!(b > 0.0 && b < a / (u + 1) as f64, "u = {u}: {a:e} -> {b:e}");
        }
        // u ρ(u) = ∫_{u−1}^u ρ, with the integral by composite Simpson
        for u in [8.0, 15.5, 40.0, 90.25] {
            let n = 2000;
            let h = 1.0 / n as f64;
            let f = |t: f64| dickman_rho(t).unwrap().rho;
            let mut integral = f(u - 1.0) + f(u);
            for i in 1..n {
                integral += f(u - 1.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            integral *= h / 3.0;
            let lhs = u * f(u);
            assert!(((lhs - integral) / lhs).abs() < 1e-7, "u = {u}: {lhs:e} vs {integral:e}");
        }
        // tabulated value
        let r10 = dickman_rho(10.0).unwrap().rho;
        assert!((r10 / 2.770_171_837_725_96e-11 - 1.0).abs() < 1e-8);
        assert_eq!(dickman_rho(RHO_MAX_U).unwrap().rho, 0.0);
    }

    #[test]
    fn tuple_examples() {
        let one = ShiftSet::new(vec![0]).unwrap();
        assert_eq!(
            smooth_tuple_count(1000, 7, &one).unwrap().count,
            psi(&SmoothQuery::new(1000, 7)).unwrap()
        );
        let pair = ShiftSet::new(vec![0, 1]).unwrap();
        let brute = (1..=10_000u64)
            .filter(|&n| is_smooth(n, 10) && is_smooth(n + 1, 10))
            .count() as u64;
        assert_eq!(smooth_tuple_count(10_000, 10, &pair).unwrap().count, brute);
        assert_eq!(smooth_tuple_count(100, 200, &pair).unwrap().count, 100);
        let seq = smooth_tuple_count_with(600_000, 50, &pair, Exec::Sequential).unwrap();
        let par = smooth_tuple_count_with(600_000, 50, &pair, Exec::Parallel).unwrap();
        assert_eq!(seq.count, par.count);
    }

    #[test]
    fn discrepancy_examples() {
        let t = std::sync::Arc::new(PrimeTable::new(10_000).unwrap());
        let empty = PrimeSubset::empty(t.clone());
        let r = bv_discrepancy_sum(&SmoothQuery::new(10_000, 7), &empty, 30, 2).unwrap();
        assert_eq!(r.total, 0.0);
        let ps = PrimeSubset::new(
            t.clone(),
            crate::primes::Selector::Interval { lo: 10.0, hi: 40.0 },
        );
        let r = bv_discrepancy_sum(&SmoothQuery::new(10_000, 7), &ps, 1, 2).unwrap();
        assert_eq!(r.total, 0.0);
        let small = PrimeSubset::new(t, crate::primes::Selector::Interval { lo: 0.0, hi: 40.0 });
        assert!(bv_discrepancy_sum(&SmoothQuery::new(10_000, 7), &small, 30, 2).is_err());
    }
}
