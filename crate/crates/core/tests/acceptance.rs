//! Acceptance criteria 1-10. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any criterion fails.
//!
//! Library results are compared against oracles written here from scratch:
//! a plain sieve of Eratosthenes, a largest-prime-factor table, residue
//! marking for sifted counts, a Taylor-series Dickman function and direct
//! enumeration for sumsets.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use sievekit::arith::check_comparison_inequality;
use sievekit::irreducibility::{
    algebraic_identity_check, build_context, check_bv_condition, check_scs_condition,
    conclusion_bounds, ostmann_epsilon_profile, ConstantsProfile, ScaledConstants,
};
use sievekit::primes::{PrimeSubset, PrimeTable, Selector};
use sievekit::semigroup::{count_q, enumerate_q, estimate_tau};
use sievekit::smooth::{dickman_rho, enumerate_smooth, psi, psi_ap, SmoothQuery};
use sievekit::sumset::{decompose_binary, ruzsa_check, sumset, IntegerSet};
use sievekit::verify::{
    comparison_pair, inverse_sieve_case, random_set, stream, valid_soundness_cases, Evaluator,
};

const SEED: u64 = 0x00ac_ce97;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

// ---------- oracles ----------

fn eratosthenes(n: usize) -> Vec<bool> {
    let mut is = vec![true; n + 1];
    is[0] = false;
    if n >= 1 {
        is[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is
}

/// Largest prime factor of every `n <= limit` (1 for `n = 1`).
fn largest_prime_factor(limit: usize) -> Vec<u32> {
    let mut lpf = vec![1u32; limit + 1];
    for p in 2..=limit {
        if lpf[p] == 1 {
            let mut m = p;
            while m <= limit {
                lpf[m] = p as u32;
                m += p;
            }
        }
    }
    lpf
}

/// Smallest prime factor of every `n <= limit`.
fn smallest_prime_factor(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for p in 2..=limit {
        if spf[p] == 0 {
            let mut m = p;
            while m <= limit {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
    }
    spf
}

fn naive_sumset(a: &[u64], b: &[u64]) -> BTreeSet<u64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x + y))
        .collect()
}

// ---------- criterion 1 ----------

fn criterion_1(sieve: &[bool], table: &Arc<PrimeTable>) -> Verdict {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for ev in Evaluator::ALL {
        let (cases, attempts) = match valid_soundness_cases(ev, 1000, SEED, table, 200_000) {
            Ok(v) => v,
            Err(e) => return verdict(false, format!("{}: {e}", ev.name())),
        };
        let mut violations = 0;
        let mut mismatches = 0;
        for c in &cases {
            let exact = if c.shifts.is_empty() {
                c.set.len() as u64
            } else {
                marked_sift_count(&c.set, &c.shifts, &c.ps, sieve)
            };
            if exact != c.true_count {
                mismatches += 1;
            }
            if c.report.bound < exact as f64 {
                violations += 1;
            }
        }
        if cases.len() < 1000 || violations > 0 || mismatches > 0 {
            ok = false;
        }
        lines.push(format!(
            "{} {}/{} valid of {attempts}, {violations} violations",
            ev.name(),
            cases.len(),
            1000
        ));
        if mismatches > 0 {
            lines.push(format!("{mismatches} sift-count mismatches"));
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    verdict(
        ok,
        format!("{}; {:.1}s", lines.join("; "), elapsed.as_secs_f64()),
    )
}

/// Sifted count by marking every `n ≡ a (mod p)` in `[1, top]`.
fn marked_sift_count(set: &IntegerSet, shifts: &[u64], ps: &PrimeSubset, sieve: &[bool]) -> u64 {
    let top = set.max().unwrap().max(*shifts.iter().max().unwrap()) as usize;
    let limit = (ps.limit() as usize).min(sieve.len() - 1);
    let sel = ps.selector();
    let mut primes: Vec<usize> = (2..=top.min(limit))
        .filter(|&n| sieve[n] && sel.matches(n as u64))
        .collect();
    if primes.is_empty() {
        if let Some(p) = (top + 1..=limit).find(|&n| sieve[n] && sel.matches(n as u64)) {
            primes.push(p);
        }
    }
    let mut removed = vec![false; top + 1];
    for &p in &primes {
        for &a in shifts {
            let mut m = (a as usize) % p;
            while m <= top {
                removed[m] = true;
                m += p;
            }
        }
    }
    set.iter().filter(|&s| !removed[s as usize]).count() as u64
}

// ---------- criterion 2 ----------

fn criterion_2(sieve: &[bool], table: &Arc<PrimeTable>) -> Verdict {
    let mut rng = stream(SEED, "acceptance.inverse_sieve");
    let mut violations = 0;
    let mut strengthened = 0;
    let mut drift: f64 = 0.0;
    for _ in 0..1000 {
        let case = match inverse_sieve_case(&mut rng, table) {
            Ok(c) => c,
            Err(e) => return verdict(false, e.to_string()),
        };
        let r = &case.report;
        let sel = case.ps.selector();
        let (lo, hi) = ((r.y / 2.0).floor() as usize + 1, r.y.floor() as usize);
        let mut lhs = 0.0;
        let mut recip = 0.0;
        let mut theta = 0.0;
        for p in lo..=hi {
            if !(sieve[p] && sel.matches(p as u64)) || (p as f64) <= r.y / 2.0 {
                continue;
            }
            let classes: BTreeSet<u64> = case.set.iter().map(|a| a % p as u64).collect();
            lhs += classes.len() as f64 / p as f64;
            recip += 1.0 / p as f64;
            theta += (p as f64).ln();
        }
        let k = case.set.len() as f64;
        let log_x = (r.x as f64).ln();
        let half = r.y / 2.0;
        let rhs = k * recip - (k * k - k) * log_x / (half * half.ln());
        let tol = 1e-12 * lhs.abs().max(1.0);
        if lhs < rhs - tol {
            violations += 1;
        }
        if theta >= 8.0 * k * log_x {
            strengthened += 1;
            if lhs < k / 2.0 * recip - tol {
                violations += 1;
            }
        }
        drift = drift.max((lhs - r.lhs).abs()).max((rhs - r.rhs).abs());
        if !r.holds {
            violations += 1;
        }
    }
    verdict(
        violations == 0 && drift < 1e-9,
        format!("1000 instances, {strengthened} strengthened, {violations} violations, max drift from library {drift:.1e}"),
    )
}

// ---------- criterion 3 ----------

fn criterion_3() -> Verdict {
    let mut rng = stream(SEED, "acceptance.comparison");
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let (f, g, n) = comparison_pair(&mut rng);
        let lib = match check_comparison_inequality(&f, &g, n) {
            Ok(c) => c,
            Err(e) => return verdict(false, e.to_string()),
        };
        // direct sums over n <= N, and the Euler factors over p <= N
        let eval = |vals: &BTreeMap<u64, f64>, mut m: u64| {
            let mut v = 1.0;
            let mut p = 2;
            while m > 1 {
                while m % p == 0 {
                    v *= vals.get(&p).copied().unwrap_or(0.0);
                    m /= p;
                }
                p += 1;
            }
            v
        };
        let lhs: f64 = (1..=n).map(|m| eval(&f.prime_values, m) / m as f64).sum();
        let g_sum: f64 = (1..=n).map(|m| eval(&g.prime_values, m) / m as f64).sum();
        let mut factor = 1.0;
        for (&p, &gp) in g.prime_values.range(..=n) {
            let fp = f.prime_values.get(&p).copied().unwrap_or(0.0);
            factor *= (1.0 - gp / p as f64) / (1.0 - fp / p as f64);
        }
        let rhs = factor * g_sum;
        if lhs < rhs - 1e-9 || !lib.holds || (lib.lhs - lhs).abs() > 1e-9 * lhs.max(1.0) {
            failures += 1;
        }
        worst = worst.min(lhs - rhs);
    }
    verdict(
        failures == 0,
        format!("1000 pairs, {failures} failures, min lhs - rhs = {worst:.3e}"),
    )
}

// ---------- criterion 4 ----------

fn criterion_4() -> Verdict {
    let mut rng = stream(SEED, "acceptance.ruzsa");
    let mut failures = 0;
    for _ in 0..1000 {
        let a = random_set(&mut rng, 1, 64, 10_000);
        let b = random_set(&mut rng, 1, 64, 10_000);
        let c = random_set(&mut rng, 1, 64, 10_000);
        let ab = naive_sumset(a.as_slice(), b.as_slice());
        let ac = naive_sumset(a.as_slice(), c.as_slice());
        let bc = naive_sumset(b.as_slice(), c.as_slice());
        let ab_v: Vec<u64> = ab.iter().copied().collect();
        let abc = naive_sumset(&ab_v, c.as_slice());
        let lhs = (abc.len() as u128).pow(2);
        let rhs = ab.len() as u128 * ac.len() as u128 * bc.len() as u128;
        let lib = ruzsa_check(&a, &b, &c);
        let agrees = matches!(&lib, Ok(r) if r.lhs == lhs && r.rhs == rhs && r.holds);
        if lhs > rhs || !agrees {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("1000 triples, {failures} failures"))
}

// ---------- criterion 5 ----------

fn criterion_5(lpf: &[u32]) -> Verdict {
    let xs = [1_000u64, 10_000, 100_000, 1_000_000];
    let ys = [2u64, 3, 5, 10, 30, 100];
    let mut bad = Vec::new();
    for &x in &xs {
        for &y in &ys {
            let oracle = (1..=x as usize).filter(|&n| lpf[n] as u64 <= y).count() as u64;
            let rec = psi(&SmoothQuery::new(x, y)).unwrap_or(u64::MAX);
            let dfs = enumerate_smooth(x, y)
                .map(|v| v.len() as u64)
                .unwrap_or(u64::MAX);
            if rec != oracle || dfs != oracle {
                bad.push(format!("({x},{y}): {rec}/{dfs} vs {oracle}"));
            }
        }
    }
    let p100 = psi(&SmoothQuery::new(100, 3)).ok();
    let p10 = psi(&SmoothQuery::new(10, 2)).ok();
    if p100 != Some(20) || p10 != Some(4) {
        bad.push(format!("psi(100,3) = {p100:?}, psi(10,2) = {p10:?}"));
    }
    let mut rng = stream(SEED, "acceptance.psi_classes");
    for _ in 0..50 {
        let x = xs[rng.gen_range(0..xs.len())];
        let y = ys[rng.gen_range(0..ys.len())];
        let d = rng.gen_range(1..=200u64);
        let mut per_class = vec![0u64; d as usize];
        for n in 1..=x as usize {
            if lpf[n] as u64 <= y {
                per_class[n % d as usize] += 1;
            }
        }
        let mut total = 0;
        for a in 0..d {
            let v = psi_ap(x, y, a, d).unwrap_or(u64::MAX);
            if v != per_class[a as usize] {
                bad.push(format!("class {a} mod {d} at ({x},{y})"));
            }
            total += v;
        }
        if total != psi(&SmoothQuery::new(x, y)).unwrap_or(0) {
            bad.push(format!("class sum mod {d} at ({x},{y})"));
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            "24 grid points, psi(100,3) = 20, psi(10,2) = 4, 50 moduli partition".to_string()
        } else {
            bad.join("; ")
        },
    )
}

// ---------- criterion 6 ----------

/// Dickman's function from power series centred at the midpoint of each
/// unit interval, built from `u ρ'(u) = −ρ(u − 1)`.
struct TaylorRho {
    /// `coef[k]` expands ρ on `[k, k+1]` in `t = u − (k + 1/2)`.
    coef: Vec<Vec<f64>>,
}

const TERMS: usize = 90;

impl TaylorRho {
    fn new(max_k: usize) -> Self {
        let mut coef = vec![{
            let mut c = vec![0.0; TERMS];
            c[0] = 1.0;
            c
        }];
        for k in 1..=max_k {
            let prev = &coef[k - 1];
            let centre = k as f64 + 0.5;
            let build = |a0: f64| {
                let mut a = vec![0.0; TERMS];
                a[0] = a0;
                for m in 0..TERMS - 1 {
                    a[m + 1] = -(prev[m] + m as f64 * a[m]) / (centre * (m + 1) as f64);
                }
                a
            };
            let at = |a: &[f64], t: f64| a.iter().rev().fold(0.0, |acc, &c| acc * t + c);
            // continuity at u = k fixes the constant term
            let left = at(prev, 0.5);
            let (z, o) = (build(0.0), build(1.0));
            let (vz, vo) = (at(&z, -0.5), at(&o, -0.5));
            let a0 = (left - vz) / (vo - vz);
            coef.push(build(a0));
        }
        TaylorRho { coef }
    }

    fn piece(&self, u: f64) -> (usize, f64) {
        let k = (u.floor() as usize).min(self.coef.len() - 1);
        (k, u - (k as f64 + 0.5))
    }

    fn rho(&self, u: f64) -> f64 {
        if u <= 1.0 {
            return 1.0;
        }
        let (k, t) = self.piece(u);
        self.coef[k].iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// `∫_{k + 1/2 + t0}^{k + 1/2 + t1} ρ` within piece `k`.
    fn integral_in(&self, k: usize, t0: f64, t1: f64) -> f64 {
        let anti = |t: f64| {
            self.coef[k]
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (m, &c)| acc * t + c / (m + 1) as f64)
                * t
        };
        anti(t1) - anti(t0)
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        let mut a = lo;
        while a < hi {
            let k = a.floor() as usize;
            let b = hi.min(k as f64 + 1.0);
            let c = k as f64 + 0.5;
            total += self.integral_in(k, a - c, b - c);
            a = b;
        }
        total
    }
}

fn criterion_6() -> Verdict {
    let taylor = TaylorRho::new(21);
    let mut bad = Vec::new();
    for i in 0..=100 {
        let u = i as f64 / 100.0;
        if dickman_rho(u).map(|v| v.rho).ok() != Some(1.0) {
            bad.push(format!("rho({u}) != 1"));
        }
    }
    let r2 = dickman_rho(2.0).map(|v| v.rho).unwrap_or(f64::NAN);
    let e2 = (r2 - (1.0 - 2f64.ln())).abs();
    if !(e2 <= 1e-8) {
        bad.push(format!("|rho(2) - (1 - ln 2)| = {e2:e}"));
    }
    // the oracle itself against the closed form on [1, 2]
    let oracle_err = (0..=100)
        .map(|i| {
            let u = 1.0 + i as f64 / 100.0;
            (taylor.rho(u) - (1.0 - u.ln())).abs()
        })
        .fold(0.0, f64::max);
    if oracle_err > 1e-13 {
        bad.push(format!("Taylor oracle off closed form by {oracle_err:e}"));
    }
    let mut worst_identity: f64 = 0.0;
    let mut worst_value: f64 = 0.0;
    for i in 0..=760 {
        let u = 1.0 + i as f64 * 0.025;
        let lib = dickman_rho(u).map(|v| v.rho).unwrap_or(f64::NAN);
        let identity = (u * lib - taylor.integral(u - 1.0, u)).abs();
        worst_identity = worst_identity.max(identity);
        worst_value = worst_value.max((lib - taylor.rho(u)).abs());
        if !(identity <= 1e-8) {
            bad.push(format!("identity off by {identity:e} at u = {u}"));
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "rho = 1 on [0,1], |rho(2) - (1 - ln 2)| = {e2:.1e}, identity max error {worst_identity:.1e} on 761 points of [1,20], max |rho - oracle| {worst_value:.1e}{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

// ---------- criterion 7 ----------

fn criterion_7(sieve: &[bool], table: &Arc<PrimeTable>) -> Verdict {
    const X: usize = 1_000_000;
    let spf = smallest_prime_factor(10_000_000);
    let mut bad = Vec::new();
    let mut rng = stream(SEED, "acceptance.semigroup");
    let mut selectors = vec![
        Selector::All,
        Selector::Residue { a: 1, m: 4 },
        Selector::Residue { a: 3, m: 4 },
        Selector::Residue { a: 1, m: 3 },
        Selector::Residue { a: 2, m: 3 },
        Selector::Residue { a: 1, m: 8 },
        Selector::Interval { lo: 0.0, hi: 30.0 },
        Selector::Interval {
            lo: 10.0,
            hi: 1000.0,
        },
        Selector::Min { threshold: 50.0 },
        Selector::Only {
            primes: [2, 3].into(),
        },
        Selector::Only {
            primes: [3, 7, 11].into(),
        },
        Selector::Except { primes: [2].into() },
        Selector::Not {
            inner: Box::new(Selector::Residue { a: 1, m: 5 }),
        },
    ];
    while selectors.len() < 20 {
        let primes: BTreeSet<u64> = (2..200u64)
            .filter(|&p| sieve[p as usize] && rng.gen_bool(0.3))
            .collect();
        selectors.push(Selector::Only { primes });
    }
    for sel in &selectors {
        let ps = PrimeSubset::new(table.clone(), sel.clone());
        let filtered: Vec<u64> = (1..=X as u64)
            .filter(|&n| {
                let mut m = n as usize;
                while m > 1 {
                    let p = spf[m] as usize;
                    if !sel.matches(p as u64) {
                        return false;
                    }
                    m /= p;
                }
                true
            })
            .collect();
        match enumerate_q(&ps, X as u64) {
            Ok(q) if q.as_slice() == filtered.as_slice() => {}
            Ok(q) => bad.push(format!("{sel}: {} vs {} elements", q.len(), filtered.len())),
            Err(e) => bad.push(format!("{sel}: {e}")),
        }
    }

    let quarter = Selector::Residue { a: 1, m: 4 };
    let ps = PrimeSubset::new(table.clone(), quarter.clone());
    let in_q = |n: usize| {
        let mut m = n;
        while m > 1 {
            let p = spf[m] as usize;
            if p % 4 != 1 {
                return false;
            }
            m /= p;
        }
        true
    };
    let q100 = enumerate_q(&ps, 100).map(|q| q.len()).unwrap_or(0);
    if q100 != 15 {
        bad.push(format!("#Q(T)(100) = {q100}"));
    }

    // least-squares slope of Σ log p/p against log t, recomputed here
    let x7 = 10_000_000u64;
    let log_x = (x7 as f64).ln();
    let mut pts = Vec::new();
    let mut acc = 0.0;
    let mut next = 2usize;
    for i in 0..32 {
        let lt = log_x * (0.25 + 0.75 * i as f64 / 31.0);
        let t = if i == 31 { x7 as f64 } else { lt.exp() };
        while next as f64 <= t {
            if sieve[next] && next % 4 == 1 {
                acc += (next as f64).ln() / next as f64;
            }
            next += 1;
        }
        pts.push((lt, acc));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let tau = estimate_tau(&ps, x7).map(|f| f.tau_hat).unwrap_or(f64::NAN);
    if !(0.45..=0.55).contains(&tau) || (tau - slope).abs() > 1e-9 {
        bad.push(format!("tau_hat {tau} (oracle {slope})"));
    }

    let mut ratios = Vec::new();
    for x in [100_000u64, 1_000_000, 10_000_000] {
        let exact = (1..=x as usize).filter(|&n| in_q(n)).count() as u64;
        let lib = count_q(&ps, x).unwrap_or(0);
        if lib != exact {
            bad.push(format!("count at {x}: {lib} vs {exact}"));
        }
        ratios.push(exact as f64 * (x as f64).ln().sqrt() / x as f64);
    }
    let spread = ratios.iter().cloned().fold(0.0, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread > 1.5 {
        bad.push(format!("normalised count spread {spread}"));
    }
    verdict(
        bad.is_empty(),
        format!(
            "20 subsets match the filter at 10^6, #Q(T)(100) = {q100}, tau_hat = {tau:.4}, normalised counts {:.4}/{:.4}/{:.4} (spread {spread:.3}){}",
            ratios[0],
            ratios[1],
            ratios[2],
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

// ---------- criterion 8 ----------

fn mask_set(mask: u32) -> Vec<u64> {
    (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i as u64)
        .collect()
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    // every (A, B) with 0 in both, at least two elements each, sums <= 12
    let mut reachable = vec![false; 1 << 13];
    for a in (1u32..1 << 13).filter(|a| a & 1 == 1 && a.count_ones() >= 2) {
        let max_a = 31 - a.leading_zeros();
        for b in (1u32..1 << (13 - max_a)).filter(|b| b & 1 == 1 && b.count_ones() >= 2) {
            let mut s = 0u32;
            for i in 0..13 {
                if a >> i & 1 == 1 {
                    s |= b << i;
                }
            }
            reachable[s as usize] = true;
        }
    }
    let mut checked = 0;
    let mut witnesses = 0;
    for mask in 1u32..1 << 13 {
        if mask.count_ones() < 2 {
            continue;
        }
        let s = IntegerSet::new(mask_set(mask));
        let norm = mask >> mask.trailing_zeros();
        let expected = reachable[norm as usize];
        match decompose_binary(&s, 2) {
            Ok(r) => {
                checked += 1;
                if r.decomposable != expected {
                    bad.push(format!(
                        "{s}: search {} vs exhaustive {expected}",
                        r.decomposable
                    ));
                }
                if let Some((a, b)) = &r.witness {
                    witnesses += 1;
                    let sum: Vec<u64> = naive_sumset(a.as_slice(), b.as_slice())
                        .into_iter()
                        .collect();
                    if sum != s.as_slice() || a.len() < 2 || b.len() < 2 {
                        bad.push(format!("{s}: witness does not re-verify"));
                    }
                }
            }
            Err(e) => bad.push(format!("{s}: {e}")),
        }
    }

    let mut rng = stream(SEED, "acceptance.roundtrip");
    let mut found = 0;
    for _ in 0..500 {
        let a = random_set(&mut rng, 2, 8, 200);
        let b = random_set(&mut rng, 2, 8, 200);
        let s = sumset(&a, &b);
        if s.as_slice()
            != naive_sumset(a.as_slice(), b.as_slice())
                .into_iter()
                .collect::<Vec<_>>()
        {
            bad.push(format!("sumset of {a} and {b}"));
        }
        match decompose_binary(&s, 2) {
            Ok(r) if r.decomposable => {
                found += 1;
                let (wa, wb) = r.witness.as_ref().unwrap();
                let sum: Vec<u64> = naive_sumset(wa.as_slice(), wb.as_slice())
                    .into_iter()
                    .collect();
                witnesses += 1;
                if sum != s.as_slice() {
                    bad.push(format!("{s}: witness does not re-verify"));
                }
            }
            Ok(_) => bad.push(format!("{a} + {b} not rediscovered")),
            Err(e) => bad.push(e.to_string()),
        }
    }
    let small = decompose_binary(&IntegerSet::new(vec![0, 1, 3]), 2).map(|r| r.decomposable);
    if small.as_ref().ok() != Some(&false) {
        bad.push(format!("{{0,1,3}}: {small:?}"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(600) {
        bad.push("over 10 minutes".into());
    }
    verdict(
        bad.is_empty(),
        format!(
            "{checked} subsets of [0,12] agree with exhaustive search, {found}/500 round trips, {{0,1,3}} indecomposable, {witnesses} witnesses re-verified; {:.1}s{}",
            elapsed.as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.iter().take(5).cloned().collect::<Vec<_>>().join("; ")) }
        ),
    )
}

// ---------- criterion 9 ----------

fn criterion_9(table: &Arc<PrimeTable>) -> Verdict {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    // the desk preset with a smaller K factor, so that P0* reaches below sqrt(x)
    let scaled = ConstantsProfile::Scaled(ScaledConstants {
        k_factor: 0.001,
        ..ScaledConstants::DESK
    });

    let mut three = Vec::new();
    let mut a = 1u64;
    while a <= 10_000 {
        let mut b = a;
        while b <= 10_000 {
            three.push(b);
            b *= 3;
        }
        a *= 2;
    }
    let semigroup = match enumerate_q(
        &PrimeSubset::new(table.clone(), Selector::Residue { a: 1, m: 4 }),
        1_000_000,
    ) {
        Ok(q) => q,
        Err(e) => return verdict(false, e.to_string()),
    };
    let instances = [
        (
            "3-smooth at 10^4",
            IntegerSet::new(three),
            Selector::Except {
                primes: [2, 3].into(),
            },
            10_000u64,
            30u64,
        ),
        (
            "Q(1 mod 4) at 10^6",
            semigroup,
            Selector::Not {
                inner: Box::new(Selector::Residue { a: 1, m: 4 }),
            },
            1_000_000,
            30,
        ),
    ];
    for (name, s, sel, x, q) in instances {
        let ps = PrimeSubset::new(table.clone(), sel);
        for profile in [scaled, ConstantsProfile::Strict] {
            let ctx = match build_context(&s, &s, &ps, x, profile) {
                Ok(c) => c,
                Err(e) => {
                    bad.push(format!("{name} {}: {e}", profile.name()));
                    continue;
                }
            };
            let scs = check_scs_condition(&ctx);
            let bv = check_bv_condition(&ctx, &s, q);
            let concl = conclusion_bounds(&ctx);
            let summary = ctx.summary();
            match (&scs, &bv) {
                (Ok(scs), Ok(bv)) => {
                    if scs.profile != profile.name()
                        || bv.profile != profile.name()
                        || concl.profile != profile.name()
                    {
                        bad.push(format!("{name}: profile missing from a report"));
                    }
                    notes.push(format!(
                        "{name} {}: K = {:.1}, P0* up to sqrt(x) has {} primes, scs {:.3} vs {:.3}, bv main {:.3} vs {:.3}",
                        profile.name(),
                        ctx.k_cap,
                        summary.ps_star_size_up_to_sqrt_x,
                        scs.sum_value,
                        scs.threshold,
                        bv.main_sum,
                        bv.main_threshold
                    ));
                }
                _ => bad.push(format!(
                    "{name} {}: {:?} {:?}",
                    profile.name(),
                    scs.as_ref().err(),
                    bv.as_ref().err()
                )),
            }
            let shape = (x as f64).sqrt() * (x as f64).ln().powi(4) / ctx.c.powi(4);
            if (concl.upper_b - shape).abs() > 1e-9 * shape || !concl.implied_constant_unspecified {
                bad.push(format!(
                    "{name}: conclusion shape {} vs {shape}",
                    concl.upper_b
                ));
            }
            if profile == ConstantsProfile::Strict && !summary.ps_star_empty_up_to_sqrt_x {
                bad.push(format!("{name}: strict P0* not empty below sqrt(x)"));
            }
            if profile == ConstantsProfile::Strict {
                if let Ok(scs) = &scs {
                    if scs.holds || scs.sum_value != 0.0 {
                        bad.push(format!("{name}: strict verdict on empty P0*"));
                    }
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{}{}",
            notes.join("; "),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; {}", bad.join("; "))
            }
        ),
    )
}

// ---------- criterion 10 ----------

fn criterion_10(sieve: &[bool], table: &Arc<PrimeTable>) -> Verdict {
    let squares: IntegerSet = (1..=1000u64).map(|i| i * i).collect();
    let mut bad = Vec::new();
    let prof = match ostmann_epsilon_profile(
        &squares,
        1_000_000,
        1000.0,
        &PrimeSubset::all(table.clone()),
    ) {
        Ok(p) => p,
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut moment = 0.0;
    let mut moment_odd = 0.0;
    let mut seen = 0;
    for p in 2..=1000usize {
        if !sieve[p] {
            continue;
        }
        let classes: BTreeSet<u64> = squares.iter().map(|s| s % p as u64).collect();
        let eps = classes.len() as f64 - p as f64 / 2.0;
        let entry = prof.entries.iter().find(|e| e.p == p as u64);
        if entry.map(|e| e.epsilon) != Some(eps) {
            bad.push(format!("epsilon mismatch at {p}"));
        }
        if p > 2 && eps != 0.5 {
            bad.push(format!("epsilon_{p} = {eps}"));
        }
        let pf = p as f64;
        let term = pf.ln() / pf * eps * eps / (pf * pf);
        moment += term;
        if p > 2 {
            moment_odd += term;
        }
        seen += 1;
    }
    if seen != prof.entries.len() || (moment - prof.moments.weighted_square).abs() > 1e-12 {
        bad.push("moment disagrees with the library".into());
    }
    if !(moment < 0.1) {
        bad.push(format!(
            "moment sum over p <= 1000 is {moment:.5} (p = 2 contributes {:.5})",
            moment - moment_odd
        ));
    }
    let id = algebraic_identity_check(&prof);
    let mut direct_lhs = 0.0;
    let mut direct_rhs = 0.0;
    for e in &prof.entries {
        let pf = e.p as f64;
        if e.epsilon.abs() < pf / 2.0 {
            direct_lhs += pf.ln() / (pf / 2.0 + e.epsilon) + pf.ln() / (pf / 2.0 - e.epsilon);
            direct_rhs += pf * pf.ln() / ((pf / 2.0).powi(2) - e.epsilon * e.epsilon);
        }
    }
    let id_err = (direct_lhs - direct_rhs).abs() / direct_rhs;
    if id_err > 1e-9 || id.max_relative_error > 1e-9 {
        bad.push(format!(
            "identity error {id_err:e} / {:e}",
            id.max_relative_error
        ));
    }
    verdict(
        bad.is_empty(),
        format!(
            "epsilon_p = 1/2 for odd p <= 1000; moment over all p <= 1000 = {moment:.5}, over odd p = {moment_odd:.5}; identity error {:.1e}{}",
            id.max_relative_error,
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

fn main() {
    let sieve = eratosthenes(10_000_000);
    let table = Arc::new(PrimeTable::new(10_000_000).expect("prime table"));
    let lpf = largest_prime_factor(1_000_000);
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("sieve soundness", Box::new(|| criterion_1(&sieve, &table))),
        ("inverse sieve", Box::new(|| criterion_2(&sieve, &table))),
        ("comparison inequality", Box::new(criterion_3)),
        ("Ruzsa inequality", Box::new(criterion_4)),
        ("smooth counting", Box::new(|| criterion_5(&lpf))),
        ("Dickman function", Box::new(criterion_6)),
        ("semigroup", Box::new(|| criterion_7(&sieve, &table))),
        ("decomposition search", Box::new(criterion_8)),
        ("irreducibility checker", Box::new(|| criterion_9(&table))),
        (
            "epsilon diagnostics",
            Box::new(|| criterion_10(&sieve, &table)),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<24} {} ({:.1}s) {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
