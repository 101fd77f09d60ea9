//! Randomised instance generators and the invariant batches run by
//! [`verify_all`].
//!
//! Every batch draws from its own ChaCha stream, seeded from the run seed
//! and the batch name, so a batch's trials do not depend on which other
//! batches run or on thread scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{check_comparison_inequality, factorize, mobius, tau3, MultiplicativeSpec};
use crate::error::{Result, SieveError};
use crate::exec::Exec;
use crate::irreducibility::{
    algebraic_identity_check, build_context, ostmann_epsilon_profile, ConstantsProfile,
    GenThmContext, ScaledConstants,
};
use crate::primes::{subset_sums, PrimeSubset, PrimeTable, Selector};
use crate::semigroup::enumerate_q;
use crate::sieves::{
    inverse_sieve_lower_bound, large_sieve_bound, larger_sieve_bound, middlek_bound, occupancy,
    occupancy_at, prop_smallkbv_bound, prop_smallkscs_bound, residue_classes, selberg_bound,
    sift_count_with, InverseSieveReport, OccupancyProfile, OccupancyVariant, ShiftSet,
    SieveBoundReport, SieveWeights,
};
use crate::smooth::{dickman_rho, enumerate_smooth, psi, psi_ap, SmoothQuery};
use crate::sumset::{decompose_binary, ruzsa_check, sumset, IntegerSet};

/// Prime table size used by [`verify_all`]; large enough for the two-window
/// instances.
pub const VERIFY_TABLE_LIMIT: u64 = 4_000_000;

/// Seeded generator for one named stream.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a of the name, mixed into the seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// A set in `[1, n]` cut out by random residue restrictions modulo a few
/// small primes, then thinned at a random rate.
pub fn structured_set<R: Rng>(rng: &mut R, n: u64) -> IntegerSet {
    let mut allowed: Vec<(u64, Vec<bool>)> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13] {
        if rng.gen_bool(0.5) {
            let keep = rng.gen_range(1..=p as usize);
            let mut classes: Vec<usize> = (0..p as usize).collect();
            classes.shuffle(rng);
            let mut mask = vec![false; p as usize];
            for &c in &classes[..keep] {
                mask[c] = true;
            }
            allowed.push((p, mask));
        }
    }
    let density = rng.gen_range(0.2..=1.0);
    let mut out = Vec::new();
    for m in 1..=n {
        if allowed.iter().all(|(p, mask)| mask[(m % p) as usize]) && rng.gen_bool(density) {
            out.push(m);
        }
    }
    if out.is_empty() {
        out.push(rng.gen_range(1..=n));
    }
    IntegerSet::new(out)
}

/// `k` distinct integers drawn from `[lo, hi]`.
pub fn random_distinct<R: Rng>(rng: &mut R, k: usize, lo: u64, hi: u64) -> Vec<u64> {
    let span = hi - lo + 1;
    let k = k.min(span as usize);
    let mut picked = BTreeSet::new();
    if (k as u64) * 2 > span {
        let mut all: Vec<u64> = (lo..=hi).collect();
        all.shuffle(rng);
        picked.extend(all.into_iter().take(k));
    } else {
        while picked.len() < k {
            picked.insert(rng.gen_range(lo..=hi));
        }
    }
    picked.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    LargerSieve,
    LargeSieve,
    Selberg,
    SmallKScs,
    SmallKBv,
    MiddleK,
}

impl Evaluator {
    pub const ALL: [Evaluator; 6] = [
        Evaluator::LargerSieve,
        Evaluator::LargeSieve,
        Evaluator::Selberg,
        Evaluator::SmallKScs,
        Evaluator::SmallKBv,
        Evaluator::MiddleK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Evaluator::LargerSieve => "larger_sieve",
            Evaluator::LargeSieve => "large_sieve",
            Evaluator::Selberg => "selberg",
            Evaluator::SmallKScs => "prop_smallkscs",
            Evaluator::SmallKBv => "prop_smallkbv",
            Evaluator::MiddleK => "middlek",
        }
    }

    /// Smallest prime table the generator for this evaluator needs.
    pub fn table_limit(self) -> u64 {
        match self {
            Evaluator::MiddleK => VERIFY_TABLE_LIMIT,
            _ => 100_000,
        }
    }
}

/// One random instance together with the bound produced for it.
#[derive(Debug, Clone)]
pub struct SoundnessCase {
    pub evaluator: Evaluator,
    /// The set whose size (larger and large sieve) or sifted part (the
    /// other evaluators) is bounded.
    pub set: IntegerSet,
    /// Shifts removed modulo each sieving prime; empty for the two
    /// occupancy-driven sieves.
    pub shifts: Vec<u64>,
    /// Sieving primes up to `max(set ∪ shifts)`, plus the next member of
    /// the subset if there is none that small.
    pub sieve_primes: Vec<u64>,
    pub ps: PrimeSubset,
    pub report: SieveBoundReport,
    /// `#set` or the sifted count, as computed by the library.
    pub true_count: u64,
}

impl SoundnessCase {
    pub fn is_valid(&self) -> bool {
        self.report.valid && self.report.bound.is_finite()
    }

    pub fn sound(&self) -> bool {
        !self.is_valid() || self.report.bound >= self.true_count as f64
    }
}

fn sieve_primes_for(ps: &PrimeSubset, set: &IntegerSet, shifts: &[u64]) -> Vec<u64> {
    let top = set
        .max()
        .unwrap_or(0)
        .max(shifts.iter().copied().max().unwrap_or(0))
        .max(2);
    let mut v = ps.members_up_to(top.min(ps.limit()));
    if v.is_empty() {
        if let Some(p) = ps.iter_range(top as f64, ps.limit() as f64).next() {
            v.push(p);
        }
    }
    v
}

fn sifted_case(
    evaluator: Evaluator,
    set: IntegerSet,
    shifts: &ShiftSet,
    ps: &PrimeSubset,
    report: SieveBoundReport,
) -> SoundnessCase {
    let sieve_primes = sieve_primes_for(ps, &set, shifts.values());
    let true_count = report
        .sifted_count
        .unwrap_or_else(|| sift_count_with(&set, shifts, ps, Exec::Sequential));
    SoundnessCase {
        evaluator,
        set,
        shifts: shifts.values().to_vec(),
        sieve_primes,
        ps: ps.clone(),
        report,
        true_count,
    }
}

fn window_profile(window_factor: f64) -> ConstantsProfile {
    ConstantsProfile::Scaled(ScaledConstants {
        window_factor,
        ..ScaledConstants::DESK
    })
}

/// Draws one instance for `evaluator`. The table must reach
/// [`Evaluator::table_limit`].
pub fn soundness_case<R: Rng>(
    rng: &mut R,
    evaluator: Evaluator,
    table: &Arc<PrimeTable>,
) -> Result<SoundnessCase> {
    match evaluator {
        Evaluator::LargerSieve => {
            let n = rng.gen_range(50..=3000);
            let set = if rng.gen_bool(0.5) {
                structured_set(rng, n)
            } else {
                let k = rng.gen_range(2..=30);
                IntegerSet::new(random_distinct(rng, k, 1, n))
            };
            let z = rng.gen_range(5.0..=200.0);
            let ps = PrimeSubset::new(table.clone(), Selector::Interval { lo: 1.0, hi: z });
            let prof = occupancy(&set, &ps, OccupancyVariant::AllClasses)?;
            let report = larger_sieve_bound(&prof, &ps, n)?;
            Ok(SoundnessCase {
                evaluator,
                true_count: set.len() as u64,
                set,
                shifts: Vec::new(),
                sieve_primes: ps.members(),
                ps,
                report,
            })
        }
        Evaluator::LargeSieve => {
            let x = rng.gen_range(50..=3000);
            let set = structured_set(rng, x);
            let q = rng.gen_range(2..=40);
            let primes = table.primes_up_to(q).to_vec();
            let nu = occupancy_at(set.as_slice(), &primes, OccupancyVariant::AllClasses);
            let omega: BTreeMap<u64, u64> = nu.entries.iter().map(|(&p, &v)| (p, p - v)).collect();
            let prof = OccupancyProfile::from_entries(omega, OccupancyVariant::AllClasses)?;
            let report = large_sieve_bound(&prof, x, q)?;
            Ok(SoundnessCase {
                evaluator,
                true_count: set.len() as u64,
                set,
                shifts: Vec::new(),
                sieve_primes: primes,
                ps: PrimeSubset::new(
                    table.clone(),
                    Selector::Interval {
                        lo: 0.0,
                        hi: q as f64,
                    },
                ),
                report,
            })
        }
        Evaluator::Selberg => {
            let x = rng.gen_range(100..=3000);
            let set = structured_set(rng, x);
            let k = rng.gen_range(1..=4);
            let shifts = ShiftSet::new(random_distinct(rng, k, 0, 60))?;
            let ps = PrimeSubset::new(
                table.clone(),
                Selector::Min {
                    threshold: k as f64 + 0.5,
                },
            );
            let q = rng.gen_range(2..=12u64);
            let prof = occupancy_at(
                shifts.values(),
                &ps.members_up_to(q * q),
                OccupancyVariant::AllClasses,
            );
            let report = selberg_bound(&set, &ps, &shifts, &SieveWeights::from(&prof), q)?;
            Ok(sifted_case(evaluator, set, &shifts, &ps, report))
        }
        Evaluator::SmallKScs => {
            let x = rng.gen_range(1000..=20_000);
            let set = structured_set(rng, x);
            let k_cap: f64 = rng.gen_range(2.0..12.0);
            let k = rng.gen_range(2..=k_cap.floor() as usize);
            let shifts = ShiftSet::new(random_distinct(rng, k, 0, 300))?;
            let sel = if rng.gen_bool(0.5) {
                Selector::All
            } else {
                Selector::Min {
                    threshold: rng.gen_range(2.0..20.0),
                }
            };
            let ps = PrimeSubset::new(table.clone(), sel);
            let ctx = GenThmContext::manual(
                x,
                ps,
                k_cap,
                ConstantsProfile::Scaled(ScaledConstants::DESK),
            );
            let report = prop_smallkscs_bound(&set, &shifts, &ctx)?;
            Ok(sifted_case(evaluator, set, &shifts, &ctx.ps_star, report))
        }
        Evaluator::SmallKBv => {
            let x = rng.gen_range(500..=5000);
            let lo = *[5u64, 7, 11].choose(rng).unwrap();
            let hi = rng.gen_range(20.0..=80.0);
            let ps = PrimeSubset::new(
                table.clone(),
                Selector::Interval {
                    lo: lo as f64 - 0.5,
                    hi,
                },
            );
            let forbidden = ps.members();
            let density = rng.gen_range(0.2..=1.0);
            let mut elems = Vec::new();
            for n in 1..=x {
                if forbidden.iter().all(|&p| n % p != 0) && rng.gen_bool(density) {
                    elems.push(n);
                }
            }
            if elems.is_empty() {
                elems.push(1);
            }
            let set = IntegerSet::new(elems);
            let k_cap: f64 = rng.gen_range(2.0..=lo as f64);
            let k = rng.gen_range(2..=k_cap.floor() as usize);
            let shifts = ShiftSet::new(random_distinct(rng, k, 0, 100))?;
            let q = rng.gen_range(3..=9);
            let ctx = GenThmContext::manual(
                x,
                ps,
                k_cap,
                ConstantsProfile::Scaled(ScaledConstants::DESK),
            );
            let report = prop_smallkbv_bound(&set, &shifts, &ctx, q)?;
            Ok(sifted_case(evaluator, set, &shifts, &ctx.ps_star, report))
        }
        Evaluator::MiddleK => {
            let y1: f64 = rng.gen_range(20.0..=22.0);
            let y2: f64 = rng.gen_range(2.0 * y1 + 2.0..=2.0 * y1 + 8.0);
            let root = y1 * y2 * rng.gen_range(1.02..=1.15);
            let x = (root * root).ceil() as u64;
            let mut excluded = BTreeSet::new();
            for p in table.primes_in(y1 / 2.0, y2) {
                if rng.gen_bool(0.2) {
                    excluded.insert(*p);
                }
            }
            let ps = PrimeSubset::new(
                table.clone(),
                Selector::And {
                    parts: vec![
                        Selector::Interval {
                            lo: y1 / 2.0,
                            hi: y2,
                        },
                        Selector::Except { primes: excluded },
                    ],
                },
            );
            let set = if rng.gen_bool(0.1) {
                IntegerSet::range(1, x)
            } else {
                let density = rng.gen_range(0.01..=0.3);
                (1..=x).filter(|_| rng.gen_bool(density)).collect()
            };
            let k = rng.gen_range(1..=12);
            let shifts = ShiftSet::new(random_distinct(rng, k, 0, 1000))?;
            let profile = window_profile(rng.gen_range(0.02..=0.6));
            let report = middlek_bound(&set, &shifts, &ps, x, y1, y2, &profile)?;
            Ok(sifted_case(evaluator, set, &shifts, &ps, report))
        }
    }
}

/// Draws instances until `target` valid ones are collected or `max_attempts`
/// draws have been made. Returns the valid cases and the number of draws.
pub fn valid_soundness_cases(
    evaluator: Evaluator,
    target: usize,
    seed: u64,
    table: &Arc<PrimeTable>,
    max_attempts: usize,
) -> Result<(Vec<SoundnessCase>, usize)> {
    let mut rng = stream(seed, evaluator.name());
    let mut out = Vec::with_capacity(target);
    let mut attempts = 0;
    while out.len() < target && attempts < max_attempts {
        attempts += 1;
        let case = soundness_case(&mut rng, evaluator, table)?;
        if case.is_valid() {
            out.push(case);
        }
    }
    Ok((out, attempts))
}

/// A random `k`-element set in `[0, x]`, window `y` and the report.
#[derive(Debug, Clone)]
pub struct InverseSieveCase {
    pub set: IntegerSet,
    pub ps: PrimeSubset,
    pub report: InverseSieveReport,
}

pub fn inverse_sieve_case<R: Rng>(
    rng: &mut R,
    table: &Arc<PrimeTable>,
) -> Result<InverseSieveCase> {
    let x = rng.gen_range(100..=1_000_000u64);
    let k = rng.gen_range(2..=30usize);
    let set = if rng.gen_bool(0.3) {
        // clustered sets collide modulo many primes
        let start = rng.gen_range(0..=x - 60);
        IntegerSet::new(random_distinct(rng, k, start, start + 60))
    } else {
        IntegerSet::new(random_distinct(rng, k, 0, x))
    };
    let y = rng.gen_range(10.0..=(table.limit() as f64).min(20_000.0));
    let sel = match rng.gen_range(0..3) {
        0 => Selector::All,
        1 => Selector::Residue {
            a: rng.gen_range(1..4),
            m: 4,
        },
        _ => Selector::Min {
            threshold: rng.gen_range(0.0..y),
        },
    };
    let ps = PrimeSubset::new(table.clone(), sel);
    let report = inverse_sieve_lower_bound(&set, &ps, y, x)?;
    Ok(InverseSieveCase { set, ps, report })
}

/// Random completely multiplicative `0 <= f <= g < p` on a few primes.
pub fn comparison_pair<R: Rng>(rng: &mut R) -> (MultiplicativeSpec, MultiplicativeSpec, u64) {
    let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    let mut f = BTreeMap::new();
    let mut g = BTreeMap::new();
    for &p in &primes {
        if rng.gen_bool(0.6) {
            let gp = rng.gen_range(0.0..p as f64 * 0.95);
            let fp = gp * rng.gen_range(0.0..=1.0);
            g.insert(p, gp);
            f.insert(p, fp);
        }
    }
    let bound = rng.gen_range(10..=10_000);
    (
        MultiplicativeSpec::completely(f),
        MultiplicativeSpec::completely(g),
        bound,
    )
}

/// A random set of the given size range with elements in `[0, max]`.
pub fn random_set<R: Rng>(rng: &mut R, min_len: usize, max_len: usize, max: u64) -> IntegerSet {
    let k = rng.gen_range(min_len..=max_len);
    IntegerSet::new(random_distinct(rng, k, 0, max))
}

enum Trial {
    Pass,
    Skip,
    Fail(String),
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<Trial> {
    Ok(if ok { Trial::Pass } else { Trial::Fail(msg()) })
}

fn is_prime_by_division(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn naive_sift(set: &IntegerSet, shifts: &[u64], primes: &[u64]) -> u64 {
    set.iter()
        .filter(|&s| {
            !primes
                .iter()
                .any(|&p| shifts.iter().any(|&a| s.abs_diff(a) % p == 0))
        })
        .count() as u64
}

struct Env {
    table: Arc<PrimeTable>,
}

type TrialFn = fn(&mut ChaCha8Rng, &Env) -> Result<Trial>;

fn soundness_trial(rng: &mut ChaCha8Rng, env: &Env, ev: Evaluator) -> Result<Trial> {
    let case = soundness_case(rng, ev, &env.table)?;
    if !case.is_valid() {
        return Ok(Trial::Skip);
    }
    check(case.sound(), || {
        format!(
            "bound {} below count {} ({:?})",
            case.report.bound, case.true_count, case.report.params
        )
    })
}

fn batches() -> Vec<(&'static str, usize, TrialFn)> {
    vec![
        ("arith.comparison_inequality", 200, |rng, _| {
            let (f, g, n) = comparison_pair(rng);
            let c = check_comparison_inequality(&f, &g, n)?;
            check(c.holds, || format!("lhs {} < rhs {}", c.lhs, c.rhs))
        }),
        ("arith.mobius_divisor_sum", 500, |rng, _| {
            let n = rng.gen_range(1..=10_000u64);
            let s: i64 = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| mobius(d) as i64)
                .sum();
            check(s == (n == 1) as i64, || format!("n = {n}: sum {s}"))
        }),
        ("arith.tau3_convolution", 500, |rng, _| {
            let n = rng.gen_range(1..=10_000u64);
            let tau = |m: u64| (1..=m).filter(|d| m % d == 0).count() as u64;
            let conv: u64 = (1..=n).filter(|d| n % d == 0).map(tau).sum();
            check(tau3(n) == conv, || format!("n = {n}"))
        }),
        ("arith.factorization_roundtrip", 500, |rng, _| {
            let n = rng.gen_range(1..=1u64 << 40);
            let f = factorize(n);
            let prod: u64 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
            let increasing = f.factors.windows(2).all(|w| w[0].0 < w[1].0);
            check(prod == n && increasing, || format!("n = {n}"))
        }),
        (
            "irreducibility.context_rejects_divisible",
            100,
            |rng, env| {
                let x = rng.gen_range(100..=5000);
                let set = random_set(rng, 1, 20, x - 1).translate_up(1);
                let ps = PrimeSubset::new(
                    env.table.clone(),
                    Selector::Interval {
                        lo: rng.gen_range(1.0..200.0),
                        hi: rng.gen_range(200.0..100_000.0),
                    },
                );
                let direct = set
                    .iter()
                    .any(|s| ps.members_up_to(s).iter().any(|p| s % p == 0));
                let rejected = matches!(
                    build_context(&set, &set, &ps, x, ConstantsProfile::Strict),
                    Err(SieveError::Divisibility { .. })
                );
                check(direct == rejected, || {
                    format!("direct {direct}, rejected {rejected}")
                })
            },
        ),
        (
            "irreducibility.epsilon_matches_occupancy",
            100,
            |rng, env| {
                let x = rng.gen_range(100..=10_000);
                let set = structured_set(rng, x);
                let y = rng.gen_range(2.0..200.0);
                let prof =
                    ostmann_epsilon_profile(&set, x, y, &PrimeSubset::all(env.table.clone()))?;
                let primes = env.table.primes_in(0.0, y).to_vec();
                let direct = occupancy_at(set.as_slice(), &primes, OccupancyVariant::AllClasses);
                check(prof.occupancy().entries == direct.entries, || {
                    "occupancy mismatch".into()
                })
            },
        ),
        (
            "irreducibility.partial_fraction_identity",
            100,
            |rng, env| {
                let x = rng.gen_range(100..=10_000);
                let set = structured_set(rng, x);
                let prof = ostmann_epsilon_profile(
                    &set,
                    x,
                    rng.gen_range(2.0..500.0),
                    &PrimeSubset::all(env.table.clone()),
                )?;
                let id = algebraic_identity_check(&prof);
                check(id.max_relative_error <= 1e-9, || {
                    format!("error {}", id.max_relative_error)
                })
            },
        ),
        ("primes.membership", 500, |rng, env| {
            let n = rng.gen_range(0..=env.table.limit());
            check(env.table.is_prime(n) == is_prime_by_division(n), || {
                format!("n = {n}")
            })
        }),
        ("primes.range_split", 200, |rng, env| {
            let ps = PrimeSubset::new(
                env.table.clone(),
                Selector::Residue {
                    a: rng.gen_range(0..6),
                    m: 6,
                },
            );
            let lo = rng.gen_range(0.0..10_000.0);
            let hi = rng.gen_range(lo + 2.0..100_000.0);
            let mid = rng.gen_range(lo + 1.0..hi);
            let whole = subset_sums(&ps, lo, hi)?;
            let parts = subset_sums(&ps, lo, mid)? + subset_sums(&ps, mid, hi)?;
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1e-300);
            check(
                whole.count == parts.count
                    && close(whole.theta, parts.theta)
                    && close(whole.mertens_log, parts.mertens_log)
                    && close(whole.mertens_recip, parts.mertens_recip),
                || format!("({lo}, {mid}, {hi}]"),
            )
        }),
        ("semigroup.enumerate_matches_filter", 100, |rng, env| {
            let x = rng.gen_range(1..=10_000);
            let gens: BTreeSet<u64> = env
                .table
                .primes_up_to(100)
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.4))
                .collect();
            let sel = if rng.gen_bool(0.5) {
                Selector::Only { primes: gens }
            } else {
                Selector::Residue {
                    a: rng.gen_range(1..5),
                    m: 5,
                }
            };
            let ps = PrimeSubset::new(env.table.clone(), sel);
            let q = enumerate_q(&ps, x)?;
            let filtered: Vec<u64> = (1..=x)
                .filter(|&n| factorize(n).primes().all(|p| ps.contains(p)))
                .collect();
            check(q.as_slice() == filtered.as_slice(), || {
                format!("x = {x}, {}", ps.descriptor())
            })
        }),
        ("semigroup.subset_monotone", 100, |rng, env| {
            let x = rng.gen_range(1..=100_000);
            let big = Selector::Residue {
                a: 1,
                m: rng.gen_range(2..7),
            };
            let small = Selector::And {
                parts: vec![
                    big.clone(),
                    Selector::Interval {
                        lo: 0.0,
                        hi: rng.gen_range(2.0..1000.0),
                    },
                ],
            };
            let q_big = enumerate_q(&PrimeSubset::new(env.table.clone(), big), x)?;
            let q_small = enumerate_q(&PrimeSubset::new(env.table.clone(), small), x)?;
            check(q_small.is_subset(&q_big), || format!("x = {x}"))
        }),
        ("sieves.inverse_sieve", 200, |rng, env| {
            let case = inverse_sieve_case(rng, &env.table)?;
            let r = &case.report;
            check(r.holds, || {
                format!(
                    "lhs {} < lower {} (k = {}, y = {})",
                    r.lhs, r.lower, r.k, r.y
                )
            })
        }),
        ("sieves.large_sieve_monotone", 200, |rng, _| {
            let q = rng.gen_range(2..=50);
            let primes: Vec<u64> = (2..=q).filter(|&n| is_prime_by_division(n)).collect();
            let mut omega: BTreeMap<u64, u64> =
                primes.iter().map(|&p| (p, rng.gen_range(0..p))).collect();
            let before = large_sieve_bound(
                &OccupancyProfile::from_entries(omega.clone(), OccupancyVariant::AllClasses)?,
                1000,
                q,
            )?;
            let p = *primes.choose(rng).unwrap();
            let w = omega.get_mut(&p).unwrap();
            if *w + 1 >= p {
                return Ok(Trial::Skip);
            }
            *w += 1;
            let after = large_sieve_bound(
                &OccupancyProfile::from_entries(omega, OccupancyVariant::AllClasses)?,
                1000,
                q,
            )?;
            check(after.denominator_l >= before.denominator_l, || {
                format!("L fell at p = {p}")
            })
        }),
        ("sieves.larger_sieve_full_occupancy", 200, |rng, env| {
            let k = rng.gen_range(2..=20usize);
            let n = rng.gen_range(1000..=100_000u64);
            let lo = rng.gen_range(k as f64..3.0 * k as f64);
            let ps = PrimeSubset::new(
                env.table.clone(),
                Selector::Interval {
                    lo,
                    hi: lo + rng.gen_range(100.0..3000.0),
                },
            );
            let members = ps.members();
            // grow a set whose differences avoid every sieving prime
            let mut elems: Vec<u64> = Vec::new();
            for _ in 0..1000 {
                if elems.len() == k {
                    break;
                }
                let c = rng.gen_range(1..=n);
                if elems
                    .iter()
                    .all(|&e| e != c && members.iter().all(|&p| e.abs_diff(c) % p != 0))
                {
                    elems.push(c);
                }
            }
            if elems.len() < k {
                return Ok(Trial::Skip);
            }
            let set = IntegerSet::new(elems);
            let full = members
                .iter()
                .all(|&p| residue_classes(set.as_slice(), p).len() as u64 == p.min(k as u64));
            if !full {
                return check(false, || "constructed set is not fully occupied".into());
            }
            let entries = members.iter().map(|&p| (p, p.min(k as u64))).collect();
            let r = larger_sieve_bound(
                &OccupancyProfile::from_entries(entries, OccupancyVariant::AllClasses)?,
                &ps,
                n,
            )?;
            if !r.valid {
                return Ok(Trial::Skip);
            }
            check(r.bound >= k as f64 - 1e-9, || {
                format!("bound {} < k = {k}", r.bound)
            })
        }),
        ("sieves.sift_strategies_agree", 200, |rng, env| {
            let x = rng.gen_range(10..=20_000);
            let set = structured_set(rng, x);
            let k = rng.gen_range(1..=5);
            let shifts = ShiftSet::new(random_distinct(rng, k, 0, 100))?;
            let ps = PrimeSubset::new(
                env.table.clone(),
                Selector::Interval {
                    lo: 0.0,
                    hi: rng.gen_range(2.0..30_000.0),
                },
            );
            let primes = sieve_primes_for(&ps, &set, shifts.values());
            let seq = sift_count_with(&set, &shifts, &ps, Exec::Sequential);
            let par = sift_count_with(&set, &shifts, &ps, Exec::Parallel);
            let naive = naive_sift(&set, shifts.values(), &primes);
            check(seq == naive && par == naive, || {
                format!("{seq} / {par} vs {naive}")
            })
        }),
        ("sieves.soundness.large_sieve", 200, |rng, env| {
            soundness_trial(rng, env, Evaluator::LargeSieve)
        }),
        ("sieves.soundness.larger_sieve", 200, |rng, env| {
            soundness_trial(rng, env, Evaluator::LargerSieve)
        }),
        ("sieves.soundness.middlek", 100, |rng, env| {
            soundness_trial(rng, env, Evaluator::MiddleK)
        }),
        ("sieves.soundness.prop_smallkbv", 200, |rng, env| {
            soundness_trial(rng, env, Evaluator::SmallKBv)
        }),
        ("sieves.soundness.prop_smallkscs", 200, |rng, env| {
            soundness_trial(rng, env, Evaluator::SmallKScs)
        }),
        ("sieves.soundness.selberg", 200, |rng, env| {
            soundness_trial(rng, env, Evaluator::Selberg)
        }),
        ("smooth.dickman_integral_identity", 100, |rng, _| {
            let u = rng.gen_range(1.0..=20.0);
            let lhs = u * dickman_rho(u)?.rho;
            let rhs = integrate_rho(u - 1.0, u)?;
            check((lhs - rhs).abs() <= 1e-8, || {
                format!("u = {u}: {lhs} vs {rhs}")
            })
        }),
        ("smooth.psi_class_partition", 100, |rng, _| {
            let x = rng.gen_range(1..=100_000);
            let y = rng.gen_range(2..=100);
            let d = rng.gen_range(1..=30);
            let total = psi(&SmoothQuery::new(x, y))?;
            let mut parts = 0;
            for a in 0..d {
                parts += psi_ap(x, y, a, d)?;
            }
            check(parts == total, || format!("x = {x}, y = {y}, d = {d}"))
        }),
        ("smooth.psi_monotone", 200, |rng, _| {
            let x = rng.gen_range(1..=1_000_000);
            let y = rng.gen_range(2..=200);
            let base = psi(&SmoothQuery::new(x, y))?;
            let more_x = psi(&SmoothQuery::new(x + rng.gen_range(0..=1000), y))?;
            let more_y = psi(&SmoothQuery::new(x, y + rng.gen_range(0..=50)))?;
            check(base <= more_x && base <= more_y, || {
                format!("x = {x}, y = {y}")
            })
        }),
        ("smooth.psi_matches_enumeration", 100, |rng, _| {
            let x = rng.gen_range(1..=100_000);
            let y = rng.gen_range(2..=100);
            let a = psi(&SmoothQuery::new(x, y))?;
            let b = enumerate_smooth(x, y)?.len() as u64;
            check(a == b, || format!("x = {x}, y = {y}: {a} vs {b}"))
        }),
        ("sumset.cardinality_lower_bound", 300, |rng, _| {
            let a = random_set(rng, 1, 40, 500);
            let b = random_set(rng, 1, 40, 500);
            let s = sumset(&a, &b);
            check(s.len() + 1 >= a.len() + b.len(), || format!("{a} + {b}"))
        }),
        ("sumset.commutative_associative", 300, |rng, _| {
            let a = random_set(rng, 1, 20, 300);
            let b = random_set(rng, 1, 20, 300);
            let c = random_set(rng, 1, 20, 300);
            check(
                sumset(&a, &b) == sumset(&b, &a)
                    && sumset(&sumset(&a, &b), &c) == sumset(&a, &sumset(&b, &c)),
                || format!("{a}, {b}, {c}"),
            )
        }),
        ("sumset.decomposition_roundtrip", 100, |rng, _| {
            let a = random_set(rng, 2, 8, 200);
            let b = random_set(rng, 2, 8, 200);
            let s = sumset(&a, &b);
            let r = decompose_binary(&s, 2)?;
            let Some((wa, wb)) = &r.witness else {
                return check(false, || format!("{a} + {b} not found"));
            };
            check(
                r.decomposable && sumset(wa, wb) == s && wa.len() >= 2 && wb.len() >= 2,
                || format!("bad witness for {s}"),
            )
        }),
        ("sumset.ruzsa_inequality", 300, |rng, _| {
            let a = random_set(rng, 1, 64, 10_000);
            let b = random_set(rng, 1, 64, 10_000);
            let c = random_set(rng, 1, 64, 10_000);
            let r = ruzsa_check(&a, &b, &c)?;
            check(r.holds, || format!("{} > {}", r.lhs, r.rhs))
        }),
    ]
}

/// `∫_lo^hi ρ(t) dt` by composite Simpson on each unit piece between
/// integers (ρ is smooth inside them).
fn integrate_rho(lo: f64, hi: f64) -> Result<f64> {
    let mut cuts = vec![lo];
    let mut k = lo.floor() + 1.0;
    while k < hi {
        cuts.push(k);
        k += 1.0;
    }
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let n = 2048;
        let h = (b - a) / n as f64;
        let mut s = dickman_rho(a)?.rho + dickman_rho(b)?.rho;
        for i in 1..n {
            let t = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * dickman_rho(t)?.rho;
        }
        total += s * h / 3.0;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantTally {
    pub name: &'static str,
    pub passed: u64,
    pub failed: u64,
    pub skipped: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub budget_ms: u64,
    pub invariants: Vec<InvariantTally>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.invariants.iter().all(|t| t.failed == 0)
    }

    pub fn total_passed(&self) -> u64 {
        self.invariants.iter().map(|t| t.passed).sum()
    }
}

/// Runs every invariant batch until its trial count is reached or the
/// budget is spent, batches in parallel when enabled. The summary is ordered
/// by invariant name; a zero budget yields an empty summary.
pub fn verify_all(seed: u64, budget: Duration) -> Result<VerifySummary> {
    verify_all_with(seed, budget, Exec::default())
}

pub fn verify_all_with(seed: u64, budget: Duration, exec: Exec) -> Result<VerifySummary> {
    let mut summary = VerifySummary {
        seed,
        budget_ms: budget.as_millis() as u64,
        invariants: Vec::new(),
    };
    if budget.is_zero() {
        return Ok(summary);
    }
    let deadline = Instant::now() + budget;
    let env = Env {
        table: Arc::new(PrimeTable::new(VERIFY_TABLE_LIMIT)?),
    };
    let mut list = batches();
    list.sort_by_key(|b| b.0);
    let tallies = exec.map(&list, |&(name, trials, f)| {
        let mut rng = stream(seed, name);
        let mut t = InvariantTally {
            name,
            passed: 0,
            failed: 0,
            skipped: 0,
            first_failure: None,
        };
        for _ in 0..trials {
            if Instant::now() >= deadline {
                break;
            }
            let outcome = f(&mut rng, &env).unwrap_or_else(|e| Trial::Fail(format!("error: {e}")));
            match outcome {
                Trial::Pass => t.passed += 1,
                Trial::Skip => t.skipped += 1,
                Trial::Fail(msg) => {
                    t.failed += 1;
                    t.first_failure.get_or_insert(msg);
                }
            }
        }
        t
    });
    summary.invariants = tallies;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_budget_is_empty() {
        let s = verify_all(1, Duration::ZERO).unwrap();
        assert!(s.invariants.is_empty() && s.all_passed());
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u32> = (0..4).map(|_| stream(7, "x").gen()).collect();
        let b: Vec<u32> = (0..4).map(|_| stream(7, "x").gen()).collect();
        assert_eq!(a, b);
        assert_ne!(stream(7, "x").gen::<u64>(), stream(7, "y").gen::<u64>());
    }

    #[test]
    fn each_evaluator_yields_valid_cases() {
        let table = Arc::new(PrimeTable::new(VERIFY_TABLE_LIMIT).unwrap());
        for ev in Evaluator::ALL {
            let (cases, attempts) = valid_soundness_cases(ev, 5, 3, &table, 500).unwrap();
            assert_eq!(cases.len(), 5, "{ev:?} after {attempts} draws");
            for c in &cases {
                assert!(c.sound(), "{ev:?}: {:?}", c.report);
                if !c.shifts.is_empty() {
                    assert_eq!(naive_sift(&c.set, &c.shifts, &c.sieve_primes), c.true_count);
                }
            }
        }
    }

    #[test]
    fn default_seed_passes() {
        let s = verify_all(0x5eed, Duration::from_secs(300)).unwrap();
        for t in &s.invariants {
            assert_eq!(t.failed, 0, "{}: {:?}", t.name, t.first_failure);
        }
        assert!(s.total_passed() > 0);
        eprintln!("{}", serde_json::to_string_pretty(&s.invariants).unwrap());
    }
}
