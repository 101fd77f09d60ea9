//! Upper-bound sieves (larger sieve, large sieve, Selberg), the inverse-sieve
//! lower bound on occupied residue classes, and the bound machines built on
//! them. Every evaluator returns a [`SieveBoundReport`] that carries the
//! exact sifted count, so a bound can always be compared against reality.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::arith::{for_each_squarefree, squarefree_weighted_sum, SquarefreeTerm};
use crate::error::{domain, Result, SieveError};
use crate::exec::Exec;
use crate::irreducibility::{ConstantsProfile, GenThmContext};
use crate::primes::{isqrt, window_sums, PrimeSubset};
use crate::sumset::IntegerSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupancyVariant {
    AllClasses,
    NonzeroOnly,
}

/// Number of residue classes `ν(p)` occupied modulo each prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OccupancyProfile {
    pub entries: BTreeMap<u64, u64>,
    pub variant: OccupancyVariant,
}

impl OccupancyProfile {
    /// Validates `ν(p) <= p` (`<= p - 1` for the non-zero variant).
    pub fn from_entries(entries: BTreeMap<u64, u64>, variant: OccupancyVariant) -> Result<Self> {
        for (&p, &v) in &entries {
            let cap = match variant {
                OccupancyVariant::AllClasses => p,
                OccupancyVariant::NonzeroOnly => p.saturating_sub(1),
            };
            if v > cap {
                return domain(format!("occupancy {v} exceeds {cap} at p = {p}"));
            }
        }
        Ok(OccupancyProfile { entries, variant })
    }

    pub fn get(&self, p: u64) -> Option<u64> {
        self.entries.get(&p).copied()
    }
}

/// Real sieve weights `ω(p)` for the Selberg evaluator.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SieveWeights(pub BTreeMap<u64, f64>);

impl From<&OccupancyProfile> for SieveWeights {
    fn from(p: &OccupancyProfile) -> Self {
        SieveWeights(p.entries.iter().map(|(&p, &v)| (p, v as f64)).collect())
    }
}

/// Distinct shifts `a_1 < … < a_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ShiftSet(Vec<u64>);

impl ShiftSet {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        let mut v = values;
        v.sort_unstable();
        if v.is_empty() {
            return domain("shift set must be non-empty");
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return domain("shifts must be distinct");
        }
        Ok(ShiftSet(v))
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.0.last().unwrap()
    }

    /// The `n` smallest shifts.
    pub fn first(&self, n: usize) -> ShiftSet {
        ShiftSet(self.0[..n.clamp(1, self.0.len())].to_vec())
    }
}

/// Distinct residues of `values` modulo `p`, sorted.
pub fn residue_classes(values: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = values.iter().map(|v| v % p).collect();
    r.sort_unstable();
    r.dedup();
    r
}

fn occupancy_count(values: &[u64], p: u64, variant: OccupancyVariant) -> u64 {
    let r = residue_classes(values, p);
    let zero = variant == OccupancyVariant::NonzeroOnly && r.first() == Some(&0);
    r.len() as u64 - zero as u64
}

/// `ν(p)` for the given primes.
pub fn occupancy_at(a: &[u64], primes: &[u64], variant: OccupancyVariant) -> OccupancyProfile {
    let counts = Exec::default().map(primes, |&p| occupancy_count(a, p, variant));
    OccupancyProfile {
        entries: primes.iter().copied().zip(counts).collect(),
        variant,
    }
}

/// `ν(p)` for every member of `ps`.
pub fn occupancy(
    a: &IntegerSet,
    ps: &PrimeSubset,
    variant: OccupancyVariant,
) -> Result<OccupancyProfile> {
    if a.is_empty() {
        return domain("occupancy needs a non-empty set");
    }
    Ok(occupancy_at(a.as_slice(), &ps.members(), variant))
}

/// One named hypothesis of a bound, evaluated on the instance.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub holds: bool,
}

impl HypothesisCheck {
    fn at_least(name: &'static str, value: f64, threshold: f64) -> Self {
        HypothesisCheck {
            name,
            value,
            threshold,
            holds: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveBoundReport {
    pub lemma: &'static str,
    /// Upper bound on the sifted count; `NaN` (JSON `null`) when no bound
    /// could be formed.
    pub bound: f64,
    #[serde(rename = "denominator_L")]
    pub denominator_l: f64,
    pub params: BoundParams,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub hypotheses: Vec<HypothesisCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub main_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remainder: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sifted_count: Option<u64>,
}

impl SieveBoundReport {
    fn new(lemma: &'static str, params: BoundParams) -> Self {
        SieveBoundReport {
            lemma,
            bound: f64::NAN,
            denominator_l: f64::NAN,
            params,
            valid: true,
            reason: None,
            hypotheses: Vec::new(),
            main_term: None,
            remainder: None,
            sifted_count: None,
        }
    }

    fn invalid(mut self, reason: impl Into<String>) -> Self {
        self.valid = false;
        self.reason = Some(reason.into());
        self
    }

    /// Marks the report invalid when a hypothesis failed.
    fn settle(mut self) -> Self {
        if let Some(h) = self.hypotheses.iter().find(|h| !h.holds) {
            let name = h.name;
            self.valid = false;
            self.reason
                .get_or_insert_with(|| format!("hypothesis '{name}' failed"));
        }
        self
    }

    /// `bound >= sifted_count` (vacuous when either is missing).
    pub fn bound_holds(&self) -> bool {
        match self.sifted_count {
            Some(c) => !self.valid || self.bound >= c as f64,
            None => true,
        }
    }
}

/// Gallagher's larger sieve:
/// `(−log N + Σ log p) / (−log N + Σ log p / ν(p))` over `p ∈ ps`.
pub fn larger_sieve_bound(
    profile: &OccupancyProfile,
    ps: &PrimeSubset,
    n: u64,
) -> Result<SieveBoundReport> {
    if n == 0 {
        return domain("N must be positive");
    }
    let mut report = SieveBoundReport::new(
        "larger_sieve",
        BoundParams {
            n: Some(n),
            ps: Some(ps.descriptor()),
            ..BoundParams::default()
        },
    );
    let log_n = (n as f64).ln();
    let mut num = -log_n;
    let mut den = -log_n;
    for p in ps.members() {
        let Some(nu) = profile.get(p) else {
            return domain(format!("profile has no entry for p = {p}"));
        };
        if nu > p {
            return domain(format!("occupancy {nu} exceeds p = {p}"));
        }
        if nu == 0 {
            report.bound = 0.0;
            return Ok(report.invalid(format!("ν({p}) = 0, so the set is empty")));
        }
        let lp = (p as f64).ln();
        num += lp;
        den += lp / nu as f64;
    }
    report.denominator_l = den;
    if den <= 0.0 {
        return Ok(report.invalid("denominator is not positive"));
    }
    report.bound = num / den;
    Ok(report)
}

fn large_sieve_l(weights: &[(u64, f64)], q: u64) -> f64 {
    squarefree_weighted_sum(weights, q)
}

/// Montgomery's large sieve: `(x + Q²) / L`,
/// `L = Σ_{q <= Q} μ²(q) ∏_{p | q} ω(p) / (p − ω(p))`.
pub fn large_sieve_bound(profile: &OccupancyProfile, x: u64, q: u64) -> Result<SieveBoundReport> {
    let mut weights = Vec::new();
    for (&p, &w) in profile.entries.range(..=q) {
        if w >= p {
            return domain(format!("ω({p}) = {w} must be below p"));
        }
        weights.push((p, w as f64 / (p - w) as f64));
    }
    let l = large_sieve_l(&weights, q);
    let mut report = SieveBoundReport::new(
        "large_sieve",
        BoundParams {
            x: Some(x),
            q: Some(q),
            ..BoundParams::default()
        },
    );
    report.denominator_l = l;
    report.bound = (x as f64 + (q as f64) * (q as f64)) / l;
    Ok(report)
}

/// Membership of every element of `c` in the classes of `shifts` mod `p`,
/// as a bitset over indices of `c`.
fn hit_bits(c: &[u64], classes: &[u64], p: u64) -> Vec<u64> {
    let mut bits = vec![0u64; c.len().div_ceil(64)];
    for (i, &v) in c.iter().enumerate() {
        if classes.binary_search(&(v % p)).is_ok() {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

/// Selberg's upper-bound sieve in the packaged form
/// `#C / L + Σ_{d <= Q²} μ²(d) τ₃(d) |#{c : d | ∏(c − r_i)} − #C ∏ ω(p)/p|`.
pub fn selberg_bound(
    c_set: &IntegerSet,
    ps: &PrimeSubset,
    shifts: &ShiftSet,
    omega: &SieveWeights,
    q: u64,
) -> Result<SieveBoundReport> {
    selberg_bound_with(c_set, ps, shifts, omega, q, Exec::default())
}

pub fn selberg_bound_with(
    c_set: &IntegerSet,
    ps: &PrimeSubset,
    shifts: &ShiftSet,
    omega: &SieveWeights,
    q: u64,
    exec: Exec,
) -> Result<SieveBoundReport> {
    let q2 = q
        .checked_mul(q)
        .ok_or_else(|| SieveError::Domain("Q² overflows".into()))?;
    let primes = ps.members_up_to(q2);
    let mut w = BTreeMap::new();
    for &p in &primes {
        let Some(&om) = omega.0.get(&p) else {
            return domain(format!("ω has no entry for p = {p}"));
        };
        if !(0.0..(p as f64)).contains(&om) {
            return domain(format!("ω({p}) = {om} must lie in [0, p)"));
        }
        w.insert(p, om);
    }
    let size = c_set.len() as f64;
    let weights: Vec<(u64, f64)> = w
        .range(..=q)
        .map(|(&p, &om)| (p, om / (p as f64 - om)))
        .collect();
    let l = large_sieve_l(&weights, q);
    let main = size / l;

    let elems = c_set.as_slice();
    let hits: BTreeMap<u64, Vec<u64>> = primes
        .iter()
        .map(|&p| (p, hit_bits(elems, &residue_classes(shifts.values(), p), p)))
        .collect();
    let mut moduli = Vec::new();
    for_each_squarefree(&primes, q2, |d, f| moduli.push((d, f.to_vec())));
    let terms = exec.map(&moduli, |(_, f)| {
        let count = if f.is_empty() {
            elems.len() as u64
        } else {
            let mut acc = hits[&f[0]].clone();
            for p in &f[1..] {
                for (a, b) in acc.iter_mut().zip(&hits[p]) {
                    *a &= b;
                }
            }
            acc.iter().map(|w| w.count_ones() as u64).sum()
        };
        let expected = f.iter().fold(size, |acc, p| acc * w[p] / *p as f64);
        3f64.powi(f.len() as i32) * (count as f64 - expected).abs()
    });
    let remainder: f64 = terms.iter().sum();

    let mut report = SieveBoundReport::new(
        "selberg",
        BoundParams {
            q: Some(q),
            k: Some(shifts.len()),
            ps: Some(ps.descriptor()),
            ..BoundParams::default()
        },
    );
    report.denominator_l = l;
    report.main_term = Some(main);
    report.remainder = Some(remainder);
    report.bound = main + remainder;
    report.sifted_count = Some(sift_count(c_set, shifts, ps));
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseSieveReport {
    pub k: usize,
    pub y: f64,
    pub x: u64,
    /// Exact `Σ ν(p) / p` over the window.
    pub lhs: f64,
    /// `k Σ 1/p − (k² − k) log x / ((y/2) log(y/2))`
    pub rhs: f64,
    /// The bound in force: `rhs`, or `(k/2) Σ 1/p` when strengthened.
    pub lower: f64,
    pub strengthened: bool,
    pub window_theta: f64,
    pub window_recip: f64,
    pub holds: bool,
}

/// Lower bound for `Σ_{y/2 < p <= y, p ∈ ps} ν_A(p) / p`.
pub fn inverse_sieve_lower_bound(
    a: &IntegerSet,
    ps: &PrimeSubset,
    y: f64,
    x: u64,
) -> Result<InverseSieveReport> {
    inverse_sieve_with_factor(a, ps, y, x, 8.0)
}

/// As [`inverse_sieve_lower_bound`] with the window threshold
/// `factor · k log x` for the strengthened form.
pub fn inverse_sieve_with_factor(
    a: &IntegerSet,
    ps: &PrimeSubset,
    y: f64,
    x: u64,
    factor: f64,
) -> Result<InverseSieveReport> {
    if !(y >= 10.0) {
        return domain(format!("inverse sieve needs y >= 10, got {y}"));
    }
    let k = a.len();
    if k < 2 {
        return domain("inverse sieve needs at least two elements");
    }
    if a.max().unwrap() > x {
        return domain("set must lie in [0, x]");
    }
    let sums = window_sums(ps, y)?;
    let lhs: f64 = ps
        .iter_range(y / 2.0, y)
        .map(|p| occupancy_count(a.as_slice(), p, OccupancyVariant::AllClasses) as f64 / p as f64)
        .sum();
    let kf = k as f64;
    let log_x = (x as f64).ln();
    let half = y / 2.0;
    let rhs = kf * sums.mertens_recip - (kf * kf - kf) * log_x / (half * half.ln());
    let strengthened = sums.theta >= factor * kf * log_x;
    let lower = if strengthened {
        kf / 2.0 * sums.mertens_recip
    } else {
        rhs
    };
    Ok(InverseSieveReport {
        k,
        y,
        x,
        lhs,
        rhs,
        lower,
        strengthened,
        window_theta: sums.theta,
        window_recip: sums.mertens_recip,
        holds: lhs >= lower - 1e-12 * lower.abs().max(1.0),
    })
}

fn check_in_range(s: &IntegerSet, x: u64) -> Result<()> {
    match (s.min(), s.max()) {
        (Some(lo), Some(hi)) if lo >= 1 && hi <= x => Ok(()),
        (None, _) => Ok(()),
        _ => domain(format!("set must lie in [1, {x}]")),
    }
}

fn check_shift_count(k: usize, ctx: &GenThmContext) -> Result<()> {
    if k < 2 || k as f64 > ctx.k_cap {
        return domain(format!("need 2 <= k <= K = {:.3}, got k = {k}", ctx.k_cap));
    }
    Ok(())
}

fn base_params(ctx: &GenThmContext, k: usize) -> BoundParams {
    BoundParams {
        x: Some(ctx.x),
        k: Some(k),
        ps: Some(ctx.ps_star.descriptor()),
        profile: Some(ctx.profile.name()),
        ..BoundParams::default()
    }
}

/// Large-sieve bound for the small-`k` range driven by the size of
/// `Σ μ²(q) ∏ 2/p`: `4x / ((k/2) Σ_{1 < q <= √x} μ²(q) ∏_{p | q} 2/p)`.
///
/// Validity is checked on the instance: the large-sieve denominator built
/// from the actual occupancies must be at least `k/4` times the sum above,
/// which is exactly what makes the quoted bound follow from the large sieve.
pub fn prop_smallkscs_bound(
    s: &IntegerSet,
    shifts: &ShiftSet,
    ctx: &GenThmContext,
) -> Result<SieveBoundReport> {
    let k = shifts.len();
    check_shift_count(k, ctx)?;
    check_in_range(s, ctx.x)?;
    let root = isqrt(ctx.x);
    let star = ctx.ps_star.members_up_to(root);
    let mut report = SieveBoundReport::new("prop_smallkscs", base_params(ctx, k));
    report.sifted_count = Some(sift_count(s, shifts, &ctx.ps_star));
    if star.is_empty() {
        return Ok(report.invalid("P0* has no prime up to sqrt(x)"));
    }
    let two_over_p: Vec<(u64, f64)> = star.iter().map(|&p| (p, 2.0 / p as f64)).collect();
    let sum = squarefree_weighted_sum(&two_over_p, root) - 1.0;
    if sum <= 0.0 {
        return Ok(report.invalid("denominator sum is zero"));
    }
    let kf = k as f64;
    report.denominator_l = kf / 2.0 * sum;
    report.bound = 4.0 * ctx.x as f64 / report.denominator_l;

    let mut actual = Vec::with_capacity(star.len());
    let mut full = false;
    for &p in &star {
        let nu = occupancy_count(shifts.values(), p, OccupancyVariant::AllClasses);
        if nu == p {
            full = true;
            break;
        }
        actual.push((p, nu as f64 / (p - nu) as f64));
    }
    let l_actual = if full {
        f64::INFINITY
    } else {
        large_sieve_l(&actual, root)
    };
    report.hypotheses.push(HypothesisCheck::at_least(
        "large_sieve_denominator_dominates",
        l_actual,
        kf * sum / 4.0,
    ));
    Ok(report.settle())
}

/// Selberg-sieve bound for the small-`k` range driven by equidistribution:
/// `2#S / ((k−1) Σ_{1 < q <= Q} μ²(q)/q)` plus the discrepancy sum over
/// `d <= Q²` weighted by `τ₃(d)^{1 + log k / log 3}`.
pub fn prop_smallkbv_bound(
    s: &IntegerSet,
    shifts: &ShiftSet,
    ctx: &GenThmContext,
    q: u64,
) -> Result<SieveBoundReport> {
    prop_smallkbv_bound_with(s, shifts, ctx, q, Exec::default())
}

pub fn prop_smallkbv_bound_with(
    s: &IntegerSet,
    shifts: &ShiftSet,
    ctx: &GenThmContext,
    q: u64,
    exec: Exec,
) -> Result<SieveBoundReport> {
    let k = shifts.len();
    check_shift_count(k, ctx)?;
    check_in_range(s, ctx.x)?;
    let q2 = q
        .checked_mul(q)
        .ok_or_else(|| SieveError::Domain("Q² overflows".into()))?;
    let star = ctx.ps_star.members_up_to(q2);
    let witnesses = divisibility_witnesses(s, &ctx.ps_star, 16);
    if !witnesses.is_empty() {
        return Err(SieveError::Divisibility { witnesses });
    }
    let mut params = base_params(ctx, k);
    params.q = Some(q);
    let mut report = SieveBoundReport::new("prop_smallkbv", params);
    report.sifted_count = Some(sift_count(s, shifts, &ctx.ps_star));
    let recip: Vec<(u64, f64)> = star
        .iter()
        .filter(|&&p| p <= q)
        .map(|&p| (p, 1.0 / p as f64))
        .collect();
    let sum = squarefree_weighted_sum(&recip, q) - 1.0;
    if sum <= 0.0 {
        return Ok(report.invalid("P0* has no prime up to Q"));
    }
    let kf = k as f64;
    let size = s.len() as f64;
    let main = 2.0 * size / ((kf - 1.0) * sum);
    let exponent = 1.0 + kf.ln() / 3f64.ln();
    let mut moduli = Vec::new();
    for_each_squarefree(&star, q2, |d, f| {
        moduli.push(SquarefreeTerm {
            q: d,
            primes: f.to_vec(),
        })
    });
    let disc = discrepancy_sum(
        s.as_slice(),
        &moduli,
        exponent,
        DiscrepancyReference::Total,
        u64::MAX,
        exec,
    )?;
    report.denominator_l = (kf - 1.0) * sum;
    report.main_term = Some(main);
    report.remainder = Some(disc.total);
    report.bound = main + disc.total;

    // Selberg with ω(p) = p ν(p) / (p − 1), ν counting non-zero classes
    let mut actual = Vec::new();
    let mut full = false;
    for &p in star.iter().filter(|&&p| p <= q) {
        let nu = occupancy_count(shifts.values(), p, OccupancyVariant::NonzeroOnly);
        if nu + 1 >= p {
            full = true;
            break;
        }
        actual.push((p, nu as f64 / (p - 1 - nu) as f64));
    }
    let l_actual = if full {
        f64::INFINITY
    } else {
        large_sieve_l(&actual, q)
    };
    report.hypotheses.push(HypothesisCheck::at_least(
        "selberg_denominator_dominates",
        l_actual,
        (kf - 1.0) * sum / 2.0,
    ));
    Ok(report.settle())
}

/// `(s, p)` pairs with `p | s`, `p ∈ ps`, at most `limit` of them.
pub fn divisibility_witnesses(s: &IntegerSet, ps: &PrimeSubset, limit: usize) -> Vec<(u64, u64)> {
    let Some(top) = s.max() else {
        return Vec::new();
    };
    let primes = ps.members_up_to(top);
    let found = Exec::default().map(s.as_slice(), |&v| {
        primes.iter().find(|&&p| v % p == 0).map(|&p| (v, p))
    });
    found.into_iter().flatten().take(limit).collect()
}

/// Two-window large-sieve bound for larger `k`: the single-`k` form when
/// both windows carry `θ >= w k log x`, otherwise the reduced form with
/// `k_0` shifts and the factor `M` (with `w` the profile's window factor).
pub fn middlek_bound(
    s: &IntegerSet,
    shifts: &ShiftSet,
    ps: &PrimeSubset,
    x: u64,
    y1: f64,
    y2: f64,
    profile: &ConstantsProfile,
) -> Result<SieveBoundReport> {
    let sqrt_x = (x as f64).sqrt();
    if !(y1 < y2 / 2.0 && y2 / 2.0 < y2 && y2 < sqrt_x / y1) {
        return domain(format!(
            "need y1 < y2/2 < y2 < sqrt(x)/y1, got y1 = {y1}, y2 = {y2}, x = {x}"
        ));
    }
    check_in_range(s, x)?;
    if shifts.max() > x {
        return domain("shifts must lie in [0, x]");
    }
    let k = shifts.len();
    let wf = profile.constants().window_factor;
    let all = PrimeSubset::all(ps.table().clone());
    let (w1, w1_all) = (window_sums(ps, y1)?, window_sums(&all, y1)?);
    let (w2, w2_all) = (window_sums(ps, y2)?, window_sums(&all, y2)?);
    let log_x = (x as f64).ln();
    let kf = k as f64;
    let mut report = SieveBoundReport::new(
        "middlek",
        BoundParams {
            x: Some(x),
            k: Some(k),
            y1: Some(y1),
            y2: Some(y2),
            ps: Some(ps.descriptor()),
            profile: Some(profile.name()),
            ..BoundParams::default()
        },
    );
    report.sifted_count = Some(sift_count(s, shifts, ps));

    let (k_used, m, branch) = if w1.theta >= wf * kf * log_x && w2.theta >= wf * kf * log_x {
        (k, 1.0 / (kf * kf), "middlek")
    } else if w1.theta >= wf * log_x && w2.theta >= wf * log_x {
        let k0 = k
            .min((w1.theta / (wf * log_x)).floor() as usize)
            .min((w2.theta / (wf * log_x)).floor() as usize);
        let c = 4.0 * wf * wf * log_x * log_x;
        let m = (1.0 / (kf * kf))
            .max(c / (w1.theta * w1.theta))
            .max(c / (w2.theta * w2.theta));
        (k0, m, "middlek2")
    } else {
        return Ok(report.invalid(format!("a window carries less than {wf} log x of P0 mass")));
    };
    report.params.k_used = Some(k_used);
    report.params.m = Some(m);
    report.params.branch = Some(branch);
    let ratio = (w1_all.theta / w1.theta) * (w2_all.theta / w2.theta);
    report.bound = 128.0 * x as f64 * m * y1.ln() * y2.ln() * ratio;
    report.denominator_l = 1.0 / (m * ratio);

    let used = shifts.first(k_used);
    report
        .hypotheses
        .push(HypothesisCheck::at_least("y1_at_least_10", y1, 10.0));
    for (name, w_all) in [("window1_log_mass", w1_all), ("window2_log_mass", w2_all)] {
        report
            .hypotheses
            .push(HypothesisCheck::at_least(name, w_all.mertens_log, 0.5));
    }
    for (name, y, w) in [
        ("window1_inverse_sieve", y1, w1),
        ("window2_inverse_sieve", y2, w2),
    ] {
        let occupied: f64 = ps
            .iter_range(y / 2.0, y)
            .map(|p| {
                occupancy_count(used.values(), p, OccupancyVariant::AllClasses) as f64 / p as f64
            })
            .sum();
        report.hypotheses.push(HypothesisCheck::at_least(
            name,
            occupied,
            k_used as f64 / 2.0 * w.mertens_recip,
        ));
    }
    Ok(report.settle())
}

/// Exact `#{s ∈ S : s ≢ a_i (mod p) for all i and all p ∈ ps}`.
pub fn sift_count(s: &IntegerSet, shifts: &ShiftSet, ps: &PrimeSubset) -> u64 {
    sift_count_with(s, shifts, ps, Exec::default())
}

const SEGMENT: u64 = 1 << 18;
const MARKING_SPAN_LIMIT: u64 = 1 << 32;

pub fn sift_count_with(s: &IntegerSet, shifts: &ShiftSet, ps: &PrimeSubset, exec: Exec) -> u64 {
    let (Some(lo), Some(hi)) = (s.min(), s.max()) else {
        return 0;
    };
    let top = hi.max(shifts.max());
    let classes: Vec<(u64, Vec<u64>)> = ps
        .members_up_to(top)
        .into_iter()
        .map(|p| (p, residue_classes(shifts.values(), p)))
        .collect();
    // a member above every value only removes s equal to a shift
    let large_member = top < ps.limit()
        && ps
            .iter_range(top as f64, ps.limit() as f64)
            .next()
            .is_some();
    let elems = s.as_slice();

    let per_element = elems.len() as f64 * classes.len() as f64;
    let span = hi - lo + 1;
    let marking: f64 = classes
        .iter()
        .map(|(p, r)| r.len() as f64 * (span as f64 / *p as f64 + 1.0))
        .sum::<f64>()
        + span as f64 / 64.0;
    let survivors = if span <= MARKING_SPAN_LIMIT && marking < per_element {
        mark_survivors(elems, lo, hi, &classes, exec)
    } else {
        exec.count(elems, |&v| {
            classes
                .iter()
                .all(|(p, r)| r.binary_search(&(v % p)).is_err())
        })
    };
    if large_member {
        let removed = shifts
            .values()
            .iter()
            .filter(|&&a| {
                s.contains(a)
                    && classes
                        .iter()
                        .all(|(p, r)| r.binary_search(&(a % p)).is_err())
            })
            .count() as u64;
        survivors - removed
    } else {
        survivors
    }
}

/// Segment-by-segment marking of removed classes, primes outermost.
fn mark_survivors(elems: &[u64], lo: u64, hi: u64, classes: &[(u64, Vec<u64>)], exec: Exec) -> u64 {
    let segments = (hi - lo) / SEGMENT + 1;
    let counts = exec.map_range(segments as usize, |i| {
        let start = lo + i as u64 * SEGMENT;
        let end = (start + SEGMENT - 1).min(hi);
        let from = elems.partition_point(|&v| v < start);
        let to = elems.partition_point(|&v| v <= end);
        if from == to {
            return 0;
        }
        let len = (end - start + 1) as usize;
        let mut alive = vec![0u64; len.div_ceil(64)];
        for &v in &elems[from..to] {
            let o = (v - start) as usize;
            alive[o / 64] |= 1 << (o % 64);
        }
        for (p, r) in classes {
            for &c in r {
                // first value >= start congruent to c mod p
                let mut v = start + (c + p - start % p) % p;
                while v <= end {
                    let o = (v - start) as usize;
                    alive[o / 64] &= !(1 << (o % 64));
                    v += p;
                }
            }
        }
        alive.iter().map(|w| w.count_ones() as u64).sum::<u64>()
    });
    counts.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyReference {
    /// Compare each class against `#S / φ(d)`.
    Total,
    /// Compare against `#{s : (s, d) = 1} / φ(d)`.
    CoprimeCount,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyTerm {
    pub d: u64,
    pub weight: f64,
    pub max_deviation: f64,
    pub worst_residue: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub total: f64,
    pub terms: Vec<DiscrepancyTerm>,
}

/// `Σ_d μ²(d) (3^{ω(d)})^{exponent} max_{(a,d)=1} |#{s ≡ a (d)} − ref/φ(d)|`
/// over the given squarefree moduli. The work estimate `Σ (d + #S)` is
/// checked against `budget` before each modulus; running out yields a
/// [`SieveError::Budget`] with the sum over the moduli already finished.
pub fn discrepancy_sum(
    elements: &[u64],
    moduli: &[SquarefreeTerm],
    exponent: f64,
    reference: DiscrepancyReference,
    budget: u64,
    exec: Exec,
) -> Result<DiscrepancyReport> {
    let mut sorted: Vec<&SquarefreeTerm> = moduli.iter().collect();
    sorted.sort_by_key(|t| t.q);
    let n = elements.len() as u64;
    let mut spent = 0u64;
    let mut affordable = sorted.len();
    for (i, t) in sorted.iter().enumerate() {
        spent = spent.saturating_add(t.q + n);
        if spent > budget {
            affordable = i;
            break;
        }
    }
    let terms = exec.map(&sorted[..affordable], |t| {
        discrepancy_term(elements, t, exponent, reference)
    });
    let total: f64 = terms.iter().map(|t| t.weight * t.max_deviation).sum();
    if affordable < sorted.len() {
        return Err(SieveError::Budget {
            budget,
            completed_through: terms.last().map_or(0, |t| t.d),
            partial_sum: total,
        });
    }
    Ok(DiscrepancyReport { total, terms })
}

fn discrepancy_term(
    elements: &[u64],
    t: &SquarefreeTerm,
    exponent: f64,
    reference: DiscrepancyReference,
) -> DiscrepancyTerm {
    let d = t.q;
    let mut counts = vec![0u32; d as usize];
    for &v in elements {
        counts[(v % d) as usize] += 1;
    }
    let mut reduced = vec![true; d as usize];
    for &p in &t.primes {
        for j in (0..d).step_by(p as usize) {
            reduced[j as usize] = false;
        }
    }
    if d == 1 {
        reduced[0] = true;
    }
    let phi: u64 = t.primes.iter().map(|p| p - 1).product();
    let base = match reference {
        DiscrepancyReference::Total => elements.len() as u64,
        DiscrepancyReference::CoprimeCount => (0..d as usize)
            .filter(|&a| reduced[a])
            .map(|a| counts[a] as u64)
            .sum(),
    } as f64
        / phi as f64;
    let mut worst = (0.0, 0);
    for a in 0..d as usize {
        if reduced[a] {
            let dev = (counts[a] as f64 - base).abs();
            if dev > worst.0 {
                worst = (dev, a as u64);
            }
        }
    }
    let weight = (t.primes.len() as f64 * 3f64.ln() * exponent).exp();
    DiscrepancyTerm {
        d,
        weight,
        max_deviation: worst.0,
        worst_residue: worst.1,
    }
}
