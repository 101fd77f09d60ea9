//! Hypothesis and conclusion checks for the general irreducibility theorem
//! on concrete instances, and the residue-occupancy diagnostics used in the
//! refined treatment of the primes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{
    restricted_multiplicative_sum, squarefree_weighted_sum, MultiplicativeSpec, SquarefreeTerm,
    SumMode,
};
use crate::error::{domain, Result, SieveError};
use crate::exec::Exec;
use crate::primes::{density_ratio_c_with, isqrt, DensityRatio, PrimeSubset};
use crate::sieves::{
    discrepancy_sum, divisibility_witnesses, DiscrepancyReference, OccupancyProfile,
    OccupancyVariant,
};
use crate::sumset::IntegerSet;

/// Numerical constants of the theorem. [`ScaledConstants::PAPER`] holds the
/// published values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledConstants {
    /// Leading factor of `K` (published: 1000).
    pub k_factor: f64,
    /// `P0* = P0 ∩ [K^star_exponent, ∞)` (published: 3).
    pub star_exponent: f64,
    /// Threshold factor of the sieve-controls-size condition (published: 10).
    pub scs_factor: f64,
    /// Threshold factor of the main sum in the equidistribution condition
    /// (published: 10).
    pub bv_factor: f64,
    /// Window mass `θ >= window_factor · k log x` (published: 8).
    pub window_factor: f64,
    /// Windows of the density ratio run down to `x^window_low_exponent`
    /// (published: 1/10).
    pub window_low_exponent: f64,
}

impl ScaledConstants {
    pub const PAPER: ScaledConstants = ScaledConstants {
        k_factor: 1000.0,
        star_exponent: 3.0,
        scs_factor: 10.0,
        bv_factor: 10.0,
        window_factor: 8.0,
        window_low_exponent: 0.1,
    };

    /// A preset small enough for `P0*` to be non-empty at `x` around
    /// `10^4 .. 10^7`.
    pub const DESK: ScaledConstants = ScaledConstants {
        k_factor: 0.01,
        star_exponent: 1.0,
        scs_factor: 1.0,
        bv_factor: 1.0,
        window_factor: 1.0,
        window_low_exponent: 0.25,
    };
}

impl Default for ScaledConstants {
    fn default() -> Self {
        Self::DESK
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantsProfile {
    Strict,
    Scaled(ScaledConstants),
}

impl ConstantsProfile {
    pub fn constants(&self) -> ScaledConstants {
        match self {
            ConstantsProfile::Strict => ScaledConstants::PAPER,
            ConstantsProfile::Scaled(c) => *c,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstantsProfile::Strict => "strict",
            ConstantsProfile::Scaled(_) => "scaled",
        }
    }
}

impl Default for ConstantsProfile {
    fn default() -> Self {
        ConstantsProfile::Strict
    }
}

impl fmt::Display for ConstantsProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantsProfile::Strict => write!(f, "strict"),
            ConstantsProfile::Scaled(c) => write!(
                f,
                "scaled:k_factor={},star_exponent={},scs_factor={},bv_factor={},window_factor={},window_low_exponent={}",
                c.k_factor, c.star_exponent, c.scs_factor, c.bv_factor, c.window_factor, c.window_low_exponent
            ),
        }
    }
}

impl FromStr for ConstantsProfile {
    type Err = SieveError;

    /// `strict`, `scaled`, or `scaled:key=value,...` over the field names of
    /// [`ScaledConstants`]; unspecified keys keep the desk preset.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "strict" {
            return Ok(ConstantsProfile::Strict);
        }
        let Some(rest) = s.strip_prefix("scaled") else {
            return Err(SieveError::Parse(format!(
                "unknown constants profile '{s}'"
            )));
        };
        let mut c = ScaledConstants::DESK;
        let rest = rest.strip_prefix(':').unwrap_or(rest);
        for kv in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| SieveError::Parse(format!("expected key=value, got '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| SieveError::Parse(format!("bad number in '{kv}'")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(SieveError::Parse(format!("'{kv}' must be positive")));
            }
            let slot = match k.trim() {
                "k_factor" => &mut c.k_factor,
                "star_exponent" => &mut c.star_exponent,
                "scs_factor" => &mut c.scs_factor,
                "bv_factor" => &mut c.bv_factor,
                "window_factor" => &mut c.window_factor,
                "window_low_exponent" => &mut c.window_low_exponent,
                other => return Err(SieveError::Parse(format!("unknown constant '{other}'"))),
            };
            *slot = v;
        }
        Ok(ConstantsProfile::Scaled(c))
    }
}

/// The derived quantities of the theorem for one instance.
#[derive(Debug, Clone)]
pub struct GenThmContext {
    pub x: u64,
    pub ps: PrimeSubset,
    pub c: f64,
    pub sigma: f64,
    pub sigma0: f64,
    /// `K = k_factor (σ0 σ c²)^{-1} log² x`
    pub k_cap: f64,
    pub ps_star: PrimeSubset,
    pub profile: ConstantsProfile,
    pub density: Option<DensityRatio>,
    /// `c > x^{-1/10}`
    pub c_hypothesis_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextSummary {
    pub x: u64,
    pub ps: String,
    pub c: f64,
    pub sigma: f64,
    pub sigma0: f64,
    #[serde(rename = "K")]
    pub k_cap: f64,
    pub star_threshold: f64,
    pub ps_star: String,
    pub ps_star_size_up_to_sqrt_x: usize,
    pub ps_star_empty_up_to_sqrt_x: bool,
    pub profile: ConstantsProfile,
    pub c_hypothesis_holds: bool,
}

impl GenThmContext {
    /// A context for evaluating the bound machines directly, with the
    /// densities set to 1 and `P0* = ps ∩ [K^star_exponent, ∞)`.
    pub fn manual(x: u64, ps: PrimeSubset, k_cap: f64, profile: ConstantsProfile) -> Self {
        let ps_star = ps.at_least(k_cap.powf(profile.constants().star_exponent));
        GenThmContext {
            x,
            ps,
            c: 1.0,
            sigma: 1.0,
            sigma0: 1.0,
            k_cap,
            ps_star,
            profile,
            density: None,
            c_hypothesis_holds: true,
        }
    }

    pub fn star_threshold(&self) -> f64 {
        self.k_cap.powf(self.profile.constants().star_exponent)
    }

    pub fn summary(&self) -> ContextSummary {
        let star = self.ps_star.members_up_to(isqrt(self.x));
        ContextSummary {
            x: self.x,
            ps: self.ps.descriptor(),
            c: self.c,
            sigma: self.sigma,
            sigma0: self.sigma0,
            k_cap: self.k_cap,
            star_threshold: self.star_threshold(),
            ps_star: self.ps_star.descriptor(),
            ps_star_size_up_to_sqrt_x: star.len(),
            ps_star_empty_up_to_sqrt_x: star.is_empty(),
            profile: self.profile,
            c_hypothesis_holds: self.c_hypothesis_holds,
        }
    }
}

/// Builds the context, rejecting `S` when some element is divisible by a
/// member of `ps`. A small `c` is reported through `c_hypothesis_holds`,
/// not as an error.
pub fn build_context(
    s: &IntegerSet,
    s0: &IntegerSet,
    ps: &PrimeSubset,
    x: u64,
    profile: ConstantsProfile,
) -> Result<GenThmContext> {
    if s.is_empty() || s0.is_empty() {
        return domain("S and S0 must be non-empty");
    }
    if s.min().unwrap() < 1 || s.max().unwrap() > x {
        return domain(format!("S must lie in [1, {x}]"));
    }
    if !s0.is_subset(s) {
        return domain("S0 must be a subset of S");
    }
    let witnesses = divisibility_witnesses(s, ps, 64);
    if !witnesses.is_empty() {
        return Err(SieveError::Divisibility { witnesses });
    }
    let consts = profile.constants();
    let density = density_ratio_c_with(ps, x, consts.window_low_exponent)?;
    let c = density.c;
    let sigma = s.len() as f64 / x as f64;
    let sigma0 = s0.len() as f64 / s.len() as f64;
    let log_x = (x as f64).ln();
    let k_cap = consts.k_factor / (sigma0 * sigma * c * c) * log_x * log_x;
    let ps_star = ps.at_least(k_cap.powf(consts.star_exponent));
    Ok(GenThmContext {
        x,
        ps: ps.clone(),
        c,
        sigma,
        sigma0,
        k_cap,
        ps_star,
        profile,
        c_hypothesis_holds: density.hypothesis_holds,
        density: Some(density),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScsCheck {
    pub sum_value: f64,
    pub threshold: f64,
    pub holds: bool,
    pub profile: &'static str,
}

/// `Σ_{1 < q <= √x} μ²(q) ∏_{p | q} 2/p` over `P0*` against
/// `scs_factor (σ0 σ)^{-1}`.
pub fn check_scs_condition(ctx: &GenThmContext) -> Result<ScsCheck> {
    let root = isqrt(ctx.x);
    let twos = MultiplicativeSpec::squarefree(
        ctx.ps_star
            .members_up_to(root)
            .into_iter()
            .map(|p| (p, 2.0))
            .collect(),
    );
    let sum_value =
        restricted_multiplicative_sum(&twos, &ctx.ps_star, root, SumMode::SquarefreeOverQ)? - 1.0;
    let threshold = ctx.profile.constants().scs_factor / (ctx.sigma0 * ctx.sigma);
    Ok(ScsCheck {
        sum_value,
        threshold,
        holds: sum_value >= threshold,
        profile: ctx.profile.name(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BvCheck {
    pub q: u64,
    pub main_sum: f64,
    pub main_threshold: f64,
    pub disc_sum: f64,
    pub disc_threshold: f64,
    pub exponent: f64,
    pub moduli: usize,
    pub holds: bool,
    pub profile: &'static str,
}

/// Default work budget (residue-count operations) for the discrepancy sum.
pub const DEFAULT_BV_BUDGET: u64 = 2_000_000_000;

/// `Σ_{1 < q <= Q} μ²(q)/q` over `P0*` against `bv_factor σ0^{-1}`, and the
/// discrepancy sum over `d <= Q²` with weight `τ₃(d)^{1 + log K / log 3}`
/// against `#S σ0 / (2K)`.
pub fn check_bv_condition(ctx: &GenThmContext, s: &IntegerSet, q: u64) -> Result<BvCheck> {
    check_bv_condition_with(ctx, s, q, DEFAULT_BV_BUDGET, Exec::default())
}

pub fn check_bv_condition_with(
    ctx: &GenThmContext,
    s: &IntegerSet,
    q: u64,
    budget: u64,
    exec: Exec,
) -> Result<BvCheck> {
    let q2 = q
        .checked_mul(q)
        .ok_or_else(|| SieveError::Domain("Q² overflows".into()))?;
    let star = ctx.ps_star.members_up_to(q2);
    let recip: Vec<(u64, f64)> = star
        .iter()
        .filter(|&&p| p <= q)
        .map(|&p| (p, 1.0 / p as f64))
        .collect();
    let main_sum = squarefree_weighted_sum(&recip, q) - 1.0;
    let main_threshold = ctx.profile.constants().bv_factor / ctx.sigma0;
    let exponent = 1.0 + ctx.k_cap.max(1.0).ln() / 3f64.ln();
    let mut moduli = Vec::new();
    crate::arith::for_each_squarefree(&star, q2, |d, f| {
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
        budget,
        exec,
    )?;
    let disc_threshold = s.len() as f64 * ctx.sigma0 / (2.0 * ctx.k_cap);
    Ok(BvCheck {
        q,
        main_sum,
        main_threshold,
        disc_sum: disc.total,
        disc_threshold,
        exponent,
        moduli: moduli.len(),
        holds: main_sum >= main_threshold && disc.total <= disc_threshold,
        profile: ctx.profile.name(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConclusionBounds {
    /// `√x log⁴ x / c⁴`
    pub upper_b: f64,
    /// `√x σ0 σ c⁴ / log⁴ x`
    pub lower_a: f64,
    pub implied_constant_unspecified: bool,
    pub profile: &'static str,
}

/// The shapes of the two conclusions with implied constant 1.
pub fn conclusion_bounds(ctx: &GenThmContext) -> ConclusionBounds {
    let xf = ctx.x as f64;
    let l4 = xf.ln().powi(4);
    let c4 = ctx.c.powi(4);
    ConclusionBounds {
        upper_b: xf.sqrt() * l4 / c4,
        lower_a: xf.sqrt() * ctx.sigma0 * ctx.sigma * c4 / l4,
        implied_constant_unspecified: true,
        profile: ctx.profile.name(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonEntry {
    pub p: u64,
    pub nu: u64,
    /// `ν(p) − p/2`
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonMoments {
    /// `Σ_{p <= Y} (log p / p)(ε_p² / p²)`
    pub weighted_square: f64,
    /// The same sum over odd primes only.
    pub weighted_square_odd: f64,
    /// `Σ_{log x <= p <= Y} (1/p)(|ε_p| / p)`
    pub abs_mean: f64,
    /// `Σ_{log x <= p <= Y, |ε_p| >= p/4} 1/p`
    pub large_deviation_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonProfile {
    pub x: u64,
    pub y: f64,
    pub entries: Vec<EpsilonEntry>,
    pub moments: EpsilonMoments,
}

impl EpsilonProfile {
    pub fn occupancy(&self) -> OccupancyProfile {
        OccupancyProfile {
            entries: self.entries.iter().map(|e| (e.p, e.nu)).collect(),
            variant: OccupancyVariant::AllClasses,
        }
    }
}

/// `ε_p = ν_A(p) − p/2` for every prime `p <= Y`, with the moment sums.
pub fn ostmann_epsilon_profile(
    a: &IntegerSet,
    x: u64,
    y: f64,
    ps: &PrimeSubset,
) -> Result<EpsilonProfile> {
    if a.is_empty() {
        return domain("set must be non-empty");
    }
    if a.min().unwrap() < 1 || a.max().unwrap() > x {
        return domain(format!("set must lie in [1, {x}]"));
    }
    if y > ps.limit() as f64 {
        return Err(SieveError::Capacity {
            what: "prime table for Y",
            requested: y.ceil() as u64,
            limit: ps.limit(),
        });
    }
    let primes: Vec<u64> = PrimeSubset::all(ps.table().clone())
        .iter_range(0.0, y)
        .collect();
    let prof = crate::sieves::occupancy_at(a.as_slice(), &primes, OccupancyVariant::AllClasses);
    let log_x = (x as f64).ln();
    let mut moments = EpsilonMoments {
        weighted_square: 0.0,
        weighted_square_odd: 0.0,
        abs_mean: 0.0,
        large_deviation_mass: 0.0,
    };
    let entries: Vec<EpsilonEntry> = prof
        .entries
        .iter()
        .map(|(&p, &nu)| {
            let pf = p as f64;
            let eps = nu as f64 - pf / 2.0;
            let sq = pf.ln() / pf * eps * eps / (pf * pf);
            moments.weighted_square += sq;
            if p > 2 {
                moments.weighted_square_odd += sq;
            }
            if pf >= log_x {
                moments.abs_mean += eps.abs() / (pf * pf);
                if eps.abs() >= pf / 4.0 {
                    moments.large_deviation_mass += 1.0 / pf;
                }
            }
            EpsilonEntry {
                p,
                nu,
                epsilon: eps,
            }
        })
        .collect();
    Ok(EpsilonProfile {
        x,
        y,
        entries,
        moments,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    /// `Σ log p/(p/2 + ε) + Σ log p/(p/2 − ε)`
    pub lhs: f64,
    /// `Σ p log p / ((p/2)² − ε²)`
    pub rhs: f64,
    /// `4 Σ log p/p + 4 Σ (log p/p) ε²/((p/2)² − ε²)`
    pub expanded: f64,
    pub primes_used: usize,
    pub max_relative_error: f64,
}

/// The partial-fraction identity, evaluated over the primes with
/// `|ε_p| < p/2`.
pub fn algebraic_identity_check(profile: &EpsilonProfile) -> IdentityCheck {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut expanded = 0.0;
    let mut used = 0;
    for e in &profile.entries {
        let pf = e.p as f64;
        let half = pf / 2.0;
        if e.epsilon.abs() >= half {
            continue;
        }
        used += 1;
        let lp = pf.ln();
        let den = half * half - e.epsilon * e.epsilon;
        lhs += lp / (half + e.epsilon) + lp / (half - e.epsilon);
        rhs += pf * lp / den;
        expanded += 4.0 * lp / pf + 4.0 * lp / pf * e.epsilon * e.epsilon / den;
    }
    let scale = rhs.abs().max(1.0);
    IdentityCheck {
        lhs,
        rhs,
        expanded,
        primes_used: used,
        max_relative_error: ((lhs - rhs).abs().max((expanded - rhs).abs())) / scale,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetCheck {
    pub lhs: f64,
    pub budget: f64,
    pub within: bool,
}

/// `Σ_{p <= Y} log p / ν_A(p) + Σ_{p <= Y} log p / ν_B(p)` against
/// `2(log x + 1)`, for complementary occupancies `ν_A + ν_B <= p`.
pub fn larger_sieve_budget_check(
    profile_a: &OccupancyProfile,
    profile_b: &OccupancyProfile,
    x: u64,
    y: f64,
) -> Result<BudgetCheck> {
    let mut lhs = 0.0;
    for (&p, &na) in profile_a.entries.iter().filter(|(&p, _)| p as f64 <= y) {
        let nb = profile_b.get(p).unwrap_or(0);
        if na + nb > p {
            return domain(format!("ν_A({p}) + ν_B({p}) = {} exceeds p", na + nb));
        }
        let lp = (p as f64).ln();
        for nu in [na, nb] {
            lhs += if nu == 0 {
                f64::INFINITY
            } else {
                lp / nu as f64
            };
        }
    }
    for (&p, &nb) in profile_b.entries.iter().filter(|(&p, _)| p as f64 <= y) {
        if !profile_a.entries.contains_key(&p) {
            lhs += f64::INFINITY;
            if nb > p {
                return domain(format!("ν_B({p}) exceeds p"));
            }
        }
    }
    let budget = 2.0 * ((x as f64).ln() + 1.0);
    Ok(BudgetCheck {
        lhs,
        budget,
        within: lhs <= budget,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicativeDiagnostic {
    /// `Σ_{n <= √x} f(n)` with `f(p) = ν/(p − ν)` when `|ε_p| <= p/4`
    /// and 0 otherwise, supported on squarefree `n`.
    pub sum: f64,
    /// `2x / sum`, the resulting large-sieve bound.
    pub large_sieve_bound: f64,
    /// `sum / (√x / log log x)`
    pub ratio_to_target: f64,
    /// `Σ_{log x <= p <= √x} (1 − f(p))⁺ / p`
    pub deficit_mass: f64,
}

/// The multiplicative sum feeding the final large-sieve step, computed
/// directly from the epsilon profile (primes above `Y` get `f(p) = 1`,
/// the value for `ε_p = 0`, unless the profile covers them).
pub fn multiplicative_sum_diagnostic(profile: &EpsilonProfile) -> Result<MultiplicativeDiagnostic> {
    let x = profile.x;
    let root = isqrt(x);
    let mut values: BTreeMap<u64, f64> = BTreeMap::new();
    for e in &profile.entries {
        if e.p > root {
            continue;
        }
        let pf = e.p as f64;
        let f = if e.epsilon.abs() <= pf / 4.0 {
            e.nu as f64 / (pf - e.nu as f64)
        } else {
            0.0
        };
        values.insert(e.p, f);
    }
    let weights: Vec<(u64, f64)> = values.iter().map(|(&p, &f)| (p, f)).collect();
    let sum = squarefree_weighted_sum(&weights, root);
    let log_x = (x as f64).ln();
    let deficit_mass = values
        .iter()
        .filter(|(&p, _)| p as f64 >= log_x)
        .map(|(&p, &f)| (1.0 - f).max(0.0) / p as f64)
        .sum();
    let target = (root as f64) / log_x.ln();
    Ok(MultiplicativeDiagnostic {
        sum,
        large_sieve_bound: 2.0 * x as f64 / sum,
        ratio_to_target: sum / target,
        deficit_mass,
    })
}
