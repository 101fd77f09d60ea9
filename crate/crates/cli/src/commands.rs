//! One function per subcommand. Each takes its parsed arguments and the
//! shared run context and returns an [`Outcome`].

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, ensure};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sievekit::irreducibility::{
    algebraic_identity_check, build_context, check_bv_condition_with, check_scs_condition,
    conclusion_bounds, larger_sieve_budget_check, multiplicative_sum_diagnostic,
    ostmann_epsilon_profile, ConstantsProfile, GenThmContext, DEFAULT_BV_BUDGET,
};
use sievekit::primes::{isqrt, subset_sums, MAX_TABLE_LIMIT};
use sievekit::semigroup::{
    count_q, enumerate_q, semigroup_stats, verify_hypotheses_wirsing, Verdict,
};
use sievekit::sieves::{
    inverse_sieve_with_factor, large_sieve_bound, larger_sieve_bound, middlek_bound, occupancy,
    occupancy_at, prop_smallkbv_bound_with, prop_smallkscs_bound, selberg_bound_with,
    sift_count_with, OccupancyProfile, OccupancyVariant, ShiftSet, SieveWeights,
};
use sievekit::smooth::{
    bv_discrepancy_sum_with, dickman_rho, dickman_richardson_error, psi, psi_ap, psi_coprime,
    smooth_tuple_count_with, SmoothQuery, DEFAULT_DISCREPANCY_BUDGET,
};
use sievekit::sumset::{
    decompose_binary_relative_with, decompose_binary_with, ruzsa_check, sumset, SearchOptions,
};
use sievekit::verify::verify_all_with;
use sievekit::{Exec, IntegerSet, PrimeSubset, PrimeTable, Selector};

use crate::input::parse_set;
use crate::report::{cell, fcell, set_cell, Outcome, Status, Table};

/// Environment variable capping the prime table size.
pub const TABLE_CAP_VAR: &str = "SIEVEKIT_MAX_TABLE";

pub struct Ctx {
    pub profile: ConstantsProfile,
    pub seed: u64,
    pub exec: Exec,
}

fn table(limit: u64) -> anyhow::Result<Arc<PrimeTable>> {
    let cap = match std::env::var(TABLE_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{TABLE_CAP_VAR} must be an integer, got '{v}'"))?,
        Err(_) => MAX_TABLE_LIMIT,
    };
    Ok(Arc::new(PrimeTable::with_cap(limit.max(100), cap)?))
}

fn subset(selector: &str, limit: u64) -> anyhow::Result<PrimeSubset> {
    let sel: Selector = selector.parse()?;
    Ok(PrimeSubset::new(table(limit)?, sel))
}

fn shift_set(s: &IntegerSet) -> anyhow::Result<ShiftSet> {
    Ok(ShiftSet::new(s.as_slice().to_vec())?)
}

fn set_max(s: &IntegerSet) -> anyhow::Result<u64> {
    s.max()
        .ok_or_else(|| anyhow::anyhow!("set must be non-empty"))
}

// ---------------------------------------------------------------- primes

#[derive(Args, Serialize, Debug)]
pub struct PrimesArgs {
    /// Lower end (exclusive).
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    /// Upper end (inclusive).
    #[arg(long)]
    pub hi: f64,
    /// Prime selector, e.g. `ap:1,4` or `and(interval:10,100;ap:1,3)`.
    #[arg(long, default_value = "all")]
    pub select: String,
    /// List the primes instead of summarising them.
    #[arg(long)]
    pub list: bool,
}

pub fn primes(a: &PrimesArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    ensure!(a.lo >= 0.0 && a.hi >= a.lo, "need 0 <= lo <= hi");
    let ps = subset(&a.select, a.hi.ceil() as u64)?;
    let sums = subset_sums(&ps, a.lo, a.hi)?;
    if a.list {
        let list: Vec<u64> = ps.iter_range(a.lo, a.hi).collect();
        let mut t = Table::new(&["p"]);
        for p in &list {
            t.push([cell(p)]);
        }
        return Outcome::new(&json!({"count": sums.count, "primes": list}), t);
    }
    let t = Table::new(&["lo", "hi", "count", "theta", "mertens_log", "mertens_recip"]).row([
        cell(a.lo),
        cell(a.hi),
        cell(sums.count),
        fcell(sums.theta),
        fcell(sums.mertens_log),
        fcell(sums.mertens_recip),
    ]);
    Outcome::new(&sums, t)
}

// ----------------------------------------------------------- sieve-bound

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Larger,
    Large,
    Selberg,
    Smallkscs,
    Smallkbv,
    Middlek,
}

#[derive(Args, Serialize, Debug)]
pub struct SieveBoundArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    /// The set being bounded (larger/large) or sifted (the others).
    #[arg(long, value_parser = parse_set)]
    pub set: IntegerSet,
    /// Sieving primes.
    #[arg(long, default_value = "all")]
    pub select: String,
    /// Shifts `a_i` for the sifting methods.
    #[arg(long, value_parser = parse_set, default_value = "0")]
    pub shifts: IntegerSet,
    /// Range length; defaults to the largest element.
    #[arg(long)]
    pub x: Option<u64>,
    /// Large sieve level, Selberg level or equidistribution level.
    #[arg(long)]
    pub q: Option<u64>,
    /// `K` for the small-k methods; defaults to the number of shifts.
    #[arg(long)]
    pub k_cap: Option<f64>,
    #[arg(long)]
    pub y1: Option<f64>,
    #[arg(long)]
    pub y2: Option<f64>,
    /// Also count the sifted set exactly and compare.
    #[arg(long)]
    pub exact: bool,
}

pub fn sieve_bound(a: &SieveBoundArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let x = match a.x {
        Some(x) => x,
        None => set_max(&a.set)?,
    };
    let need_q = || {
        a.q.ok_or_else(|| anyhow::anyhow!("--q is required for {:?}", a.method))
    };
    let q2 = a.q.unwrap_or(1).saturating_mul(a.q.unwrap_or(1));
    let limit = x.max(q2).saturating_add(a.shifts.max().unwrap_or(0)) + 1;
    let ps = subset(&a.select, limit)?;
    let shifts = shift_set(&a.shifts)?;
    let k_cap = a.k_cap.unwrap_or(shifts.len() as f64);
    // the prime set the exact count sifts by; `None` when the bound is on #set
    let (mut report, sifting) = match a.method {
        Method::Larger => {
            let prof = occupancy(&a.set, &ps, OccupancyVariant::AllClasses)?;
            (larger_sieve_bound(&prof, &ps, x)?, None)
        }
        Method::Large => {
            let q = need_q()?;
            let primes = ps.members_up_to(q);
            let nu = occupancy_at(a.set.as_slice(), &primes, OccupancyVariant::AllClasses);
            let omega: BTreeMap<u64, u64> = nu.entries.iter().map(|(&p, &v)| (p, p - v)).collect();
            let prof = OccupancyProfile::from_entries(omega, OccupancyVariant::AllClasses)?;
            (large_sieve_bound(&prof, x, q)?, None)
        }
        Method::Selberg => {
            let q = need_q()?;
            let prof = occupancy_at(
                shifts.values(),
                &ps.members_up_to(q2),
                OccupancyVariant::AllClasses,
            );
            let r = selberg_bound_with(
                &a.set,
                &ps,
                &shifts,
                &SieveWeights::from(&prof),
                q,
                ctx.exec,
            )?;
            (r, Some(ps.clone()))
        }
        Method::Smallkscs => {
            let g = GenThmContext::manual(x, ps.clone(), k_cap, ctx.profile);
            (prop_smallkscs_bound(&a.set, &shifts, &g)?, Some(g.ps_star))
        }
        Method::Smallkbv => {
            let g = GenThmContext::manual(x, ps.clone(), k_cap, ctx.profile);
            let r = prop_smallkbv_bound_with(&a.set, &shifts, &g, need_q()?, ctx.exec)?;
            (r, Some(g.ps_star))
        }
        Method::Middlek => {
            let (Some(y1), Some(y2)) = (a.y1, a.y2) else {
                bail!("--y1 and --y2 are required for middlek");
            };
            (
                middlek_bound(&a.set, &shifts, &ps, x, y1, y2, &ctx.profile)?,
                Some(ps.clone()),
            )
        }
    };
    if a.exact {
        report.sifted_count = Some(match &sifting {
            Some(p) => sift_count_with(&a.set, &shifts, p, ctx.exec),
            None => a.set.len() as u64,
        });
    }
    let sound = report.bound_holds();
    let t = Table::new(&["method", "bound", "denominator_L", "valid", "sifted_count"]).row([
        format!("{:?}", a.method).to_lowercase(),
        fcell(report.bound),
        fcell(report.denominator_l),
        cell(report.valid),
        report.sifted_count.map(cell).unwrap_or_default(),
    ]);
    let status = if !sound {
        Status::CheckFailed
    } else if !report.valid {
        Status::HypothesesFailed
    } else {
        Status::Ok
    };
    Ok(Outcome::new(&report, t)?
        .with_diagnostics(json!({"bound_holds": sound, "set_size": a.set.len()}))
        .with_status(status))
}

// --------------------------------------------------------- inverse-sieve

#[derive(Args, Serialize, Debug)]
pub struct InverseSieveArgs {
    #[arg(long, value_parser = parse_set)]
    pub set: IntegerSet,
    #[arg(long, default_value = "all")]
    pub select: String,
    /// Window `(y/2, y]`; at least 10.
    #[arg(long)]
    pub y: f64,
    #[arg(long)]
    pub x: Option<u64>,
    /// Window mass factor of the strengthened form.
    #[arg(long, default_value_t = 8.0)]
    pub factor: f64,
}

pub fn inverse_sieve(a: &InverseSieveArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    let x = match a.x {
        Some(x) => x,
        None => set_max(&a.set)?,
    };
    let ps = subset(&a.select, a.y.ceil() as u64 + 1)?;
    let r = inverse_sieve_with_factor(&a.set, &ps, a.y, x, a.factor)?;
    let t = Table::new(&[
        "k",
        "y",
        "x",
        "lhs",
        "rhs",
        "lower",
        "strengthened",
        "holds",
    ])
    .row([
        cell(r.k),
        cell(r.y),
        cell(r.x),
        fcell(r.lhs),
        fcell(r.rhs),
        fcell(r.lower),
        cell(r.strengthened),
        cell(r.holds),
    ]);
    Ok(Outcome::new(&r, t)?.failing_if(!r.holds, Status::CheckFailed))
}

// ---------------------------------------------------------- smooth-count

#[derive(Args, Serialize, Debug)]
pub struct SmoothCountArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub y: u64,
    /// Count only `n ≡ a (mod d)`.
    #[arg(long, requires = "d")]
    pub a: Option<u64>,
    #[arg(long, requires = "a")]
    pub d: Option<u64>,
    /// Count only `n` coprime to this modulus.
    #[arg(long, conflicts_with = "d")]
    pub coprime_to: Option<u64>,
}

pub fn smooth_count(a: &SmoothCountArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    let q = SmoothQuery::new(a.x, a.y);
    let count = match (a.a, a.d, a.coprime_to) {
        (Some(r), Some(d), _) => psi_ap(a.x, a.y, r, d)?,
        (_, _, Some(m)) => psi_coprime(&q, m)?,
        _ => psi(&q)?,
    };
    let mut diag = json!({});
    if a.x >= 2 && a.y >= 2 {
        let u = (a.x as f64).ln() / (a.y as f64).ln();
        if let Ok(r) = dickman_rho(u) {
            diag = json!({"u": u, "rho": r.rho, "x_rho": a.x as f64 * r.rho});
        }
    }
    let t = Table::new(&["x", "y", "a", "d", "coprime_to", "count"]).row([
        cell(a.x),
        cell(a.y),
        a.a.map(cell).unwrap_or_default(),
        a.d.map(cell).unwrap_or_default(),
        a.coprime_to.map(cell).unwrap_or_default(),
        cell(count),
    ]);
    Ok(Outcome::new(&json!({"count": count}), t)?.with_diagnostics(diag))
}

// --------------------------------------------------------------- dickman

#[derive(Args, Serialize, Debug)]
pub struct DickmanArgs {
    /// Comma-separated arguments.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to"])]
    pub u: Option<Vec<f64>>,
    #[arg(long, requires = "to")]
    pub from: Option<f64>,
    #[arg(long, requires = "from")]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
}

pub fn dickman(a: &DickmanArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    let us: Vec<f64> = match (&a.u, a.from, a.to) {
        (Some(u), _, _) => u.clone(),
        (None, Some(lo), Some(hi)) => {
            ensure!(a.step > 0.0 && hi >= lo, "need step > 0 and to >= from");
            let n = ((hi - lo) / a.step + 1e-9).floor() as usize;
            ensure!(n < 1_000_000, "too many mesh points");
            (0..=n).map(|i| lo + i as f64 * a.step).collect()
        }
        _ => bail!("give --u or --from/--to"),
    };
    let values = us
        .iter()
        .map(|&u| dickman_rho(u))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["u", "rho"]);
    for v in &values {
        t.push([fcell(v.u), fcell(v.rho)]);
    }
    Ok(Outcome::new(&json!({"values": values}), t)?
        .with_diagnostics(json!({"table_step_difference": dickman_richardson_error()})))
}

// ----------------------------------------------------------- tuple-count

#[derive(Args, Serialize, Debug)]
pub struct TupleCountArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub y: u64,
    #[arg(long, value_parser = parse_set, default_value = "0,1")]
    pub shifts: IntegerSet,
}

pub fn tuple_count(a: &TupleCountArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let r = smooth_tuple_count_with(a.x, a.y, &shift_set(&a.shifts)?, ctx.exec)?;
    let t = Table::new(&[
        "x", "y", "shifts", "count", "u", "x_rho_k", "x_u_k", "x_u_u",
    ])
    .row([
        cell(r.x),
        cell(r.y),
        set_cell(&a.shifts),
        cell(r.count),
        fcell(r.u),
        fcell(r.heuristic_rho_power),
        fcell(r.heuristic_u_power),
        fcell(r.heuristic_u_u),
    ]);
    Outcome::new(&r, t)
}

// ---------------------------------------------------------------- bv-sum

#[derive(Args, Serialize, Debug)]
pub struct BvSumArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub y: u64,
    /// Primes the moduli are built from; defaults to the primes above y.
    #[arg(long)]
    pub select: Option<String>,
    /// Moduli run up to Q².
    #[arg(long)]
    pub q: u64,
    /// Number of shifts `k` in the divisor-function exponent.
    #[arg(long, default_value_t = 2)]
    pub k: u64,
    #[arg(long, default_value_t = DEFAULT_DISCREPANCY_BUDGET)]
    pub budget: u64,
}

pub fn bv_sum(a: &BvSumArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let q2 =
        a.q.checked_mul(a.q)
            .ok_or_else(|| anyhow::anyhow!("Q² overflows"))?;
    let sel = a
        .select
        .clone()
        .unwrap_or_else(|| format!("min:{}", a.y + 1));
    let ps = subset(&sel, q2.max(a.y) + 1)?;
    let r = bv_discrepancy_sum_with(
        &SmoothQuery::new(a.x, a.y),
        &ps,
        a.q,
        a.k,
        a.budget,
        ctx.exec,
    )?;
    let mut t = Table::new(&["d", "weight", "max_deviation", "worst_residue"]);
    for term in &r.terms {
        t.push([
            cell(term.d),
            fcell(term.weight),
            fcell(term.max_deviation),
            cell(term.worst_residue),
        ]);
    }
    Ok(Outcome::new(&r, t)?
        .with_diagnostics(json!({"moduli": r.terms.len(), "selector": ps.descriptor()})))
}

// ------------------------------------------------------------- semigroup

#[derive(Args, Serialize, Debug)]
pub struct SemigroupArgs {
    /// The generating primes.
    #[arg(long)]
    pub select: String,
    #[arg(long)]
    pub x: u64,
    /// Print the elements.
    #[arg(long)]
    pub list: bool,
    /// Evaluate the mean-value hypotheses; exit 2 when one fails.
    #[arg(long)]
    pub hypotheses: bool,
}

/// Below this the exponent fit has too few primes to work with.
const MIN_FIT_X: u64 = 10_000;

pub fn semigroup(a: &SemigroupArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    let ps = subset(&a.select, a.x)?;
    let mut result = json!({"x": a.x, "selector": ps.descriptor()});
    let mut status = Status::Ok;
    let count = if a.x >= MIN_FIT_X {
        let stats = semigroup_stats(&ps, a.x)?;
        result["stats"] = serde_json::to_value(&stats)?;
        stats.count
    } else {
        count_q(&ps, a.x)?
    };
    result["count"] = json!(count);
    if a.hypotheses {
        let rep = verify_hypotheses_wirsing(&ps, a.x)?;
        if rep.hypotheses.iter().any(|h| h.verdict == Verdict::Fail) {
            status = Status::HypothesesFailed;
        }
        result["hypotheses"] = serde_json::to_value(&rep)?;
    }
    let t = if a.list {
        let set = enumerate_q(&ps, a.x)?;
        result["elements"] = serde_json::to_value(&set)?;
        let mut t = Table::new(&["n"]);
        for n in set.iter() {
            t.push([cell(n)]);
        }
        t
    } else {
        let tau = result["stats"]["tau_hat"].as_f64();
        Table::new(&["x", "count", "tau_hat"]).row([
            cell(a.x),
            cell(count),
            tau.map(fcell).unwrap_or_default(),
        ])
    };
    Ok(Outcome::new(&result, t)?.with_status(status))
}

// ---------------------------------------------------------------- sumset

#[derive(Args, Serialize, Debug)]
pub struct SumsetArgs {
    #[arg(long, value_parser = parse_set)]
    pub a: IntegerSet,
    #[arg(long, value_parser = parse_set)]
    pub b: IntegerSet,
    /// Optional third summand.
    #[arg(long, value_parser = parse_set)]
    pub c: Option<IntegerSet>,
}

pub fn sumset_cmd(a: &SumsetArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    let mut s = sumset(&a.a, &a.b);
    if let Some(c) = &a.c {
        s = sumset(&s, c);
    }
    let mut t = Table::new(&["element"]);
    for v in s.iter() {
        t.push([cell(v)]);
    }
    Outcome::new(&json!({"size": s.len(), "sumset": s}), t)
}

// ------------------------------------------------------------- decompose

#[derive(Args, Serialize, Debug)]
pub struct DecomposeArgs {
    #[arg(long, value_parser = parse_set)]
    pub set: IntegerSet,
    /// Look for `A + B` with `cover ⊆ A + B ⊆ set` instead of equality.
    #[arg(long, value_parser = parse_set)]
    pub cover: Option<IntegerSet>,
    #[arg(long, default_value_t = 2)]
    pub min_part: usize,
    #[arg(long, default_value_t = SearchOptions::default().node_cap)]
    pub node_cap: u64,
}

pub fn decompose(a: &DecomposeArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let opts = SearchOptions {
        min_part: a.min_part,
        node_cap: a.node_cap,
        exec: ctx.exec,
    };
    let r = match &a.cover {
        Some(c) => decompose_binary_relative_with(c, &a.set, opts)?,
        None => decompose_binary_with(&a.set, opts)?,
    };
    let verified = r.witness.as_ref().map(|(wa, wb)| {
        let s = sumset(wa, wb);
        match &a.cover {
            None => s == a.set,
            Some(c) => c.is_subset(&s) && s.is_subset(&a.set),
        }
    });
    let (wa, wb) = match &r.witness {
        Some((x, y)) => (set_cell(x), set_cell(y)),
        None => Default::default(),
    };
    let t = Table::new(&["decomposable", "a", "b", "nodes_explored"]).row([
        cell(r.decomposable),
        wa,
        wb,
        cell(r.nodes_explored),
    ]);
    Ok(Outcome::new(&r, t)?
        .with_diagnostics(json!({"witness_verified": verified}))
        .failing_if(verified == Some(false), Status::CheckFailed))
}

// ----------------------------------------------------------------- ruzsa

#[derive(Args, Serialize, Debug)]
pub struct RuzsaArgs {
    #[arg(long, value_parser = parse_set)]
    pub a: IntegerSet,
    #[arg(long, value_parser = parse_set)]
    pub b: IntegerSet,
    #[arg(long, value_parser = parse_set)]
    pub c: IntegerSet,
}

pub fn ruzsa(a: &RuzsaArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    let r = ruzsa_check(&a.a, &a.b, &a.c)?;
    let t = Table::new(&["lhs", "rhs", "holds"]).row([cell(r.lhs), cell(r.rhs), cell(r.holds)]);
    Ok(Outcome::new(&r, t)?.failing_if(!r.holds, Status::CheckFailed))
}

// ---------------------------------------------------------- check-genthm

#[derive(Args, Serialize, Debug)]
pub struct CheckGenthmArgs {
    /// The set S, avoiding every class 0 mod p for p in the selector.
    #[arg(long, value_parser = parse_set)]
    pub set: IntegerSet,
    /// The subset S0; defaults to S.
    #[arg(long, value_parser = parse_set)]
    pub s0: Option<IntegerSet>,
    /// The primes S avoids.
    #[arg(long)]
    pub select: String,
    #[arg(long)]
    pub x: Option<u64>,
    /// Also test the equidistribution condition at this level.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BV_BUDGET)]
    pub budget: u64,
}

pub fn check_genthm(a: &CheckGenthmArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let x = match a.x {
        Some(x) => x,
        None => set_max(&a.set)?,
    };
    let q2 = a.q.map(|q| q.saturating_mul(q)).unwrap_or(0);
    let ps = subset(&a.select, (isqrt(x) + 1).max(q2))?;
    let s0 = a.s0.clone().unwrap_or_else(|| a.set.clone());
    let g = build_context(&a.set, &s0, &ps, x, ctx.profile)?;
    let summary = g.summary();
    let scs = check_scs_condition(&g)?;
    let bv = match a.q {
        Some(q) => Some(check_bv_condition_with(&g, &a.set, q, a.budget, ctx.exec)?),
        None => None,
    };
    let conclusion = conclusion_bounds(&g);
    let some_condition = scs.holds || bv.as_ref().is_some_and(|b| b.holds);
    let applicable = !summary.ps_star_empty_up_to_sqrt_x && g.c_hypothesis_holds && some_condition;
    let verdict = if summary.ps_star_empty_up_to_sqrt_x {
        "no_sieving_primes"
    } else if !g.c_hypothesis_holds {
        "density_too_small"
    } else if !some_condition {
        "conditions_fail"
    } else {
        "applies"
    };
    let t = Table::new(&[
        "x",
        "c",
        "K",
        "ps_star_size",
        "scs_holds",
        "bv_holds",
        "upper_b",
        "lower_a",
        "verdict",
    ])
    .row([
        cell(x),
        fcell(summary.c),
        fcell(summary.k_cap),
        cell(summary.ps_star_size_up_to_sqrt_x),
        cell(scs.holds),
        bv.as_ref().map(|b| cell(b.holds)).unwrap_or_default(),
        fcell(conclusion.upper_b),
        fcell(conclusion.lower_a),
        verdict.to_string(),
    ]);
    let result = json!({
        "context": summary,
        "density": g.density,
        "scs": scs,
        "bv": bv,
        "conclusion": conclusion,
        "verdict": verdict,
    });
    Ok(Outcome::new(&result, t)?.failing_if(!applicable, Status::HypothesesFailed))
}

// ---------------------------------------------------------- ostmann-diag

#[derive(Args, Serialize, Debug)]
pub struct OstmannDiagArgs {
    /// The set A; or use `--squares`.
    #[arg(long, value_parser = parse_set, required_unless_present = "squares")]
    pub set: Option<IntegerSet>,
    /// Take A to be the squares in [1, x].
    #[arg(long, requires = "x", conflicts_with = "set")]
    pub squares: bool,
    #[arg(long)]
    pub x: Option<u64>,
    /// Primes up to Y enter the profile.
    #[arg(long)]
    pub y: f64,
    /// A complementary set B for the larger-sieve budget check.
    #[arg(long, value_parser = parse_set)]
    pub b: Option<IntegerSet>,
    /// Include the per-prime entries.
    #[arg(long)]
    pub entries: bool,
}

pub fn ostmann_diag(a: &OstmannDiagArgs, _: &Ctx) -> anyhow::Result<Outcome> {
    let set = match &a.set {
        Some(s) => s.clone(),
        None => {
            let x = a.x.unwrap_or(0);
            (1..=isqrt(x)).map(|n| n * n).collect()
        }
    };
    let x = match a.x {
        Some(x) => x,
        None => set_max(&set)?,
    };
    let ps = PrimeSubset::all(table(a.y.ceil() as u64 + 1)?);
    let prof = ostmann_epsilon_profile(&set, x, a.y, &ps)?;
    let identity = algebraic_identity_check(&prof);
    let mult = multiplicative_sum_diagnostic(&prof)?;
    let budget = match &a.b {
        Some(b) => {
            let pb = ostmann_epsilon_profile(b, x.max(set_max(b)?), a.y, &ps)?;
            Some(larger_sieve_budget_check(
                &prof.occupancy(),
                &pb.occupancy(),
                x,
                a.y,
            )?)
        }
        None => None,
    };
    let mut result = json!({
        "x": x,
        "y": a.y,
        "set_size": set.len(),
        "moments": prof.moments,
        "identity": identity,
        "multiplicative": mult,
        "budget": budget,
    });
    if a.entries {
        result["entries"] = serde_json::to_value(&prof.entries)?;
    }
    let mut t = Table::new(&["p", "nu", "epsilon"]);
    for e in &prof.entries {
        t.push([cell(e.p), cell(e.nu), fcell(e.epsilon)]);
    }
    Outcome::new(&result, t)
}

// ------------------------------------------------------------ verify-all

#[derive(Args, Serialize, Debug)]
pub struct VerifyAllArgs {
    /// Wall-clock budget in milliseconds; 0 runs nothing.
    #[arg(long, default_value_t = 60_000)]
    pub budget_ms: u64,
}

pub fn verify_all(a: &VerifyAllArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let s = verify_all_with(ctx.seed, Duration::from_millis(a.budget_ms), ctx.exec)?;
    let mut t = Table::new(&["invariant", "passed", "failed", "skipped"]);
    for inv in &s.invariants {
        t.push([
            inv.name.to_string(),
            cell(inv.passed),
            cell(inv.failed),
            cell(inv.skipped),
        ]);
    }
    let diag = json!({"all_passed": s.all_passed(), "total_passed": s.total_passed()});
    Ok(Outcome::new(&s, t)?
        .with_diagnostics(diag)
        .failing_if(!s.all_passed(), Status::CheckFailed))
}
