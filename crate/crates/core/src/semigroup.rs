//! Multiplicative semigroups `Q(T)` generated by a set of primes `T`:
//! enumeration, counting, density-exponent fits and the Wirsing estimate.

use serde::Serialize;

use crate::arith::{gamma_function, EULER_GAMMA};
use crate::error::{domain, Result, SieveError};
use crate::primes::PrimeSubset;
use crate::smooth::for_each_smooth;
use crate::sumset::IntegerSet;

/// Largest `x` accepted by the enumerators.
pub const MAX_Q_X: u64 = 1_000_000_000;
/// Largest number of elements [`enumerate_q`] will materialise.
pub const MAX_Q_ELEMENTS: u64 = 100_000_000;

fn generators(ps: &PrimeSubset, x: u64) -> Result<Vec<u64>> {
    if x > MAX_Q_X {
        return Err(SieveError::Capacity {
            what: "semigroup x",
            requested: x,
            limit: MAX_Q_X,
        });
    }
    if x > ps.limit() {
        return Err(SieveError::Capacity {
            what: "prime table for semigroup x",
            requested: x,
            limit: ps.limit(),
        });
    }
    Ok(ps.members_up_to(x))
}

/// `Q(T) ∩ [1, x]`, sorted; always contains 1.
pub fn enumerate_q(ps: &PrimeSubset, x: u64) -> Result<IntegerSet> {
    let gens = generators(ps, x)?;
    let mut out = Vec::new();
    let mut overflow = false;
    for_each_smooth(x, &gens, |n| {
        if out.len() as u64 >= MAX_Q_ELEMENTS {
            overflow = true;
        } else {
            out.push(n);
        }
    });
    if overflow {
        return Err(SieveError::Capacity {
            what: "semigroup elements",
            requested: MAX_Q_ELEMENTS + 1,
            limit: MAX_Q_ELEMENTS,
        });
    }
    Ok(IntegerSet::new(out))
}

/// `#(Q(T) ∩ [1, x])` without materialising the set.
pub fn count_q(ps: &PrimeSubset, x: u64) -> Result<u64> {
    let gens = generators(ps, x)?;
    let mut count = 0;
    for_each_smooth(x, &gens, |_| count += 1);
    Ok(count)
}

#[derive(Debug, Clone, Serialize)]
pub struct TauFit {
    /// Fitted slope clamped to `[0, 1]`.
    pub tau_hat: f64,
    pub raw_slope: f64,
    pub c_hat: f64,
    /// Sum of squared residuals of the fit.
    pub residual: f64,
    /// Slopes fitted separately on the lower and upper half of the mesh.
    pub slope_first_half: f64,
    pub slope_second_half: f64,
    pub mesh: Vec<(f64, f64)>,
}

const TAU_MESH: usize = 32;

fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    (slope, intercept, residual)
}

/// Least-squares fit of `Σ_{p <= t, p ∈ T} log p / p ≈ τ log t + C` on 32
/// logarithmically spaced `t ∈ [x^{1/4}, x]`.
pub fn estimate_tau(ps: &PrimeSubset, x: u64) -> Result<TauFit> {
    if x < 10_000 {
        return domain(format!("tau estimation needs x >= 10^4, got {x}"));
    }
    let gens = generators(ps, x)?;
    let log_x = (x as f64).ln();
    if gens.is_empty() {
        return Ok(TauFit {
            tau_hat: 0.0,
            raw_slope: 0.0,
            c_hat: 0.0,
            residual: 0.0,
            slope_first_half: 0.0,
            slope_second_half: 0.0,
            mesh: Vec::new(),
        });
    }
    let low = (x as f64).powf(0.25);
    let upper_primes = gens.iter().filter(|&&p| p as f64 > low).count();
    if upper_primes < 3 {
        return Err(SieveError::Degenerate(format!(
            "only {upper_primes} primes of T in (x^(1/4), x]"
        )));
    }
    let mut mesh = Vec::with_capacity(TAU_MESH);
    let mut acc = 0.0;
    let mut idx = 0;
    for i in 0..TAU_MESH {
        let log_t = log_x * (0.25 + 0.75 * i as f64 / (TAU_MESH - 1) as f64);
        let t = if i == TAU_MESH - 1 {
            x as f64
        } else {
            log_t.exp()
        };
        while idx < gens.len() && gens[idx] as f64 <= t {
            let p = gens[idx] as f64;
            acc += p.ln() / p;
            idx += 1;
        }
        mesh.push((log_t, acc));
    }
    let (slope, intercept, residual) = least_squares(&mesh);
    let half = TAU_MESH / 2;
    let (s1, _, _) = least_squares(&mesh[..half]);
    let (s2, _, _) = least_squares(&mesh[half..]);
    Ok(TauFit {
        tau_hat: slope.clamp(0.0, 1.0),
        raw_slope: slope,
        c_hat: intercept,
        residual,
        slope_first_half: s1,
        slope_second_half: s2,
        mesh,
    })
}

/// Finite-`x` evaluation of Wirsing's mean value for the indicator of
/// `Q(T)`: `x / log x · e^{−γτ} / Γ(τ) · ∏_{p <= x, p ∈ T} p/(p − 1)`,
/// with the product carried in the log domain.
pub fn wirsing_estimate(ps: &PrimeSubset, x: u64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return domain(format!("tau must lie in (0, 1], got {tau}"));
    }
    if x < 3 {
        return domain("x must be at least 3");
    }
    let gens = generators(ps, x)?;
    let xf = x as f64;
    let log_product: f64 = gens.iter().map(|&p| -(1.0 - 1.0 / p as f64).ln()).sum();
    let log_value =
        xf.ln() - xf.ln().ln() - EULER_GAMMA * tau - gamma_function(tau)?.ln() + log_product;
    Ok(log_value.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Marginal,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisVerdict {
    pub name: &'static str,
    pub verdict: Verdict,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WirsingReport {
    pub x: u64,
    pub hypotheses: Vec<HypothesisVerdict>,
}

impl WirsingReport {
    pub fn all_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.verdict == Verdict::Pass)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.hypotheses
            .iter()
            .find(|h| h.name == name)
            .map(|h| h.verdict)
    }
}

/// Numerical look at the hypotheses of Wirsing's theorem for the indicator
/// of `Q(T)` at one `x`.
pub fn verify_hypotheses_wirsing(ps: &PrimeSubset, x: u64) -> Result<WirsingReport> {
    let gens = generators(ps, x)?;
    let mut hypotheses = Vec::new();

    // 1: Σ f(p) log p / p ~ τ log x with τ > 0, read off the mesh fit
    let h1 = match estimate_tau(ps, x) {
        Ok(fit) => {
            let drift = (fit.slope_first_half - fit.slope_second_half).abs();
            let verdict = if fit.tau_hat < 0.05 {
                Verdict::Fail
            } else if drift <= 0.2 {
                Verdict::Pass
            } else if drift <= 0.4 {
                Verdict::Marginal
            } else {
                Verdict::Fail
            };
            HypothesisVerdict {
                name: "mertens_slope",
                verdict,
                value: fit.tau_hat,
                detail: format!(
                    "slope {:.4}, half-mesh slopes {:.4} / {:.4}",
                    fit.raw_slope, fit.slope_first_half, fit.slope_second_half
                ),
            }
        }
        Err(e) => HypothesisVerdict {
            name: "mertens_slope",
            verdict: Verdict::Fail,
            value: 0.0,
            detail: e.to_string(),
        },
    };
    hypotheses.push(h1);

    hypotheses.push(HypothesisVerdict {
        name: "bounded_at_primes",
        verdict: Verdict::Pass,
        value: 1.0,
        detail: "f(p) is 0 or 1".into(),
    });

    // 3: Σ_{p ∈ T, n >= 2} p^{-n} = Σ 1/(p(p−1)); tail beyond x is below 1/x
    let series: f64 = gens
        .iter()
        .map(|&p| 1.0 / (p as f64 * (p as f64 - 1.0)))
        .sum();
    hypotheses.push(HypothesisVerdict {
        name: "prime_power_series",
        verdict: Verdict::Pass,
        value: series,
        detail: format!("partial sum {series:.6}, tail < {:.3e}", 1.0 / x as f64),
    });

    // 4: #{p^n <= x : n >= 2, p ∈ T} against x / log x
    let mut powers = 0u64;
    for &p in &gens {
        if p > x / p {
            break;
        }
        let mut q = p * p;
        loop {
            powers += 1;
            if q > x / p {
                break;
            }
            q *= p;
        }
    }
    let ratio = powers as f64 / (x as f64 / (x as f64).ln());
    hypotheses.push(HypothesisVerdict {
        name: "prime_power_count",
        verdict: if ratio <= 1.0 {
            Verdict::Pass
        } else if ratio <= 10.0 {
            Verdict::Marginal
        } else {
            Verdict::Fail
        },
        value: ratio,
        detail: format!("{powers} prime powers, ratio to x/log x {ratio:.4e}"),
    });
    Ok(WirsingReport { x, hypotheses })
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupStats {
    pub x: u64,
    pub count: u64,
    pub tau_hat: f64,
    pub c_hat: f64,
    /// `None` when the fitted exponent is 0.
    pub wirsing_estimate: Option<f64>,
    pub max_gap: u64,
    /// `count · (log x)^{1 − τ̂} / x`
    pub normalized_count: f64,
}

/// Count, exponent fit, Wirsing estimate and largest gap at one `x`.
pub fn semigroup_stats(ps: &PrimeSubset, x: u64) -> Result<SemigroupStats> {
    let set = enumerate_q(ps, x)?;
    let fit = estimate_tau(ps, x)?;
    let wirsing = if fit.tau_hat > 0.0 {
        Some(wirsing_estimate(ps, x, fit.tau_hat)?)
    } else {
        None
    };
    let count = set.len() as u64;
    Ok(SemigroupStats {
        x,
        count,
        tau_hat: fit.tau_hat,
        c_hat: fit.c_hat,
        wirsing_estimate: wirsing,
        max_gap: max_gap(&set),
        normalized_count: count as f64 * (x as f64).ln().powf(1.0 - fit.tau_hat) / x as f64,
    })
}

/// Largest difference between consecutive elements (0 for fewer than two).
pub fn max_gap(set: &IntegerSet) -> u64 {
    set.as_slice()
        .windows(2)
        .map(|w| w[1] - w[0])
        .max()
        .unwrap_or(0)
}
