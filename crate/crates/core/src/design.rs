//! Network design rules as numeric procedures.
//!
//! Four scalar analyses: how many resource blocks keep per-user rate
//! alive as the population grows, when deploying more infrastructure
//! still pays for itself, and the two user-density tradeoffs (one via a
//! Lagrangian stationarity condition, one as a direct ratio constraint).
//! Everything here is a deterministic root or extremum of a closed-form
//! curve, solved to fixed tolerances.

use serde::{Deserialize, Serialize};

use crate::numerics::{bisect, golden_section_max, ROOT_REL_TOL};
use crate::{Error, Result};

/// Resource blocks needed, `K / ln ln K`, for the per-user rate to stay
/// bounded away from zero as the user count `K` grows.
pub fn principle1_required_resources(k: f64) -> Result<f64> {
    if !(k >= 16.0) {
        return Err(Error::DomainError(format!(
            "resource law needs K >= 16, got {k}"
        )));
    }
    Ok(k / k.ln().ln())
}

/// Outcome of the deployment feasibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct P2Feasibility {
    /// Rate per infrastructure cost clears the bar `sbar`.
    pub roi_ok: bool,
    /// Rate per user clears the bar `shat`.
    pub throughput_ok: bool,
}

/// Evaluate both deployment constraints at unit physical constants.
///
/// The shared rate factor is `L = (1/N) ln(K N / B)`; a configuration
/// with `L <= 1` is infeasible by convention (the log term would go
/// nonpositive) and both flags come back false.
pub fn principle2_feasible(
    k: f64,
    b: f64,
    n: f64,
    sbar: f64,
    c_n: f64,
    shat: f64,
) -> Result<P2Feasibility> {
    for (name, v) in [("K", k), ("B", b), ("N", n), ("sbar", sbar), ("c_N", c_n), ("shat", shat)]
    {
        if !(v > 0.0) {
            return Err(Error::InvalidParam(format!("{name} must be positive, got {v}")));
        }
    }
    let l = (k * n / b).ln() / n;
    if l <= 1.0 {
        return Ok(P2Feasibility {
            roi_ok: false,
            throughput_ok: false,
        });
    }
    let log_l = l.ln();
    let roi = b * n / (b + c_n * n) * log_l;
    let throughput = b * n / k * log_l;
    Ok(P2Feasibility {
        roi_ok: roi > sbar,
        throughput_ok: throughput > shat,
    })
}

/// Unique root of the increasing map `rho (1 + ln rho) = target` on
/// `[1, target]`, for `target >= 1`.
fn product_root(target: f64) -> Result<f64> {
    if !(target >= 1.0) {
        return Err(Error::DomainError(format!(
            "product equation needs a target >= 1, got {target}"
        )));
    }
    if target == 1.0 {
        return Ok(1.0);
    }
    bisect(
        |rho: f64| rho * (1.0 + rho.ln()) - target,
        1.0,
        target,
        ROOT_REL_TOL,
    )
}

/// Report cap for an unbounded upper endpoint.
const RHO_CAP: f64 = 1e9;

/// Densities where users can still be served profitably: the interval
/// where `rho <= (c/sbar) ln(1 + ln rho)`, bounded by the two roots of
/// the equality.
pub fn principle3_feasible_range(c_over_sbar: f64) -> Result<(f64, f64)> {
    if !(c_over_sbar > 0.0) {
        return Err(Error::InvalidParam(format!(
            "cost ratio must be positive, got {c_over_sbar}"
        )));
    }
    let c = c_over_sbar;
    let gap = |rho: f64| c * rho.ln().ln_1p() - rho;
    // The gap starts at -1 and its stationary point sits where
    // rho (1 + ln rho) = c; below c = 1 that is left of rho = 1 and the
    // gap only falls, so nothing is feasible.
    if c < 1.0 {
        return Err(Error::Infeasible(format!(
            "no density satisfies the constraint at ratio {c}"
        )));
    }
    let peak = product_root(c)?;
    if gap(peak) < 0.0 {
        return Err(Error::Infeasible(format!(
            "no density satisfies the constraint at ratio {c} (best shortfall {:.3e})",
            gap(peak)
        )));
    }
    let rho_min = bisect(&gap, 1.0, peak, ROOT_REL_TOL)?;
    let rho_max = if gap(RHO_CAP) >= 0.0 {
        RHO_CAP
    } else {
        let mut hi = 2.0 * peak;
        while gap(hi) >= 0.0 {
            hi *= 2.0;
        }
        bisect(&gap, peak, hi, ROOT_REL_TOL)?
    };
    Ok((rho_min, rho_max))
}

/// Stationary density of the cost-penalized rate objective at multiplier
/// `lambda`: the root of `rho (1 + ln rho) = (c/sbar)(1 + 1/lambda)`,
/// accepted only if it lands in the feasible interval. `lambda` may be
/// infinite; the target then collapses to the ratio itself.
pub fn principle3_kkt_rho(lambda: f64, c_over_sbar: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!(
            "multiplier must be positive, got {lambda}"
        )));
    }
    let (rho_min, rho_max) = principle3_feasible_range(c_over_sbar)?;
    let target = if lambda.is_infinite() {
        c_over_sbar
    } else {
        c_over_sbar * (1.0 + 1.0 / lambda)
    };
    let root = product_root(target)?;
    let slack = 1e-9 * (1.0 + root);
    if root > rho_max + slack || root < rho_min - slack {
        return Err(Error::NoSolution(format!(
            "stationary density {root:.6} falls outside the feasible interval \
             [{rho_min:.6}, {rho_max:.6}]"
        )));
    }
    Ok(root.clamp(rho_min, rho_max))
}

/// Smallest multiplier whose stationary density is still feasible: the
/// value where the stationary point hits the upper feasibility root.
pub fn principle3_lambda_threshold(c_over_sbar: f64) -> Result<f64> {
    let (_, rho_max) = principle3_feasible_range(c_over_sbar)?;
    let ratio = rho_max * (1.0 + rho_max.ln()) / c_over_sbar - 1.0;
    if ratio <= 0.0 {
        return Err(Error::NoSolution(
            "feasible interval is a single point; only the limiting multiplier lands on it"
                .into(),
        ));
    }
    Ok(1.0 / ratio)
}

/// Global maximum of `ln(1 + ln rho) / rho` as `(location, value)`.
///
/// The value is the largest rate-per-cost ratio any density can deliver;
/// ratios above it are unserviceable.
pub fn principle4_threshold() -> (f64, f64) {
    golden_section_max(|rho: f64| rho.ln().ln_1p() / rho, 1.0, 10.0, 1e-8)
}

/// Largest density satisfying `sbar/c <= ln(1 + ln rho) / rho`: the
/// rightmost crossing of the ratio curve, found right of its peak where
/// the curve is strictly decreasing.
pub fn principle4_rho_star(sbar_over_c: f64) -> Result<f64> {
    if !(sbar_over_c > 0.0) {
        return Err(Error::InvalidParam(format!(
            "rate-to-cost ratio must be positive, got {sbar_over_c}"
        )));
    }
    let (peak, max_ratio) = principle4_threshold();
    if sbar_over_c > max_ratio {
        return Err(Error::Infeasible(format!(
            "ratio {sbar_over_c} exceeds the attainable maximum {max_ratio:.6}"
        )));
    }
    let shortfall = |rho: f64| sbar_over_c - rho.ln().ln_1p() / rho;
    if shortfall(peak) >= 0.0 {
        return Ok(peak);
    }
    let mut hi = 2.0 * peak;
    while shortfall(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::BracketFailure(
                "rightmost crossing ran past the search cap".into(),
            ));
        }
    }
    bisect(shortfall, peak, hi, ROOT_REL_TOL)
}
