//! Sum-rate bounds for the downlink network.
//!
//! Three views of the same quantity live here: Monte Carlo estimates of the
//! achievable-rate sandwich (greedy per-channel scheduling below, ideal
//! interference-free selection above), closed-form brackets whose width is a
//! Cantelli tail parameter, and an exhaustive oracle for instances small
//! enough to enumerate every assignment and a power lattice exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fading::{FadingModel, Regime, ScalingLaw};
use crate::geometry::NetworkLayout;
use crate::numerics::mean_stderr;
use crate::snr::{self, ChannelParams, SnrTensor, UserModel};
use crate::{Error, Result};

/// Monte Carlo bound estimates, in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    /// Achievable rate of max-SNR scheduling with equal power split.
    pub lower: f64,
    /// Interference-free rate of the scheduled users at full power.
    pub upper: f64,
    /// Blockwise relaxation of `upper`: each transmitter spends its budget
    /// on its single best (user, channel) pair. Coincides with `upper` at
    /// `N = 1` and is the tighter cap for wideband systems.
    pub upper_jensen: f64,
    pub std_error_lower: f64,
    pub std_error_upper: f64,
    pub std_error_jensen: f64,
    pub trials: usize,
}

/// Per-channel scheduled user: the argmax of the SNR column, ties broken
/// toward the smallest user index.
fn best_user(tensor: &SnrTensor, i: usize, n: usize) -> usize {
    let mut best = 0;
    let mut best_val = tensor.get(i, 0, n);
    for k in 1..tensor.num_users() {
        let v = tensor.get(i, k, n);
        if v > best_val {
            best = k;
            best_val = v;
        }
    }
    best
}

/// One trial of the three bound statistics.
fn trial_bounds(tensor: &SnrTensor, pcon: f64) -> (f64, f64, f64) {
    let b = tensor.num_tx();
    let k_total = tensor.num_users();
    let n_channels = tensor.num_channels();
    let nf = n_channels as f64;
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut jensen = 0.0;
    for i in 0..b {
        let mut block_max = 0.0f64;
        for n in 0..n_channels {
            let star = best_user(tensor, i, n);
            let signal = tensor.get(i, star, n);
            let mut interference = 0.0;
            for j in 0..b {
                if j != i {
                    interference += tensor.get(j, star, n);
                }
            }
            lower += (pcon * signal / (nf + pcon * interference)).ln_1p();
            upper += (pcon * signal).ln_1p();
            for k in 0..k_total {
                block_max = block_max.max(tensor.get(i, k, n));
            }
        }
        jensen += nf * (pcon * block_max / nf).ln_1p();
    }
    (lower, upper, jensen)
}

/// Monte Carlo estimate of the sum-rate sandwich over independent network
/// realizations (user positions and fading redrawn each trial).
pub fn mc_bounds(
    layout: &NetworkLayout,
    params: &ChannelParams,
    k: usize,
    num_channels: usize,
    trials: usize,
    users: UserModel,
    seed: u64,
) -> Result<BoundsResult> {
    if trials == 0 {
        return Err(Error::ConstraintViolation("need at least one trial".into()));
    }
    let per_trial: Vec<(f64, f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (_, tensor) = snr::draw_trial(layout, params, k, num_channels, users, seed, t)?;
            Ok(trial_bounds(&tensor, params.pcon))
        })
        .collect::<Result<_>>()?;
    let lows: Vec<f64> = per_trial.iter().map(|t| t.0).collect();
    let highs: Vec<f64> = per_trial.iter().map(|t| t.1).collect();
    let jens: Vec<f64> = per_trial.iter().map(|t| t.2).collect();
    let (lower, std_error_lower) = mean_stderr(&lows);
    let (upper, std_error_upper) = mean_stderr(&highs);
    let (upper_jensen, std_error_jensen) = mean_stderr(&jens);
    Ok(BoundsResult {
        lower,
        upper,
        upper_jensen,
        std_error_lower,
        std_error_upper,
        std_error_jensen,
        trials,
    })
}

/// A closed-form sandwich on the sum rate. Additive constants the theory
/// does not pin down are dropped, so the endpoints are trustworthy as
/// orders of magnitude, not as absolute rates; `asymptotic_only` records
/// that caveat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub asymptotic_only: bool,
}

fn require_rayleigh(fading: &FadingModel, what: &str) -> Result<()> {
    if fading.is("rayleigh") {
        Ok(())
    } else {
        Err(Error::FamilyMismatch(format!(
            "{what} is derived for Rayleigh fading; use scaling_table for {}",
            fading.name()
        )))
    }
}

/// Cantelli gate factor `r^2 / (1 + r^2)`: the probability weight that the
/// per-channel maximum clears its concentration level.
fn cantelli_gate(r: f64) -> f64 {
    r * r / (1.0 + r * r)
}

/// Closed-form bracket for transmitters packed in a fixed disc of radius
/// `p`. The lower endpoint discounts the interference-free cap by a
/// Cantelli bound on the aggregate interference, whose mean uses the peak
/// gain times the fading mean-plus-`r`-sigma envelope.
pub fn dense_bracket(
    params: &ChannelParams,
    k: f64,
    b: f64,
    n: f64,
    p: f64,
    r: f64,
) -> Result<Bracket> {
    params.validate()?;
    require_rayleigh(&params.fading, "the dense bracket")?;
    if !(r > 0.0) {
        return Err(Error::InvalidParam(format!(
            "Cantelli parameter must be positive, got {r}"
        )));
    }
    if k < 1e3 {
        log::warn!("dense bracket is asymptotic; K = {k} is small for it");
    }
    let path = params.path_loss();
    let l_k = snr::scaling_point(&params.fading, k, p, &path)?;
    let (mu, sigma) = params.fading.mean_std();
    let interference = n + params.pcon * path.peak_gain() * (mu + r * sigma) * b;
    let f_lo = cantelli_gate(r) / interference;
    let cap = b * n * (params.pcon * l_k).ln_1p();
    Ok(Bracket {
        lo: f_lo * cap,
        hi: cap,
        asymptotic_only: true,
    })
}

/// Aggregate-interference constant for the hex tiling: nearest ring plus
/// the integrated far field, scaled by the peak gain at cell scale.
pub fn extended_interference_constant(params: &ChannelParams, cell_radius: f64) -> Result<f64> {
    params.validate()?;
    if !(cell_radius >= params.r0) {
        return Err(Error::InvalidParam(format!(
            "cell radius {cell_radius} must be at least r0 = {}",
            params.r0
        )));
    }
    let geometry_sum = 4.0 + std::f64::consts::PI / (3.0f64.sqrt() * (2.0 * params.alpha - 2.0));
    let scale = params.pcon * params.beta * params.beta * params.r0.powf(2.0 - 2.0 * params.alpha)
        / (cell_radius * cell_radius);
    Ok(scale * geometry_sum)
}

/// Closed-form bracket for the hex-tiled network of `b` cells with inradius
/// `cell_radius`; the per-cell user pool is `k / b`, which shifts the
/// concentration level to `ln(K r0^2 / (B R^2))`.
pub fn extended_bracket(
    params: &ChannelParams,
    k: f64,
    b: f64,
    n: f64,
    cell_radius: f64,
    r: f64,
) -> Result<Bracket> {
    require_rayleigh(&params.fading, "the extended bracket")?;
    if !(r > 0.0) {
        return Err(Error::InvalidParam(format!(
            "Cantelli parameter must be positive, got {r}"
        )));
    }
    if k / b < 1e3 {
        log::warn!("extended bracket is asymptotic; K/B = {} is small for it", k / b);
    }
    let c0 = extended_interference_constant(params, cell_radius)?;
    let path = params.path_loss();
    let arg = k * params.r0 * params.r0 / (b * cell_radius * cell_radius);
    if !(arg > 1.0) {
        return Err(Error::DomainError(format!(
            "concentration level needs K r0^2 / (B R^2) > 1, got {arg}"
        )));
    }
    let l_k = path.peak_gain() * arg.ln();
    let (mu, sigma) = params.fading.mean_std();
    let f_lo = cantelli_gate(r) / (n + (mu + r * sigma) * c0);
    let cap = b * n * (params.pcon * l_k).ln_1p();
    Ok(Bracket {
        lo: f_lo * cap,
        hi: cap,
        asymptotic_only: true,
    })
}

/// The asymptotic (upper, lower) sum-rate orders for a fading family in a
/// regime, as evaluatable functions of `(K, B, N)`.
pub fn scaling_table(fading: &FadingModel, regime: Regime) -> ScalingLaw {
    fading.scaling_law(regime)
}

/// All ways to split `total` lattice units across `parts` slots.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(first);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Exhaustive maximization of the true sum rate on small instances: every
/// per-channel user choice, and per-transmitter power vectors on the
/// uniform lattice of the full-budget simplex face with `grid_size` levels
/// per axis (all vertices are members; the equal split is a member whenever
/// `grid_size - 1` is divisible by `N`).
///
/// Returns the trial-mean of the per-realization maximum: a lower bound on
/// the true optimum that tightens from below as the lattice refines.
pub fn brute_force_c_star(
    layout: &NetworkLayout,
    params: &ChannelParams,
    k: usize,
    num_channels: usize,
    grid_size: usize,
    trials: usize,
    users: UserModel,
    seed: u64,
) -> Result<f64> {
    params.validate()?;
    if trials == 0 || k == 0 {
        return Err(Error::ConstraintViolation(
            "need at least one trial and one user".into(),
        ));
    }
    if grid_size < 2 {
        return Err(Error::InvalidParam(format!(
            "power lattice needs at least 2 levels per axis, got {grid_size}"
        )));
    }
    let b = layout.num_tx();
    let bn = (b * num_channels) as f64;
    let budget = (k as f64).powf(bn) * (grid_size as f64).powf(bn);
    if !(budget <= 1e7) {
        return Err(Error::BudgetExceeded(format!(
            "enumeration size K^(BN) * grid^(BN) = {budget:.3e} exceeds 1e7"
        )));
    }
    let levels = grid_size - 1;
    let tx_powers: Vec<Vec<f64>> = compositions(levels, num_channels)
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|m| params.pcon * m as f64 / levels as f64)
                .collect()
        })
        .collect();

    let per_trial: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (_, tensor) = snr::draw_trial(layout, params, k, num_channels, users, seed, t)?;
            Ok(max_over_powers(&tensor, &tx_powers))
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.iter().sum::<f64>() / trials as f64)
}

/// Maximum sum rate of one realization over the power lattice. For fixed
/// powers the objective separates across `(i, n)`: each term picks its own
/// best user, because the interference a user sees depends only on the
/// fixed power matrix, not on other assignment choices.
fn max_over_powers(tensor: &SnrTensor, tx_powers: &[Vec<f64>]) -> f64 {
    let b = tensor.num_tx();
    let k = tensor.num_users();
    let n_channels = tensor.num_channels();
    let mut choice = vec![0usize; b];
    let mut best_total = f64::NEG_INFINITY;
    loop {
        let power = |i: usize, n: usize| tx_powers[choice[i]][n];
        let mut total = 0.0;
        for n in 0..n_channels {
            for i in 0..b {
                let p_in = power(i, n);
                let mut best_term = 0.0f64;
                for u in 0..k {
                    let mut interference = 0.0;
                    for j in 0..b {
                        if j != i {
                            interference += power(j, n) * tensor.get(j, u, n);
                        }
                    }
                    let sinr = p_in * tensor.get(i, u, n) / (1.0 + interference);
                    best_term = best_term.max(sinr.ln_1p());
                }
                total += best_term;
            }
        }
        best_total = best_total.max(total);

        // Odometer over the per-transmitter lattice choices.
        let mut pos = 0;
        loop {
            if pos == b {
                return best_total;
            }
            choice[pos] += 1;
            if choice[pos] < tx_powers.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
