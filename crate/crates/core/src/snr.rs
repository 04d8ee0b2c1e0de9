//! Channel model: truncated power-law path loss times small-scale fading.
//!
//! The instantaneous SNR between transmitter `i` and user `k` on channel `n`
//! is `gamma = beta^2 * max(dist, r0)^{-2 alpha} * X`, where `X` is a unit
//! draw from the configured fading family. This module computes the full
//! `B x K x N` tensor of such draws, the exact distribution of the mean gain
//! seen by a uniformly placed user (including the disc-overlap "lens"
//! geometry for an off-center transmitter), the exact composite SNR
//! distribution under Rayleigh fading, and the characteristic level that the
//! per-channel maximum over `K` users concentrates around.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::fading::FadingModel;
use crate::geometry::{self, NetworkLayout, UserSet};
use crate::numerics::{self, CDF_ROOT_REL_TOL, QUAD_ABS_TOL};
use crate::rng::{self, StreamKind};
use crate::{Error, Result};

/// Truncated power-law attenuation `beta^2 * max(dist, r0)^{-2 alpha}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub alpha: f64,
    pub beta: f64,
    pub r0: f64,
}

impl PathLoss {
    pub fn new(alpha: f64, beta: f64, r0: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::InvalidParam(format!(
                "path-loss exponent alpha must exceed 1, got {alpha}"
            )));
        }
        if !(beta > 0.0) || !(r0 > 0.0) {
            return Err(Error::InvalidParam(format!(
                "beta and r0 must be positive, got beta = {beta}, r0 = {r0}"
            )));
        }
        Ok(Self { alpha, beta, r0 })
    }

    /// Mean gain at separation `dist`.
    pub fn gain_at(&self, dist: f64) -> f64 {
        let d = dist.max(self.r0);
        self.beta * self.beta * d.powf(-2.0 * self.alpha)
    }

    /// Largest attainable mean gain, `beta^2 * r0^{-2 alpha}`.
    pub fn peak_gain(&self) -> f64 {
        self.beta * self.beta * self.r0.powf(-2.0 * self.alpha)
    }

    /// Separation at which the mean gain equals `g` (inverse of `gain_at`
    /// on `dist >= r0`).
    pub fn radius_of_gain(&self, g: f64) -> f64 {
        (g / (self.beta * self.beta)).powf(-0.5 / self.alpha)
    }
}

/// Full channel parameter set shared by the simulation entry points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Path-loss exponent (the decay is `dist^{-2 alpha}`), must exceed 1.
    pub alpha: f64,
    /// Path-loss amplitude scale.
    pub beta: f64,
    /// Truncation length: gains saturate below this separation.
    pub r0: f64,
    /// Per-transmitter power budget.
    pub pcon: f64,
    /// Small-scale fading family.
    pub fading: FadingModel,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        PathLoss::new(self.alpha, self.beta, self.r0)?;
        if !(self.pcon > 0.0) {
            return Err(Error::InvalidParam(format!(
                "power budget pcon must be positive, got {}",
                self.pcon
            )));
        }
        Ok(())
    }

    pub fn path_loss(&self) -> PathLoss {
        PathLoss {
            alpha: self.alpha,
            beta: self.beta,
            r0: self.r0,
        }
    }
}

/// Instantaneous SNRs for one network realization, indexed `[tx, user, channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrTensor {
    pub values: Array3<f64>,
}

impl SnrTensor {
    pub fn num_tx(&self) -> usize {
        self.values.dim().0
    }

    pub fn num_users(&self) -> usize {
        self.values.dim().1
    }

    pub fn num_channels(&self) -> usize {
        self.values.dim().2
    }

    pub fn get(&self, i: usize, k: usize, n: usize) -> f64 {
        self.values[[i, k, n]]
    }

    /// Row-major (tx-major, channel-minor) view of the entries.
    pub fn as_flat(&self) -> &[f64] {
        self.values
            .as_slice()
            .expect("tensor is always stored in standard layout")
    }

    /// CSV dump with header `tx,user,channel,snr`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("tx,user,channel,snr\n");
        for ((i, k, n), v) in self.values.indexed_iter() {
            writeln!(out, "{i},{k},{n},{v}").expect("string write cannot fail");
        }
        out
    }
}

/// Draw the `B x K x N` SNR tensor for fixed transmitter and user positions.
///
/// Entry `(i, k, n)` uses its own random substream keyed by the index
/// triple, so enlarging any dimension or reordering the loops leaves the
/// remaining entries bit-identical.
pub fn compute_snr_tensor(
    layout: &NetworkLayout,
    users: &UserSet,
    params: &ChannelParams,
    num_channels: usize,
    seed: u64,
) -> Result<SnrTensor> {
    params.validate()?;
    if (layout.r0 - params.r0).abs() > 1e-12 * params.r0.max(1.0) {
        return Err(Error::ConstraintViolation(format!(
            "layout truncation length {} disagrees with channel r0 {}",
            layout.r0, params.r0
        )));
    }
    if users.is_empty() {
        return Err(Error::ConstraintViolation("need at least one user".into()));
    }
    if num_channels == 0 {
        return Err(Error::ConstraintViolation("need at least one channel".into()));
    }
    let path = params.path_loss();
    let b = layout.num_tx();
    let k = users.len();
    let mut values = Array3::zeros((b, k, num_channels));
    for (i, &tx) in layout.tx.iter().enumerate() {
        for (j, &user) in users.positions.iter().enumerate() {
            let gain = path.gain_at(geometry::distance(tx, user));
            for n in 0..num_channels {
                let mut stream =
                    rng::substream(seed, StreamKind::Fading, &[i as u64, j as u64, n as u64]);
                values[[i, j, n]] = gain * params.fading.sample(&mut stream);
            }
        }
    }
    Ok(SnrTensor { values })
}

/// How user positions are drawn in Monte Carlo runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UserModel {
    /// All `K` users uniform over the network disc of radius `p`.
    #[default]
    SharedDisc,
    /// The same number of users uniform in every hexagonal cell.
    PerCell,
}

/// One Monte Carlo realization: user positions plus the SNR tensor, drawn
/// from substreams of `seed` keyed by the trial index.
pub(crate) fn draw_trial(
    layout: &NetworkLayout,
    params: &ChannelParams,
    k: usize,
    num_channels: usize,
    users: UserModel,
    seed: u64,
    trial: u64,
) -> Result<(UserSet, SnrTensor)> {
    let trial_seed = rng::derive_seed(seed, &[0x7472_6961, trial]);
    let set = match users {
        UserModel::SharedDisc => geometry::sample_users_disc(layout, k, trial_seed)?,
        UserModel::PerCell => {
            let b = layout.num_tx();
            if k % b != 0 {
                return Err(Error::ConstraintViolation(format!(
                    "per-cell placement needs K divisible by B, got K = {k}, B = {b}"
                )));
            }
            geometry::sample_users_per_cell(layout, k / b, trial_seed)?
        }
    };
    let tensor = compute_snr_tensor(layout, &set, params, num_channels, trial_seed)?;
    Ok((set, tensor))
}

/// Distribution of the mean gain `G = beta^2 * max(dist, r0)^{-2 alpha}`
/// between a transmitter at distance `d` from the network center and a user
/// uniform over the disc of radius `p`.
///
/// `G` has an atom of mass `r0^2 / p^2` at the peak gain (users inside the
/// truncation radius) and a continuous part indexed by the separation
/// `rho in (r0, p + d)`. For `rho > p - d` only part of the circle of radius
/// `rho` around the transmitter lies inside the network disc, and the
/// coverage fraction is the classical two-circle lens area.
#[derive(Debug, Clone, Copy)]
pub struct GainDistribution {
    pub d: f64,
    pub p: f64,
    pub path: PathLoss,
}

impl GainDistribution {
    pub fn new(d: f64, p: f64, path: PathLoss) -> Result<Self> {
        if !(d >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "transmitter offset must be nonnegative, got {d}"
            )));
        }
        if !(p > path.r0) {
            return Err(Error::InvalidParam(format!(
                "network radius p = {p} must exceed r0 = {}",
                path.r0
            )));
        }
        if d + path.r0 >= p {
            return Err(Error::ConstraintViolation(format!(
                "transmitter offset {d} leaves no clearance: need d + r0 < p = {p}"
            )));
        }
        Ok(Self { d, p, path })
    }

    /// Smallest and largest attainable mean gain.
    pub fn support(&self) -> (f64, f64) {
        let g_min = self.path.beta * self.path.beta * (self.p + self.d).powf(-2.0 * self.path.alpha);
        (g_min, self.path.peak_gain())
    }

    /// Fraction of the network disc covered by the disc of radius `rho`
    /// around the transmitter.
    pub fn coverage_fraction(&self, rho: f64) -> f64 {
        let (d, p) = (self.d, self.p);
        if rho <= 0.0 {
            return 0.0;
        }
        if rho <= p - d {
            return (rho / p) * (rho / p);
        }
        if rho >= p + d {
            return 1.0;
        }
        // Two-circle lens: centers d apart, radii rho and p.
        let clamp = |x: f64| x.clamp(-1.0, 1.0);
        let a1 = clamp((d * d + rho * rho - p * p) / (2.0 * d * rho)).acos();
        let a2 = clamp((d * d + p * p - rho * rho) / (2.0 * d * p)).acos();
        let s = (-d + rho + p) * (d + rho - p) * (d - rho + p) * (d + rho + p);
        let area = rho * rho * a1 + p * p * a2 - 0.5 * s.max(0.0).sqrt();
        area / (std::f64::consts::PI * p * p)
    }

    /// Density of the user-to-transmitter separation at `rho`, i.e. the
    /// radial derivative `2 rho theta(rho) / (pi p^2)` of the coverage
    /// fraction, where `theta` is the half-angle of the covered arc.
    pub fn radial_density(&self, rho: f64) -> f64 {
        let (d, p) = (self.d, self.p);
        if rho <= 0.0 || rho >= p + d {
            return 0.0;
        }
        if rho <= p - d {
            return 2.0 * rho / (p * p);
        }
        let theta = ((d * d + rho * rho - p * p) / (2.0 * d * rho))
            .clamp(-1.0, 1.0)
            .acos();
        2.0 * rho * theta / (std::f64::consts::PI * p * p)
    }

    /// Lens branch of the gain law: the covered fraction at the radius that
    /// yields gain `g`, defined only where the two circles properly
    /// intersect (an off-center transmitter with `p - d < rho(g) < p + d`).
    pub fn lens_fraction(&self, g: f64) -> Result<f64> {
        if self.d == 0.0 {
            return Err(Error::DomainError(
                "lens geometry is degenerate for a centered transmitter".into(),
            ));
        }
        let rho = self.path.radius_of_gain(g);
        if !(rho > self.p - self.d && rho < self.p + self.d) {
            return Err(Error::DomainError(format!(
                "gain {g} maps to radius {rho} outside the lens range ({}, {})",
                self.p - self.d,
                self.p + self.d
            )));
        }
        Ok(self.coverage_fraction(rho))
    }

    /// CDF of the mean gain at `g`.
    pub fn cdf(&self, g: f64) -> f64 {
        let (g_min, g_max) = self.support();
        if g < g_min {
            return 0.0;
        }
        if g >= g_max {
            return 1.0;
        }
        // G <= g  <=>  separation >= rho(g); rho(g) > r0 strictly here.
        1.0 - self.coverage_fraction(self.path.radius_of_gain(g))
    }

    /// Draw one user-to-transmitter separation (untruncated).
    pub fn sample_distance<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r = self.p * rng.random::<f64>().sqrt();
        let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        (r * phi.cos() - self.d).hypot(r * phi.sin())
    }

    /// Draw one mean gain.
    pub fn sample_gain<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let dist = self.sample_distance(rng);
        self.path.gain_at(dist)
    }
}

/// Composite SNR law under Rayleigh fading: `gamma = G * X` with `X`
/// standard exponential and `G` the mean-gain law above. The survival
/// function mixes the exponential tail over the separation density, which
/// keeps every term positive and lets the far tail be evaluated without
/// cancellation.
#[derive(Debug, Clone, Copy)]
pub struct RayleighSnr {
    pub gain: GainDistribution,
}

impl RayleighSnr {
    pub fn new(d: f64, p: f64, path: PathLoss) -> Result<Self> {
        Ok(Self {
            gain: GainDistribution::new(d, p, path)?,
        })
    }

    /// Survival function scaled by `exp(gamma / peak_gain)`; tends to the
    /// atom mass `r0^2 / p^2` as `gamma` grows. Every contribution is
    /// nonnegative, so the value stays accurate even where the survival
    /// probability itself underflows.
    pub fn scaled_survival(&self, gamma: f64) -> Result<f64> {
        if gamma <= 0.0 {
            return Ok(1.0);
        }
        let g = &self.gain;
        let path = g.path;
        let t = gamma / (path.beta * path.beta);
        let two_alpha = 2.0 * path.alpha;
        let base = path.r0.powf(two_alpha);
        let atom = (path.r0 / g.p) * (path.r0 / g.p);
        let integrand =
            |rho: f64| g.radial_density(rho) * (-t * (rho.powf(two_alpha) - base)).exp();
        let inner_edge = (g.p - g.d).max(path.r0);
        let mut total = atom + numerics::integrate(&integrand, path.r0, inner_edge, QUAD_ABS_TOL)?;
        if g.d > 0.0 {
            total += numerics::integrate(&integrand, g.p - g.d, g.p + g.d, QUAD_ABS_TOL)?;
        }
        Ok(total)
    }

    pub fn survival(&self, gamma: f64) -> Result<f64> {
        if gamma <= 0.0 {
            return Ok(1.0);
        }
        let peak = self.gain.path.peak_gain();
        Ok(self.scaled_survival(gamma)? * (-gamma / peak).exp())
    }

    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        Ok(1.0 - self.survival(gamma)?)
    }

    /// The level `l` with `P(gamma > l) = 1 / k`, solved on the exact
    /// quadrature form of the survival function.
    pub fn level_of_rank(&self, k: f64) -> Result<f64> {
        if !(k > 1.0) {
            return Err(Error::DomainError(format!(
                "rank level needs k > 1, got {k}"
            )));
        }
        let peak = self.gain.path.peak_gain();
        // Increasing in l: -ln k <= f(l) <= ln k transition.
        let f = |l: f64| {
            let scaled = self
                .scaled_survival(l)
                .expect("survival quadrature converges on the bracket");
            l / peak - scaled.ln() - k.ln()
        };
        let (lo, hi) = numerics::grow_bracket(&f, 0.0, peak)?;
        numerics::bisect(&f, lo, hi, CDF_ROOT_REL_TOL)
    }
}

/// Characteristic level of `max` over `k` users of the composite SNR, from
/// the closed form of the configured fading family.
pub fn scaling_point(fading: &FadingModel, k: f64, p: f64, path: &PathLoss) -> Result<f64> {
    let area_ratio = (path.r0 / p) * (path.r0 / p);
    fading.scaling_point(k, path.peak_gain(), area_ratio)
}

/// Growth function `h(gamma)` of the fading family at level `gamma`: the
/// local scale on which the max-SNR distribution moves.
pub fn growth_function(fading: &FadingModel, gamma: f64, path: &PathLoss) -> f64 {
    fading.growth(gamma, path.peak_gain())
}

/// Band `l_k +/- h(l_k) ln ln k` that the per-channel maximum concentrates
/// in; requires `ln ln k > 0`.
pub fn concentration_band(fading: &FadingModel, k: f64, p: f64, path: &PathLoss) -> Result<(f64, f64)> {
    let loglog = k.ln().ln();
    if !(loglog > 0.0) {
        return Err(Error::DomainError(format!(
            "concentration band needs ln ln k > 0, got k = {k}"
        )));
    }
    let l = scaling_point(fading, k, p, path)?;
    let half = growth_function(fading, l, path) * loglog;
    Ok((l - half, l + half))
}

/// The level with `P(gamma > l) = 1 / k` computed from the model itself
/// rather than the closed form: exact quadrature under Rayleigh fading, an
/// empirical high quantile otherwise.
pub fn numeric_scaling_point(
    fading: &FadingModel,
    k: f64,
    d: f64,
    p: f64,
    path: &PathLoss,
    seed: u64,
) -> Result<f64> {
    if !(k > 1.0) {
        return Err(Error::DomainError(format!(
            "scaling point needs k > 1, got {k}"
        )));
    }
    if fading.is("rayleigh") {
        return RayleighSnr::new(d, p, *path)?.level_of_rank(k);
    }
    let gain = GainDistribution::new(d, p, *path)?;
    // Sample count calibrated so the (1 - 1/k) quantile error moves the
    // exceedance probability of the k-max by well under one percent.
    let samples = ((1600.0 * k) as usize).clamp(400_000, 20_000_000);
    let mut stream = rng::substream(seed, StreamKind::Generic, &[0x7174_696c]);
    let mut draws: Vec<f64> = (0..samples)
        .map(|_| gain.sample_gain(&mut stream) * fading.sample(&mut stream))
        .collect();
    let rank = (((samples as f64) * (1.0 - 1.0 / k)).round() as usize)
        .clamp(1, samples - 1);
    let (_, value, _) = draws.select_nth_unstable_by(rank, |a, b| {
        a.partial_cmp(b).expect("snr draws are finite")
    });
    Ok(*value)
}
