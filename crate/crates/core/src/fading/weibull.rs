//! Weibull-(lambda, t) fading: `|nu|^2` is Weibull with scale `lambda^2`
//! and shape `t/2`, i.e. `P(|nu|^2 <= x) = 1 - exp(-(x/lambda^2)^(t/2))`.
//! `lambda = 1, t = 2` recovers Rayleigh.

use rand::RngCore;
use rand_distr::Distribution;
use serde_json::{json, Map, Value};
use statrs::function::gamma::gamma;

use super::{reject_unknown, require_positive, Fading, FadingModel, GainShape};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Weibull {
    lambda: f64,
    t: f64,
    scale: f64,
    shape: f64,
    sampler: rand_distr::Weibull<f64>,
}

impl Weibull {
    pub fn new(lambda: f64, t: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParam(format!(
                "weibull scale lambda must be positive, got {lambda}"
            )));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParam(format!(
                "weibull shape t must be positive, got {t}"
            )));
        }
        let scale = lambda * lambda;
        let shape = 0.5 * t;
        let sampler = rand_distr::Weibull::new(scale, shape)
            .map_err(|e| Error::InvalidParam(format!("weibull sampler: {e}")))?;
        Ok(Self {
            lambda,
            t,
            scale,
            shape,
            sampler,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

pub(super) fn from_params(map: &Map<String, Value>) -> Result<FadingModel> {
    reject_unknown(map, &["lambda", "t"], "weibull")?;
    let lambda = require_positive(map, "lambda", "weibull")?;
    let t = require_positive(map, "t", "weibull")?;
    FadingModel::weibull(lambda, t)
}

impl Fading for Weibull {
    fn name(&self) -> &'static str {
        "weibull"
    }

    fn params(&self) -> Map<String, Value> {
        let mut map = Map::new();
        map.insert("lambda".into(), json!(self.lambda));
        map.insert("t".into(), json!(self.t));
        map
    }

    fn mean_std(&self) -> (f64, f64) {
        let mean = self.scale * gamma(1.0 + 2.0 / self.t);
        let second = self.scale * self.scale * gamma(1.0 + 4.0 / self.t);
        (mean, (second - mean * mean).max(0.0).sqrt())
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-(x / self.scale).powf(self.shape)).exp_m1()
        }
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::DomainError(format!(
                "quantile level must be in [0, 1), got {q}"
            )));
        }
        Ok(self.scale * (-(1.0 - q).ln()).powf(1.0 / self.shape))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.sampler.sample(rng)
    }

    /// `l_K = u lambda^2 ln^{2/t}(K r0^2 / p^2)` with `u` the peak gain.
    fn scaling_point(&self, k: f64, peak_gain: f64, area_ratio: f64) -> Result<f64> {
        let arg = k * area_ratio;
        if !(arg > 1.0) {
            return Err(Error::DomainError(format!(
                "scaling point needs K r0^2/p^2 > 1, got {arg}"
            )));
        }
        Ok(peak_gain * self.scale * arg.ln().powf(2.0 / self.t))
    }

    /// `h(gamma) ~ (2 (u lambda^2)^{t/2} / t) gamma^{1 - t/2}`.
    fn growth(&self, gamma_level: f64, peak_gain: f64) -> f64 {
        let ul = peak_gain * self.scale;
        2.0 * ul.powf(self.shape) / self.t * gamma_level.powf(1.0 - self.shape)
    }

    fn gain_shape(&self) -> GainShape {
        let t = self.t;
        GainShape::new(format!("(2/{t})*loglog(K)"), move |k: f64| {
            2.0 / t * k.ln().ln()
        })
    }
}
