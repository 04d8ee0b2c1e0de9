//! Log-normal fading with parameters (a, w): `ln |nu|^2 ~ N(2a, 4w)`.

use rand::RngCore;
use rand_distr::Distribution;
use serde_json::{json, Map, Value};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{reject_unknown, require_positive, Fading, FadingModel, GainShape};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct LogNormal {
    a: f64,
    w: f64,
    sampler: rand_distr::LogNormal<f64>,
    log_law: Normal,
}

impl LogNormal {
    pub fn new(a: f64, w: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidParam(format!(
                "log_normal location a must be finite, got {a}"
            )));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParam(format!(
                "log_normal spread w must be positive, got {w}"
            )));
        }
        let mu = 2.0 * a;
        let sigma = 2.0 * w.sqrt();
        let sampler = rand_distr::LogNormal::new(mu, sigma)
            .map_err(|e| Error::InvalidParam(format!("log-normal sampler: {e}")))?;
        let log_law = Normal::new(mu, sigma)
            .map_err(|e| Error::InvalidParam(format!("normal cdf: {e}")))?;
        Ok(Self {
            a,
            w,
            sampler,
            log_law,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn w(&self) -> f64 {
        self.w
    }
}

pub(super) fn from_params(map: &Map<String, Value>) -> Result<FadingModel> {
    reject_unknown(map, &["a", "w"], "log_normal")?;
    let a = map
        .get("a")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidParam("log_normal needs a numeric \"a\" field".into()))?;
    let w = require_positive(map, "w", "log_normal")?;
    FadingModel::log_normal(a, w)
}

impl Fading for LogNormal {
    fn name(&self) -> &'static str {
        "log_normal"
    }

    fn params(&self) -> Map<String, Value> {
        let mut map = Map::new();
        map.insert("a".into(), json!(self.a));
        map.insert("w".into(), json!(self.w));
        map
    }

    fn mean_std(&self) -> (f64, f64) {
        let mean = (2.0 * self.a + 2.0 * self.w).exp();
        let var = ((4.0 * self.w).exp() - 1.0) * (4.0 * self.a + 4.0 * self.w).exp();
        (mean, var.sqrt())
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.log_law.cdf(x.ln())
        }
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::DomainError(format!(
                "quantile level must be in [0, 1), got {q}"
            )));
        }
        if q == 0.0 {
            return Ok(0.0);
        }
        Ok(self.log_law.inverse_cdf(q).exp())
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.sampler.sample(rng)
    }

    /// `l_K = u exp(sqrt(8 w ln(K r0^2/p^2)))`, the closed form with the
    /// Theta(log log K) refinement inside the square root dropped.
    fn scaling_point(&self, k: f64, peak_gain: f64, area_ratio: f64) -> Result<f64> {
        let arg = k * area_ratio;
        if !(arg > 1.0) {
            return Err(Error::DomainError(format!(
                "scaling point needs K r0^2/p^2 > 1, got {arg}"
            )));
        }
        Ok(peak_gain * (8.0 * self.w * arg.ln()).sqrt().exp())
    }

    /// `h(gamma) ~ 4 w gamma / ln gamma`; meaningful for `gamma > 1`.
    fn growth(&self, gamma_level: f64, _peak_gain: f64) -> f64 {
        4.0 * self.w * gamma_level / gamma_level.ln()
    }

    fn gain_shape(&self) -> GainShape {
        GainShape::new("sqrt(log(K))", |k: f64| k.ln().sqrt())
    }
}
