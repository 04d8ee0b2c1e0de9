//! Nakagami-(m, w) fading: `|nu|^2 ~ Gamma(shape m, scale w/m)`, so the
//! squared magnitude has mean `w` and variance `w^2/m`. `m = w = 1`
//! recovers Rayleigh.

use rand::RngCore;
use rand_distr::Distribution;
use serde_json::{json, Map, Value};
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};
use statrs::function::gamma::gamma;

use super::{reject_unknown, require_positive, Fading, FadingModel, GainShape};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Nakagami {
    m: f64,
    w: f64,
    sampler: rand_distr::Gamma<f64>,
    cdf: GammaDist,
}

impl Nakagami {
    pub fn new(m: f64, w: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParam(format!(
                "nakagami shape m must be positive, got {m}"
            )));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParam(format!(
                "nakagami spread w must be positive, got {w}"
            )));
        }
        // rand_distr parameterizes Gamma by (shape, scale); statrs by
        // (shape, rate).
        let sampler = rand_distr::Gamma::new(m, w / m)
            .map_err(|e| Error::InvalidParam(format!("gamma sampler: {e}")))?;
        let cdf = GammaDist::new(m, m / w)
            .map_err(|e| Error::InvalidParam(format!("gamma cdf: {e}")))?;
        Ok(Self { m, w, sampler, cdf })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn w(&self) -> f64 {
        self.w
    }
}

pub(super) fn from_params(map: &Map<String, Value>) -> Result<FadingModel> {
    reject_unknown(map, &["m", "w"], "nakagami")?;
    let m = require_positive(map, "m", "nakagami")?;
    let w = require_positive(map, "w", "nakagami")?;
    FadingModel::nakagami(m, w)
}

impl Fading for Nakagami {
    fn name(&self) -> &'static str {
        "nakagami"
    }

    fn params(&self) -> Map<String, Value> {
        let mut map = Map::new();
        map.insert("m".into(), json!(self.m));
        map.insert("w".into(), json!(self.w));
        map
    }

    fn mean_std(&self) -> (f64, f64) {
        (self.w, self.w / self.m.sqrt())
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.cdf.cdf(x)
        }
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::DomainError(format!(
                "quantile level must be in [0, 1), got {q}"
            )));
        }
        Ok(self.cdf.inverse_cdf(q))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.sampler.sample(rng)
    }

    /// `l_K = (w u / m) ln(K r0^2 m^{m-1} / (p^2 Gamma(m) (w u)^{m-1}))`
    /// with `u = beta^2 r0^{-2 alpha}`. Leading order only: a Theta(log l_K)
    /// correction is dropped, as in the other closed forms.
    fn scaling_point(&self, k: f64, peak_gain: f64, area_ratio: f64) -> Result<f64> {
        let wu = self.w * peak_gain;
        let arg = k * area_ratio * self.m.powf(self.m - 1.0)
            / (gamma(self.m) * wu.powf(self.m - 1.0));
        if !(arg > 1.0) {
            return Err(Error::DomainError(format!(
                "nakagami scaling point needs K r0^2 m^(m-1) / (p^2 Gamma(m) (w u)^(m-1)) > 1, got {arg:e}"
            )));
        }
        Ok(wu / self.m * arg.ln())
    }

    /// Gamma tails have asymptotically constant growth `w u / m`.
    fn growth(&self, _gamma: f64, peak_gain: f64) -> f64 {
        self.w * peak_gain / self.m
    }

    fn gain_shape(&self) -> GainShape {
        GainShape::new("loglog(K)", |k: f64| k.ln().ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::Rayleigh;
    use crate::numerics::mean_stderr;
    use crate::rng::{substream, StreamKind};

    #[test]
    fn moments_closed_form() {
        let n = Nakagami::new(2.0, 3.0).unwrap();
        let (mean, std) = n.mean_std();
        assert_eq!(mean, 3.0);
        assert!((std * std - 4.5).abs() < 1e-12);
    }

    #[test]
    fn sample_moments_match() {
        let n = Nakagami::new(2.0, 3.0).unwrap();
        let mut rng = substream(5, StreamKind::Generic, &[1]);
        let draws: Vec<f64> = (0..1_000_000).map(|_| n.sample(&mut rng)).collect();
        let (mean, se) = mean_stderr(&draws);
        assert!((mean - 3.0).abs() < 0.02, "mean {mean}");
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / draws.len() as f64;
        assert!((var - 4.5).abs() < 0.1, "var {var}");
        assert!(se < 0.01);
    }

    #[test]
    fn unit_parameters_reduce_to_rayleigh() {
        let n = Nakagami::new(1.0, 1.0).unwrap();
        for x in [0.1, 0.5, 1.0, 2.5, 7.0] {
            assert!((n.cdf(x) - Rayleigh.cdf(x)).abs() < 1e-12);
        }
        let peak = 100.0;
        assert!((n.growth(5.0, peak) - Rayleigh.growth(5.0, peak)).abs() < 1e-12);
        let lp = n.scaling_point(1.0e4, peak, 0.01).unwrap();
        let lr = Rayleigh.scaling_point(1.0e4, peak, 0.01).unwrap();
        assert!((lp - lr).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let n = Nakagami::new(2.5, 1.7).unwrap();
        for q in [0.05, 0.5, 0.95, 0.9999] {
            let x = n.quantile(q).unwrap();
            assert!((n.cdf(x) - q).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_point_domain_guard() {
        // Large w u pushes the log argument below one at small K.
        let n = Nakagami::new(2.0, 1.0).unwrap();
        assert!(n.scaling_point(1.0e4, 1000.0, 0.01).is_err());
        assert!(n.scaling_point(1.0e8, 1000.0, 0.01).is_ok());
    }

    #[test]
    fn growth_constant() {
        let n = Nakagami::new(2.0, 3.0).unwrap();
        assert!((n.growth(10.0, 50.0) - 75.0).abs() < 1e-12);
    }
}
