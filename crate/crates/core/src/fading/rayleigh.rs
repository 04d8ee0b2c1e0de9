//! Rayleigh fading: `|nu|^2 ~ Exp(1)`.

use rand::RngCore;
use rand_distr::{Distribution, Exp1};
use serde_json::{Map, Value};

use super::{reject_unknown, Fading, FadingModel, GainShape};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Rayleigh;

pub(super) fn from_params(map: &Map<String, Value>) -> Result<FadingModel> {
    reject_unknown(map, &[], "rayleigh")?;
    Ok(FadingModel::rayleigh())
}

impl Fading for Rayleigh {
    fn name(&self) -> &'static str {
        "rayleigh"
    }

    fn params(&self) -> Map<String, Value> {
        Map::new()
    }

    fn mean_std(&self) -> (f64, f64) {
        (1.0, 1.0)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x).exp_m1()
        }
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::DomainError(format!(
                "quantile level must be in [0, 1), got {q}"
            )));
        }
        Ok(-(1.0 - q).ln())
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        Exp1.sample(rng)
    }

    /// `l_K = beta^2 r0^{-2 alpha} * ln(K r0^2 / p^2)`.
    fn scaling_point(&self, k: f64, peak_gain: f64, area_ratio: f64) -> Result<f64> {
        let arg = k * area_ratio;
        if !(arg > 1.0) {
            return Err(Error::DomainError(format!(
                "scaling point needs K r0^2/p^2 > 1, got {arg}"
            )));
        }
        Ok(peak_gain * arg.ln())
    }

    /// The exponential tail has constant growth `beta^2 r0^{-2 alpha}`.
    fn growth(&self, _gamma: f64, peak_gain: f64) -> f64 {
        peak_gain
    }

    fn gain_shape(&self) -> GainShape {
        GainShape::new("loglog(K)", |k: f64| k.ln().ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::mean_stderr;
    use crate::rng::{substream, StreamKind};

    #[test]
    fn moments_are_unit() {
        assert_eq!(Rayleigh.mean_std(), (1.0, 1.0));
    }

    #[test]
    fn cdf_fixed_points() {
        assert_eq!(Rayleigh.cdf(0.0), 0.0);
        assert!((Rayleigh.cdf(std::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        assert!(Rayleigh.cdf(-1.0) == 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for q in [0.0, 0.1, 0.5, 0.99, 0.999_999] {
            let x = Rayleigh.quantile(q).unwrap();
            assert!((Rayleigh.cdf(x) - q).abs() < 1e-12);
        }
        assert!(Rayleigh.quantile(1.0).is_err());
    }

    #[test]
    fn sample_mean_matches_unit_mean() {
        let mut rng = substream(11, StreamKind::Generic, &[0]);
        let draws: Vec<f64> = (0..1_000_000).map(|_| Rayleigh.sample(&mut rng)).collect();
        let (mean, _) = mean_stderr(&draws);
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn scaling_point_closed_form() {
        // beta = 1, r0 = 0.1, alpha = 1.5 gives peak gain 1000; K = 1e4 on a
        // unit disc gives l_K = 1000 ln(100).
        let peak = 0.1f64.powf(-3.0);
        let l = Rayleigh.scaling_point(1.0e4, peak, 0.01).unwrap();
        assert!((l - 1000.0 * 100.0f64.ln()).abs() < 1e-9);
        assert!((l - 4605.17).abs() < 0.01);
        assert!(Rayleigh.scaling_point(10.0, peak, 0.01).is_err());
    }

    #[test]
    fn growth_is_peak_gain() {
        assert_eq!(Rayleigh.growth(123.0, 1000.0), 1000.0);
    }
}
