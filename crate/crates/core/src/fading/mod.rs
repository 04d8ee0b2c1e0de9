//! Small-scale fading families as interchangeable strategies.
//!
//! Each family implements [`Fading`] for the law of the squared fading
//! magnitude `|nu|^2`: exact sampling, moments, CDF/quantile, plus the
//! extreme-value data attached to the family (scaling point of the
//! composite SNR, growth function, and the asymptotic sum-rate scaling
//! laws). Families are registered by name, so configs select them as a
//! tagged union:
//!
//! ```json
//! {"family": "nakagami", "m": 2.0, "w": 3.0}
//! ```
//!
//! The built-in names are `rayleigh`, `nakagami`, `weibull` and
//! `log_normal`; [`register_family`] accepts additional strategies at
//! runtime without changes to call sites.

mod log_normal;
mod nakagami;
mod rayleigh;
mod weibull;

pub use log_normal::LogNormal;
pub use nakagami::Nakagami;
pub use rayleigh::Rayleigh;
pub use weibull::Weibull;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use rand::RngCore;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::{Error, Result};

/// Which network regime a scaling law describes: transmitters packed into
/// a fixed disc (`Dense`) or a hex tiling that grows with `B` (`Extended`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Dense,
    Extended,
}

/// An evaluatable asymptotic expression in `(K, B, N)`.
pub struct ScalingFn {
    /// Human-readable form, e.g. `B*N*loglog(K)`.
    pub desc: String,
    eval: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
}

impl ScalingFn {
    pub fn new(
        desc: impl Into<String>,
        eval: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            desc: desc.into(),
            eval: Box::new(eval),
        }
    }

    pub fn eval(&self, k: f64, b: f64, n: f64) -> f64 {
        (self.eval)(k, b, n)
    }
}

impl fmt::Debug for ScalingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalingFn({})", self.desc)
    }
}

/// Upper/lower asymptotic sum-rate orders for one family and regime.
#[derive(Debug)]
pub struct ScalingLaw {
    pub regime: Regime,
    pub upper: ScalingFn,
    pub lower: ScalingFn,
}

/// The family-specific multiuser-gain shape `g(K)` entering the scaling
/// laws: sum rates grow like `B*N*g(K)` (dense) with `K` replaced by
/// `K/B` in the extended regime.
pub struct GainShape {
    /// Shape name with `K` as the placeholder argument, e.g. `loglog(K)`.
    pub desc: String,
    pub eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl GainShape {
    pub fn new(desc: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            desc: desc.into(),
            eval: Box::new(eval),
        }
    }

    /// Assemble the upper/lower laws for a regime from this shape.
    pub fn into_law(self, regime: Regime) -> ScalingLaw {
        let desc = self.desc;
        let eval = Arc::new(self.eval);
        let (arg, arg_desc): (fn(f64, f64) -> f64, &str) = match regime {
            Regime::Dense => (|k, _b| k, "K"),
            Regime::Extended => (|k, b| k / b, "K/B"),
        };
        let up_eval = Arc::clone(&eval);
        let upper = ScalingFn::new(
            format!("B*N*{}", desc.replace('K', arg_desc)),
            move |k, b, n| b * n * up_eval(arg(k, b)),
        );
        let lower = match regime {
            Regime::Dense => {
                let lo_eval = Arc::clone(&eval);
                ScalingFn::new(format!("min(B,N)*{}", desc.replace('K', arg_desc)), {
                    move |k, b, n| b.min(n) * lo_eval(arg(k, b))
                })
            }
            Regime::Extended => {
                let lo_eval = Arc::clone(&eval);
                ScalingFn::new(
                    format!("B*{}", desc.replace('K', arg_desc)),
                    move |k, b, _n| b * lo_eval(arg(k, b)),
                )
            }
        };
        ScalingLaw {
            regime,
            upper,
            lower,
        }
    }
}

/// Strategy interface for one fading family.
///
/// `peak_gain` below is the mean channel gain at the truncation
/// distance, `beta^2 r0^{-2 alpha}` — the largest mean gain any user can
/// see — and `area_ratio` is `r0^2 / p^2`, the probability mass of the
/// truncated region around a transmitter.
pub trait Fading: fmt::Debug + Send + Sync {
    /// Registry name of the family.
    fn name(&self) -> &'static str;

    /// Family parameters as a JSON object (empty for Rayleigh).
    fn params(&self) -> Map<String, Value>;

    /// Mean and standard deviation of `|nu|^2`.
    fn mean_std(&self) -> (f64, f64);

    /// Distribution function of `|nu|^2`.
    fn cdf(&self, x: f64) -> f64;

    /// Quantile function; `q` must lie in `[0, 1)`.
    fn quantile(&self, q: f64) -> Result<f64>;

    /// One exact draw of `|nu|^2`.
    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    /// Closed-form scaling point `l_K` of the composite SNR: the level
    /// with `F(l_K) = 1 - 1/K` to leading order as `K` grows.
    fn scaling_point(&self, k: f64, peak_gain: f64, area_ratio: f64) -> Result<f64>;

    /// Growth function `h(gamma) = (1 - F(gamma)) / f(gamma)` of the
    /// composite SNR, in its large-`gamma` form.
    fn growth(&self, gamma: f64, peak_gain: f64) -> f64;

    /// Multiuser-gain shape `g(K)` for the sum-rate scaling laws.
    fn gain_shape(&self) -> GainShape;

    /// Upper/lower sum-rate scaling law for `regime`.
    fn scaling_law(&self, regime: Regime) -> ScalingLaw {
        self.gain_shape().into_law(regime)
    }
}

/// Shared handle to a fading strategy; this is the type configs and
/// simulation parameters carry.
#[derive(Clone)]
pub struct FadingModel(Arc<dyn Fading>);

impl FadingModel {
    pub fn new(strategy: Arc<dyn Fading>) -> Self {
        Self(strategy)
    }

    pub fn rayleigh() -> Self {
        Self(Arc::new(Rayleigh))
    }

    pub fn nakagami(m: f64, w: f64) -> Result<Self> {
        Ok(Self(Arc::new(Nakagami::new(m, w)?)))
    }

    pub fn weibull(lambda: f64, t: f64) -> Result<Self> {
        Ok(Self(Arc::new(Weibull::new(lambda, t)?)))
    }

    pub fn log_normal(a: f64, w: f64) -> Result<Self> {
        Ok(Self(Arc::new(LogNormal::new(a, w)?)))
    }

    /// Whether this model is the named family.
    pub fn is(&self, name: &str) -> bool {
        self.0.name() == name
    }

    /// Build a model from its tagged-union JSON value.
    pub fn from_value(value: &Value) -> Result<Self> {
        let map = value.as_object().ok_or_else(|| {
            Error::InvalidParam(format!("fading spec must be a JSON object, got {value}"))
        })?;
        let family = map
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidParam("fading spec lacks a \"family\" string".into()))?;
        let ctor = {
            let reg = registry().read().unwrap();
            *reg.get(family).ok_or_else(|| {
                Error::InvalidParam(format!(
                    "unknown fading family {family:?}; registered: {:?}",
                    reg.keys().collect::<Vec<_>>()
                ))
            })?
        };
        ctor(map)
    }

    /// JSON value in the same tagged-union form `from_value` accepts.
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("family".into(), Value::String(self.0.name().into()));
        for (k, v) in self.0.params() {
            map.insert(k, v);
        }
        Value::Object(map)
    }
}

impl std::ops::Deref for FadingModel {
    type Target = dyn Fading;

    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl fmt::Debug for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.0.params();
        if params.is_empty() {
            return write!(f, "{}", self.0.name());
        }
        let args: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}({})", self.0.name(), args.join(","))
    }
}

impl PartialEq for FadingModel {
    fn eq(&self, other: &Self) -> bool {
        self.0.name() == other.0.name() && self.0.params() == other.0.params()
    }
}

impl Serialize for FadingModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FadingModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        FadingModel::from_value(&value).map_err(D::Error::custom)
    }
}

/// Constructor signature kept by the registry. The map is the full
/// tagged-union object including the `family` key.
pub type FamilyCtor = fn(&Map<String, Value>) -> Result<FadingModel>;

fn registry() -> &'static RwLock<BTreeMap<String, FamilyCtor>> {
    static REGISTRY: LazyLock<RwLock<BTreeMap<String, FamilyCtor>>> = LazyLock::new(|| {
        let mut map: BTreeMap<String, FamilyCtor> = BTreeMap::new();
        map.insert("rayleigh".into(), rayleigh::from_params as FamilyCtor);
        map.insert("nakagami".into(), nakagami::from_params as FamilyCtor);
        map.insert("weibull".into(), weibull::from_params as FamilyCtor);
        map.insert("log_normal".into(), log_normal::from_params as FamilyCtor);
        RwLock::new(map)
    });
    &REGISTRY
}

/// Register an additional family under `name`. Fails on duplicates so a
/// typo cannot silently shadow a built-in.
pub fn register_family(name: &str, ctor: FamilyCtor) -> Result<()> {
    let mut reg = registry().write().unwrap();
    if reg.contains_key(name) {
        return Err(Error::InvalidParam(format!(
            "fading family {name:?} is already registered"
        )));
    }
    reg.insert(name.to_string(), ctor);
    Ok(())
}

/// Names currently available in the registry.
pub fn registered_families() -> Vec<String> {
    registry().read().unwrap().keys().cloned().collect()
}

/// Shared helper for family constructors: pull a required positive float.
pub(crate) fn require_positive(map: &Map<String, Value>, key: &str, family: &str) -> Result<f64> {
    let v = map
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidParam(format!("{family} needs a numeric {key:?} field")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParam(format!(
            "{family}.{key} must be a positive finite number, got {v}"
        )));
    }
    Ok(v)
}

/// Shared helper: reject fields no constructor consumes.
pub(crate) fn reject_unknown(map: &Map<String, Value>, allowed: &[&str], family: &str) -> Result<()> {
    for key in map.keys() {
        if key != "family" && !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidParam(format!(
                "{family} does not accept a {key:?} field (allowed: {allowed:?})"
            )));
        }
    }
    Ok(())
}
