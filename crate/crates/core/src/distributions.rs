//! Random count samplers and the deterministic citation-aging curve.
//!
//! All samplers take an explicit random stream, so identical seeds give
//! identical draw sequences and every thread can own its own stream.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::{Error, Result};

/// Family of a count distribution. The negative binomial carries its
/// dispersion `k`, so that `Var[X] = mean + mean² / k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountKind {
    Poisson,
    NegativeBinomial { dispersion: f64 },
}

impl CountKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CountKind::Poisson => Ok(()),
            CountKind::NegativeBinomial { dispersion } => {
                if dispersion.is_finite() && dispersion > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "negative binomial dispersion must be positive and finite, got {dispersion}"
                    )))
                }
            }
        }
    }
}

/// A mean-parameterized count distribution over nonnegative integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountDistribution {
    kind: CountKind,
    mean: f64,
}

impl CountDistribution {
    pub fn new(kind: CountKind, mean: f64) -> Result<Self> {
        kind.validate()?;
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::config(format!(
                "count distribution mean must be nonnegative and finite, got {mean}"
            )));
        }
        Ok(CountDistribution { kind, mean })
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        Self::new(CountKind::Poisson, mean)
    }

    pub fn negative_binomial(mean: f64, dispersion: f64) -> Result<Self> {
        Self::new(CountKind::NegativeBinomial { dispersion }, mean)
    }

    pub fn kind(&self) -> CountKind {
        self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        match self.kind {
            CountKind::Poisson => self.mean,
            CountKind::NegativeBinomial { dispersion } => {
                self.mean + self.mean * self.mean / dispersion
            }
        }
    }

    /// Draws one value. The negative binomial is drawn as a gamma-mixed
    /// Poisson with gamma shape `k` and scale `mean / k`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.mean == 0.0 {
            return 0;
        }
        let lambda = match self.kind {
            CountKind::Poisson => self.mean,
            CountKind::NegativeBinomial { dispersion } => {
                let gamma = Gamma::new(dispersion, self.mean / dispersion)
                    .expect("validated gamma parameters");
                gamma.sample(rng)
            }
        };
        sample_poisson(lambda, rng)
    }
}

fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    // Gamma draws can underflow to exactly zero for tiny shapes.
    if lambda <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(lambda).expect("positive finite poisson mean");
    poisson.sample(rng) as u64
}

/// Draws one value from `dist`.
pub fn sample_count<R: Rng + ?Sized>(dist: &CountDistribution, rng: &mut R) -> u64 {
    dist.sample(rng)
}

/// Expected citations per period as a function of paper age.
///
/// The shape is the log-logistic density with shape `speed` (β) and a scale
/// α chosen so that the mode `α((β−1)/(β+1))^{1/β}` sits at `peak_period`.
/// The curve is rescaled so that its value at the mode is `max_mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgingCurve {
    peak_period: f64,
    max_mean: f64,
    speed: f64,
    scale: f64,
}

impl AgingCurve {
    pub fn new(peak_period: f64, max_mean: f64, speed: f64) -> Result<Self> {
        if !(peak_period.is_finite() && peak_period > 0.0) {
            return Err(Error::config(format!(
                "citation peak period must be positive, got {peak_period}"
            )));
        }
        if !(max_mean.is_finite() && max_mean >= 0.0) {
            return Err(Error::config(format!(
                "maximum expected citations must be nonnegative, got {max_mean}"
            )));
        }
        if !(speed.is_finite() && speed > 1.0) {
            return Err(Error::config(format!(
                "aging curve speed must exceed 1 for an interior peak, got {speed}"
            )));
        }
        let scale = peak_period / ((speed - 1.0) / (speed + 1.0)).powf(1.0 / speed);
        Ok(AgingCurve {
            peak_period,
            max_mean,
            speed,
            scale,
        })
    }

    pub fn peak_period(&self) -> f64 {
        self.peak_period
    }

    pub fn max_mean(&self) -> f64 {
        self.max_mean
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Log-logistic scale α.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Curve value at a continuous age `t > 0`.
    pub fn value_at(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0, "age must be positive");
        let beta = self.speed;
        let x = t / self.scale;
        let x_peak = self.peak_period / self.scale;
        let ratio = (x / x_peak).powf(beta - 1.0);
        let damping = (1.0 + x_peak.powf(beta)) / (1.0 + x.powf(beta));
        self.max_mean * ratio * damping * damping
    }

    /// Expected citations received by a paper during the period in which it
    /// is `age` periods old.
    ///
    /// Panics if `age` is zero.
    pub fn expected_citations(&self, age: u32) -> f64 {
        assert!(age >= 1, "expected_citations requires age >= 1");
        self.value_at(f64::from(age))
    }
}

/// Citation draw model: a count family whose mean follows an [`AgingCurve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CitationModel {
    pub kind: CountKind,
    pub curve: AgingCurve,
}

impl CitationModel {
    pub fn new(kind: CountKind, curve: AgingCurve) -> Result<Self> {
        kind.validate()?;
        Ok(CitationModel { kind, curve })
    }

    pub fn distribution_for_age(&self, age: u32) -> CountDistribution {
        CountDistribution {
            kind: self.kind,
            mean: self.curve.expected_citations(age),
        }
    }

    pub fn sample_for_age<R: Rng + ?Sized>(&self, age: u32, rng: &mut R) -> u64 {
        self.distribution_for_age(age).sample(rng)
    }
}

/// Draws the citations a paper receives in the period it is `age` periods old.
pub fn sample_citations_for_age<R: Rng + ?Sized>(
    age: u32,
    curve: &AgingCurve,
    kind: CountKind,
    rng: &mut R,
) -> u64 {
    CitationModel { kind, curve: *curve }.sample_for_age(age, rng)
}
